// Copyright 2026 The editgrpo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "editgrpo/policy.hpp"
#include "oracles.hpp"

namespace editgrpo {
namespace {

EditPrompt make_prompt(std::uint64_t seed) {
  const SynthSpec spec;
  const auto lex = spec.lexicon();
  const auto corpus = make_corpus(1, spec, seed);
  Rng rng(seed);
  return synth_prompt(corpus[0].transcript, corpus[0].tokens, corpus[0].speaker_id, corpus[0].seed, rng, lex);
}

const ModelShape kShape{16, 8};

TEST(PromptEncoding, Layout) {
  const auto p = make_prompt(3);
  const auto e = encode_prompt(p, kShape);
  ASSERT_EQ(e.sequence.size(), 2 + 2 * p.x_ori.size() + p.x_tar.size());
  EXPECT_EQ(e.sequence.front(), kShape.start());
  EXPECT_EQ(e.sequence.back(), kShape.turn());
  EXPECT_EQ(std::count(e.sequence.begin(), e.sequence.end(), kShape.turn()), 1);
  for (std::size_t i = 0; i < p.x_ori.size(); ++i) EXPECT_EQ(e.ori_speech(i), p.tokens_ori[i]);
}

TEST(NextDistribution, NormalizedAndUniformAtZero) {
  const auto e = encode_prompt(make_prompt(1), kShape);
  const auto params = PolicyParams::random_init(kShape, 3);
  Rng rng(2);
  std::vector<Token> prefix;
  for (int t = 0; t < 10; ++t) {
    const auto d = next_distribution(params, context_window(e, prefix));
    EXPECT_NEAR(d.sum(), 1.0, 1e-9);
    EXPECT_TRUE((d.array() > 0.0).all());
    prefix.push_back(static_cast<Token>(rng.below(kShape.vocab_size)));
  }
  const auto u = next_distribution(PolicyParams::zeros(kShape), context_window(e, {}));
  for (Eigen::Index i = 0; i < u.size(); ++i) EXPECT_DOUBLE_EQ(u(i), 1.0 / static_cast<double>(kShape.n_outputs()));
}

TEST(Sampling, TopKOneIsGreedy) {
  const auto e = encode_prompt(make_prompt(2), kShape);
  const auto params = PolicyParams::random_init(kShape, 5);
  SamplingConfig cfg;
  cfg.top_k = 1;
  Rng a(1), b(2);
  const auto sa = sample_sequence(params, e, cfg, a), sb = sample_sequence(params, e, cfg, b);
  EXPECT_EQ(sa.actions, sb.actions);
  std::vector<Token> prefix;
  for (Token t : sa.actions) {
    Eigen::Index argmax;
    next_distribution(params, context_window(e, prefix)).maxCoeff(&argmax);
    EXPECT_EQ(t, argmax);
    prefix.push_back(t);
  }
}

TEST(Sampling, FrequenciesMatchDistribution) {
  const auto e = encode_prompt(make_prompt(4), kShape);
  auto params = PolicyParams::random_init(kShape, 8);
  params.output_bias.setLinSpaced(-1.0, 1.0);
  const auto d = next_distribution(params, context_window(e, {}));
  SamplingConfig cfg;
  cfg.temperature = 1.0;
  cfg.top_p = 1.0;
  cfg.top_k = kShape.n_outputs();
  Rng rng(17);
  const int n = 10000;
  std::vector<int> counts(d.size(), 0);
  const auto lp = Eigen::VectorXd(d.array().log());
  for (int i = 0; i < n; ++i) ++counts[sample_truncated(lp, cfg, rng)];
  double chi2 = 0.0;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    const double expect = n * d(k);
    chi2 += (counts[k] - expect) * (counts[k] - expect) / expect;
    // Per-bin 3-sigma band.
    EXPECT_LE(std::abs(counts[k] - expect), 3.0 * std::sqrt(n * d(k) * (1.0 - d(k))) + 1.0);
  }
  // 16 degrees of freedom: the 0.999 quantile is about 39.25.
  EXPECT_LT(chi2, 39.25);
}

TEST(Sampling, SeededAndStoredLogProbs) {
  const auto e = encode_prompt(make_prompt(5), kShape);
  const auto params = PolicyParams::random_init(kShape, 9);
  const SamplingConfig cfg;
  Rng a(3), b(3);
  const auto sa = sample_sequence(params, e, cfg, a), sb = sample_sequence(params, e, cfg, b);
  EXPECT_EQ(sa.actions, sb.actions);
  EXPECT_EQ(sa.log_probs, sb.log_probs);
  const auto lp = sequence_log_prob(params, e, sa.actions);
  ASSERT_EQ(lp.per_token.size(), sa.log_probs.size());
  for (std::size_t t = 0; t < lp.per_token.size(); ++t) EXPECT_EQ(lp.per_token[t], sa.log_probs[t]);
  EXPECT_LE(lp.total, 0.0);
  EXPECT_TRUE(std::isfinite(lp.total));
  EXPECT_LE(sa.actions.size(), cfg.max_len);
}

TEST(SequenceLogProb, UniformAndStepwise) {
  const auto e = encode_prompt(make_prompt(6), kShape);
  const std::vector<Token> seq = {1, 2, 3, 4, 5};
  const auto u = sequence_log_prob(PolicyParams::zeros(kShape), e, seq);
  EXPECT_NEAR(u.total, -5.0 * std::log(static_cast<double>(kShape.n_outputs())), 1e-12);

  const auto params = PolicyParams::random_init(kShape, 1);
  const auto a = sequence_log_prob(params, e, seq);
  EXPECT_EQ(a.total, sequence_log_prob(params, e, seq).total);
  double sum = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t)
    sum += std::log(next_distribution(params, context_window(e, std::span(seq).first(t)))(seq[t]));
  EXPECT_NEAR(a.total, sum, 1e-12);

  EXPECT_THROW(sequence_log_prob(params, e, std::vector<Token>{17}), InvalidInput);
  EXPECT_THROW(sequence_log_prob(params, e, std::vector<Token>{16, 1}), InvalidInput);
}

std::vector<TrainingExample> examples(std::size_t n) {
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = make_prompt(100 + i);
    out.push_back({encode_prompt(p, kShape), target_actions(p, kShape)});
  }
  return out;
}

TEST(Nll, UniformLossIsLogV) {
  const auto ex = examples(4);
  EXPECT_NEAR(nll_loss_and_grad(PolicyParams::zeros(kShape), ex).loss,
              std::log(static_cast<double>(kShape.n_outputs())), 1e-12);
  EXPECT_THROW(nll_loss_and_grad(PolicyParams::zeros(kShape), std::vector<TrainingExample>{}), InvalidInput);
}

TEST(Nll, GradientMatchesFiniteDifferences) {
  const auto ex = examples(3);
  const auto params = PolicyParams::random_init(kShape, 21);
  const auto lg = nll_loss_and_grad(params, ex);
  const double err = testing_oracles::fd_max_rel_error(
      params, lg.grad, [&](const PolicyParams& q) { return nll_loss_and_grad(q, ex).loss; }, 20, 5);
  EXPECT_LT(err, 1e-4);
}

TEST(Nll, MemorizesSingleSequence) {
  const auto ex = examples(1);
  auto params = PolicyParams::random_init(kShape, 2);
  PretrainConfig cfg;
  cfg.steps = 300;
  cfg.learning_rate = 3e-2;
  pretrain_nll(params, ex, cfg);
  const auto g = greedy_decode(params, ex[0].prompt, 24);
  EXPECT_EQ(g.actions, ex[0].targets);
  EXPECT_TRUE(g.ended);
}

struct SurrogateFixture : ::testing::Test {
  EditPrompt prompt = make_prompt(7);
  PromptEncoding enc = encode_prompt(prompt, kShape);
  PolicyParams old_params = PolicyParams::random_init(kShape, 31);
  PolicyParams ref = PolicyParams::random_init(kShape, 32);
  SampledSequence sample;
  std::vector<Eigen::VectorXd> ref_lp;

  void SetUp() override {
    Rng rng(4);
    SamplingConfig cfg;
    cfg.max_len = 6;
    sample = sample_sequence(old_params, enc, cfg, rng);
    ref_lp = position_log_probs(ref, enc, sample.actions);
  }
  SurrogateInputs inputs(double adv) const { return {&enc, sample.actions, adv, sample.log_probs, ref_lp}; }
};

TEST_F(SurrogateFixture, GradientMatchesFiniteDifferences) {
  // Move away from the trust-region centre so the ratio is not 1, but stay unclipped.
  PolicyParams p = old_params;
  Rng rng(6);
  for (std::size_t i = 0; i < parameter_count(p); ++i) parameter_at(p, i) += 1e-3 * rng.normal();
  for (double beta : {0.0, 0.5}) {
    PolicyParams g = PolicyParams::zeros(kShape);
    const auto in = inputs(0.7);
    const auto st = surrogate_grad(p, in, 0.2, beta, 1.0, &g);
    EXPECT_EQ(st.clipped, 0u);
    const double err = testing_oracles::fd_max_rel_error(
        p, g, [&](const PolicyParams& q) { return surrogate_grad(q, in, 0.2, beta, 1.0, nullptr).objective; }, 20,
        9);
    EXPECT_LT(err, 1e-4) << "beta " << beta;
  }
}

TEST_F(SurrogateFixture, PolicyGradientIdentityAtCentre) {
  const double adv = 1.3;
  PolicyParams g = PolicyParams::zeros(kShape);
  surrogate_grad(old_params, inputs(adv), 0.2, 0.0, 1.0, &g);
  // A * grad of mean per-token log-prob, by central differences.
  const double inv_t = 1.0 / static_cast<double>(sample.actions.size());
  const double err = testing_oracles::fd_max_rel_error(
      old_params, g,
      [&](const PolicyParams& q) { return adv * inv_t * sequence_log_prob(q, enc, sample.actions).total; }, 20, 10);
  EXPECT_LT(err, 1e-4);
}

TEST_F(SurrogateFixture, ZeroAdvantageZeroGradient) {
  PolicyParams g = PolicyParams::zeros(kShape);
  surrogate_grad(old_params, inputs(0.0), 0.2, 0.0, 1.0, &g);
  EXPECT_EQ(g, PolicyParams::zeros(kShape));
  EXPECT_THROW(surrogate_grad(old_params, inputs(std::nan("")), 0.2, 0.0, 1.0, &g), InvalidInput);
}

TEST_F(SurrogateFixture, ClipInactiveEqualsUnclipped) {
  PolicyParams p = old_params;
  Rng rng(8);
  for (std::size_t i = 0; i < parameter_count(p); ++i) parameter_at(p, i) += 1e-3 * rng.normal();
  const auto in = inputs(-0.4);
  const auto lp = sequence_log_prob(p, enc, sample.actions);
  double unclipped = 0.0;
  for (std::size_t t = 0; t < lp.per_token.size(); ++t) {
    const double rho = std::exp(lp.per_token[t] - sample.log_probs[t]);
    ASSERT_GE(rho, 0.8);
    ASSERT_LE(rho, 1.2);
    EXPECT_EQ(clipped_term(rho, in.advantage, 0.2), rho * in.advantage);
    unclipped += rho * in.advantage;
  }
  unclipped /= static_cast<double>(lp.per_token.size());
  EXPECT_NEAR(surrogate_grad(p, in, 0.2, 0.0, 1.0, nullptr).objective, unclipped, 1e-15);
}

TEST(Adam, ZeroLearningRateLeavesParams) {
  auto p = PolicyParams::random_init(kShape, 1);
  const auto before = p;
  AdamState adam(kShape);
  adam.step(p, PolicyParams::random_init(kShape, 2), 0.0);
  EXPECT_EQ(p, before);
}

}  // namespace
}  // namespace editgrpo
