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

#include "editgrpo/corpuscheck.hpp"
#include "grpo_fixtures.hpp"

namespace editgrpo {
namespace {

using testing_fixtures::make_prompts;

struct EvalFixture : ::testing::Test {
  Environment env;
  RewardConfig cfg;
  std::vector<EditPrompt> prompts = make_prompts(40, env, 11);
  ModelShape shape{env.spec.vocab_size, 8};
};

TEST_F(EvalFixture, OracleIsExactAndBelowNoiseFloor) {
  const auto rep = evaluate_oracle(prompts, env, cfg);
  EXPECT_EQ(rep.mean_wer, 0.0);
  EXPECT_EQ(rep.median_wer, 0.0);
  ASSERT_GT(rep.n_mcd, 0u);
  EXPECT_LT(rep.mean_mcd, cfg.delta);
  for (const auto& row : rep.rows) {
    if (row.reward.m) {
      EXPECT_LT(*row.reward.m, cfg.delta);
    }
  }
}

TEST_F(EvalFixture, AggregatesRecomputeFromRows) {
  const auto rep = evaluate(PolicyParams::random_init(shape, 3), prompts, env, cfg, 24);
  EvalReport copy;
  copy.rows = rep.rows;
  summarize(copy);
  EXPECT_EQ(copy.n_prompts, rep.n_prompts);
  EXPECT_EQ(copy.mean_wer, rep.mean_wer);
  EXPECT_EQ(copy.median_wer, rep.median_wer);
  EXPECT_EQ(copy.mean_sim, rep.mean_sim);
  EXPECT_EQ(copy.mean_reward, rep.mean_reward);
  EXPECT_EQ(copy.n_mcd, rep.n_mcd);
  if (rep.n_mcd) {
    EXPECT_EQ(copy.mean_mcd, rep.mean_mcd);
  }
  double sum = 0.0;
  for (const auto& r : rep.rows) sum += r.reward.w;
  EXPECT_NEAR(sum / rep.rows.size(), rep.mean_wer, 1e-12);
}

TEST_F(EvalFixture, Deterministic) {
  const auto params = PolicyParams::random_init(shape, 4);
  const auto a = evaluate(params, prompts, env, cfg, 24, 1);
  const auto b = evaluate(params, prompts, env, cfg, 24, 2);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].tokens, b.rows[i].tokens);
    EXPECT_EQ(a.rows[i].reward.r_total, b.rows[i].reward.r_total);
  }
}

TEST_F(EvalFixture, OracleDominatesCheckpoints) {
  const auto oracle = evaluate_oracle(prompts, env, cfg);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto rep = evaluate(PolicyParams::random_init(shape, seed), prompts, env, cfg, 24);
    EXPECT_LE(oracle.mean_wer, rep.mean_wer);
    EXPECT_LE(oracle.median_wer, rep.median_wer);
    EXPECT_GE(oracle.mean_reward, rep.mean_reward);
    if (rep.n_mcd) {
      EXPECT_LE(oracle.mean_mcd, rep.mean_mcd);
    }
    EXPECT_GE(oracle.mean_sim, rep.mean_sim);
  }
}

TEST_F(EvalFixture, UniformPolicyNearRandomGuessLevel) {
  // Each prompt's rollout comes from the zero-parameter (uniform) policy.
  const PolicyParams uniform = PolicyParams::zeros(shape);
  SamplingConfig sc;
  sc.temperature = 1.0;
  sc.top_k = shape.n_outputs();
  sc.top_p = 1.0;
  sc.max_len = 24;
  const auto rep = evaluate_with(
      [&](const EditPrompt& p) {
        Rng rng(derive_seed(p.seed, "uniform-eval"));
        return sample_sequence(uniform, encode_prompt(p, shape), sc, rng).speech_tokens();
      },
      prompts, env, cfg);

  // Text-level Monte-Carlo estimate of the same quantity: words drawn
  // uniformly, stopping with probability 1/(V+1) per step.
  const auto lex = env.lexicon();
  Rng rng(77);
  const int draws = 400;
  double mean = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& p : prompts)
    for (int k = 0; k < draws; ++k) {
      std::vector<std::string> words;
      while (words.size() < sc.max_len) {
        const std::size_t a = rng.below(shape.n_outputs());
        if (a == shape.vocab_size) break;
        words.push_back(lex[a]);
      }
      const double w = wer(p.x_tar, Transcript{words});
      mean += w;
      sq += w * w;
      ++n;
    }
  mean /= static_cast<double>(n);
  const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
  // The evaluated mean averages one draw per prompt.
  EXPECT_NEAR(rep.mean_wer, mean, 4.0 * sd / std::sqrt(static_cast<double>(prompts.size())));
}

TEST_F(EvalFixture, RejectsMismatchedCheckpoint) {
  EXPECT_THROW(evaluate(PolicyParams::random_init({8, 8}, 1), prompts, env, cfg, 24), StartupError);
}

}  // namespace
}  // namespace editgrpo
