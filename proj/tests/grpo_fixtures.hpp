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

// Prompt sets and a hand-written REINFORCE gradient shared by the GRPO unit
// tests and the acceptance suite.

#ifndef EDITGRPO_TESTS_GRPO_FIXTURES_HPP_
#define EDITGRPO_TESTS_GRPO_FIXTURES_HPP_

#include <vector>

#include "editgrpo/grpo.hpp"

namespace editgrpo::testing_fixtures {

inline std::vector<EditPrompt> make_prompts(std::size_t n, const Environment& env, std::uint64_t seed) {
  const auto lex = env.lexicon();
  Rng rng(derive_seed(seed, "prompts"));
  std::vector<EditPrompt> out;
  for (const auto& p : make_corpus(n, env.spec, seed))
    out.push_back(synth_prompt(p.transcript, p.tokens, p.speaker_id, p.seed, rng, lex));
  return out;
}

/// (1/B) sum_b (1/G) sum_i A_i grad log pi(a_i) for one-token rollouts,
/// expanded by hand through softmax, output layer, tanh and the context sum.
inline PolicyParams reinforce_gradient(const PolicyParams& p, const std::vector<GroupBatch>& groups) {
  PolicyParams g = PolicyParams::zeros(p.shape);
  const auto d = static_cast<Eigen::Index>(p.shape.d_model);
  for (const auto& grp : groups) {
    const double w = 1.0 / static_cast<double>(groups.size() * grp.rollouts.size());
    for (const auto& r : grp.rollouts) {
      if (r.sample.actions.size() != 1) throw InvalidInput("reinforce_gradient: one-token rollouts only");
      const ContextWindow ctx = context_window(grp.encoding, {});
      Eigen::VectorXd x = p.hidden_bias;
      for (std::size_t k = 0; k < kContextWidth; ++k)
        x += p.context_weights.block(static_cast<Eigen::Index>(k) * d, 0, d, d) *
             p.token_embeddings.row(ctx[k]).transpose();
      const Eigen::VectorXd h = x.array().tanh();
      Eigen::VectorXd logits = p.output_projection.transpose() * h + p.output_bias;
      Eigen::VectorXd prob = (logits.array() - logits.maxCoeff()).exp();
      prob /= prob.sum();
      Eigen::VectorXd dz = -prob;
      dz(r.sample.actions[0]) += 1.0;
      dz *= w * r.advantage;
      g.output_bias += dz;
      g.output_projection += h * dz.transpose();
      const Eigen::VectorXd dx = (p.output_projection * dz).array() * (1.0 - h.array().square());
      g.hidden_bias += dx;
      for (std::size_t k = 0; k < kContextWidth; ++k) {
        const auto rows = static_cast<Eigen::Index>(k) * d;
        g.context_weights.block(rows, 0, d, d) += dx * p.token_embeddings.row(ctx[k]);
        g.token_embeddings.row(ctx[k]) += (p.context_weights.block(rows, 0, d, d).transpose() * dx).transpose();
      }
    }
  }
  return g;
}

}  // namespace editgrpo::testing_fixtures

#endif  // EDITGRPO_TESTS_GRPO_FIXTURES_HPP_
