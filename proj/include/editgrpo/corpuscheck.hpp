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

#ifndef EDITGRPO_CORPUSCHECK_HPP_
#define EDITGRPO_CORPUSCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "editgrpo/common.hpp"
#include "editgrpo/policy.hpp"
#include "editgrpo/rewards.hpp"
#include "editgrpo/synthenv.hpp"

namespace editgrpo {

struct EvalRow {
  std::size_t index = 0;
  std::vector<Token> tokens;
  RewardBreakdown reward;
};

struct EvalReport {
  std::size_t n_prompts = 0;
  double mean_wer = 0.0;
  double median_wer = 0.0;
  double mean_mcd = std::numeric_limits<double>::quiet_NaN();  // over prompts with a shared region
  std::size_t n_mcd = 0;
  double mean_sim = 0.0;
  double mean_reward = 0.0;
  std::vector<EvalRow> rows;
};

/// Fills the aggregates from rows.
inline void summarize(EvalReport& rep) {
  rep.n_prompts = rep.rows.size();
  rep.mean_wer = rep.mean_sim = rep.mean_reward = 0.0;
  rep.mean_mcd = std::numeric_limits<double>::quiet_NaN();
  rep.n_mcd = 0;
  if (rep.rows.empty()) return;
  std::vector<double> wers;
  double mcd_sum = 0.0;
  for (const auto& r : rep.rows) {
    wers.push_back(r.reward.w);
    rep.mean_wer += r.reward.w;
    rep.mean_sim += r.reward.s;
    rep.mean_reward += r.reward.r_total;
    if (r.reward.m) {
      mcd_sum += *r.reward.m;
      ++rep.n_mcd;
    }
  }
  const auto n = static_cast<double>(rep.rows.size());
  rep.mean_wer /= n;
  rep.mean_sim /= n;
  rep.mean_reward /= n;
  if (rep.n_mcd) rep.mean_mcd = mcd_sum / static_cast<double>(rep.n_mcd);
  std::sort(wers.begin(), wers.end());
  const std::size_t mid = wers.size() / 2;
  rep.median_wer = wers.size() % 2 ? wers[mid] : 0.5 * (wers[mid - 1] + wers[mid]);
}

using TokenGenerator = std::function<std::vector<Token>(const EditPrompt&)>;

/// Scores whatever `generate` emits for each prompt, using the last phase of
/// the lambda schedule.
inline EvalReport evaluate_with(const TokenGenerator& generate, std::span<const EditPrompt> prompts,
                                const Environment& env, const RewardConfig& cfg, std::size_t threads = 1) {
  env.validate();
  cfg.validate();
  const std::size_t final_step = cfg.lambda_schedule.back().start_step;
  EvalReport rep;
  rep.rows.resize(prompts.size());
  parallel_for(prompts.size(), threads, [&](std::size_t i) {
    EvalRow& row = rep.rows[i];
    row.index = i;
    row.tokens = generate(prompts[i]);
    row.reward = score_rollout(prompts[i], row.tokens, env, cfg, final_step);
  });
  summarize(rep);
  return rep;
}

/// Greedy-decodes a checkpoint on held-out prompts and scores the output.
inline EvalReport evaluate(const PolicyParams& params, std::span<const EditPrompt> prompts, const Environment& env,
                           const RewardConfig& cfg, std::size_t max_len, std::size_t threads = 1) {
  if (params.shape.vocab_size != env.spec.vocab_size)
    throw StartupError("evaluate: checkpoint vocab (" + std::to_string(params.shape.vocab_size) +
                       ") does not match the environment (" + std::to_string(env.spec.vocab_size) + ")");
  return evaluate_with(
      [&](const EditPrompt& p) {
        return greedy_decode(params, encode_prompt(p, params.shape), max_len).speech_tokens();
      },
      prompts, env, cfg, threads);
}

/// Emits the exact target tokens; the best any policy can do.
inline EvalReport evaluate_oracle(std::span<const EditPrompt> prompts, const Environment& env,
                                  const RewardConfig& cfg, std::size_t threads = 1) {
  const auto lex = env.lexicon();
  return evaluate_with([&](const EditPrompt& p) { return encode_words(p.x_tar, lex); }, prompts, env, cfg,
                       threads);
}

}  // namespace editgrpo

#endif  // EDITGRPO_CORPUSCHECK_HPP_
