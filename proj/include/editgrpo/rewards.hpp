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

// Editing-oriented rollout rewards.
//
//   r_wer     = exp(-k_w * w^alpha)
//   r_sim     = cos(Emb(Y_ori), Emb(Y_hat))
//   r_mcd     = exp(-k_m * max(m - delta, 0))
//   r_wer_mcd = r_wer * ((1 - gamma) + gamma * r_mcd)
//   r         = lambda_c * r_wer_mcd + lambda_s * r_sim,  lambda_c + lambda_s = 1
//
// w is the WER of the recognized rollout against the target text, m the
// DTW-aligned MCD between original and generated speech restricted to the
// unedited words, and (lambda_c, lambda_s) follows a step-indexed schedule.

#ifndef EDITGRPO_REWARDS_HPP_
#define EDITGRPO_REWARDS_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "editgrpo/common.hpp"
#include "editgrpo/dsp.hpp"
#include "editgrpo/synthenv.hpp"
#include "editgrpo/textedit.hpp"
#include "editgrpo/wer.hpp"

namespace editgrpo {

/// Weights in force from start_step (inclusive) until the next phase starts.
struct LambdaPhase {
  std::size_t start_step = 0;
  double lambda_c = 1.0;
  double lambda_s = 0.0;

  bool operator==(const LambdaPhase&) const = default;
};

struct RewardConfig {
  double k_w = 12.0;
  double alpha = 1.5;
  double k_m = 0.2;
  double delta = 2.0;
  double gamma = 0.5;
  std::vector<LambdaPhase> lambda_schedule = {{0, 0.9, 0.1}, {290, 0.8, 0.2}};

  void validate() const {
    if (!(k_w > 0.0) || !(alpha > 0.0) || !(k_m > 0.0))
      throw InvalidInput("reward config: k_w, alpha and k_m must be positive");
    if (!(delta >= 0.0)) throw InvalidInput("reward config: delta must be >= 0");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("reward config: gamma must lie in [0, 1]");
    if (lambda_schedule.empty()) throw InvalidInput("reward config: empty lambda schedule");
    for (std::size_t i = 0; i < lambda_schedule.size(); ++i) {
      const auto& p = lambda_schedule[i];
      if (p.lambda_c < 0.0 || p.lambda_s < 0.0 || std::abs(p.lambda_c + p.lambda_s - 1.0) > 1e-9)
        throw InvalidInput("reward config: every phase needs lambda_c, lambda_s >= 0 summing to 1");
      if (i > 0 && p.start_step <= lambda_schedule[i - 1].start_step)
        throw InvalidInput("reward config: schedule thresholds must be strictly increasing");
    }
  }
};

struct RewardBreakdown {
  double w = 0.0;
  double s = 0.0;
  std::optional<double> m;  // absent when no word survives the edit
  double r_wer = 0.0;
  double r_mcd = 0.0;
  double r_sim = 0.0;
  double r_wer_mcd = 0.0;
  double r_total = 0.0;
  double lambda_c = 0.0;
  double lambda_s = 0.0;
};

inline double r_wer(double w, const RewardConfig& cfg) {
  if (!(w >= 0.0)) throw InvalidInput("r_wer: WER must be >= 0");
  return std::exp(-cfg.k_w * std::pow(w, cfg.alpha));
}

inline double r_sim(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw InvalidInput("r_sim: embedding sizes differ");
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw InvalidInput("r_sim: zero embedding");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

inline double r_mcd(std::optional<double> m, const RewardConfig& cfg) {
  if (!m) return 1.0;
  if (!(*m >= 0.0)) throw InvalidInput("r_mcd: MCD must be >= 0");
  return std::exp(-cfg.k_m * std::max(*m - cfg.delta, 0.0));
}

inline double combine_wer_mcd(double rw, double rm, double gamma) {
  return rw * ((1.0 - gamma) + gamma * rm);
}

inline double total_reward(double r_wer_mcd, double r_sim_value, double lambda_c, double lambda_s) {
  if (std::abs(lambda_c + lambda_s - 1.0) > 1e-9)
    throw InvalidInput("total_reward: lambda_c + lambda_s must equal 1");
  return lambda_c * r_wer_mcd + lambda_s * r_sim_value;
}

/// The phase containing `step`; a phase's start step belongs to it, so each
/// threshold is the exclusive end of the previous phase.
inline std::pair<double, double> schedule_lambdas(std::size_t step, const RewardConfig& cfg) {
  if (cfg.lambda_schedule.empty()) throw InvalidInput("schedule_lambdas: empty schedule");
  const LambdaPhase* current = &cfg.lambda_schedule.front();
  for (const auto& p : cfg.lambda_schedule)
    if (step >= p.start_step) current = &p;
  return {current->lambda_c, current->lambda_s};
}

/// Scores rollouts for one prompt. The original waveform and its speaker
/// embedding are computed once; score() is const and safe to call from
/// several threads.
class PromptScorer {
 public:
  PromptScorer(const EditPrompt& prompt, const Environment& env)
      : prompt_(&prompt), env_(&env) {
    if (prompt.x_tar.empty()) throw InvalidInput("PromptScorer: empty target text");
    original_ = decode(prompt.tokens_ori, prompt.speaker_id, env.spec, prompt.seed);
    MelAnalyzer analyzer(env.cepstrum, env.spec.sample_rate);
    original_embedding_ = analyzer.speaker_embedding(original_);
  }

  const Waveform& original() const { return original_; }

  /// Rollouts decode with a prompt-derived seed so identical token sequences
  /// always get identical rewards.
  std::uint64_t rollout_seed() const { return derive_seed(prompt_->seed, "rollout"); }

  RewardBreakdown score(std::span<const Token> tokens, const RewardConfig& cfg, std::size_t step) const {
    const EditPrompt& p = *prompt_;
    const SynthSpec& spec = env_->spec;
    RewardBreakdown r;

    const Waveform generated = decode(tokens, p.speaker_id, spec, rollout_seed());
    const std::vector<Token> hyp_tokens = oracle_asr_tokens(generated, spec);
    const Transcript hyp = decode_words(hyp_tokens, spec.lexicon());
    r.w = wer(p.x_tar, hyp);

    MelAnalyzer analyzer(env_->cepstrum, spec.sample_rate);
    // Nothing to compare against when the rollout is shorter than one frame.
    r.s = generated.size() >= env_->cepstrum.frame_length
              ? r_sim(original_embedding_, analyzer.speaker_embedding(generated))
              : 0.0;

    // Unedited words shared by original and generated speech: kept pairs of
    // the prompt alignment whose target word the rollout actually realized.
    const auto tar_to_hyp = lcs_pairs(p.x_tar.words, hyp.words);
    std::vector<std::size_t> hyp_of_tar(p.x_tar.size(), SIZE_MAX);
    for (const auto& [t, h] : tar_to_hyp) hyp_of_tar[t] = h;
    std::vector<std::pair<std::size_t, std::size_t>> shared;
    for (const auto& [i, t] : p.alignment.kept_pairs)
      if (t < hyp_of_tar.size() && hyp_of_tar[t] != SIZE_MAX) shared.emplace_back(i, hyp_of_tar[t]);

    if (!shared.empty()) {
      const EditAlignment omega = alignment_from_pairs(std::move(shared), p.x_ori.size(), hyp.size());
      const KeptTimeSpans spans = token_time_spans(p.x_ori.size(), hyp.size(), omega, spec);
      const Waveform ori_region = extract_region(original_, spans.ori);
      const Waveform gen_region = extract_region(generated, spans.tar);
      r.m = mcd(analyzer.cepstra(ori_region), analyzer.cepstra(gen_region));
    }

    r.r_wer = r_wer(r.w, cfg);
    r.r_mcd = r_mcd(r.m, cfg);
    r.r_sim = r.s;
    r.r_wer_mcd = combine_wer_mcd(r.r_wer, r.r_mcd, cfg.gamma);
    std::tie(r.lambda_c, r.lambda_s) = schedule_lambdas(step, cfg);
    r.r_total = total_reward(r.r_wer_mcd, r.r_sim, r.lambda_c, r.lambda_s);
    return r;
  }

 private:
  const EditPrompt* prompt_;
  const Environment* env_;
  Waveform original_;
  Eigen::VectorXd original_embedding_;
};

inline RewardBreakdown score_rollout(const EditPrompt& prompt, std::span<const Token> tokens,
                                     const Environment& env, const RewardConfig& cfg, std::size_t step) {
  return PromptScorer(prompt, env).score(tokens, cfg, step);
}

}  // namespace editgrpo

#endif  // EDITGRPO_REWARDS_HPP_
