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

// Group-relative policy optimization over editing prompts.
//
// Each step snapshots the actor as the rollout policy, samples G rollouts per
// prompt, scores them, normalizes rewards within each group
//
//   A_i = (r_i - mean(r)) / (std(r) + eps)      (population std)
//
// and ascends
//
//   J = mean_prompts (1/G) sum_i (1/T_i) sum_t min(rho A_i, clip(rho) A_i)
//       - beta * KL(pi_theta || pi_ref)
//
// with Adam. Only the actor changes; the reference policy and the environment
// are read-only.

#ifndef EDITGRPO_GRPO_HPP_
#define EDITGRPO_GRPO_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "editgrpo/common.hpp"
#include "editgrpo/objective.hpp"
#include "editgrpo/policy.hpp"
#include "editgrpo/rewards.hpp"
#include "editgrpo/synthenv.hpp"
#include "editgrpo/textedit.hpp"

namespace editgrpo {

struct GrpoConfig {
  std::size_t group_size = 4;
  double clip_eps = 0.2;
  double kl_coeff = 0.001;
  double adv_eps = 1e-8;
  double learning_rate = 1e-3;
  std::size_t steps = 380;
  std::size_t batch_prompts = 8;
  std::size_t update_epochs = 1;
  std::uint64_t seed = 1;
  SamplingConfig sampling;
  RewardConfig reward;

  void validate() const {
    if (group_size < 2) throw InvalidInput("grpo config: group_size must be >= 2");
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw InvalidInput("grpo config: clip_eps must lie in (0, 1)");
    if (!(kl_coeff >= 0.0)) throw InvalidInput("grpo config: kl_coeff must be >= 0");
    if (!(adv_eps > 0.0)) throw InvalidInput("grpo config: adv_eps must be > 0");
    if (!(learning_rate >= 0.0)) throw InvalidInput("grpo config: learning_rate must be >= 0");
    if (batch_prompts == 0) throw InvalidInput("grpo config: batch_prompts must be >= 1");
    if (update_epochs == 0) throw InvalidInput("grpo config: update_epochs must be >= 1");
    sampling.validate();
    reward.validate();
  }
};

inline std::vector<double> group_advantages(std::span<const double> rewards, double eps) {
  if (rewards.size() < 2) throw InvalidInput("group_advantages: need at least two rewards");
  const auto g = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / g;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / g);
  std::vector<double> adv;
  adv.reserve(rewards.size());
  for (double r : rewards) adv.push_back((r - mean) / (sd + eps));
  return adv;
}

struct Rollout {
  SampledSequence sample;
  RewardBreakdown reward;
  double advantage = 0.0;
  std::vector<Eigen::VectorXd> ref_log_probs;
};

struct GroupBatch {
  const EditPrompt* prompt = nullptr;
  std::size_t prompt_index = 0;
  PromptEncoding encoding;
  std::vector<Rollout> rollouts;
};

/// Samples and scores G rollouts per prompt from `rollout_policy` and fills
/// in group advantages and reference log-distributions. Every (prompt,
/// rollout) pair has its own seed, so results do not depend on `threads`.
inline std::vector<GroupBatch> collect_groups(const PolicyParams& rollout_policy, const PolicyParams& reference,
                                              std::span<const EditPrompt> prompts,
                                              std::span<const std::size_t> prompt_indices, const Environment& env,
                                              const GrpoConfig& cfg, std::size_t step, std::size_t threads) {
  const std::size_t G = cfg.group_size;
  std::vector<GroupBatch> groups(prompt_indices.size());
  std::vector<std::optional<PromptScorer>> scorers(prompt_indices.size());
  parallel_for(prompt_indices.size(), threads, [&](std::size_t b) {
    const EditPrompt& p = prompts[prompt_indices[b]];
    groups[b].prompt = &p;
    groups[b].prompt_index = prompt_indices[b];
    groups[b].encoding = encode_prompt(p, rollout_policy.shape);
    groups[b].rollouts.resize(G);
    scorers[b].emplace(p, env);
  });

  const std::uint64_t step_seed = derive_seed(cfg.seed, "grpo-step", step);
  parallel_for(prompt_indices.size() * G, threads, [&](std::size_t job) {
    const std::size_t b = job / G, i = job % G;
    GroupBatch& g = groups[b];
    Rng rng(derive_seed(derive_seed(step_seed, "prompt", b), "rollout", i));
    Rollout& r = g.rollouts[i];
    r.sample = sample_sequence(rollout_policy, g.encoding, cfg.sampling, rng);
    try {
      r.reward = scorers[b]->score(r.sample.speech_tokens(), cfg.reward, step);
    } catch (const Error& e) {
      throw Error("scoring prompt " + std::to_string(g.prompt_index) + " ('" + g.prompt->x_tar.text() +
                  "'): " + e.what());
    }
    r.ref_log_probs = position_log_probs(reference, g.encoding, r.sample.actions);
  });

  for (auto& g : groups) {
    std::vector<double> rewards;
    for (const auto& r : g.rollouts) rewards.push_back(r.reward.r_total);
    const auto adv = group_advantages(rewards, cfg.adv_eps);
    for (std::size_t i = 0; i < G; ++i) g.rollouts[i].advantage = adv[i];
  }
  return groups;
}

struct ObjectiveResult {
  double objective = 0.0;
  double mean_kl = 0.0;
  std::size_t clipped = 0;
  std::size_t tokens = 0;
  PolicyParams grad;  // dJ/dtheta (ascent direction)
};

/// J and its gradient at `params` over a set of groups, averaging over prompts
/// and over rollouts within a group.
inline ObjectiveResult objective_and_gradient(const PolicyParams& params, std::span<const GroupBatch> groups,
                                              double clip_eps, double beta, std::size_t threads = 1) {
  ObjectiveResult out{0.0, 0.0, 0, 0, PolicyParams::zeros(params.shape)};
  if (groups.empty()) return out;
  std::vector<PolicyParams> partial(groups.size(), PolicyParams::zeros(params.shape));
  std::vector<SurrogateStats> stats(groups.size());
  const double group_weight = 1.0 / static_cast<double>(groups.size());
  parallel_for(groups.size(), threads, [&](std::size_t b) {
    const GroupBatch& g = groups[b];
    const double w = group_weight / static_cast<double>(g.rollouts.size());
    for (const Rollout& r : g.rollouts) {
      SurrogateInputs in{&g.encoding, r.sample.actions, r.advantage, r.sample.log_probs, r.ref_log_probs};
      const SurrogateStats s = surrogate_grad(params, in, clip_eps, beta, w, &partial[b]);
      stats[b].objective += w * s.objective;
      stats[b].mean_kl += w * s.mean_kl;
      stats[b].clipped += s.clipped;
      stats[b].tokens += s.tokens;
    }
  });
  for (std::size_t b = 0; b < groups.size(); ++b) {
    axpy(out.grad, 1.0, partial[b]);
    out.objective += stats[b].objective;
    out.mean_kl += stats[b].mean_kl;
    out.clipped += stats[b].clipped;
    out.tokens += stats[b].tokens;
  }
  return out;
}

struct StepMetrics {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double mean_wer = 0.0;
  double mean_mcd = std::numeric_limits<double>::quiet_NaN();  // NaN when no rollout had a shared region
  double mean_sim = 0.0;
  double mean_kl = 0.0;
  double clip_frac = 0.0;
  double lambda_c = 0.0;
  double lambda_s = 0.0;
  double objective = 0.0;
};

struct StepResult {
  StepMetrics metrics;
  std::vector<GroupBatch> groups;
};

/// One optimization step on a batch of prompts. The actor is snapshotted as
/// the rollout policy, then updated update_epochs times with Adam.
inline StepResult grpo_step(PolicyParams& actor, AdamState& adam, const PolicyParams& reference,
                            std::span<const EditPrompt> prompts, std::span<const std::size_t> batch,
                            const Environment& env, const GrpoConfig& cfg, std::size_t step,
                            std::size_t threads = 1) {
  const PolicyParams rollout_policy = actor;
  StepResult res;
  res.groups = collect_groups(rollout_policy, reference, prompts, batch, env, cfg, step, threads);

  StepMetrics& m = res.metrics;
  m.step = step;
  std::tie(m.lambda_c, m.lambda_s) = schedule_lambdas(step, cfg.reward);
  std::size_t n = 0, n_mcd = 0;
  double mcd_sum = 0.0;
  for (const auto& g : res.groups)
    for (const auto& r : g.rollouts) {
      m.mean_reward += r.reward.r_total;
      m.mean_wer += r.reward.w;
      m.mean_sim += r.reward.s;
      if (r.reward.m) {
        mcd_sum += *r.reward.m;
        ++n_mcd;
      }
      ++n;
    }
  m.mean_reward /= static_cast<double>(n);
  m.mean_wer /= static_cast<double>(n);
  m.mean_sim /= static_cast<double>(n);
  if (n_mcd > 0) m.mean_mcd = mcd_sum / static_cast<double>(n_mcd);

  std::size_t clipped = 0, tokens = 0;
  for (std::size_t e = 0; e < cfg.update_epochs; ++e) {
    ObjectiveResult obj = objective_and_gradient(actor, res.groups, cfg.clip_eps, cfg.kl_coeff, threads);
    if (e == 0) {
      m.mean_kl = obj.mean_kl;
      m.objective = obj.objective;
    }
    clipped += obj.clipped;
    tokens += obj.tokens;
    obj.grad.token_embeddings *= -1.0;
    obj.grad.context_weights *= -1.0;
    obj.grad.hidden_bias *= -1.0;
    obj.grad.output_projection *= -1.0;
    obj.grad.output_bias *= -1.0;
    adam.step(actor, obj.grad, cfg.learning_rate);
  }
  m.clip_frac = tokens ? static_cast<double>(clipped) / static_cast<double>(tokens) : 0.0;
  if (!all_finite(actor)) throw Error("grpo_step: parameters became non-finite at step " + std::to_string(step));
  return res;
}

struct RolloutRecord {
  std::size_t step = 0;
  std::size_t prompt_index = 0;
  std::size_t rollout = 0;
  RewardBreakdown reward;
};

struct TrainResult {
  PolicyParams params;
  std::vector<StepMetrics> metrics;
  std::vector<RolloutRecord> rollouts;
};

/// Runs cfg.steps GRPO steps starting from the reference. Prompts are visited
/// in seeded shuffled order, batch_prompts at a time. `on_step` (optional) is
/// called after every step.
inline TrainResult train(const GrpoConfig& cfg, std::span<const EditPrompt> prompts, const PolicyParams& reference,
                         const Environment& env, std::size_t threads = 1,
                         const std::function<void(const StepMetrics&)>& on_step = {}) {
  cfg.validate();
  env.validate();
  if (prompts.empty()) throw InvalidInput("train: no prompts");
  if (reference.shape.vocab_size != env.spec.vocab_size)
    throw StartupError("train: reference vocab (" + std::to_string(reference.shape.vocab_size) +
                       ") does not match the environment (" + std::to_string(env.spec.vocab_size) + ")");

  TrainResult res{reference, {}, {}};
  AdamState adam(reference.shape);
  std::vector<std::size_t> order(prompts.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size(), epoch = 0;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    std::vector<std::size_t> batch;
    for (std::size_t k = 0; k < std::min(cfg.batch_prompts, prompts.size()); ++k) {
      if (cursor == order.size()) {
        Rng shuffle(derive_seed(cfg.seed, "shuffle", epoch++));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }
    StepResult sr = grpo_step(res.params, adam, reference, prompts, batch, env, cfg, step, threads);
    for (const auto& g : sr.groups)
      for (std::size_t i = 0; i < g.rollouts.size(); ++i)
        res.rollouts.push_back({step, g.prompt_index, i, g.rollouts[i].reward});
    res.metrics.push_back(sr.metrics);
    if (on_step) on_step(sr.metrics);
  }
  return res;
}

}  // namespace editgrpo

#endif  // EDITGRPO_GRPO_HPP_
