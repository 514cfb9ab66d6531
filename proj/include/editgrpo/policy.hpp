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

// Small autoregressive speech-token policy with exact log-probabilities and
// hand-written gradients.
//
// Input ids (V = vocab size):
//   [0, V)      speech tokens
//   [V, 2V)     text tokens (word i of the lexicon is text token V + i)
//   2V .. 2V+3  start, turn-of-speech, end, pad markers
// Output ids: [0, V) speech tokens, V = end-of-sequence.
//
// A prompt is laid out as [start, X_ori text, X_tar text, mu_ori, turn]. The
// network reads a fixed window of 8 slots at each generation step t:
//
//   0, 1   the last two tokens of prompt ++ generated prefix
//   2..5   target text at t-1, t, t+1, t+2   (pad before, end marker after)
//   6      original text at t                (pad after the end)
//   7      original speech token at t        (pad after the end)
//
// and computes
//
//   h = tanh(b_h + sum_k C_k E[slot_k]),   logits = O^T h + b_o.

#ifndef EDITGRPO_POLICY_HPP_
#define EDITGRPO_POLICY_HPP_

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "editgrpo/common.hpp"
#include "editgrpo/objective.hpp"
#include "editgrpo/textedit.hpp"
#include "editgrpo/synthenv.hpp"

namespace editgrpo {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kContextWidth = 8;
using ContextWindow = std::array<Token, kContextWidth>;

struct ModelShape {
  std::size_t vocab_size = 16;
  std::size_t d_model = 16;

  std::size_t n_inputs() const { return 2 * vocab_size + 4; }
  std::size_t n_outputs() const { return vocab_size + 1; }
  Token speech(Token k) const { return k; }
  Token text(Token k) const { return static_cast<Token>(vocab_size) + k; }
  Token start() const { return static_cast<Token>(2 * vocab_size); }
  Token turn() const { return static_cast<Token>(2 * vocab_size + 1); }
  Token end() const { return static_cast<Token>(2 * vocab_size + 2); }
  Token pad() const { return static_cast<Token>(2 * vocab_size + 3); }
  Token eos() const { return static_cast<Token>(vocab_size); }

  bool operator==(const ModelShape&) const = default;
};

struct PolicyParams {
  ModelShape shape;
  RowMatrix token_embeddings;   // n_inputs x d
  RowMatrix context_weights;    // (kContextWidth * d) x d; rows [k*d, (k+1)*d) hold slot k
  Eigen::VectorXd hidden_bias;  // d
  RowMatrix output_projection;  // d x n_outputs
  Eigen::VectorXd output_bias;  // n_outputs

  static PolicyParams zeros(const ModelShape& shape) {
    const auto d = static_cast<Eigen::Index>(shape.d_model);
    PolicyParams p;
    p.shape = shape;
    p.token_embeddings = RowMatrix::Zero(static_cast<Eigen::Index>(shape.n_inputs()), d);
    p.context_weights = RowMatrix::Zero(static_cast<Eigen::Index>(kContextWidth) * d, d);
    p.hidden_bias = Eigen::VectorXd::Zero(d);
    p.output_projection = RowMatrix::Zero(d, static_cast<Eigen::Index>(shape.n_outputs()));
    p.output_bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape.n_outputs()));
    return p;
  }

  /// Weights uniform in [-0.1/sqrt(d), 0.1/sqrt(d)], biases zero.
  static PolicyParams random_init(const ModelShape& shape, std::uint64_t seed) {
    PolicyParams p = zeros(shape);
    Rng rng(derive_seed(seed, "policy-init"));
    const double scale = 0.1 / std::sqrt(static_cast<double>(shape.d_model));
    for (RowMatrix* m : {&p.token_embeddings, &p.context_weights, &p.output_projection})
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = scale * (2.0 * rng.uniform() - 1.0);
    return p;
  }

  Eigen::Block<const RowMatrix> slot_weights(std::size_t k) const {
    const auto d = static_cast<Eigen::Index>(shape.d_model);
    return context_weights.block(static_cast<Eigen::Index>(k) * d, 0, d, d);
  }

  bool operator==(const PolicyParams& o) const {
    return shape == o.shape && token_embeddings == o.token_embeddings &&
           context_weights == o.context_weights && hidden_bias == o.hidden_bias &&
           output_projection == o.output_projection && output_bias == o.output_bias;
  }
};

/// Visits every tensor as (name, flat row-major data, shape).
template <typename Params, typename Fn>
void for_each_tensor(Params& p, Fn&& fn) {
  auto mat = [&](std::string_view name, auto& m) {
    fn(name, std::span(m.data(), static_cast<std::size_t>(m.size())),
       std::vector<std::size_t>{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  };
  auto vec = [&](std::string_view name, auto& v) {
    fn(name, std::span(v.data(), static_cast<std::size_t>(v.size())),
       std::vector<std::size_t>{static_cast<std::size_t>(v.size())});
  };
  mat("token_embeddings", p.token_embeddings);
  mat("context_weights", p.context_weights);
  vec("hidden_bias", p.hidden_bias);
  mat("output_projection", p.output_projection);
  vec("output_bias", p.output_bias);
}

inline std::size_t parameter_count(const PolicyParams& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](std::string_view, auto data, const auto&) { n += data.size(); });
  return n;
}

/// Flat view index -> parameter reference, in for_each_tensor order.
inline double& parameter_at(PolicyParams& p, std::size_t index) {
  double* found = nullptr;
  std::size_t offset = 0;
  for_each_tensor(p, [&](std::string_view, std::span<double> data, const auto&) {
    if (!found && index < offset + data.size()) found = &data[index - offset];
    offset += data.size();
  });
  if (!found) throw InvalidInput("parameter index out of range");
  return *found;
}

/// a += scale * b
inline void axpy(PolicyParams& a, double scale, const PolicyParams& b) {
  a.token_embeddings += scale * b.token_embeddings;
  a.context_weights += scale * b.context_weights;
  a.hidden_bias += scale * b.hidden_bias;
  a.output_projection += scale * b.output_projection;
  a.output_bias += scale * b.output_bias;
}

inline double squared_distance(const PolicyParams& a, const PolicyParams& b) {
  return (a.token_embeddings - b.token_embeddings).squaredNorm() +
         (a.context_weights - b.context_weights).squaredNorm() +
         (a.hidden_bias - b.hidden_bias).squaredNorm() +
         (a.output_projection - b.output_projection).squaredNorm() +
         (a.output_bias - b.output_bias).squaredNorm();
}

inline bool all_finite(const PolicyParams& p) {
  bool ok = true;
  for_each_tensor(p, [&](std::string_view, auto data, const auto&) {
    for (double x : data) ok = ok && std::isfinite(x);
  });
  return ok;
}

/// Prompt token sequence [start, X_ori, X_tar, mu_ori, turn] plus the offsets
/// needed to read it by position.
struct PromptEncoding {
  ModelShape shape;
  std::vector<Token> sequence;
  std::size_t n_ori = 0;
  std::size_t n_tar = 0;

  Token ori_text(std::size_t i) const { return sequence[1 + i]; }
  Token tar_text(std::size_t i) const { return sequence[1 + n_ori + i]; }
  Token ori_speech(std::size_t i) const { return sequence[1 + n_ori + n_tar + i]; }
};

inline PromptEncoding encode_prompt(const EditPrompt& prompt, const ModelShape& shape) {
  const auto lex = default_lexicon(shape.vocab_size);
  if (prompt.tokens_ori.size() != prompt.x_ori.size())
    throw InvalidInput("encode_prompt: original tokens and text differ in length");
  PromptEncoding e;
  e.shape = shape;
  e.n_ori = prompt.x_ori.size();
  e.n_tar = prompt.x_tar.size();
  e.sequence.reserve(3 + 2 * e.n_ori + e.n_tar);
  e.sequence.push_back(shape.start());
  for (Token t : encode_words(prompt.x_ori, lex)) e.sequence.push_back(shape.text(t));
  for (Token t : encode_words(prompt.x_tar, lex)) e.sequence.push_back(shape.text(t));
  for (Token t : prompt.tokens_ori) {
    if (t < 0 || static_cast<std::size_t>(t) >= shape.vocab_size)
      throw InvalidInput("encode_prompt: speech token outside vocab");
    e.sequence.push_back(shape.speech(t));
  }
  e.sequence.push_back(shape.turn());
  return e;
}

/// Supervised targets: the target text's speech tokens followed by EOS.
inline std::vector<Token> target_actions(const EditPrompt& prompt, const ModelShape& shape) {
  std::vector<Token> a = encode_words(prompt.x_tar, default_lexicon(shape.vocab_size));
  a.push_back(shape.eos());
  return a;
}

/// Window for the step that follows `prefix` (generated actions, no EOS).
inline ContextWindow context_window(const PromptEncoding& e, std::span<const Token> prefix) {
  const ModelShape& s = e.shape;
  const std::size_t t = prefix.size();
  auto stream_back = [&](std::size_t k) -> Token {  // k = 1 is the last token
    if (k <= prefix.size()) return prefix[prefix.size() - k];
    return e.sequence[e.sequence.size() - (k - prefix.size())];
  };
  auto tar = [&](std::ptrdiff_t i) -> Token {
    if (i < 0) return s.pad();
    if (static_cast<std::size_t>(i) >= e.n_tar) return s.end();
    return e.tar_text(static_cast<std::size_t>(i));
  };
  const auto ti = static_cast<std::ptrdiff_t>(t);
  return {stream_back(2),
          stream_back(1),
          tar(ti - 1),
          tar(ti),
          tar(ti + 1),
          tar(ti + 2),
          t < e.n_ori ? e.ori_text(t) : s.pad(),
          t < e.n_ori ? e.ori_speech(t) : s.pad()};
}

struct StepForward {
  ContextWindow context{};
  Eigen::VectorXd hidden;
  Eigen::VectorXd log_probs;
};

inline StepForward forward(const PolicyParams& p, const ContextWindow& ctx) {
  StepForward f;
  f.context = ctx;
  Eigen::VectorXd x = p.hidden_bias;
  for (std::size_t k = 0; k < kContextWidth; ++k) {
    const Token id = ctx[k];
    if (id < 0 || static_cast<std::size_t>(id) >= p.shape.n_inputs())
      throw InvalidInput("forward: context token out of range");
    x.noalias() += p.slot_weights(k) * p.token_embeddings.row(id).transpose();
  }
  f.hidden = x.array().tanh();
  const Eigen::VectorXd logits = p.output_projection.transpose() * f.hidden + p.output_bias;
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  f.log_probs = logits.array() - lse;
  return f;
}

/// Accumulates the parameter gradient of a scalar whose gradient with respect
/// to this step's logits is `dlogits`.
inline void backward(const PolicyParams& p, const StepForward& f, const Eigen::VectorXd& dlogits,
                     PolicyParams& grad) {
  grad.output_projection.noalias() += f.hidden * dlogits.transpose();
  grad.output_bias += dlogits;
  const Eigen::VectorXd dh = p.output_projection * dlogits;
  const Eigen::VectorXd dx = dh.array() * (1.0 - f.hidden.array().square());
  grad.hidden_bias += dx;
  const auto d = static_cast<Eigen::Index>(p.shape.d_model);
  for (std::size_t k = 0; k < kContextWidth; ++k) {
    const Token id = f.context[k];
    const auto rows = static_cast<Eigen::Index>(k) * d;
    grad.context_weights.block(rows, 0, d, d).noalias() += dx * p.token_embeddings.row(id);
    grad.token_embeddings.row(id).noalias() += (p.slot_weights(k).transpose() * dx).transpose();
  }
}

inline Eigen::VectorXd next_distribution(const PolicyParams& p, const ContextWindow& ctx) {
  return forward(p, ctx).log_probs.array().exp();
}

struct SamplingConfig {
  double temperature = 0.8;
  double top_p = 0.95;
  std::size_t top_k = 25;
  std::size_t max_len = 24;

  void validate() const {
    if (!(temperature > 0.0)) throw InvalidInput("sampling: temperature must be > 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw InvalidInput("sampling: top_p must lie in (0, 1]");
    if (top_k == 0) throw InvalidInput("sampling: top_k must be >= 1");
    if (max_len == 0) throw InvalidInput("sampling: max_len must be >= 1");
  }
};

struct SampledSequence {
  std::vector<Token> actions;     // output ids; the last one is EOS when ended
  std::vector<double> log_probs;  // per action, untruncated temperature-1 policy
  bool ended = false;

  /// Speech tokens to decode (actions without the trailing EOS).
  std::vector<Token> speech_tokens() const {
    std::vector<Token> out(actions.begin(), actions.end() - (ended ? 1 : 0));
    return out;
  }
};

/// Temperature, then top-k, then nucleus truncation; returns the chosen id.
inline Token sample_truncated(const Eigen::VectorXd& log_probs, const SamplingConfig& cfg, Rng& rng) {
  const auto n = static_cast<std::size_t>(log_probs.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return log_probs(static_cast<Eigen::Index>(a)) > log_probs(static_cast<Eigen::Index>(b));
  });
  const std::size_t k = std::min(cfg.top_k, n);
  if (k == 1) return static_cast<Token>(order[0]);

  const double top = log_probs(static_cast<Eigen::Index>(order[0])) / cfg.temperature;
  std::vector<double> w(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    w[i] = std::exp(log_probs(static_cast<Eigen::Index>(order[i])) / cfg.temperature - top);
    total += w[i];
  }
  std::size_t keep = k;
  if (cfg.top_p < 1.0) {
    double cum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      cum += w[i] / total;
      if (cum >= cfg.top_p) {
        keep = i + 1;
        break;
      }
    }
  }
  double kept_total = 0.0;
  for (std::size_t i = 0; i < keep; ++i) kept_total += w[i];
  const double u = rng.uniform() * kept_total;
  double acc = 0.0;
  for (std::size_t i = 0; i < keep; ++i) {
    acc += w[i];
    if (u < acc) return static_cast<Token>(order[i]);
  }
  return static_cast<Token>(order[keep - 1]);
}

inline SampledSequence sample_sequence(const PolicyParams& p, const PromptEncoding& prompt,
                                       const SamplingConfig& cfg, Rng& rng) {
  SampledSequence s;
  const Token eos = p.shape.eos();
  while (s.actions.size() < cfg.max_len) {
    const StepForward f = forward(p, context_window(prompt, s.actions));
    const Token a = sample_truncated(f.log_probs, cfg, rng);
    s.log_probs.push_back(f.log_probs(a));
    if (a == eos) {
      s.actions.push_back(a);
      s.ended = true;
      break;
    }
    s.actions.push_back(a);
  }
  return s;
}

inline SampledSequence greedy_decode(const PolicyParams& p, const PromptEncoding& prompt, std::size_t max_len) {
  SamplingConfig cfg;
  cfg.temperature = 1.0;
  cfg.top_k = 1;
  cfg.top_p = 1.0;
  cfg.max_len = max_len;
  Rng unused(0);
  return sample_sequence(p, prompt, cfg, unused);
}

namespace detail {

inline void check_actions(const ModelShape& shape, std::span<const Token> actions) {
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const Token a = actions[t];
    if (a < 0 || static_cast<std::size_t>(a) >= shape.n_outputs())
      throw InvalidInput("action " + std::to_string(a) + " outside the output vocabulary");
    if (a == shape.eos() && t + 1 != actions.size())
      throw InvalidInput("EOS may only appear as the last action");
  }
}

// Contexts for every position of an action sequence.
inline std::vector<ContextWindow> contexts_for(const PromptEncoding& prompt, std::span<const Token> actions) {
  std::vector<ContextWindow> out;
  out.reserve(actions.size());
  for (std::size_t t = 0; t < actions.size(); ++t) out.push_back(context_window(prompt, actions.first(t)));
  return out;
}

}  // namespace detail

struct SequenceLogProb {
  double total = 0.0;
  std::vector<double> per_token;
};

inline SequenceLogProb sequence_log_prob(const PolicyParams& p, const PromptEncoding& prompt,
                                         std::span<const Token> actions) {
  detail::check_actions(p.shape, actions);
  SequenceLogProb r;
  const auto ctxs = detail::contexts_for(prompt, actions);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const double lp = forward(p, ctxs[t]).log_probs(actions[t]);
    r.per_token.push_back(lp);
    r.total += lp;
  }
  return r;
}

/// Per-position log-distributions (e.g. of the frozen reference) along a
/// sequence.
inline std::vector<Eigen::VectorXd> position_log_probs(const PolicyParams& p, const PromptEncoding& prompt,
                                                       std::span<const Token> actions) {
  detail::check_actions(p.shape, actions);
  std::vector<Eigen::VectorXd> out;
  for (const auto& ctx : detail::contexts_for(prompt, actions)) out.push_back(forward(p, ctx).log_probs);
  return out;
}

struct TrainingExample {
  PromptEncoding prompt;
  std::vector<Token> targets;  // speech tokens + EOS
};

struct LossAndGrad {
  double loss = 0.0;
  PolicyParams grad;
};

/// Mean over sequences of the per-sequence next-token NLL, each sequence
/// normalized by its length including EOS.
inline LossAndGrad nll_loss_and_grad(const PolicyParams& p, std::span<const TrainingExample> batch) {
  if (batch.empty()) throw InvalidInput("nll_loss_and_grad: empty batch");
  LossAndGrad out{0.0, PolicyParams::zeros(p.shape)};
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    if (ex.targets.empty()) throw InvalidInput("nll_loss_and_grad: empty target sequence");
    detail::check_actions(p.shape, ex.targets);
    const double w = inv_b / static_cast<double>(ex.targets.size());
    const auto ctxs = detail::contexts_for(ex.prompt, ex.targets);
    for (std::size_t t = 0; t < ex.targets.size(); ++t) {
      const StepForward f = forward(p, ctxs[t]);
      out.loss -= w * f.log_probs(ex.targets[t]);
      Eigen::VectorXd dlogits = f.log_probs.array().exp();
      dlogits(ex.targets[t]) -= 1.0;
      backward(p, f, w * dlogits, out.grad);
    }
  }
  return out;
}

/// Inputs of one sequence's clipped-surrogate term.
struct SurrogateInputs {
  const PromptEncoding* prompt = nullptr;
  std::span<const Token> actions;
  double advantage = 0.0;
  std::span<const double> old_log_probs;
  std::span<const Eigen::VectorXd> ref_log_probs;
};

struct SurrogateStats {
  double objective = 0.0;  // (1/T) sum_t clipped_t - beta * mean_t KL_t
  double mean_kl = 0.0;
  std::size_t clipped = 0;
  std::size_t tokens = 0;
};

/// Value and (when grad != nullptr) gradient of one sequence's term
///   (1/T) sum_t min(rho_t A, clip(rho_t, 1 +- eps) A) - beta (1/T) sum_t KL_t,
/// accumulated into *grad scaled by `weight`. KL is the exact categorical
/// KL(pi_theta || pi_ref) at each position.
inline SurrogateStats surrogate_grad(const PolicyParams& p, const SurrogateInputs& in, double clip_eps,
                                     double beta, double weight, PolicyParams* grad) {
  detail::check_actions(p.shape, in.actions);
  const std::size_t T = in.actions.size();
  if (in.old_log_probs.size() != T || in.ref_log_probs.size() != T)
    throw InvalidInput("surrogate_grad: per-token inputs do not match the sequence length");
  if (!std::isfinite(in.advantage)) throw InvalidInput("surrogate_grad: non-finite advantage");
  SurrogateStats st;
  st.tokens = T;
  if (T == 0) return st;
  const double inv_t = 1.0 / static_cast<double>(T);
  const auto ctxs = detail::contexts_for(*in.prompt, in.actions);
  for (std::size_t t = 0; t < T; ++t) {
    const StepForward f = forward(p, ctxs[t]);
    const Token a = in.actions[t];
    const double rho = std::exp(f.log_probs(a) - in.old_log_probs[t]);
    const bool clipped = clip_active(rho, in.advantage, clip_eps);
    const double kl = kl_from_logs(f.log_probs, in.ref_log_probs[t]);
    st.objective += inv_t * (clipped_term(rho, in.advantage, clip_eps) - beta * kl);
    st.mean_kl += inv_t * kl;
    st.clipped += clipped ? 1 : 0;
    if (grad == nullptr) continue;

    const Eigen::VectorXd probs = f.log_probs.array().exp();
    Eigen::VectorXd dlogits = Eigen::VectorXd::Zero(probs.size());
    if (!clipped && in.advantage != 0.0) {
      dlogits = -in.advantage * rho * probs;
      dlogits(a) += in.advantage * rho;
    }
    if (beta != 0.0) {
      const Eigen::VectorXd dkl =
          probs.array() * ((f.log_probs - in.ref_log_probs[t]).array() - kl);
      dlogits -= beta * dkl;
    }
    backward(p, f, weight * inv_t * dlogits, *grad);
  }
  return st;
}

/// Adam (descent form: theta -= lr * m_hat / (sqrt(v_hat) + eps)).
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t t = 0;
  PolicyParams m;
  PolicyParams v;

  explicit AdamState(const ModelShape& shape) : m(PolicyParams::zeros(shape)), v(PolicyParams::zeros(shape)) {}

  void step(PolicyParams& params, const PolicyParams& grad, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    std::vector<std::span<double>> ps, ms, vs;
    std::vector<std::span<const double>> gs;
    for_each_tensor(params, [&](std::string_view, std::span<double> d, const auto&) { ps.push_back(d); });
    for_each_tensor(m, [&](std::string_view, std::span<double> d, const auto&) { ms.push_back(d); });
    for_each_tensor(v, [&](std::string_view, std::span<double> d, const auto&) { vs.push_back(d); });
    for_each_tensor(grad, [&](std::string_view, std::span<const double> d, const auto&) { gs.push_back(d); });
    for (std::size_t k = 0; k < ps.size(); ++k) {
      for (std::size_t i = 0; i < ps[k].size(); ++i) {
        const double g = gs[k][i];
        ms[k][i] = beta1 * ms[k][i] + (1.0 - beta1) * g;
        vs[k][i] = beta2 * vs[k][i] + (1.0 - beta2) * g * g;
        ps[k][i] -= lr * (ms[k][i] / c1) / (std::sqrt(vs[k][i] / c2) + eps);
      }
    }
  }
};

struct PretrainConfig {
  std::size_t steps = 60;
  double learning_rate = 1e-2;
  std::size_t batch_size = 16;
  double loss_threshold = 0.0;  // stop early once the batch loss falls below
  std::uint64_t seed = 7;
};

/// Supervised next-token pretraining with Adam over shuffled minibatches.
/// Returns the loss of every step taken. Throws on a non-finite loss.
inline std::vector<double> pretrain_nll(PolicyParams& params, std::span<const TrainingExample> data,
                                        const PretrainConfig& cfg) {
  if (data.empty()) throw InvalidInput("pretrain_nll: no training examples");
  AdamState adam(params.shape);
  Rng rng(derive_seed(cfg.seed, "pretrain-batches"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  std::vector<double> losses;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    std::vector<TrainingExample> batch;
    for (std::size_t b = 0; b < std::min(cfg.batch_size, data.size()); ++b) {
      if (cursor == order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        cursor = 0;
      }
      batch.push_back(data[order[cursor++]]);
    }
    const LossAndGrad lg = nll_loss_and_grad(params, batch);
    if (!std::isfinite(lg.loss))
      throw Error("pretraining diverged: loss is " + std::to_string(lg.loss) + " at step " + std::to_string(step));
    losses.push_back(lg.loss);
    if (lg.loss < cfg.loss_threshold) break;
    adam.step(params, lg.grad, cfg.learning_rate);
  }
  return losses;
}

}  // namespace editgrpo

#endif  // EDITGRPO_POLICY_HPP_
