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

// Rule-based transcript perturbation (insertion, deletion, substitution, swap,
// multi-edit) and the word-level alignment that identifies the unedited
// regions shared by an original and an edited transcript.

#ifndef EDITGRPO_TEXTEDIT_HPP_
#define EDITGRPO_TEXTEDIT_HPP_

#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "editgrpo/common.hpp"

namespace editgrpo {

/// Ordered list of lowercase, punctuation-free words.
struct Transcript {
  std::vector<std::string> words;

  std::size_t size() const { return words.size(); }
  bool empty() const { return words.empty(); }
  const std::string& operator[](std::size_t i) const { return words[i]; }
  bool operator==(const Transcript&) const = default;

  // Lowercases, strips everything that is not alphanumeric or an apostrophe,
  // and splits on whitespace.
  static Transcript from_text(std::string_view text) {
    Transcript t;
    std::string current;
    for (char ch : text) {
      const auto c = static_cast<unsigned char>(ch);
      if (std::isspace(c)) {
        if (!current.empty()) t.words.push_back(std::move(current));
        current.clear();
      } else if (std::isalnum(c) || c == '\'') {
        current.push_back(static_cast<char>(std::tolower(c)));
      }
    }
    if (!current.empty()) t.words.push_back(std::move(current));
    return t;
  }

  std::string text() const {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out.push_back(' ');
      out += words[i];
    }
    return out;
  }
};

inline void validate(const Transcript& t) {
  for (const auto& w : t.words) {
    if (w.empty()) throw InvalidInput("transcript contains an empty word");
    for (char c : w) {
      if (std::isspace(static_cast<unsigned char>(c)))
        throw InvalidInput("transcript word contains whitespace: '" + w + "'");
    }
  }
}

enum class EditKind { kInsertion, kDeletion, kSubstitution, kSwap, kMultiEdit };

inline constexpr std::array<EditKind, 5> kAllEditKinds = {
    EditKind::kInsertion, EditKind::kDeletion, EditKind::kSubstitution,
    EditKind::kSwap, EditKind::kMultiEdit};

inline std::string_view to_string(EditKind k) {
  switch (k) {
    case EditKind::kInsertion: return "insertion";
    case EditKind::kDeletion: return "deletion";
    case EditKind::kSubstitution: return "substitution";
    case EditKind::kSwap: return "swap";
    case EditKind::kMultiEdit: return "multi-edit";
  }
  return "?";
}

inline EditKind parse_edit_kind(std::string_view s) {
  for (EditKind k : kAllEditKinds)
    if (to_string(k) == s) return k;
  throw InvalidInput("unknown edit kind '" + std::string(s) + "'");
}

/// One applied perturbation. Positions refer to the transcript the op is
/// applied to; for multi-edit each step refers to the output of the previous
/// step. Insertion position p means "insert before word p" (p == size appends).
struct EditOp {
  EditKind kind = EditKind::kInsertion;
  std::vector<std::size_t> positions;
  std::vector<std::string> payload;
  std::vector<EditOp> steps;  // multi-edit only

  bool operator==(const EditOp&) const = default;
};

/// Inclusive index range [first, last].
struct IndexSpan {
  std::size_t first = 0;
  std::size_t last = 0;
  bool operator==(const IndexSpan&) const = default;
};

struct EditAlignment {
  std::vector<std::pair<std::size_t, std::size_t>> kept_pairs;
  std::vector<IndexSpan> edited_ori_spans;
  std::vector<IndexSpan> edited_tar_spans;

  bool operator==(const EditAlignment&) const = default;
};

/// Upper bound on the number of edits for a transcript of word_count words:
/// max(1, floor(n / 2)).
inline std::size_t max_edit_count(std::size_t word_count) {
  if (word_count == 0) throw InvalidInput("max_edit_count: word_count must be >= 1");
  return std::max<std::size_t>(1, word_count / 2);
}

namespace detail {

inline void check_position(std::size_t p, std::size_t limit, std::string_view what) {
  if (p >= limit)
    throw InvalidInput(std::string(what) + ": position " + std::to_string(p) +
                       " out of range (size " + std::to_string(limit) + ")");
}

inline std::vector<IndexSpan> uncovered_spans(std::size_t n,
                                              const std::vector<bool>& covered) {
  std::vector<IndexSpan> spans;
  std::size_t i = 0;
  while (i < n) {
    if (covered[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && !covered[j + 1]) ++j;
    spans.push_back({i, j});
    i = j + 1;
  }
  return spans;
}

inline bool basic_op_supported(EditKind k, const Transcript& t,
                               std::span<const std::string> lexicon) {
  switch (k) {
    case EditKind::kInsertion:
      return true;
    case EditKind::kDeletion:
      return t.size() >= 2;
    case EditKind::kSubstitution:
      for (const auto& w : lexicon)
        for (const auto& x : t.words)
          if (w != x) return true;
      return false;
    case EditKind::kSwap:
      for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] != t[0]) return true;
      return false;
    case EditKind::kMultiEdit:
      return false;
  }
  return false;
}

}  // namespace detail

/// Applies an op, validating every declared position against the transcript.
inline Transcript apply_edit(const Transcript& src, const EditOp& op) {
  Transcript out = src;
  auto& w = out.words;
  switch (op.kind) {
    case EditKind::kInsertion:
      if (op.positions.size() != 1 || op.payload.size() != 1)
        throw InvalidInput("insertion needs one position and one payload word");
      detail::check_position(op.positions[0], w.size() + 1, "insertion");
      w.insert(w.begin() + static_cast<std::ptrdiff_t>(op.positions[0]), op.payload[0]);
      break;
    case EditKind::kDeletion:
      if (op.positions.size() != 1 || !op.payload.empty())
        throw InvalidInput("deletion needs one position and no payload");
      detail::check_position(op.positions[0], w.size(), "deletion");
      if (w.size() < 2) throw UnsupportedOp("deletion would empty the transcript");
      w.erase(w.begin() + static_cast<std::ptrdiff_t>(op.positions[0]));
      break;
    case EditKind::kSubstitution:
      if (op.positions.size() != 1 || op.payload.size() != 1)
        throw InvalidInput("substitution needs one position and one payload word");
      detail::check_position(op.positions[0], w.size(), "substitution");
      w[op.positions[0]] = op.payload[0];
      break;
    case EditKind::kSwap:
      if (op.positions.size() != 2 || !op.payload.empty() ||
          op.positions[0] == op.positions[1])
        throw InvalidInput("swap needs two distinct positions and no payload");
      detail::check_position(op.positions[0], w.size(), "swap");
      detail::check_position(op.positions[1], w.size(), "swap");
      std::swap(w[op.positions[0]], w[op.positions[1]]);
      break;
    case EditKind::kMultiEdit:
      if (op.steps.empty()) throw InvalidInput("multi-edit needs at least one step");
      for (const auto& step : op.steps) {
        if (step.kind == EditKind::kMultiEdit)
          throw InvalidInput("multi-edit steps must be basic ops");
        out = apply_edit(out, step);
      }
      break;
  }
  return out;
}

namespace detail {

// Draws one basic op of the given kind for t. Caller guarantees support.
inline EditOp draw_basic_op(EditKind kind, const Transcript& t, Rng& rng,
                            std::span<const std::string> lexicon) {
  EditOp op;
  op.kind = kind;
  switch (kind) {
    case EditKind::kInsertion:
      op.positions = {rng.below(t.size() + 1)};
      op.payload = {lexicon[rng.below(lexicon.size())]};
      break;
    case EditKind::kDeletion:
      op.positions = {rng.below(t.size())};
      break;
    case EditKind::kSubstitution: {
      // Positions that admit a different lexicon word.
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < t.size(); ++i)
        for (const auto& w : lexicon)
          if (w != t[i]) {
            candidates.push_back(i);
            break;
          }
      const std::size_t p = candidates[rng.below(candidates.size())];
      std::vector<std::string_view> words;
      for (const auto& w : lexicon)
        if (w != t[p]) words.push_back(w);
      op.positions = {p};
      op.payload = {std::string(words[rng.below(words.size())])};
      break;
    }
    case EditKind::kSwap: {
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size(); ++j)
          if (t[i] != t[j]) pairs.emplace_back(i, j);
      const auto [a, b] = pairs[rng.below(pairs.size())];
      op.positions = {a, b};
      break;
    }
    case EditKind::kMultiEdit:
      throw InvalidInput("draw_basic_op: multi-edit is not basic");
  }
  return op;
}

inline EditKind draw_supported_basic_kind(const Transcript& t, Rng& rng,
                                          std::span<const std::string> lexicon) {
  std::vector<EditKind> kinds;
  for (EditKind k : {EditKind::kInsertion, EditKind::kDeletion,
                     EditKind::kSubstitution, EditKind::kSwap})
    if (basic_op_supported(k, t, lexicon)) kinds.push_back(k);
  return kinds[rng.below(kinds.size())];
}

}  // namespace detail

struct PerturbResult {
  Transcript target;
  EditOp op;
};

/// Whether `kind` can be applied to t with a non-degenerate outcome.
inline bool edit_supported(EditKind kind, const Transcript& t,
                           std::span<const std::string> lexicon) {
  if (kind == EditKind::kMultiEdit) return !t.empty() && max_edit_count(t.size()) >= 2;
  return detail::basic_op_supported(kind, t, lexicon);
}

/// Perturbs a transcript. `kind == nullopt` picks uniformly among the kinds the
/// transcript supports; an explicitly requested kind the transcript cannot
/// take raises UnsupportedOp. Multi-edit composes 2..max_edit_count basic ops
/// (repeats allowed) and resamples if the composition cancels out.
inline PerturbResult perturb(const Transcript& transcript, std::optional<EditKind> kind,
                             Rng& rng, std::span<const std::string> lexicon) {
  if (transcript.empty()) throw InvalidInput("perturb: empty transcript");
  if (lexicon.empty()) throw InvalidInput("perturb: empty lexicon");
  validate(transcript);

  EditKind chosen;
  if (kind) {
    chosen = *kind;
    if (!edit_supported(chosen, transcript, lexicon))
      throw UnsupportedOp(std::string("perturb: ") + std::string(to_string(chosen)) +
                          " is not applicable to a " +
                          std::to_string(transcript.size()) + "-word transcript");
  } else {
    std::vector<EditKind> kinds;
    for (EditKind k : kAllEditKinds)
      if (edit_supported(k, transcript, lexicon)) kinds.push_back(k);
    chosen = kinds[rng.below(kinds.size())];
  }

  if (chosen != EditKind::kMultiEdit) {
    EditOp op = detail::draw_basic_op(chosen, transcript, rng, lexicon);
    return {apply_edit(transcript, op), std::move(op)};
  }

  const std::size_t max_edits = max_edit_count(transcript.size());
  constexpr int kMaxAttempts = 64;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::size_t count = 2 + rng.below(max_edits - 1);
    EditOp op;
    op.kind = EditKind::kMultiEdit;
    Transcript current = transcript;
    for (std::size_t s = 0; s < count; ++s) {
      const EditKind k = detail::draw_supported_basic_kind(current, rng, lexicon);
      EditOp step = detail::draw_basic_op(k, current, rng, lexicon);
      current = apply_edit(current, step);
      op.steps.push_back(std::move(step));
    }
    if (current != transcript) return {std::move(current), std::move(op)};
  }
  throw UnsupportedOp("perturb: multi-edit kept cancelling out");
}

/// Builds an alignment from kept pairs, filling in the edited spans.
inline EditAlignment alignment_from_pairs(
    std::vector<std::pair<std::size_t, std::size_t>> kept, std::size_t n_ori,
    std::size_t n_tar) {
  std::vector<bool> ori_cov(n_ori, false), tar_cov(n_tar, false);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto [i, j] = kept[k];
    if (i >= n_ori || j >= n_tar)
      throw InvalidInput("alignment pair out of range");
    if (k > 0 && (i <= kept[k - 1].first || j <= kept[k - 1].second))
      throw InvalidInput("alignment pairs must be strictly increasing");
    ori_cov[i] = true;
    tar_cov[j] = true;
  }
  EditAlignment a;
  a.kept_pairs = std::move(kept);
  a.edited_ori_spans = detail::uncovered_spans(n_ori, ori_cov);
  a.edited_tar_spans = detail::uncovered_spans(n_tar, tar_cov);
  return a;
}

/// Longest-common-subsequence alignment of two word sequences. Among all
/// longest common subsequences, returns the one whose original-side indices
/// are lexicographically smallest (then target-side indices).
template <typename Seq>
std::vector<std::pair<std::size_t, std::size_t>> lcs_pairs(const Seq& x, const Seq& y) {
  const std::size_t n = x.size(), m = y.size();
  // suffix[i][j] = LCS length of x[i:], y[j:]
  std::vector<std::uint32_t> suffix((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& {
    return suffix[i * (m + 1) + j];
  };
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      at(i, j) = x[i] == y[j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (x[i] == y[j]) {
      pairs.emplace_back(i++, j++);
    } else if (at(i, j + 1) == at(i, j)) {
      ++j;  // y[j] is skippable, keep x[i] in play
    } else {
      ++i;
    }
  }
  return pairs;
}

inline EditAlignment align(const Transcript& x_ori, const Transcript& x_tar) {
  return alignment_from_pairs(lcs_pairs(x_ori.words, x_tar.words), x_ori.size(),
                              x_tar.size());
}

/// The conditioning unit for one editing task.
struct EditPrompt {
  Transcript x_ori;
  Transcript x_tar;
  std::vector<Token> tokens_ori;
  EditOp op;
  EditAlignment alignment;
  std::uint64_t seed = 0;
  std::size_t speaker_id = 0;

  bool operator==(const EditPrompt&) const = default;
};

inline std::vector<Token> encode_words(const Transcript& t,
                                       std::span<const std::string> lexicon) {
  std::vector<Token> out;
  out.reserve(t.size());
  for (const auto& w : t.words) {
    const auto it = std::find(lexicon.begin(), lexicon.end(), w);
    if (it == lexicon.end()) throw InvalidInput("word '" + w + "' is not in the lexicon");
    out.push_back(static_cast<Token>(it - lexicon.begin()));
  }
  return out;
}

inline Transcript decode_words(std::span<const Token> tokens,
                               std::span<const std::string> lexicon) {
  Transcript t;
  t.words.reserve(tokens.size());
  for (Token tok : tokens) {
    if (tok < 0 || static_cast<std::size_t>(tok) >= lexicon.size())
      throw InvalidInput("token " + std::to_string(tok) + " is outside the lexicon");
    t.words.push_back(lexicon[static_cast<std::size_t>(tok)]);
  }
  return t;
}

/// Turns a plain (transcript, speech tokens) pair into an editing prompt. The
/// rng drives the perturbation; `seed` and `speaker_id` are carried along for
/// decoding the original speech.
inline EditPrompt synth_prompt(const Transcript& transcript, std::span<const Token> tokens,
                               std::size_t speaker_id, std::uint64_t seed, Rng& rng,
                               std::span<const std::string> lexicon,
                               std::optional<EditKind> kind = std::nullopt) {
  if (encode_words(transcript, lexicon) != std::vector<Token>(tokens.begin(), tokens.end()))
    throw InvalidInput("synth_prompt: tokens are not the encoding of the transcript");
  auto [target, op] = perturb(transcript, kind, rng, lexicon);
  EditPrompt p;
  p.x_ori = transcript;
  p.x_tar = std::move(target);
  p.tokens_ori.assign(tokens.begin(), tokens.end());
  p.op = std::move(op);
  p.alignment = align(p.x_ori, p.x_tar);
  p.seed = seed;
  p.speaker_id = speaker_id;
  return p;
}

/// Schema check for prompts read from disk: both transcripts valid, the
/// speech tokens encode x_ori, the op maps x_ori to x_tar and the alignment is
/// the one align() would produce.
inline void validate(const EditPrompt& p, std::span<const std::string> lexicon) {
  validate(p.x_ori);
  validate(p.x_tar);
  if (encode_words(p.x_ori, lexicon) != p.tokens_ori)
    throw InvalidInput("prompt: tokens_ori is not the encoding of x_ori");
  encode_words(p.x_tar, lexicon);
  if (apply_edit(p.x_ori, p.op) != p.x_tar) throw InvalidInput("prompt: op does not map x_ori to x_tar");
  if (align(p.x_ori, p.x_tar) != p.alignment) throw InvalidInput("prompt: alignment is inconsistent");
}

}  // namespace editgrpo

#endif  // EDITGRPO_TEXTEDIT_HPP_
