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

#ifndef EDITGRPO_WER_HPP_
#define EDITGRPO_WER_HPP_

#include <cstddef>
#include <vector>

#include "editgrpo/common.hpp"
#include "editgrpo/textedit.hpp"

namespace editgrpo {

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;

  std::size_t cost() const { return substitutions + deletions + insertions; }
};

/// Unit-cost Levenshtein alignment of hyp against ref. On ties the backtrace
/// prefers match, then substitution, then deletion, then insertion.
template <typename Seq>
EditCounts edit_distance(const Seq& ref, const Seq& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  if (n == 0) throw InvalidInput("edit_distance: empty reference");

  std::vector<std::size_t> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return dp[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  EditCounts c;
  c.ref_len = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        if (!same) ++c.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

inline EditCounts edit_distance(const Transcript& ref, const Transcript& hyp) {
  return edit_distance(ref.words, hyp.words);
}

/// (S + D + I) / |ref|. Not clipped; may exceed 1.
inline double wer(const Transcript& ref, const Transcript& hyp) {
  const EditCounts c = edit_distance(ref, hyp);
  return static_cast<double>(c.cost()) / static_cast<double>(c.ref_len);
}

}  // namespace editgrpo

#endif  // EDITGRPO_WER_HPP_
