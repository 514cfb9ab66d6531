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

// Slow, independent reference implementations shared by the unit tests and
// the acceptance suite.

#ifndef EDITGRPO_TESTS_ORACLES_HPP_
#define EDITGRPO_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "editgrpo/common.hpp"
#include "editgrpo/policy.hpp"

namespace editgrpo::testing_oracles {

/// Every word list of length 0..max_len over the first `alphabet` letters.
inline std::vector<std::vector<std::string>> all_word_lists(std::size_t max_len, std::size_t alphabet) {
  std::vector<std::vector<std::string>> out{{}};
  std::vector<std::vector<std::string>> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& w : frontier)
      for (std::size_t a = 0; a < alphabet; ++a) {
        auto v = w;
        v.push_back(std::string(1, static_cast<char>('a' + a)));
        next.push_back(v);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

/// Minimum unit-cost edit distance by enumerating every alignment skeleton:
/// a strictly increasing set of matched equal-word pairs. Between two
/// consecutive matches, a gap of a reference and b hypothesis words costs
/// max(a, b) (min(a, b) substitutions plus the surplus as indels).
inline std::size_t brute_edit_distance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::uint32_t rm = 0; rm < (1u << n); ++rm) {
    std::vector<std::size_t> ri;
    for (std::size_t i = 0; i < n; ++i)
      if (rm & (1u << i)) ri.push_back(i);
    for (std::uint32_t hm = 0; hm < (1u << m); ++hm) {
      std::vector<std::size_t> hi;
      for (std::size_t j = 0; j < m; ++j)
        if (hm & (1u << j)) hi.push_back(j);
      if (hi.size() != ri.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < ri.size() && ok; ++k) ok = ref[ri[k]] == hyp[hi[k]];
      if (!ok) continue;
      std::size_t cost = 0;
      std::size_t pr = 0, ph = 0;
      for (std::size_t k = 0; k <= ri.size(); ++k) {
        const std::size_t er = k < ri.size() ? ri[k] : n;
        const std::size_t eh = k < hi.size() ? hi[k] : m;
        cost += std::max(er - pr, eh - ph);
        pr = er + 1;
        ph = eh + 1;
      }
      best = std::min(best, cost);
    }
  }
  return best;
}

/// Minimum over all monotone paths from (0,0) to (n-1,m-1) with steps
/// (+1,0), (0,+1), (+1,+1) of the summed pair cost.
inline double brute_dtw(std::size_t n, std::size_t m, const std::function<double(std::size_t, std::size_t)>& cost) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    acc += cost(i, j);
    if (i == n - 1 && j == m - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < n) walk(i + 1, j, acc);
    if (j + 1 < m) walk(i, j + 1, acc);
    if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

/// Worst relative error over `probes` random parameter coordinates between an
/// analytic gradient and central differences of `f`.
inline double fd_max_rel_error(PolicyParams params, const PolicyParams& grad,
                               const std::function<double(const PolicyParams&)>& f, std::size_t probes,
                               std::uint64_t seed, double h = 1e-5) {
  Rng rng(seed);
  const std::size_t n = parameter_count(params);
  double worst = 0.0;
  for (std::size_t k = 0; k < probes; ++k) {
    const std::size_t idx = rng.below(n);
    double& x = parameter_at(params, idx);
    const double x0 = x;
    x = x0 + h;
    const double fp = f(params);
    x = x0 - h;
    const double fm = f(params);
    x = x0;
    const double fd = (fp - fm) / (2.0 * h);
    const double an = parameter_at(const_cast<PolicyParams&>(grad), idx);
    const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
    worst = std::max(worst, std::abs(fd - an) / scale);
  }
  return worst;
}

}  // namespace editgrpo::testing_oracles

#endif  // EDITGRPO_TESTS_ORACLES_HPP_
