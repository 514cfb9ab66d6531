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

// Mel-cepstral analysis, dynamic time warping and mel-cepstral distortion.
//
// Per frame: Hann window, magnitude spectrum (zero-padded FFT), triangular HTK mel
// filterbank, natural log with a 1e-10 floor, orthonormal DCT-II. Coefficient
// 0 is dropped and 1..n_ceps are kept. MCD follows the usual Kubichek
// convention, (10 / ln 10) * sqrt(2) * mean Euclidean distance along the DTW
// path.

#ifndef EDITGRPO_DSP_HPP_
#define EDITGRPO_DSP_HPP_

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "editgrpo/common.hpp"

namespace editgrpo {

struct Waveform {
  std::vector<double> samples;
  double sample_rate = 8000.0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

inline void validate(const Waveform& w) {
  if (!(w.sample_rate > 0.0)) throw InvalidInput("waveform sample_rate must be > 0");
  for (double x : w.samples)
    if (!std::isfinite(x)) throw InvalidInput("waveform contains non-finite samples");
}

struct CepstrogramConfig {
  std::size_t frame_length = 200;  // 25 ms at 8 kHz
  std::size_t hop = 80;            // 10 ms
  std::size_t fft_size = 512;
  std::size_t n_mels = 64;
  std::size_t n_ceps = 13;
  double log_floor = 1e-10;

  void validate() const {
    if (frame_length == 0 || hop == 0 || n_mels == 0 || n_ceps == 0)
      throw InvalidInput("cepstrogram config: sizes must be positive");
    if (fft_size < frame_length) throw InvalidInput("cepstrogram config: fft_size < frame_length");
    if (hop > frame_length) throw InvalidInput("cepstrogram config: hop > frame_length");
    if (n_ceps > n_mels) throw InvalidInput("cepstrogram config: n_ceps > n_mels");
  }

  bool operator==(const CepstrogramConfig&) const = default;
};

/// Rows are frames, columns cepstral coefficients 1..n_ceps.
struct Cepstrogram {
  Eigen::MatrixXd frames;

  std::size_t n_frames() const { return static_cast<std::size_t>(frames.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(frames.cols()); }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Frame analyzer holding the window, filterbank, DCT basis and FFT plan.
/// Not thread-safe (the FFT caches plans); use one per thread.
class MelAnalyzer {
 public:
  MelAnalyzer(const CepstrogramConfig& cfg, double sample_rate)
      : cfg_(cfg), sample_rate_(sample_rate) {
    cfg_.validate();
    if (!(sample_rate > 0.0)) throw InvalidInput("MelAnalyzer: sample_rate must be > 0");
    fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);

    window_.resize(cfg_.frame_length);
    for (std::size_t n = 0; n < cfg_.frame_length; ++n)
      window_[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(n) /
                                        static_cast<double>(cfg_.frame_length));

    const std::size_t n_bins = cfg_.fft_size / 2 + 1;
    const double mel_lo = hz_to_mel(0.0), mel_hi = hz_to_mel(sample_rate / 2.0);
    std::vector<double> edges(cfg_.n_mels + 2);
    for (std::size_t m = 0; m < edges.size(); ++m)
      edges[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(m) /
                                        static_cast<double>(cfg_.n_mels + 1));
    filters_.resize(cfg_.n_mels);
    for (std::size_t m = 0; m < cfg_.n_mels; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      Filter& f = filters_[m];
      for (std::size_t k = 0; k < n_bins; ++k) {
        const double hz = static_cast<double>(k) * sample_rate / static_cast<double>(cfg_.fft_size);
        double wgt = 0.0;
        if (hz > lo && hz <= mid) wgt = (hz - lo) / (mid - lo);
        else if (hz > mid && hz < hi) wgt = (hi - hz) / (hi - mid);
        if (wgt > 0.0) {
          if (f.weights.empty()) f.first_bin = k;
          f.weights.resize(k - f.first_bin + 1, 0.0);
          f.weights.back() = wgt;
        }
      }
    }

    // Orthonormal DCT-II rows 1..n_ceps.
    const auto M = static_cast<double>(cfg_.n_mels);
    dct_.resize(static_cast<Eigen::Index>(cfg_.n_ceps), static_cast<Eigen::Index>(cfg_.n_mels));
    for (std::size_t k = 1; k <= cfg_.n_ceps; ++k)
      for (std::size_t n = 0; n < cfg_.n_mels; ++n)
        dct_(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(n)) =
            std::sqrt(2.0 / M) *
            std::cos(M_PI * static_cast<double>(k) * (2.0 * static_cast<double>(n) + 1.0) / (2.0 * M));

    frame_buf_.assign(cfg_.fft_size, 0.0);
  }

  const CepstrogramConfig& config() const { return cfg_; }
  double sample_rate() const { return sample_rate_; }

  std::size_t frame_count(std::size_t n_samples) const {
    if (n_samples < cfg_.frame_length) return 0;
    return 1 + (n_samples - cfg_.frame_length) / cfg_.hop;
  }

  /// Log mel energies, one row per frame.
  Eigen::MatrixXd log_mel(const Waveform& w) {
    check_input(w);
    const std::size_t n_frames = frame_count(w.size());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n_frames), static_cast<Eigen::Index>(cfg_.n_mels));
    std::vector<double> magnitude(cfg_.fft_size / 2 + 1);
    for (std::size_t f = 0; f < n_frames; ++f) {
      const std::size_t start = f * cfg_.hop;
      std::fill(frame_buf_.begin(), frame_buf_.end(), 0.0);
      for (std::size_t n = 0; n < cfg_.frame_length; ++n)
        frame_buf_[n] = w.samples[start + n] * window_[n];
      fft_.fwd(spectrum_, frame_buf_);
      for (std::size_t k = 0; k < magnitude.size(); ++k) magnitude[k] = std::abs(spectrum_[k]);
      for (std::size_t m = 0; m < cfg_.n_mels; ++m) {
        const Filter& flt = filters_[m];
        double e = 0.0;
        for (std::size_t k = 0; k < flt.weights.size(); ++k) e += flt.weights[k] * magnitude[flt.first_bin + k];
        out(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(m)) = std::log(std::max(e, cfg_.log_floor));
      }
    }
    return out;
  }

  /// Each frame is transformed on its own so a frame's cepstrum does not
  /// depend on how many frames surround it.
  Cepstrogram cepstra(const Waveform& w) {
    const Eigen::MatrixXd lm = log_mel(w);
    Cepstrogram c;
    c.frames.resize(lm.rows(), dct_.rows());
    Eigen::VectorXd row(lm.cols());
    for (Eigen::Index f = 0; f < lm.rows(); ++f) {
      row = lm.row(f).transpose();
      c.frames.row(f) = (dct_ * row).transpose();
    }
    return c;
  }

  /// Time-averaged log-mel vector, L2-normalized. A zero average maps to the
  /// first unit basis vector.
  Eigen::VectorXd speaker_embedding(const Waveform& w) {
    const Eigen::MatrixXd lm = log_mel(w);
    Eigen::VectorXd mean = lm.colwise().mean().transpose();
    const double norm = mean.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(mean.size());
      e(0) = 1.0;
      return e;
    }
    return mean / norm;
  }

 private:
  struct Filter {
    std::size_t first_bin = 0;
    std::vector<double> weights;
  };

  void check_input(const Waveform& w) const {
    if (w.sample_rate != sample_rate_)
      throw InvalidInput("waveform sample rate does not match the analyzer");
    if (w.size() < cfg_.frame_length)
      throw InvalidInput("waveform shorter than one analysis frame (" + std::to_string(w.size()) +
                         " < " + std::to_string(cfg_.frame_length) + " samples)");
  }

  CepstrogramConfig cfg_;
  double sample_rate_;
  std::vector<double> window_;
  std::vector<Filter> filters_;
  Eigen::MatrixXd dct_;
  Eigen::FFT<double> fft_;
  std::vector<double> frame_buf_;
  std::vector<std::complex<double>> spectrum_;
};

inline Cepstrogram mel_cepstra(const Waveform& w, const CepstrogramConfig& cfg) {
  MelAnalyzer a(cfg, w.sample_rate);
  return a.cepstra(w);
}

inline Eigen::VectorXd speaker_embedding(const Waveform& w, const CepstrogramConfig& cfg) {
  MelAnalyzer a(cfg, w.sample_rate);
  return a.speaker_embedding(w);
}

struct DtwResult {
  std::vector<std::pair<std::size_t, std::size_t>> path;
  double total_cost = 0.0;
};

/// Minimum-cost monotone alignment of an n-by-m grid under steps
/// (+1,0), (0,+1), (+1,+1). The backtrace prefers the diagonal, then the
/// vertical (i-1, j), then the horizontal predecessor on ties.
template <typename CostFn>
DtwResult dtw_with_cost(std::size_t n, std::size_t m, CostFn&& cost) {
  if (n == 0 || m == 0) throw InvalidInput("dtw: empty input sequence");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> acc(n * m, kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cost(i, j);
      if (i == 0 && j == 0) {
        at(i, j) = c;
        continue;
      }
      double best = kInf;
      if (i > 0 && j > 0) best = at(i - 1, j - 1);
      if (i > 0) best = std::min(best, at(i - 1, j));
      if (j > 0) best = std::min(best, at(i, j - 1));
      at(i, j) = c + best;
    }
  }

  DtwResult r;
  r.total_cost = at(n - 1, m - 1);
  std::size_t i = n - 1, j = m - 1;
  r.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double d = at(i - 1, j - 1), u = at(i - 1, j), l = at(i, j - 1);
      if (d <= u && d <= l) {
        --i;
        --j;
      } else if (u <= l) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    r.path.emplace_back(i, j);
  }
  std::reverse(r.path.begin(), r.path.end());
  return r;
}

/// DTW between cepstrograms with Euclidean frame distance.
inline DtwResult dtw(const Cepstrogram& a, const Cepstrogram& b) {
  if (a.n_frames() == 0 || b.n_frames() == 0) throw InvalidInput("dtw: empty cepstrogram");
  if (a.dim() != b.dim()) throw InvalidInput("dtw: cepstrogram dimensions differ");
  return dtw_with_cost(a.n_frames(), b.n_frames(), [&](std::size_t i, std::size_t j) {
    return (a.frames.row(static_cast<Eigen::Index>(i)) - b.frames.row(static_cast<Eigen::Index>(j))).norm();
  });
}

inline const double kMcdConstant = 10.0 / std::log(10.0) * std::sqrt(2.0);

/// DTW-aligned mel-cepstral distortion in dB, averaged over path pairs.
inline double mcd(const Cepstrogram& a, const Cepstrogram& b) {
  const DtwResult r = dtw(a, b);
  return kMcdConstant * r.total_cost / static_cast<double>(r.path.size());
}

/// Half-open time interval [start, end) in seconds.
struct TimeSpan {
  double start = 0.0;
  double end = 0.0;
  bool operator==(const TimeSpan&) const = default;
};

/// Concatenates the samples covered by sorted, disjoint time spans.
inline Waveform extract_region(const Waveform& w, std::span<const TimeSpan> spans) {
  Waveform out;
  out.sample_rate = w.sample_rate;
  std::size_t prev_end = 0;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const TimeSpan& s = spans[k];
    const auto b = std::llround(s.start * w.sample_rate);
    const auto e = std::llround(s.end * w.sample_rate);
    if (b < 0 || e < b || static_cast<std::size_t>(e) > w.size())
      throw InvalidInput("extract_region: span [" + std::to_string(s.start) + ", " +
                         std::to_string(s.end) + ") outside waveform of " +
                         std::to_string(w.duration()) + " s");
    if (k > 0 && static_cast<std::size_t>(b) < prev_end)
      throw InvalidInput("extract_region: spans must be sorted and disjoint");
    out.samples.insert(out.samples.end(), w.samples.begin() + b, w.samples.begin() + e);
    prev_end = static_cast<std::size_t>(e);
  }
  return out;
}

/// Debug dump: headerless little-endian float32 samples.
inline void write_f32(const Waveform& w, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  for (double x : w.samples) {
    const float f = static_cast<float>(x);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    const unsigned char bytes[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                    static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
    os.write(reinterpret_cast<const char*>(bytes), 4);
  }
}

}  // namespace editgrpo

#endif  // EDITGRPO_DSP_HPP_
