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

// Deterministic synthetic speech environment. One token per word; each token
// decodes to a fixed-length Hann-enveloped tone whose frequency encodes the
// token and the speaker:
//
//   f(token, speaker) = base_freq + token * freq_step + speaker_offsets[speaker]
//
// Speaker offsets are smaller than freq_step, so every (token, speaker) pair
// has its own frequency and the template-matching ASR below is exact at low
// noise. Each speaker also carries a weaker steady partial below base_freq,
// which is what the long-term spectral speaker embedding picks up.

#ifndef EDITGRPO_SYNTHENV_HPP_
#define EDITGRPO_SYNTHENV_HPP_

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "editgrpo/common.hpp"
#include "editgrpo/dsp.hpp"
#include "editgrpo/textedit.hpp"

namespace editgrpo {

inline constexpr std::array<std::string_view, 32> kLexiconWords = {
    "alpha", "bravo", "cedar", "delta", "ember", "falcon", "garnet", "harbor",
    "indigo", "juniper", "kettle", "lantern", "meadow", "nectar", "orbit", "pepper",
    "quartz", "raven", "saffron", "timber", "umber", "velvet", "willow", "xenon",
    "yonder", "zephyr", "amber", "basil", "cobalt", "dune", "echo", "fable"};

/// First vocab_size built-in words; word i encodes to token i.
inline std::vector<std::string> default_lexicon(std::size_t vocab_size) {
  if (vocab_size == 0 || vocab_size > kLexiconWords.size())
    throw InvalidInput("lexicon size must be in [1, " + std::to_string(kLexiconWords.size()) + "]");
  return {kLexiconWords.begin(), kLexiconWords.begin() + static_cast<std::ptrdiff_t>(vocab_size)};
}

struct SynthSpec {
  std::size_t vocab_size = 16;
  double base_freq = 300.0;
  double freq_step = 150.0;
  double segment_ms = 80.0;
  double sample_rate = 8000.0;
  std::vector<double> speaker_offsets = {0.0, 50.0, 100.0};
  double noise_amp = 0.02;
  double tone_amp = 0.5;
  // Steady low partial per speaker, below the token band (a timbre cue).
  std::vector<double> speaker_partial_hz = {120.0, 170.0, 220.0};
  double partial_amp = 0.3;
  // Deterministic broadband background, periodic with the segment length.
  double room_tone_amp = 0.4;

  std::size_t segment_samples() const {
    return static_cast<std::size_t>(std::llround(segment_ms * 1e-3 * sample_rate));
  }
  double segment_seconds() const {
    return static_cast<double>(segment_samples()) / sample_rate;
  }
  std::size_t n_speakers() const { return speaker_offsets.size(); }

  double frequency(Token token, std::size_t speaker) const {
    return base_freq + static_cast<double>(token) * freq_step + speaker_offsets[speaker];
  }

  std::vector<std::string> lexicon() const { return default_lexicon(vocab_size); }

  bool operator==(const SynthSpec&) const = default;

  void validate(const CepstrogramConfig& cep = {}) const {
    if (vocab_size == 0) throw InvalidInput("synth spec: vocab_size must be positive");
    if (speaker_offsets.empty()) throw InvalidInput("synth spec: need at least one speaker");
    if (!(sample_rate > 0.0) || !(freq_step > 0.0) || !(base_freq > 0.0))
      throw InvalidInput("synth spec: frequencies and sample rate must be positive");
    double max_off = 0.0;
    for (std::size_t i = 0; i < speaker_offsets.size(); ++i) {
      const double o = speaker_offsets[i];
      if (o < 0.0 || o >= freq_step)
        throw InvalidInput("synth spec: speaker offsets must lie in [0, freq_step)");
      for (std::size_t j = 0; j < i; ++j)
        if (speaker_offsets[j] == o) throw InvalidInput("synth spec: duplicate speaker offset");
      max_off = std::max(max_off, o);
    }
    if (base_freq + static_cast<double>(vocab_size) * freq_step + max_off >= sample_rate / 2.0)
      throw InvalidInput("synth spec: highest tone would exceed Nyquist");
    if (segment_samples() < cep.frame_length + cep.hop)
      throw InvalidInput("synth spec: a segment must span at least two analysis frames");
    if (noise_amp < 0.0 || tone_amp < 0.0 || partial_amp < 0.0 || room_tone_amp < 0.0)
      throw InvalidInput("synth spec: amplitudes must be >= 0");
    if (speaker_partial_hz.size() != speaker_offsets.size())
      throw InvalidInput("synth spec: need one partial frequency per speaker");
    for (double hz : speaker_partial_hz)
      if (!(hz > 0.0) || hz >= base_freq)
        throw InvalidInput("synth spec: speaker partials must lie in (0, base_freq)");
  }
};

/// Everything needed to turn tokens into rewards.
struct Environment {
  SynthSpec spec;
  CepstrogramConfig cepstrum;

  void validate() const {
    cepstrum.validate();
    spec.validate(cepstrum);
  }
  std::vector<std::string> lexicon() const { return spec.lexicon(); }
};

struct CorpusPair {
  Transcript transcript;
  std::vector<Token> tokens;
  std::size_t speaker_id = 0;
  std::uint64_t seed = 0;

  bool operator==(const CorpusPair&) const = default;
};

/// One segment of the fixed background: uniform in [-room_tone_amp,
/// room_tone_amp] from a constant seed, identical for every utterance.
inline std::vector<double> room_tone(const SynthSpec& spec) {
  Rng rng(derive_seed(0, "room-tone"));
  std::vector<double> r(spec.segment_samples());
  for (double& x : r) x = spec.room_tone_amp * (2.0 * rng.uniform() - 1.0);
  return r;
}

/// Per segment, a Hann-enveloped token tone plus the speaker's partial; the
/// shared room tone underneath; then seeded uniform noise in
/// [-noise_amp, noise_amp].
inline Waveform decode(std::span<const Token> tokens, std::size_t speaker_id,
                       const SynthSpec& spec, std::uint64_t seed) {
  if (speaker_id >= spec.n_speakers())
    throw InvalidInput("decode: unknown speaker " + std::to_string(speaker_id));
  const std::size_t seg = spec.segment_samples();
  Waveform w;
  w.sample_rate = spec.sample_rate;
  w.samples.resize(tokens.size() * seg);
  Rng noise(derive_seed(seed, "decode-noise"));
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const Token tok = tokens[k];
    if (tok < 0 || static_cast<std::size_t>(tok) >= spec.vocab_size)
      throw InvalidInput("decode: token " + std::to_string(tok) + " outside vocab of " +
                         std::to_string(spec.vocab_size));
    const double omega = 2.0 * M_PI * spec.frequency(tok, speaker_id) / spec.sample_rate;
    const double omega_p = 2.0 * M_PI * spec.speaker_partial_hz[speaker_id] / spec.sample_rate;
    for (std::size_t n = 0; n < seg; ++n) {
      const double env = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(n) / static_cast<double>(seg));
      const auto t = static_cast<double>(n);
      w.samples[k * seg + n] =
          env * (spec.tone_amp * std::sin(omega * t) + spec.partial_amp * std::sin(omega_p * t));
    }
  }
  if (spec.room_tone_amp > 0.0) {
    const std::vector<double> room = room_tone(spec);
    for (std::size_t n = 0; n < w.samples.size(); ++n) w.samples[n] += room[n % seg];
  }
  if (spec.noise_amp > 0.0)
    for (double& x : w.samples) x += spec.noise_amp * (2.0 * noise.uniform() - 1.0);
  return w;
}

/// Template-matching recognizer: per segment, the (token, speaker) tone with
/// the largest correlation magnitude wins and its token is emitted. Segment
/// count is the rounded ratio of waveform length to segment length, which
/// tolerates a partial trailing segment.
inline std::vector<Token> oracle_asr_tokens(const Waveform& w, const SynthSpec& spec) {
  std::vector<Token> out;
  if (w.empty()) return out;
  const std::size_t seg = spec.segment_samples();
  const auto n_seg = static_cast<std::size_t>(
      std::llround(static_cast<double>(w.size()) / static_cast<double>(seg)));
  out.reserve(n_seg);

  std::vector<std::complex<double>> rot;
  std::vector<Token> rot_token;
  for (std::size_t t = 0; t < spec.vocab_size; ++t)
    for (std::size_t s = 0; s < spec.n_speakers(); ++s) {
      const double omega = 2.0 * M_PI * spec.frequency(static_cast<Token>(t), s) / spec.sample_rate;
      rot.push_back(std::polar(1.0, -omega));
      rot_token.push_back(static_cast<Token>(t));
    }

  for (std::size_t k = 0; k < n_seg; ++k) {
    const std::size_t b = k * seg, e = std::min(w.size(), (k + 1) * seg);
    double best = -1.0;
    Token best_tok = 0;
    for (std::size_t r = 0; r < rot.size(); ++r) {
      std::complex<double> phasor(1.0, 0.0), acc(0.0, 0.0);
      for (std::size_t n = b; n < e; ++n) {
        acc += w.samples[n] * phasor;
        phasor *= rot[r];
      }
      const double mag = std::norm(acc);
      if (mag > best) {
        best = mag;
        best_tok = rot_token[r];
      }
    }
    out.push_back(best_tok);
  }
  return out;
}

inline Transcript oracle_asr(const Waveform& w, const SynthSpec& spec) {
  const auto lex = spec.lexicon();
  return decode_words(oracle_asr_tokens(w, spec), lex);
}

namespace detail {

inline std::vector<TimeSpan> merge_segments(const std::vector<std::size_t>& indices, double seg_s) {
  std::vector<TimeSpan> spans;
  for (std::size_t k = 0; k < indices.size();) {
    std::size_t j = k;
    while (j + 1 < indices.size() && indices[j + 1] == indices[j] + 1) ++j;
    spans.push_back({static_cast<double>(indices[k]) * seg_s,
                     static_cast<double>(indices[j] + 1) * seg_s});
    k = j + 1;
  }
  return spans;
}

}  // namespace detail

struct KeptTimeSpans {
  std::vector<TimeSpan> ori;
  std::vector<TimeSpan> tar;
};

/// Time intervals of the kept (unedited) words on both timelines. Runs of
/// adjacent kept segments are merged into one interval.
inline KeptTimeSpans token_time_spans(std::size_t n_ori, std::size_t n_tar,
                                      const EditAlignment& alignment, const SynthSpec& spec) {
  std::vector<std::size_t> ori, tar;
  for (const auto& [i, j] : alignment.kept_pairs) {
    if (i >= n_ori || j >= n_tar)
      throw InvalidInput("token_time_spans: alignment index out of range");
    ori.push_back(i);
    tar.push_back(j);
  }
  const double seg_s = spec.segment_seconds();
  return {detail::merge_segments(ori, seg_s), detail::merge_segments(tar, seg_s)};
}

struct CorpusShape {
  std::size_t min_words = 3;
  std::size_t max_words = 8;
};

/// n seeded (transcript, tokens) pairs; speakers assigned round-robin.
inline std::vector<CorpusPair> make_corpus(std::size_t n, const SynthSpec& spec, std::uint64_t seed,
                                           CorpusShape shape = {}) {
  if (n == 0) throw InvalidInput("make_corpus: n must be >= 1");
  if (shape.min_words == 0 || shape.max_words < shape.min_words)
    throw InvalidInput("make_corpus: invalid word-length range");
  const auto lex = spec.lexicon();
  Rng rng(derive_seed(seed, "corpus"));
  std::vector<CorpusPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CorpusPair p;
    const std::size_t len = shape.min_words + rng.below(shape.max_words - shape.min_words + 1);
    for (std::size_t k = 0; k < len; ++k) {
      const auto tok = static_cast<Token>(rng.below(spec.vocab_size));
      p.tokens.push_back(tok);
      p.transcript.words.push_back(lex[static_cast<std::size_t>(tok)]);
    }
    p.speaker_id = i % spec.n_speakers();
    p.seed = derive_seed(seed, "pair", i);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace editgrpo

#endif  // EDITGRPO_SYNTHENV_HPP_
