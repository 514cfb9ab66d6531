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

// On-disk formats: JSONL corpora and prompts, the JSON run configuration,
// binary checkpoints with a JSON sidecar, metric CSVs and evaluation reports.
//
// Checkpoint layout (little-endian):
//   "EGRPOCK1"                      8 bytes
//   u64 vocab_size, u64 d_model, u64 n_tensors
//   per tensor: u64 name_len, name bytes, u64 rank, rank x u64 dims,
//               prod(dims) x f64, row-major

#ifndef EDITGRPO_IO_HPP_
#define EDITGRPO_IO_HPP_

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "editgrpo/common.hpp"
#include "editgrpo/corpuscheck.hpp"
#include "editgrpo/grpo.hpp"
#include "editgrpo/policy.hpp"
#include "editgrpo/synthenv.hpp"
#include "editgrpo/textedit.hpp"

namespace editgrpo {

using Json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Files and hashing

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return data;
}

inline void write_file(const fs::path& path, std::string_view data) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Hex SHA-1 of "blob <size>\0<data>", the hash git assigns to file content.
inline std::string git_blob_hash(std::string_view data) {
  const std::string header = "blob " + std::to_string(data.size()) + '\0';
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("git_blob_hash: EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("git_blob_hash: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

inline std::string hash_file(const fs::path& path) { return git_blob_hash(read_file(path)); }

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline Json json_number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// ---------------------------------------------------------------------------
// Records

inline void to_json(Json& j, const EditOp& op) {
  j = Json{{"kind", std::string(to_string(op.kind))}, {"positions", op.positions}, {"payload", op.payload}};
  if (!op.steps.empty()) {
    Json steps = Json::array();
    for (const auto& s : op.steps) steps.push_back(s);
    j["steps"] = std::move(steps);
  }
}

inline void from_json(const Json& j, EditOp& op) {
  op.kind = parse_edit_kind(j.at("kind").get<std::string>());
  op.positions = j.at("positions").get<std::vector<std::size_t>>();
  op.payload = j.at("payload").get<std::vector<std::string>>();
  op.steps.clear();
  if (j.contains("steps"))
    for (const auto& s : j.at("steps")) op.steps.push_back(s.get<EditOp>());
}

inline Json spans_json(const std::vector<IndexSpan>& spans) {
  Json out = Json::array();
  for (const auto& s : spans) out.push_back({s.first, s.last});
  return out;
}

inline std::vector<IndexSpan> spans_from(const Json& j) {
  std::vector<IndexSpan> out;
  for (const auto& s : j) {
    if (!s.is_array() || s.size() != 2) throw InvalidInput("span must be a [first, last] pair");
    out.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>()});
  }
  return out;
}

inline void to_json(Json& j, const EditAlignment& a) {
  Json kept = Json::array();
  for (const auto& [i, t] : a.kept_pairs) kept.push_back({i, t});
  j = Json{{"kept_pairs", std::move(kept)},
           {"edited_ori_spans", spans_json(a.edited_ori_spans)},
           {"edited_tar_spans", spans_json(a.edited_tar_spans)}};
}

inline void from_json(const Json& j, EditAlignment& a) {
  a.kept_pairs.clear();
  for (const auto& p : j.at("kept_pairs")) {
    if (!p.is_array() || p.size() != 2) throw InvalidInput("kept pair must be an [ori, tar] pair");
    a.kept_pairs.emplace_back(p[0].get<std::size_t>(), p[1].get<std::size_t>());
  }
  a.edited_ori_spans = spans_from(j.at("edited_ori_spans"));
  a.edited_tar_spans = spans_from(j.at("edited_tar_spans"));
}

inline void to_json(Json& j, const EditPrompt& p) {
  j = Json{{"x_ori", p.x_ori.text()},     {"x_tar", p.x_tar.text()}, {"tokens_ori", p.tokens_ori},
           {"op", p.op},                  {"alignment", p.alignment}, {"seed", p.seed},
           {"speaker_id", p.speaker_id}};
}

inline Transcript words_from(const Json& j) {
  Transcript t;
  std::istringstream in(j.get<std::string>());
  for (std::string w; in >> w;) t.words.push_back(w);
  return t;
}

inline void from_json(const Json& j, EditPrompt& p) {
  p.x_ori = words_from(j.at("x_ori"));
  p.x_tar = words_from(j.at("x_tar"));
  p.tokens_ori = j.at("tokens_ori").get<std::vector<Token>>();
  p.op = j.at("op").get<EditOp>();
  p.alignment = j.at("alignment").get<EditAlignment>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.speaker_id = j.at("speaker_id").get<std::size_t>();
}

inline void to_json(Json& j, const CorpusPair& c) {
  j = Json{{"transcript", c.transcript.text()}, {"tokens", c.tokens}, {"speaker_id", c.speaker_id}, {"seed", c.seed}};
}

inline void from_json(const Json& j, CorpusPair& c) {
  c.transcript = words_from(j.at("transcript"));
  c.tokens = j.at("tokens").get<std::vector<Token>>();
  c.speaker_id = j.at("speaker_id").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
}

template <typename T>
void write_jsonl(const fs::path& path, std::span<const T> records) {
  std::string out;
  for (const auto& r : records) {
    out += Json(r).dump();
    out.push_back('\n');
  }
  write_file(path, out);
}

template <typename T>
std::vector<T> read_jsonl(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<T> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line).get<T>());
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<EditPrompt> read_prompts(const fs::path& path, const SynthSpec& spec) {
  auto prompts = read_jsonl<EditPrompt>(path);
  const auto lex = spec.lexicon();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    try {
      validate(prompts[i], lex);
      if (prompts[i].speaker_id >= spec.n_speakers()) throw InvalidInput("speaker_id out of range");
    } catch (const Error& e) {
      throw IoError(path.string() + ": prompt " + std::to_string(i) + ": " + e.what());
    }
  }
  return prompts;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  Environment env;
  ModelShape shape;
  std::uint64_t init_seed = 7;
  PretrainConfig pretrain;
  GrpoConfig grpo;
  CorpusShape corpus;
  double heldout_fraction = 0.2;

  void validate() const {
    env.validate();
    if (shape.vocab_size != env.spec.vocab_size)
      throw InvalidInput("config: policy vocab_size must equal env vocab_size");
    if (shape.d_model == 0) throw InvalidInput("config: d_model must be positive");
    if (pretrain.batch_size == 0) throw InvalidInput("config: pretrain batch_size must be positive");
    if (!(pretrain.learning_rate >= 0.0)) throw InvalidInput("config: pretrain learning_rate must be >= 0");
    grpo.validate();
    if (corpus.min_words == 0 || corpus.min_words > corpus.max_words)
      throw InvalidInput("config: need 1 <= min_words <= max_words");
    if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0))
      throw InvalidInput("config: heldout_fraction must lie in [0, 1)");
  }
};

namespace detail {

// Reads the listed keys of a section, rejecting anything else so typos fail
// loudly instead of silently falling back to defaults.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidInput("config: section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception& e) {
      throw InvalidInput("config: " + name_ + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw InvalidInput("config: unknown key '" + name_ + "." + k + "'");
  }

 private:
  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline Json config_to_json(const RunConfig& c) {
  const auto& s = c.env.spec;
  const auto& cep = c.env.cepstrum;
  const auto& g = c.grpo;
  Json schedule = Json::array();
  for (const auto& p : g.reward.lambda_schedule)
    schedule.push_back({{"start_step", p.start_step}, {"lambda_c", p.lambda_c}, {"lambda_s", p.lambda_s}});
  return Json{
      {"env",
       {{"vocab_size", s.vocab_size},
        {"base_freq", s.base_freq},
        {"freq_step", s.freq_step},
        {"segment_ms", s.segment_ms},
        {"sample_rate", s.sample_rate},
        {"speaker_offsets", s.speaker_offsets},
        {"speaker_partial_hz", s.speaker_partial_hz},
        {"noise_amp", s.noise_amp},
        {"tone_amp", s.tone_amp},
        {"partial_amp", s.partial_amp},
        {"room_tone_amp", s.room_tone_amp}}},
      {"cepstrum",
       {{"frame_length", cep.frame_length},
        {"hop", cep.hop},
        {"fft_size", cep.fft_size},
        {"n_mels", cep.n_mels},
        {"n_ceps", cep.n_ceps},
        {"log_floor", cep.log_floor}}},
      {"corpus",
       {{"min_words", c.corpus.min_words}, {"max_words", c.corpus.max_words}, {"heldout_fraction", c.heldout_fraction}}},
      {"policy", {{"d_model", c.shape.d_model}, {"init_seed", c.init_seed}}},
      {"pretrain",
       {{"steps", c.pretrain.steps},
        {"learning_rate", c.pretrain.learning_rate},
        {"batch_size", c.pretrain.batch_size},
        {"loss_threshold", c.pretrain.loss_threshold},
        {"seed", c.pretrain.seed}}},
      {"grpo",
       {{"group_size", g.group_size},
        {"clip_eps", g.clip_eps},
        {"kl_coeff", g.kl_coeff},
        {"adv_eps", g.adv_eps},
        {"learning_rate", g.learning_rate},
        {"steps", g.steps},
        {"batch_prompts", g.batch_prompts},
        {"update_epochs", g.update_epochs},
        {"seed", g.seed}}},
      {"sampling",
       {{"temperature", g.sampling.temperature},
        {"top_p", g.sampling.top_p},
        {"top_k", g.sampling.top_k},
        {"max_len", g.sampling.max_len}}},
      {"reward",
       {{"k_w", g.reward.k_w},
        {"alpha", g.reward.alpha},
        {"k_m", g.reward.k_m},
        {"delta", g.reward.delta},
        {"gamma", g.reward.gamma},
        {"lambda_schedule", std::move(schedule)}}},
  };
}

/// Missing sections and keys keep their defaults; unknown ones are rejected.
inline RunConfig config_from_json(const Json& j) {
  RunConfig c;
  if (!j.is_object()) throw InvalidInput("config: top level must be an object");
  static const std::set<std::string> kSections = {"env",  "cepstrum", "corpus", "policy",
                                                  "pretrain", "grpo", "sampling", "reward"};
  for (const auto& [k, v] : j.items())
    if (!kSections.count(k)) throw InvalidInput("config: unknown section '" + k + "'");
  const Json empty = Json::object();
  auto section = [&](const char* name) { return detail::Section(j.contains(name) ? j.at(name) : empty, name); };

  {
    auto s = section("env");
    auto& e = c.env.spec;
    s.get("vocab_size", e.vocab_size);
    s.get("base_freq", e.base_freq);
    s.get("freq_step", e.freq_step);
    s.get("segment_ms", e.segment_ms);
    s.get("sample_rate", e.sample_rate);
    s.get("speaker_offsets", e.speaker_offsets);
    s.get("speaker_partial_hz", e.speaker_partial_hz);
    s.get("noise_amp", e.noise_amp);
    s.get("tone_amp", e.tone_amp);
    s.get("partial_amp", e.partial_amp);
    s.get("room_tone_amp", e.room_tone_amp);
    s.finish();
  }
  {
    auto s = section("cepstrum");
    auto& e = c.env.cepstrum;
    s.get("frame_length", e.frame_length);
    s.get("hop", e.hop);
    s.get("fft_size", e.fft_size);
    s.get("n_mels", e.n_mels);
    s.get("n_ceps", e.n_ceps);
    s.get("log_floor", e.log_floor);
    s.finish();
  }
  {
    auto s = section("corpus");
    s.get("min_words", c.corpus.min_words);
    s.get("max_words", c.corpus.max_words);
    s.get("heldout_fraction", c.heldout_fraction);
    s.finish();
  }
  {
    auto s = section("policy");
    s.get("d_model", c.shape.d_model);
    s.get("init_seed", c.init_seed);
    s.finish();
  }
  {
    auto s = section("pretrain");
    s.get("steps", c.pretrain.steps);
    s.get("learning_rate", c.pretrain.learning_rate);
    s.get("batch_size", c.pretrain.batch_size);
    s.get("loss_threshold", c.pretrain.loss_threshold);
    s.get("seed", c.pretrain.seed);
    s.finish();
  }
  {
    auto s = section("grpo");
    auto& g = c.grpo;
    s.get("group_size", g.group_size);
    s.get("clip_eps", g.clip_eps);
    s.get("kl_coeff", g.kl_coeff);
    s.get("adv_eps", g.adv_eps);
    s.get("learning_rate", g.learning_rate);
    s.get("steps", g.steps);
    s.get("batch_prompts", g.batch_prompts);
    s.get("update_epochs", g.update_epochs);
    s.get("seed", g.seed);
    s.finish();
  }
  {
    auto s = section("sampling");
    auto& g = c.grpo.sampling;
    s.get("temperature", g.temperature);
    s.get("top_p", g.top_p);
    s.get("top_k", g.top_k);
    s.get("max_len", g.max_len);
    s.finish();
  }
  {
    auto s = section("reward");
    auto& r = c.grpo.reward;
    s.get("k_w", r.k_w);
    s.get("alpha", r.alpha);
    s.get("k_m", r.k_m);
    s.get("delta", r.delta);
    s.get("gamma", r.gamma);
    Json schedule;
    s.get("lambda_schedule", schedule);
    s.finish();
    if (!schedule.is_null()) {
      r.lambda_schedule.clear();
      for (const auto& p : schedule) {
        detail::Section ps(p, "reward.lambda_schedule[]");
        LambdaPhase phase;
        ps.get("start_step", phase.start_step);
        ps.get("lambda_c", phase.lambda_c);
        ps.get("lambda_s", phase.lambda_s);
        ps.finish();
        r.lambda_schedule.push_back(phase);
      }
    }
  }
  c.shape.vocab_size = c.env.spec.vocab_size;
  c.validate();
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw InvalidInput("config '" + path.string() + "': " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const InvalidInput& e) {
    throw InvalidInput("'" + path.string() + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr std::string_view kCheckpointMagic = "EGRPOCK1";

namespace detail {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

inline void put_u64(std::string& out, std::uint64_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

class Reader {
 public:
  Reader(std::string_view data, std::string path) : data_(data), path_(std::move(path)) {}

  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_) throw IoError("checkpoint '" + path_ + "' is truncated");
    const auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    std::memcpy(&v, take(sizeof v).data(), sizeof v);
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_checkpoint(const PolicyParams& p) {
  std::string out(kCheckpointMagic);
  detail::put_u64(out, p.shape.vocab_size);
  detail::put_u64(out, p.shape.d_model);
  detail::put_u64(out, 5);
  for_each_tensor(p, [&](std::string_view name, auto data, const std::vector<std::size_t>& dims) {
    detail::put_u64(out, name.size());
    out.append(name);
    detail::put_u64(out, dims.size());
    for (auto d : dims) detail::put_u64(out, d);
    out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(double));
  });
  return out;
}

inline PolicyParams deserialize_checkpoint(std::string_view data, const std::string& path = "<memory>") {
  detail::Reader r(data, path);
  if (r.take(kCheckpointMagic.size()) != kCheckpointMagic)
    throw IoError("'" + path + "' is not an editgrpo checkpoint");
  ModelShape shape;
  shape.vocab_size = r.u64();
  shape.d_model = r.u64();
  if (shape.vocab_size == 0 || shape.d_model == 0 || shape.vocab_size > (1u << 20) || shape.d_model > (1u << 16))
    throw IoError("checkpoint '" + path + "' has an implausible shape");
  PolicyParams p = PolicyParams::zeros(shape);
  if (r.u64() != 5) throw IoError("checkpoint '" + path + "' has the wrong tensor count");
  for_each_tensor(p, [&](std::string_view name, std::span<double> dst, const std::vector<std::size_t>& dims) {
    const auto len = r.u64();
    if (r.take(len) != name) throw IoError("checkpoint '" + path + "': expected tensor " + std::string(name));
    if (r.u64() != dims.size()) throw IoError("checkpoint '" + path + "': bad rank for " + std::string(name));
    for (auto d : dims)
      if (r.u64() != d) throw IoError("checkpoint '" + path + "': bad shape for " + std::string(name));
    std::memcpy(dst.data(), r.take(dst.size() * sizeof(double)).data(), dst.size() * sizeof(double));
  });
  if (!r.done()) throw IoError("checkpoint '" + path + "' has trailing bytes");
  return p;
}

/// Writes <path> and <path>.json (shape, tensor listing and content hash).
inline void save_checkpoint(const fs::path& path, const PolicyParams& p) {
  const std::string bytes = serialize_checkpoint(p);
  write_file(path, bytes);
  Json tensors = Json::array();
  for_each_tensor(p, [&](std::string_view name, auto, const std::vector<std::size_t>& dims) {
    tensors.push_back({{"name", std::string(name)}, {"shape", dims}});
  });
  const Json sidecar{{"format", std::string(kCheckpointMagic)},
                     {"vocab_size", p.shape.vocab_size},
                     {"d_model", p.shape.d_model},
                     {"parameter_count", parameter_count(p)},
                     {"tensors", std::move(tensors)},
                     {"content_hash", git_blob_hash(bytes)}};
  write_file(fs::path(path.string() + ".json"), sidecar.dump(2) + "\n");
}

inline PolicyParams load_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw StartupError("checkpoint '" + path.string() + "' does not exist");
  return deserialize_checkpoint(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Tables and reports

inline std::string metrics_csv(std::span<const StepMetrics> rows) {
  std::string out = "step,mean_reward,mean_wer,mean_mcd,mean_sim,mean_kl,clip_frac,lambda_c,lambda_s,objective\n";
  for (const auto& m : rows) {
    out += std::to_string(m.step);
    for (double v : {m.mean_reward, m.mean_wer, m.mean_mcd, m.mean_sim, m.mean_kl, m.clip_frac, m.lambda_c,
                     m.lambda_s, m.objective})
      out += "," + format_double(v);
    out.push_back('\n');
  }
  return out;
}

inline std::string rollouts_csv(std::span<const RolloutRecord> rows) {
  std::string out = "step,prompt_index,rollout,w,s,m,r_wer,r_mcd,r_sim,r_total\n";
  for (const auto& r : rows) {
    const auto& b = r.reward;
    out += std::to_string(r.step) + "," + std::to_string(r.prompt_index) + "," + std::to_string(r.rollout);
    for (double v : {b.w, b.s, b.m.value_or(std::nan("")), b.r_wer, b.r_mcd, b.r_sim, b.r_total})
      out += "," + format_double(v);
    out.push_back('\n');
  }
  return out;
}

inline std::string losses_csv(std::span<const double> losses) {
  std::string out = "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out += std::to_string(i) + "," + format_double(losses[i]) + "\n";
  return out;
}

inline std::string tokens_text(std::span<const Token> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(tokens[i]);
  }
  return out;
}

inline std::string eval_csv(const EvalReport& rep) {
  std::string out = "index,tokens,w,s,m,r_wer,r_mcd,r_sim,r_total\n";
  for (const auto& row : rep.rows) {
    const auto& b = row.reward;
    out += std::to_string(row.index) + "," + tokens_text(row.tokens);
    for (double v : {b.w, b.s, b.m.value_or(std::nan("")), b.r_wer, b.r_mcd, b.r_sim, b.r_total})
      out += "," + format_double(v);
    out.push_back('\n');
  }
  return out;
}

inline Json eval_json(const EvalReport& rep) {
  Json rows = Json::array();
  for (const auto& row : rep.rows) {
    const auto& b = row.reward;
    rows.push_back({{"index", row.index},
                    {"tokens", row.tokens},
                    {"w", b.w},
                    {"s", b.s},
                    {"m", b.m ? Json(*b.m) : Json(nullptr)},
                    {"r_wer", b.r_wer},
                    {"r_mcd", b.r_mcd},
                    {"r_sim", b.r_sim},
                    {"r_total", b.r_total}});
  }
  return Json{{"n_prompts", rep.n_prompts},     {"mean_wer", rep.mean_wer},
              {"median_wer", rep.median_wer},   {"mean_mcd", json_number(rep.mean_mcd)},
              {"n_mcd", rep.n_mcd},             {"mean_sim", rep.mean_sim},
              {"mean_reward", rep.mean_reward}, {"rows", std::move(rows)}};
}

}  // namespace editgrpo

#endif  // EDITGRPO_IO_HPP_
