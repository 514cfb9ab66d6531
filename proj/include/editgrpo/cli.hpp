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

// Commands behind the editgrpo tool. Each writes into a run directory:
//
//   <out>/manifest.json    written before any computation, finalized at exit
//   <out>/metrics.csv      per-step losses or GRPO metrics
//   <out>/checkpoints/     binary checkpoints plus JSON sidecars
//   <out>/reports/         evaluation reports and rollout tables
//
// gen-corpus additionally writes corpus.jsonl, prompts.jsonl (training split)
// and heldout.jsonl at the top of the run directory.

#ifndef EDITGRPO_CLI_HPP_
#define EDITGRPO_CLI_HPP_

#include <chrono>
#include <ctime>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "editgrpo/common.hpp"
#include "editgrpo/corpuscheck.hpp"
#include "editgrpo/grpo.hpp"
#include "editgrpo/io.hpp"
#include "editgrpo/policy.hpp"
#include "editgrpo/synthenv.hpp"
#include "editgrpo/textedit.hpp"

namespace editgrpo {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Everything needed to re-run a command: its arguments, the full resolved
/// configuration and the content hashes of its inputs.
struct RunManifest {
  std::string command;
  Json args = Json::object();
  RunConfig config;
  Json seeds = Json::object();
  Json inputs = Json::array();  // [{path, hash}]
  Json outputs = Json::object();
  std::string started_at;
  std::string finished_at;
  std::string status = "running";

  Json to_json() const {
    return Json{{"tool", "editgrpo"},       {"version", std::string(kToolVersion)},
                {"command", command},       {"args", args},
                {"config", config_to_json(config)}, {"seeds", seeds},
                {"inputs", inputs},         {"outputs", outputs},
                {"started_at", started_at}, {"finished_at", finished_at},
                {"status", status}};
  }

  static RunManifest from_json(const Json& j) {
    RunManifest m;
    try {
      if (j.at("tool") != "editgrpo") throw InvalidInput("not an editgrpo manifest");
      m.command = j.at("command").get<std::string>();
      m.args = j.at("args");
      m.config = config_from_json(j.at("config"));
      m.seeds = j.at("seeds");
      m.inputs = j.at("inputs");
      m.outputs = j.value("outputs", Json::object());
      m.started_at = j.value("started_at", "");
      m.finished_at = j.value("finished_at", "");
      m.status = j.value("status", "");
    } catch (const Json::exception& e) {
      throw InvalidInput(std::string("manifest: ") + e.what());
    }
    return m;
  }

  void add_input(const fs::path& path) {
    if (!fs::exists(path)) throw StartupError("input '" + path.string() + "' does not exist");
    inputs.push_back({{"path", path.string()}, {"hash", hash_file(path)}});
  }

  void write(const fs::path& dir) const { write_file(dir / "manifest.json", to_json().dump(2) + "\n"); }

  void finish(const fs::path& dir) {
    finished_at = utc_timestamp();
    status = "ok";
    write(dir);
  }
};

/// Starts a manifest and writes it before the command does any work.
inline RunManifest begin_manifest(std::string command, Json args, const RunConfig& cfg, const fs::path& out) {
  RunManifest m;
  m.command = std::move(command);
  m.args = std::move(args);
  m.config = cfg;
  m.started_at = utc_timestamp();
  m.write(out);
  return m;
}

// ---------------------------------------------------------------------------
// gen-corpus

struct GenCorpusArgs {
  std::size_t n = 100;
  std::uint64_t seed = 1;
  fs::path out;
};

struct CorpusSplit {
  std::vector<CorpusPair> corpus;
  std::vector<EditPrompt> train;
  std::vector<EditPrompt> heldout;
};

/// Pairs, then one editing prompt per pair. The last
/// floor(n * heldout_fraction) prompts form the held-out split.
inline CorpusSplit generate_corpus(std::size_t n, std::uint64_t seed, const RunConfig& cfg) {
  if (n == 0) throw InvalidInput("gen-corpus: --n must be positive");
  CorpusSplit s;
  s.corpus = make_corpus(n, cfg.env.spec, seed, cfg.corpus);
  const auto lex = cfg.env.lexicon();
  Rng rng(derive_seed(seed, "prompts"));
  const auto n_held = static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg.heldout_fraction));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = s.corpus[i];
    auto p = synth_prompt(c.transcript, c.tokens, c.speaker_id, c.seed, rng, lex);
    (i < n - n_held ? s.train : s.heldout).push_back(std::move(p));
  }
  return s;
}

inline void cmd_gen_corpus(const GenCorpusArgs& a, const RunConfig& cfg) {
  cfg.validate();
  RunManifest m = begin_manifest("gen-corpus", {{"n", a.n}, {"seed", a.seed}, {"out", a.out.string()}}, cfg, a.out);
  m.seeds = {{"root", a.seed}, {"corpus", derive_seed(a.seed, "corpus")}, {"prompts", derive_seed(a.seed, "prompts")}};
  m.write(a.out);

  const CorpusSplit s = generate_corpus(a.n, a.seed, cfg);
  write_jsonl<CorpusPair>(a.out / "corpus.jsonl", s.corpus);
  write_jsonl<EditPrompt>(a.out / "prompts.jsonl", s.train);
  write_jsonl<EditPrompt>(a.out / "heldout.jsonl", s.heldout);
  m.outputs = {{"corpus", "corpus.jsonl"},
               {"prompts", "prompts.jsonl"},
               {"heldout", "heldout.jsonl"},
               {"split", {{"train", s.train.size()}, {"heldout", s.heldout.size()}}}};
  m.finish(a.out);
}

// ---------------------------------------------------------------------------
// pretrain

struct PretrainArgs {
  fs::path corpus;  // a prompts JSONL file, or a gen-corpus run directory
  fs::path out;
  std::optional<std::size_t> steps;
};

inline fs::path resolve_prompts(const fs::path& p) { return fs::is_directory(p) ? p / "prompts.jsonl" : p; }

inline std::vector<TrainingExample> training_examples(std::span<const EditPrompt> prompts, const ModelShape& shape) {
  std::vector<TrainingExample> ex;
  ex.reserve(prompts.size());
  for (const auto& p : prompts) ex.push_back({encode_prompt(p, shape), target_actions(p, shape)});
  return ex;
}

inline void cmd_pretrain(const PretrainArgs& a, RunConfig cfg) {
  if (a.steps) cfg.pretrain.steps = *a.steps;
  cfg.validate();
  const fs::path prompts_path = resolve_prompts(a.corpus);
  Json args{{"corpus", a.corpus.string()}, {"out", a.out.string()}};
  if (a.steps) args["steps"] = *a.steps;
  RunManifest m = begin_manifest("pretrain", std::move(args), cfg, a.out);
  m.seeds = {{"init", cfg.init_seed}, {"pretrain", cfg.pretrain.seed}};
  m.add_input(prompts_path);
  m.write(a.out);

  const auto prompts = read_prompts(prompts_path, cfg.env.spec);
  PolicyParams params = PolicyParams::random_init(cfg.shape, cfg.init_seed);
  const auto losses = pretrain_nll(params, training_examples(prompts, cfg.shape), cfg.pretrain);
  save_checkpoint(a.out / "checkpoints" / "reference.ckpt", params);
  write_file(a.out / "metrics.csv", losses_csv(losses));
  m.outputs = {{"checkpoint", "checkpoints/reference.ckpt"}, {"metrics", "metrics.csv"}, {"steps_run", losses.size()}};
  m.finish(a.out);
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  fs::path prompts;
  fs::path ref;
  fs::path out;
};

inline void cmd_train(const TrainArgs& a, const RunConfig& cfg, std::size_t threads) {
  cfg.validate();
  const fs::path prompts_path = resolve_prompts(a.prompts);
  RunManifest m = begin_manifest(
      "train", {{"prompts", a.prompts.string()}, {"ref", a.ref.string()}, {"out", a.out.string()}}, cfg, a.out);
  m.seeds = {{"grpo", cfg.grpo.seed}};
  m.add_input(prompts_path);
  m.add_input(a.ref);
  m.write(a.out);

  const auto prompts = read_prompts(prompts_path, cfg.env.spec);
  const PolicyParams reference = load_checkpoint(a.ref);
  const TrainResult res = train(cfg.grpo, prompts, reference, cfg.env, threads);
  save_checkpoint(a.out / "checkpoints" / "final.ckpt", res.params);
  write_file(a.out / "metrics.csv", metrics_csv(res.metrics));
  write_file(a.out / "reports" / "rollouts.csv", rollouts_csv(res.rollouts));
  m.outputs = {{"checkpoint", "checkpoints/final.ckpt"},
               {"metrics", "metrics.csv"},
               {"rollouts", "reports/rollouts.csv"}};
  m.finish(a.out);
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  fs::path checkpoint;
  fs::path prompts;
  fs::path out;
};

inline void cmd_eval(const EvalArgs& a, const RunConfig& cfg, std::size_t threads) {
  cfg.validate();
  RunManifest m = begin_manifest(
      "eval", {{"checkpoint", a.checkpoint.string()}, {"prompts", a.prompts.string()}, {"out", a.out.string()}},
      cfg, a.out);
  m.add_input(a.checkpoint);
  m.add_input(a.prompts);
  m.write(a.out);

  const PolicyParams params = load_checkpoint(a.checkpoint);
  const auto prompts = read_prompts(a.prompts, cfg.env.spec);
  const EvalReport rep = evaluate(params, prompts, cfg.env, cfg.grpo.reward, cfg.grpo.sampling.max_len, threads);
  write_file(a.out / "reports" / "eval.json", eval_json(rep).dump(2) + "\n");
  write_file(a.out / "reports" / "eval.csv", eval_csv(rep));
  m.outputs = {{"report_json", "reports/eval.json"}, {"report_csv", "reports/eval.csv"}};
  m.finish(a.out);
}

// ---------------------------------------------------------------------------
// replay

/// Re-runs the command recorded in a manifest, optionally into another
/// directory. Refuses to run when an input's content hash has changed.
inline void cmd_replay(const fs::path& manifest_path, const std::optional<fs::path>& out, std::size_t threads) {
  Json j;
  try {
    j = Json::parse(read_file(manifest_path));
  } catch (const Json::exception& e) {
    throw InvalidInput("manifest '" + manifest_path.string() + "': " + e.what());
  }
  const RunManifest m = RunManifest::from_json(j);
  for (const auto& in : m.inputs) {
    const fs::path p = in.at("path").get<std::string>();
    if (!fs::exists(p)) throw IoError("replay: input '" + p.string() + "' no longer exists");
    if (hash_file(p) != in.at("hash").get<std::string>())
      throw IoError("replay: input '" + p.string() + "' changed since the recorded run");
  }
  const fs::path dir = out ? *out : fs::path(m.args.at("out").get<std::string>());
  const Json& args = m.args;
  if (m.command == "gen-corpus") {
    cmd_gen_corpus({args.at("n").get<std::size_t>(), args.at("seed").get<std::uint64_t>(), dir}, m.config);
  } else if (m.command == "pretrain") {
    // The recorded config already has the --steps override applied.
    cmd_pretrain({args.at("corpus").get<std::string>(), dir, std::nullopt}, m.config);
  } else if (m.command == "train") {
    cmd_train({args.at("prompts").get<std::string>(), args.at("ref").get<std::string>(), dir}, m.config, threads);
  } else if (m.command == "eval") {
    cmd_eval({args.at("checkpoint").get<std::string>(), args.at("prompts").get<std::string>(), dir}, m.config,
             threads);
  } else {
    throw InvalidInput("manifest: unknown command '" + m.command + "'");
  }
}

}  // namespace editgrpo

#endif  // EDITGRPO_CLI_HPP_
