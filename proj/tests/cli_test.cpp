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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <set>
#include <string>

#include "editgrpo/cli.hpp"

namespace editgrpo {
namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("editgrpo_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig small_config() {
  RunConfig c;
  c.shape.d_model = 8;
  c.pretrain.steps = 40;
  c.grpo.steps = 4;
  c.grpo.batch_prompts = 2;
  c.grpo.learning_rate = 1e-2;
  c.grpo.sampling.max_len = 10;
  c.grpo.reward.lambda_schedule = {{0, 0.9, 0.1}, {2, 0.8, 0.2}};
  return c;
}

int run_cli(const std::string& args, std::string* output) {
  const fs::path log = scratch("cli_log.txt");
  const std::string cmd = std::string(EDITGRPO_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) *output = read_file(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Hash, GitBlobIds) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Config, RoundTripAndStrictKeys) {
  RunConfig c = small_config();
  c.env.spec.noise_amp = 0.03;
  c.grpo.kl_coeff = 0.05;
  const Json j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
  Json bad = j;
  bad["grpo"]["klcoef"] = 1.0;
  EXPECT_THROW(config_from_json(bad), InvalidInput);
  bad = j;
  bad["extra"] = Json::object();
  EXPECT_THROW(config_from_json(bad), InvalidInput);
  // Partial files fall back to defaults.
  const RunConfig d = config_from_json(Json{{"grpo", {{"steps", 3}}}});
  EXPECT_EQ(d.grpo.steps, 3u);
  EXPECT_EQ(d.grpo.clip_eps, 0.2);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const ModelShape shape{16, 8};
  const auto params = PolicyParams::random_init(shape, 12);
  const auto back = deserialize_checkpoint(serialize_checkpoint(params));
  EXPECT_EQ(back, params);

  const fs::path dir = scratch("ckpt");
  save_checkpoint(dir / "a.ckpt", params);
  EXPECT_TRUE(fs::exists(dir / "a.ckpt.json"));
  const auto loaded = load_checkpoint(dir / "a.ckpt");
  const auto corpus = generate_corpus(10, 3, RunConfig{});
  const auto ex = training_examples(corpus.train, shape);
  EXPECT_EQ(nll_loss_and_grad(loaded, ex).loss, nll_loss_and_grad(params, ex).loss);

  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), StartupError);
  std::string bytes = serialize_checkpoint(params);
  bytes[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bytes), Error);
  EXPECT_THROW(deserialize_checkpoint(serialize_checkpoint(params).substr(0, 100)), Error);
}

TEST(GenCorpus, DeterministicAndValid) {
  const RunConfig cfg;
  const fs::path a = scratch("gen_a"), b = scratch("gen_b");
  cmd_gen_corpus({100, 1, a}, cfg);
  cmd_gen_corpus({100, 1, b}, cfg);
  for (const char* f : {"corpus.jsonl", "prompts.jsonl", "heldout.jsonl"})
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  const auto train = read_prompts(a / "prompts.jsonl", cfg.env.spec);
  const auto held = read_prompts(a / "heldout.jsonl", cfg.env.spec);
  EXPECT_EQ(train.size(), 80u);
  EXPECT_EQ(held.size(), 20u);
  const Json m = Json::parse(read_file(a / "manifest.json"));
  EXPECT_EQ(m.at("status"), "ok");
  EXPECT_EQ(m.at("outputs").at("split").at("heldout"), 20);
}

TEST(GenCorpus, CoversAllEditKinds) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = generate_corpus(50, seed, RunConfig{});
    std::set<EditKind> kinds;
    for (const auto* part : {&s.train, &s.heldout})
      for (const auto& p : *part) kinds.insert(p.op.kind);
    EXPECT_EQ(kinds.size(), kAllEditKinds.size()) << "seed " << seed;
  }
}

TEST(Pretrain, ZeroStepsEqualsInitAndTrainingHelps) {
  const RunConfig cfg = small_config();
  const fs::path corpus = scratch("pre_corpus"), zero = scratch("pre_zero"), full = scratch("pre_full");
  cmd_gen_corpus({60, 2, corpus}, cfg);
  cmd_pretrain({corpus, zero, std::size_t{0}}, cfg);
  EXPECT_EQ(load_checkpoint(zero / "checkpoints" / "reference.ckpt"),
            PolicyParams::random_init(cfg.shape, cfg.init_seed));
  cmd_pretrain({corpus, full, std::nullopt}, cfg);
  const auto prompts = read_prompts(corpus / "prompts.jsonl", cfg.env.spec);
  const auto init = evaluate(PolicyParams::random_init(cfg.shape, cfg.init_seed), prompts, cfg.env, cfg.grpo.reward, 24);
  const auto trained = evaluate(load_checkpoint(full / "checkpoints" / "reference.ckpt"), prompts, cfg.env,
                                cfg.grpo.reward, 24);
  EXPECT_LT(trained.mean_wer, init.mean_wer);
}

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg_ = small_config();
    corpus_ = scratch("pipe_corpus");
    ref_ = scratch("pipe_ref");
    cmd_gen_corpus({40, 4, corpus_}, cfg_);
    cmd_pretrain({corpus_, ref_, std::nullopt}, cfg_);
  }
  static inline RunConfig cfg_;
  static inline fs::path corpus_, ref_;
};

TEST_F(Pipeline, TrainMetricsAndReplay) {
  const fs::path out = scratch("pipe_train"), again = scratch("pipe_train_replay");
  cmd_train({corpus_, ref_ / "checkpoints" / "reference.ckpt", out}, cfg_, 1);
  const std::string csv = read_file(out / "metrics.csv");
  std::vector<std::string> lines;
  for (std::size_t pos = 0, nl; (nl = csv.find('\n', pos)) != std::string::npos; pos = nl + 1)
    lines.push_back(csv.substr(pos, nl - pos));
  ASSERT_EQ(lines.size(), 1 + cfg_.grpo.steps);
  EXPECT_EQ(lines[0].rfind("step,mean_reward,mean_wer,mean_mcd,mean_sim,mean_kl,clip_frac,lambda_c,lambda_s", 0), 0u);
  for (std::size_t s = 0; s < cfg_.grpo.steps; ++s) {
    const std::string want = s < 2 ? ",0.9,0.1," : ",0.8,0.2,";
    EXPECT_NE(lines[1 + s].find(want), std::string::npos) << lines[1 + s];
  }
  const Json m = Json::parse(read_file(out / "manifest.json"));
  EXPECT_EQ(m.at("config").at("reward").at("lambda_schedule").size(), 2u);

  cmd_replay(out / "manifest.json", again, 2);
  for (const char* f : {"metrics.csv", "checkpoints/final.ckpt", "reports/rollouts.csv"})
    EXPECT_EQ(read_file(out / f), read_file(again / f)) << f;
}

TEST_F(Pipeline, EvalIsRepeatable) {
  const fs::path a = scratch("pipe_eval_a"), b = scratch("pipe_eval_b");
  const fs::path ckpt = ref_ / "checkpoints" / "reference.ckpt";
  cmd_eval({ckpt, corpus_ / "heldout.jsonl", a}, cfg_, 1);
  cmd_eval({ckpt, corpus_ / "heldout.jsonl", b}, cfg_, 2);
  EXPECT_EQ(read_file(a / "reports" / "eval.json"), read_file(b / "reports" / "eval.json"));
  EXPECT_EQ(read_file(a / "reports" / "eval.csv"), read_file(b / "reports" / "eval.csv"));
}

TEST_F(Pipeline, ReplayRefusesChangedInputs) {
  const fs::path copy = scratch("pipe_changed");
  fs::create_directories(copy);
  fs::copy_file(corpus_ / "heldout.jsonl", copy / "heldout.jsonl");
  const fs::path out = scratch("pipe_changed_eval");
  cmd_eval({ref_ / "checkpoints" / "reference.ckpt", copy / "heldout.jsonl", out}, cfg_, 1);
  write_file(copy / "heldout.jsonl", read_file(copy / "heldout.jsonl") + "\n");
  EXPECT_THROW(cmd_replay(out / "manifest.json", scratch("pipe_changed_replay"), 1), IoError);
}

TEST(Binary, ExitCodes) {
  std::string out;
  const fs::path missing = scratch("no_such_dir") / "missing.ckpt";
  const fs::path dir = scratch("bin_eval");
  EXPECT_EQ(run_cli("eval --checkpoint " + missing.string() + " --prompts x.jsonl --out " + dir.string(), &out), 2);
  EXPECT_NE(out.find(missing.string()), std::string::npos) << out;

  EXPECT_EQ(run_cli("gen-corpus --n 5", &out), 1);
  EXPECT_EQ(run_cli("no-such-command", &out), 1);

  const fs::path cfg = scratch("bad_config.json");
  write_file(cfg, R"({"grpo": {"stepz": 3}})");
  EXPECT_EQ(run_cli("gen-corpus --n 5 --seed 1 --out " + scratch("bin_gen").string() + " --config " + cfg.string(), &out), 1);
  EXPECT_NE(out.find("stepz"), std::string::npos) << out;

  const fs::path gen = scratch("bin_gen_ok");
  EXPECT_EQ(run_cli("gen-corpus --n 5 --seed 1 --out " + gen.string(), &out), 0) << out;
  EXPECT_TRUE(fs::exists(gen / "manifest.json"));
}

}  // namespace
}  // namespace editgrpo
