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

// editgrpo: corpus generation, pretraining, GRPO training and evaluation.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "editgrpo/cli.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

editgrpo::RunConfig config_or_default(const std::string& path) {
  return path.empty() ? editgrpo::RunConfig{} : editgrpo::load_config(path);
}

std::filesystem::path absolute(const std::string& p) { return std::filesystem::absolute(p).lexically_normal(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Editing-oriented GRPO for speech editing, desk scale"};
  app.require_subcommand(1);
  std::size_t threads = editgrpo::default_threads();
  app.add_option("--threads", threads, "Worker thread cap")->check(CLI::PositiveNumber);

  editgrpo::GenCorpusArgs gen;
  std::string gen_out, gen_config;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "Synthesize a speech-text corpus and editing prompts");
  gen_cmd->add_option("--n", gen.n, "Number of pairs")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Root seed")->required();
  gen_cmd->add_option("--out", gen_out, "Run directory")->required();
  gen_cmd->add_option("--config", gen_config, "JSON config file");

  std::string pre_corpus, pre_out, pre_config;
  std::optional<std::size_t> pre_steps;
  auto* pre_cmd = app.add_subcommand("pretrain", "Supervised pretraining of the reference policy");
  pre_cmd->add_option("--corpus", pre_corpus, "Prompts JSONL or gen-corpus run directory")->required();
  pre_cmd->add_option("--config", pre_config, "JSON config file");
  pre_cmd->add_option("--out", pre_out, "Run directory")->required();
  pre_cmd->add_option("--steps", pre_steps, "Override pretrain.steps");

  std::string tr_prompts, tr_ref, tr_out, tr_config;
  auto* tr_cmd = app.add_subcommand("train", "GRPO training against a frozen reference");
  tr_cmd->add_option("--prompts", tr_prompts, "Training prompts JSONL or gen-corpus run directory")->required();
  tr_cmd->add_option("--ref", tr_ref, "Reference checkpoint")->required();
  tr_cmd->add_option("--config", tr_config, "JSON config file");
  tr_cmd->add_option("--out", tr_out, "Run directory")->required();

  std::string ev_ckpt, ev_prompts, ev_out, ev_config;
  auto* ev_cmd = app.add_subcommand("eval", "Greedy evaluation on held-out prompts");
  ev_cmd->add_option("--checkpoint", ev_ckpt, "Checkpoint to evaluate")->required();
  ev_cmd->add_option("--prompts", ev_prompts, "Held-out prompts JSONL")->required();
  ev_cmd->add_option("--config", ev_config, "JSON config file");
  ev_cmd->add_option("--out", ev_out, "Run directory")->required();

  std::string rp_manifest, rp_out;
  auto* rp_cmd = app.add_subcommand("replay", "Re-run a command from its manifest");
  rp_cmd->add_option("--manifest", rp_manifest, "manifest.json of an earlier run")->required();
  rp_cmd->add_option("--out", rp_out, "Run directory (defaults to the recorded one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (gen_cmd->parsed()) {
      gen.out = absolute(gen_out);
      editgrpo::cmd_gen_corpus(gen, config_or_default(gen_config));
    } else if (pre_cmd->parsed()) {
      editgrpo::cmd_pretrain({absolute(pre_corpus), absolute(pre_out), pre_steps}, config_or_default(pre_config));
    } else if (tr_cmd->parsed()) {
      editgrpo::cmd_train({absolute(tr_prompts), absolute(tr_ref), absolute(tr_out)}, config_or_default(tr_config),
                          threads);
    } else if (ev_cmd->parsed()) {
      editgrpo::cmd_eval({absolute(ev_ckpt), absolute(ev_prompts), absolute(ev_out)}, config_or_default(ev_config),
                         threads);
    } else if (rp_cmd->parsed()) {
      std::optional<std::filesystem::path> out;
      if (!rp_out.empty()) out = absolute(rp_out);
      editgrpo::cmd_replay(absolute(rp_manifest), out, threads);
    }
  } catch (const editgrpo::InvalidInput& e) {
    std::cerr << "editgrpo: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "editgrpo: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
