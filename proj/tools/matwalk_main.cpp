// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>

#include "matwalk/io.hpp"
#include "matwalk/orchestrator.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& preset,
            std::uint64_t seed, bool seed_set, int threads, bool threads_set,
            const std::string& out_dir) {
  matwalk::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) {
      cfg = matwalk::parse_config(matwalk::io::read_text_file(config_path));
    } else if (!preset.empty()) {
      cfg = matwalk::config_for_preset(preset);
    } else {
      std::fprintf(stderr, "run: need --config or --preset\n");
      return 2;
    }
    if (seed_set) cfg.master_seed = seed;
    if (threads_set) cfg.threads = threads;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  try {
    const auto man = matwalk::run_experiment(cfg);
    for (const auto& c : man.checks)
      std::printf("[%s] %s\n", c.pass ? "pass" : "FAIL", c.name.c_str());
    std::printf("%s: %zu checks, all_pass=%s, out=%s\n",
                cfg.preset_name.empty() ? "custom" : cfg.preset_name.c_str(),
                man.checks.size(), man.all_pass ? "true" : "false",
                cfg.out_dir.c_str());
    return man.all_pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failed: %s\n", e.what());
    return 1;
  }
}

int cmd_verify(const std::string& manifest_path) {
  try {
    const auto res = matwalk::verify_run(manifest_path);
    for (const auto& m : res.messages) std::printf("%s\n", m.c_str());
    std::printf("checksums: %s, verdicts: %s\n",
                res.checksums_ok ? "ok" : "MISMATCH",
                res.verdicts_match ? "match" : "MISMATCH");
    return res.ok() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "verify failed: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matwalk: products of random matrices, walk and operator lab"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir, manifest_path;
  std::uint64_t seed = 0;
  int threads = 0;

  auto* run = app.add_subcommand("run", "run a config-driven experiment");
  run->add_option("--config", config_path, "config JSON path");
  run->add_option("--preset", preset, "built-in preset name");
  auto* seed_opt = run->add_option("--seed", seed, "master seed override");
  auto* thr_opt = run->add_option("--threads", threads, "thread count (0 = auto)");
  run->add_option("--out", out_dir, "output directory override");

  auto* verify = app.add_subcommand("verify", "recompute verdicts from artifacts");
  verify->add_option("manifest", manifest_path, "path to manifest.json")
      ->required();

  auto* lp = app.add_subcommand("list-presets", "list built-in presets");
  auto* ps = app.add_subcommand("print-schema", "print the config schema");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed())
    return cmd_run(config_path, preset, seed, seed_opt->count() > 0, threads,
                   thr_opt->count() > 0, out_dir);
  if (verify->parsed()) return cmd_verify(manifest_path);
  if (lp->parsed()) {
    for (const auto& p : matwalk::presets())
      std::printf("%-10s %s\n", p.name.c_str(), p.description.c_str());
    return 0;
  }
  if (ps->parsed()) {
    std::printf("%s", matwalk::config_schema_text().c_str());
    return 0;
  }
  return 2;
}
