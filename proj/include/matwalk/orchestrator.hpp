// SPDX-License-Identifier: Apache-2.0
//
// Config-driven experiment runner: law validation, recentering, the ergodic
// core, the Hoelder-space suite, the operator grid and the conditioned-walk
// suite, with JSON/CSV artifacts, a reproduction manifest and a verify mode
// that recomputes every verdict from the stored artifacts alone.
#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "matwalk/config.hpp"

namespace matwalk {

constexpr const char* kCodeVersion = "matwalk 0.1.0";

struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::json details;
};

struct RunManifest {
  int schema_version = kSchemaVersion;
  std::string code_version = kCodeVersion;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> artifacts;  // path, fnv64
  std::vector<CheckResult> checks;  // details live in summary.json
  std::vector<std::pair<std::string, double>> stage_wall_ms;
  bool all_pass = false;
};

// Executes the enabled stages, writes summary.json, per-stage CSVs and
// manifest.json under cfg.out_dir, and returns the manifest.
RunManifest run_experiment(const ExperimentConfig& cfg);

// Recomputes verdicts and artifact digests from a stored run directory.
struct VerifyResult {
  bool checksums_ok = false;
  bool verdicts_match = false;
  std::vector<std::string> messages;
  [[nodiscard]] bool ok() const { return checksums_ok && verdicts_match; }
};
VerifyResult verify_run(const std::filesystem::path& manifest_path);

// Shared verdict rules: pass/fail recomputed from a check's details.
bool evaluate_check(const std::string& name, const nlohmann::json& details);

}  // namespace matwalk
