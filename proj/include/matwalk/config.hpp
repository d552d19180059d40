// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: JSON with a strict schema (unknown keys are
// rejected with their path, budgets are capped), preset resolution and the
// canonical dump used for config hashing.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "matwalk/law.hpp"

namespace matwalk {

struct LyapunovBudget {
  std::size_t n_steps = 2048;
  std::size_t n_paths = 256;
  std::size_t burn_in = 256;
};
struct StationaryBudget {
  std::size_t burn_in = 1024;
  std::size_t n_samples = 65536;
};
struct ContractionBudget {
  double eps = 0.0;  // 0 = use delta0/8
  std::size_t n_max = 64;
  std::size_t n_pairs = 32;
  std::size_t n_reps = 192;
};
struct Sigma2Budget {
  unsigned n_lo_exp = 6;
  unsigned n_hi_exp = 12;
  std::size_t n_paths_growth = 4096;
  std::size_t n_paths_cov = 16384;
  std::size_t max_lag = 64;
};
struct BanachBudget {
  std::size_t n_points = 512;
  std::size_t n_pairs = 1024;
  std::vector<double> t_values = {0.1, 0.5, 1.0};
  std::vector<double> l_grid = {2.0, 4.0, 8.0, 16.0};
  std::size_t nu_samples = 65536;
  std::vector<std::size_t> iterate_n_grid = {1, 2, 4, 8, 16, 32};
  std::size_t iterate_reps = 128;
};
struct SpectralBudget {
  int m = 256;
  std::vector<double> t_values = {0.1, 0.3};
  int n_power = 32;
};
struct ConditionedBudget {
  std::vector<double> y_scales = {0.5, 2.0, 5.0};  // in units of sigma_hat
  unsigned n_grid_max_exp = 10;                    // dyadic grid up to 2^exp
  std::size_t n_paths = 16384;
  std::vector<double> gammas = {0.5, 2.0};
  std::size_t n0_budget = 32;
  std::size_t ks_n = 2048;
  std::size_t ks_paths = 65536;
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string preset_name;           // may be empty when law is inline
  std::optional<MatrixLaw> law;      // resolved law (preset or inline)
  RecenterMode recenter = RecenterMode::ExactZero;
  double c_delta_half = 1.0;
  std::uint64_t master_seed = 20260809;
  int threads = 1;
  std::string out_dir = "out";
  std::vector<std::string> stages = {"ergodic", "banach", "spectral",
                                     "conditioned"};
  std::size_t moment_samples = 20000;
  LyapunovBudget lyapunov;
  StationaryBudget stationary;
  ContractionBudget contraction;
  Sigma2Budget sigma2;
  BanachBudget banach;
  SpectralBudget spectral;
  ConditionedBudget conditioned;

  [[nodiscard]] bool stage_enabled(const std::string& name) const;
  [[nodiscard]] const MatrixLaw& resolved_law() const;
  // canonical JSON dump (sorted keys, resolved preset) for hashing
  [[nodiscard]] std::string canonical_dump() const;
};

// Parse + validate a config JSON text. Throws std::invalid_argument with a
// path-qualified message on schema violations.
ExperimentConfig parse_config(const std::string& json_text);

// Default config for a named preset.
ExperimentConfig config_for_preset(const std::string& preset);

// Human-readable schema description for the print-schema subcommand.
std::string config_schema_text();

constexpr int kSchemaVersion = 1;

}  // namespace matwalk
