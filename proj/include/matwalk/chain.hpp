// SPDX-License-Identifier: Apache-2.0
//
// The projective Markov chain and its additive walk. The chain never forms
// the matrix product: only the current unit direction and the accumulated
// log-expansion are kept, so trajectories of any length stay finite.
#pragma once

#include <cstdint>
#include <vector>

#include "matwalk/geometry.hpp"
#include "matwalk/law.hpp"

namespace matwalk {

// Start point x0 = (g, u). The first increment acts on g.u.
struct ChainStart {
  GroupElement g;
  ProjPoint u;
};

// State after n steps: the last drawn matrix, the direction the *next*
// increment will act on, and the walk value S_n.
struct ChainState {
  GroupElement last_g;
  ProjPoint direction;
  double s_value = 0.0;
  std::int64_t step = 0;
};

ChainState chain_init(const ChainStart& x0);
ChainState chain_step(const ChainState& st, const MatrixLaw& law,
                      RngStream& rng);

// Full trajectory of one replica: increment, partial sums and directions
// (entry k describes step k+1). Reproducible bit-exactly from
// (law, x0, master_seed, replica).
struct WalkPath {
  std::uint64_t master_seed = 0;
  std::size_t replica = 0;
  std::vector<double> rho;
  std::vector<double> s;
  std::vector<Eigen::VectorXd> dir;
};

// Per-step aggregates of S_n across replicas.
struct StepAggregates {
  std::vector<std::size_t> step;  // recorded step indices (stride-thinned)
  std::vector<double> mean_s;
  std::vector<double> var_s;
  std::size_t n_paths = 0;
};

struct RunPathsOptions {
  int threads = 1;
  bool keep_paths = false;
  std::size_t agg_stride = 1;  // record aggregates every agg_stride steps
};

struct RunPathsResult {
  StepAggregates agg;
  std::vector<WalkPath> paths;  // empty unless keep_paths
};

// n_paths independent replicas; replica k uses the stream
// (master_seed, kStageWalk, k). Aggregation is a fixed-block reduction, so
// results are identical for any thread count.
RunPathsResult run_paths(const MatrixLaw& law, const ChainStart& x0,
                         std::size_t n_steps, std::size_t n_paths,
                         std::uint64_t master_seed,
                         const RunPathsOptions& opts = {});

// Stream ids for the stages that consume randomness; fixed so that enabling
// or disabling one stage never changes another stage's draws.
namespace stream_id {
constexpr std::uint64_t kWalk = 1;
constexpr std::uint64_t kLyapunov = 2;
constexpr std::uint64_t kStationary = 3;
constexpr std::uint64_t kContraction = 4;
constexpr std::uint64_t kSigma2Growth = 5;
constexpr std::uint64_t kSigma2Cov = 6;
constexpr std::uint64_t kNuTilde = 7;
constexpr std::uint64_t kMoment = 8;
constexpr std::uint64_t kSamplePlan = 9;
constexpr std::uint64_t kTransferIterate = 10;
constexpr std::uint64_t kConditioned = 11;
constexpr std::uint64_t kEquidistribution = 12;
constexpr std::uint64_t kGeometrySweep = 13;
}  // namespace stream_id

}  // namespace matwalk
