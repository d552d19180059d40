// SPDX-License-Identifier: Apache-2.0
#include "matwalk/chain.hpp"

#include <stdexcept>

#include "matwalk/parallel.hpp"
#include "matwalk/stats.hpp"

namespace matwalk {

ChainState chain_init(const ChainStart& x0) {
  return ChainState{x0.g, act(x0.g, x0.u), 0.0, 0};
}

ChainState chain_step(const ChainState& st, const MatrixLaw& law,
                      RngStream& rng) {
  if (st.direction.dim() != law.dim())
    throw std::invalid_argument("chain_step: dimension mismatch");
  GroupElement g = law.sample(rng);
  const double inc = cocycle(g, st.direction);
  ProjPoint next = act(g, st.direction);
  return ChainState{std::move(g), std::move(next), st.s_value + inc,
                    st.step + 1};
}

RunPathsResult run_paths(const MatrixLaw& law, const ChainStart& x0,
                         std::size_t n_steps, std::size_t n_paths,
                         std::uint64_t master_seed,
                         const RunPathsOptions& opts) {
  if (opts.keep_paths && n_steps * n_paths > 10'000'000)
    throw std::invalid_argument("run_paths: path storage budget exceeded");
  const std::size_t stride = opts.agg_stride == 0 ? 1 : opts.agg_stride;
  const std::size_t n_marks = n_steps / stride;

  const Eigen::VectorXd dir0 = act(x0.g, x0.u).rep();

  struct BlockAcc {
    std::vector<stats::Accumulator> s_acc;
    std::vector<WalkPath> paths;
  };
  const std::size_t n_blocks = block_count(n_paths, kDefaultBlock);
  std::vector<BlockAcc> blocks(n_blocks);

  const RngStream root = RngStream::from_seed(master_seed);

  law.with_stepper([&](auto proto) {
    for_each_block(n_paths, kDefaultBlock, opts.threads,
                   [&](std::size_t b, std::size_t lo, std::size_t hi) {
                     BlockAcc& acc = blocks[b];
                     acc.s_acc.resize(n_marks);
                     auto stepper = proto;  // private copy per block
                     Eigen::VectorXd dir(dir0.size());
                     for (std::size_t k = lo; k < hi; ++k) {
                       RngStream rng = root.child(stream_id::kWalk, k);
                       dir = dir0;
                       double s = 0.0;
                       WalkPath wp;
                       if (opts.keep_paths) {
                         wp.master_seed = master_seed;
                         wp.replica = k;
                         wp.rho.reserve(n_steps);
                         wp.s.reserve(n_steps);
                         wp.dir.reserve(n_steps);
                       }
                       std::size_t mark = 0;
                       for (std::size_t n = 1; n <= n_steps; ++n) {
                         const double inc = stepper.step(rng, dir);
                         s += inc;
                         if (opts.keep_paths) {
                           wp.rho.push_back(inc);
                           wp.s.push_back(s);
                           wp.dir.push_back(dir);
                         }
                         if (n % stride == 0) acc.s_acc[mark++].add(s);
                       }
                       if (opts.keep_paths) acc.paths.push_back(std::move(wp));
                     }
                   });
  });

  RunPathsResult out;
  out.agg.n_paths = n_paths;
  out.agg.step.resize(n_marks);
  out.agg.mean_s.resize(n_marks);
  out.agg.var_s.resize(n_marks);
  for (std::size_t m = 0; m < n_marks; ++m) {
    stats::Accumulator total;
    for (const auto& blk : blocks)
      if (m < blk.s_acc.size()) total.merge(blk.s_acc[m]);
    out.agg.step[m] = (m + 1) * stride;
    out.agg.mean_s[m] = total.mean;
    out.agg.var_s[m] = total.variance();
  }
  if (opts.keep_paths) {
    for (auto& blk : blocks)
      for (auto& wp : blk.paths) out.paths.push_back(std::move(wp));
  }
  return out;
}

}  // namespace matwalk
