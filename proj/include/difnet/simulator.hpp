#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "difnet/combination.hpp"
#include "difnet/db.hpp"
#include "difnet/execution.hpp"
#include "difnet/signal_model.hpp"
#include "difnet/topology.hpp"

namespace difnet {

inline constexpr double kDivergenceThreshold = 1e12;
inline constexpr double kDefaultWindowFraction = 0.1;

struct SteadyState {
  double linear = 0.0;
  double db = 0.0;
  std::size_t window_begin = 0;  // first iteration index in the window
  std::size_t window_len = 0;
};

struct TransientResult {
  std::vector<double> msd_linear;  // one value per iteration
  std::vector<double> msd_db;
  std::size_t n_runs = 0;
  std::size_t n_iters = 0;
  std::uint64_t base_seed = 0;
  std::optional<SteadyState> steady_state;
};

/// One ATC realization from w_{k,-1} = 0. Returns the network squared error
/// (1/N) sum_k |w_true - w_{k,i}|^2 after each iteration.
/// Throws Error{divergence} once that error exceeds kDivergenceThreshold.
std::vector<double> atc_run(const Graph& g, const CombinationMatrix& cm, const SignalProfile& profile,
                            const AdaptationConfig& cfg, std::size_t n_iters, std::uint64_t seed);

/// Averages `n_runs` independent runs seeded base_seed + j.
///
/// The parallel path distributes runs over OpenMP threads; both paths reduce
/// the per-run trajectories with the same fixed-order pairwise summation, so
/// their outputs are bitwise identical.
TransientResult monte_carlo(const Graph& g, const CombinationMatrix& cm, const SignalProfile& profile,
                            const AdaptationConfig& cfg, std::size_t n_iters, std::size_t n_runs,
                            std::uint64_t base_seed, Execution exec = Execution::parallel);

/// Mean of the last ceil(window_fraction * n_iters) points. Throws
/// Error{not_converged} if the two halves of that window differ by > 0.5 dB.
SteadyState steady_state_estimate(const TransientResult& tr,
                                  double window_fraction = kDefaultWindowFraction);

/// `# key=value` metadata lines, then `iter,msd_linear,msd_db`.
std::string to_csv(const TransientResult& tr, const std::map<std::string, std::string>& metadata);
TransientResult parse_transient_csv(std::string_view text,
                                    std::map<std::string, std::string>* metadata = nullptr);

}  // namespace difnet
