#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "difnet/rng.hpp"
#include "difnet/topology.hpp"

namespace difnet {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Second-order data statistics. R_u is diagonal and shared by all nodes.
struct SignalProfile {
  std::vector<double> ru_diag;     // diagonal of R_u, entries > 0
  std::vector<double> noise_vars;  // per-node noise variance, entries >= 0
  std::vector<double> w_true;      // model vector, same length as ru_diag

  std::size_t m_dim() const noexcept { return ru_diag.size(); }
  std::size_t n_nodes() const noexcept { return noise_vars.size(); }
  double ru_max() const;
  double ru_min() const;
  double ru_trace() const;

  /// Throws Error{invalid_params} when an invariant is broken.
  void validate() const;
};

/// Draws ru_diag uniformly from [ru_lo, ru_hi] and w_true uniformly from
/// [-1, 1]; every node gets the same noise variance.
SignalProfile random_profile(std::size_t m_dim, double ru_lo, double ru_hi, std::size_t n_nodes,
                             double noise_var, std::uint64_t seed);

struct UniformStep {
  double mu;
};
/// mu = mu0 / (sum of informed degrees), which pins the approximate rate.
struct NormalizedStep {
  double mu0;
};
using StepRule = std::variant<UniformStep, NormalizedStep>;

struct AdaptationConfig {
  std::vector<NodeId> informed;  // ordered, non-empty, distinct
  StepRule step = UniformStep{0.01};
};

enum class InformedOrder { top_degree, bottom_degree, random, explicit_list };

struct InformedRule {
  InformedOrder order = InformedOrder::top_degree;
  std::uint64_t seed = 0;         // random
  std::vector<NodeId> nodes;      // explicit_list
};

/// The first `count` nodes of the ordering. top_degree sorts by decreasing
/// degree with ties by ascending index; bottom_degree is that list reversed.
std::vector<NodeId> select_informed(const Graph& g, const InformedRule& rule, std::size_t count);

/// Full node ordering used by `select_informed`; prefixes give nested sets.
std::vector<NodeId> informed_order(const Graph& g, const InformedRule& rule);

/// Common step of the informed nodes, without any stability check.
double resolved_step(const AdaptationConfig& cfg, const Graph& g);

/// Per-node step sizes: mu on informed nodes, exactly 0 elsewhere.
/// Throws Error{stability_violation} unless 0 < mu * max(R_u) < 1.
std::vector<double> resolve_steps(const AdaptationConfig& cfg, const Graph& g,
                                  const SignalProfile& profile);

struct StabilityVerdict {
  bool stable = false;
  std::string reason;  // empty when stable
  explicit operator bool() const noexcept { return stable; }
};

/// Mean-stability conditions: 0 < mu * rho(R_u) < 2 on informed nodes and
/// every node reachable from some informed node.
StabilityVerdict check_mean_stability(const SignalProfile& profile, const AdaptationConfig& cfg,
                                      const Graph& g);

/// Zero-mean Gaussian regressors and noise, independent across nodes and time.
class SampleStream {
 public:
  SampleStream(const SignalProfile& profile, std::size_t n_nodes, std::uint64_t seed);

  /// Fills row k of `u` with u_{k,i} and d(k) with d_k(i) for every node.
  void next(Eigen::Ref<RowMatrixXd> u, Eigen::Ref<Eigen::VectorXd> d);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t m_dim() const noexcept { return ru_sd_.size(); }

 private:
  std::size_t n_nodes_;
  Eigen::VectorXd ru_sd_;
  Eigen::VectorXd noise_sd_;
  Eigen::VectorXd w_true_;
  SplitMix64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace difnet
