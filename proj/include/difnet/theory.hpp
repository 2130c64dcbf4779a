#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "difnet/combination.hpp"
#include "difnet/execution.hpp"
#include "difnet/signal_model.hpp"
#include "difnet/topology.hpp"

namespace difnet {

inline constexpr std::size_t kDefaultDenseLimit = 4000;

/// One decoupled piece of the error recursion: B_j and the noise term Y_j.
struct ErrorBlock {
  Eigen::MatrixXd b;
  Eigen::MatrixXd y;
};

/// Mean-square error recursion w~_i = B w~_{i-1} + noise with covariance Y.
///
/// With a diagonal R_u the NM x NM matrices B = A^T (I - M R) and
/// Y = A^T M S M A are block diagonal after grouping coordinates, so the
/// system is stored as M independent N x N blocks (block j = coordinate j).
/// A system loaded from dense matrices keeps a single NM x NM block.
class ErrorSystem {
 public:
  static ErrorSystem from_dense(Eigen::MatrixXd b, Eigen::MatrixXd y, std::size_t n_nodes,
                                std::size_t m_dim);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t m_dim() const noexcept { return m_dim_; }
  std::span<const ErrorBlock> blocks() const noexcept { return blocks_; }

  /// Full NM x NM matrices in node-major order (entry k*M + j).
  Eigen::MatrixXd dense_b() const;
  Eigen::MatrixXd dense_y() const;

 private:
  friend ErrorSystem build_error_system(const CombinationMatrix&, const SignalProfile&,
                                        const AdaptationConfig&, const Graph&, std::size_t);
  ErrorSystem(std::vector<ErrorBlock> blocks, std::size_t n, std::size_t m, bool coordinate_blocks)
      : blocks_(std::move(blocks)), n_nodes_(n), m_dim_(m), coordinate_blocks_(coordinate_blocks) {}

  std::vector<ErrorBlock> blocks_;
  std::size_t n_nodes_;
  std::size_t m_dim_;
  bool coordinate_blocks_;
};

/// Throws Error{dimension_overflow} when N*M exceeds `dense_limit` and
/// Error{stability_violation} when the mean-stability check fails.
ErrorSystem build_error_system(const CombinationMatrix& cm, const SignalProfile& profile,
                               const AdaptationConfig& cfg, const Graph& g,
                               std::size_t dense_limit = kDefaultDenseLimit);

/// r = rho(B)^2 by power iteration.
double exact_rate(const ErrorSystem& es);

/// (1/N) sum_j Tr(B^j Y B^jT) by repeated doubling.
double exact_msd(const ErrorSystem& es, Execution exec = Execution::parallel);

/// Approximate eigenvalues lambda_{k,m}(B) of the error recursion: row k is
/// the combination mode, column m the R_u eigenvalue in decreasing order.
Eigen::MatrixXd approx_eigs_B(const SpectralData& sd, const SignalProfile& profile,
                              const AdaptationConfig& cfg, const Graph& g);

/// (1 - mu lambda_min(R_u) sum_{informed} n_l / (N eta))^2.
double rate_approx(const Graph& g, const SignalProfile& profile, const AdaptationConfig& cfg);

struct MsdComponents {
  double k1 = 0.0;    // Perron mode
  double kgt1 = 0.0;  // remaining modes
  double total = 0.0;
};

/// Closed-form MSD split for the uniform rule. Throws Error{eta_too_small}
/// when eta <= 4 on a multi-node network.
MsdComponents msd_components(const Graph& g, const SignalProfile& profile, const AdaptationConfig& cfg);

/// h(a) = log((1+a)/(1-a)) / (2a) - 1 on (0, 1).
double h_func(double alpha);

/// Closed-form MSD under the normalized step mu = mu0 / sum_{informed} n_l.
double msd_fixed_rate(const Graph& g, const SignalProfile& profile, std::span<const NodeId> informed,
                      double mu0);

enum class AddNodeMode { fixed_step, fixed_rate };

struct AddNodeReport {
  bool k1_increases = false;
  bool kgt1_increases = false;
  std::optional<double> c1;    // fixed_rate only
  std::optional<double> c2;    // fixed_rate only
  std::optional<double> beta;  // fixed_rate only
  double threshold = 0.0;      // fixed_step: sum sigma^2 n^2 / sum n
};

/// Direction in which each MSD component moves when `candidate` joins the
/// informed set, under either a fixed step or a fixed (normalized) rate.
AddNodeReport add_node_analysis(const Graph& g, const SignalProfile& profile,
                                std::span<const NodeId> informed, NodeId candidate, AddNodeMode mode);

struct TheoryReport {
  std::size_t n_informed = 0;
  double rate_exact = 0.0;
  double rate_approx = 0.0;
  double msd_exact = 0.0;
  MsdComponents msd_approx;
  double msd_exact_db() const;
  double msd_approx_db() const;
  double msd_k1_db() const;
  double msd_kgt1_db() const;
};

/// Exact and approximate predictions for one informed configuration.
TheoryReport theory_report(const Graph& g, const CombinationMatrix& cm, const SignalProfile& profile,
                           const AdaptationConfig& cfg, Execution exec = Execution::parallel);

/// `# key=value` metadata, header
/// `n_i,rate_exact,rate_approx,msd_exact_db,msd_approx_db,msd_k1_db,msd_kgt1_db`.
std::string to_csv(std::span<const TheoryReport> rows, const std::map<std::string, std::string>& metadata);

struct TheoryRow {
  std::size_t n_i = 0;
  double rate_exact = 0.0;
  double rate_approx = 0.0;
  double msd_exact_db = 0.0;
  double msd_approx_db = 0.0;
  double msd_k1_db = 0.0;
  double msd_kgt1_db = 0.0;
};
std::vector<TheoryRow> parse_theory_csv(std::string_view text,
                                        std::map<std::string, std::string>* metadata = nullptr);

}  // namespace difnet
