#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>

#include "difnet/topology.hpp"

namespace difnet {

/// Left-stochastic N x N weight matrix A; column k holds the weights node k
/// applies to its neighbors' intermediate estimates.
class CombinationMatrix {
 public:
  /// Uniform rule: a(l,k) = 1/n_k for l in N_k.
  static CombinationMatrix uniform(const Graph& g);

  /// Arbitrary weights; throws Error{invalid_params} unless every column sums
  /// to one within 1e-9 and all entries are non-negative.
  static CombinationMatrix from_weights(Eigen::MatrixXd weights);

  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  double operator()(NodeId l, NodeId k) const { return weights_(l, k); }

  /// Generating graph, present only for the uniform rule.
  const std::optional<Graph>& graph() const noexcept { return graph_; }

 private:
  CombinationMatrix(Eigen::MatrixXd w, std::optional<Graph> g)
      : weights_(std::move(w)), graph_(std::move(g)) {}

  Eigen::MatrixXd weights_;
  std::optional<Graph> graph_;
};

inline CombinationMatrix uniform_combination(const Graph& g) { return CombinationMatrix::uniform(g); }

/// Eigen-structure of a uniform combination matrix.
///
/// Column k of `right` / `left` is r_k / s_k, the right / left eigenvector of
/// A^T for eigenvalues(k); `sym` holds the orthonormal eigenvectors of
/// A_s = D^{-1/2} C D^{-1/2}. Pairs are ordered by descending |lambda| (ties:
/// larger signed value first, then solver order), so eigenvalues(0) == 1.
struct SpectralData {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd right;
  Eigen::MatrixXd left;
  Eigen::MatrixXd sym;

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

SpectralData spectral_decompose(const CombinationMatrix& cm);

/// Limiting eigenvalue density of A for a random graph with degree eta_bar.
double semicircle_density(double lambda, double eta_bar);

/// Support radius 2/sqrt(eta) of the semicircle law.
double semicircle_radius(double eta);

/// Fraction of semicircle eigenvalues with magnitude greater than y.
double semicircle_tail(double y, double eta);

enum class LambdaMethod { exact_g, linear };

/// Predicted |lambda_k(A)| for 2 <= k <= n from the semicircle law, either by
/// inverting the tail fraction exactly or with its linear approximation.
double lambda_k_theory(std::size_t k, std::size_t n, double eta, LambdaMethod method);

/// Dense CSV: row l, column k holds a(l,k). Loading validates stochasticity.
std::string to_csv(const CombinationMatrix& cm);
CombinationMatrix parse_combination_csv(std::string_view text);
void save_combination_csv(const CombinationMatrix& cm, const std::string& path);
CombinationMatrix load_combination_csv(const std::string& path);

}  // namespace difnet
