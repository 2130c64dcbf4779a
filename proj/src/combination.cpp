#include "difnet/combination.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "difnet/csv.hpp"
#include "difnet/error.hpp"

namespace difnet {

namespace {
constexpr double kStochasticTol = 1e-9;
}

CombinationMatrix CombinationMatrix::uniform(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (NodeId k = 0; k < g.size(); ++k) {
    const double w = 1.0 / static_cast<double>(g.degree(k));
    for (NodeId l : g.neighbors(k)) a(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = w;
  }
  return CombinationMatrix(std::move(a), g);
}

CombinationMatrix CombinationMatrix::from_weights(Eigen::MatrixXd weights) {
  if (weights.rows() == 0 || weights.rows() != weights.cols())
    throw Error(ErrorCode::invalid_params, "combination matrix must be square and non-empty");
  if (!weights.allFinite() || weights.minCoeff() < 0.0)
    throw Error(ErrorCode::invalid_params, "combination weights must be finite and non-negative");
  for (Eigen::Index k = 0; k < weights.cols(); ++k) {
    const double s = weights.col(k).sum();
    if (std::abs(s - 1.0) > kStochasticTol)
      throw Error(ErrorCode::invalid_params, "column " + std::to_string(k) + " sums to " +
                                                 csv::format_double(s) + ", not 1");
  }
  return CombinationMatrix(std::move(weights), std::nullopt);
}

SpectralData spectral_decompose(const CombinationMatrix& cm) {
  if (!cm.graph())
    throw Error(ErrorCode::invalid_params, "spectral decomposition needs a uniform-rule matrix");
  const Graph& g = *cm.graph();
  if (!g.is_connected()) throw Error(ErrorCode::invalid_params, "graph must be connected");

  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd sqrt_deg(n);
  for (Eigen::Index k = 0; k < n; ++k) sqrt_deg(k) = std::sqrt(static_cast<double>(g.degree(static_cast<NodeId>(k))));

  // A_s = D^{-1/2} C D^{-1/2}
  Eigen::MatrixXd as = Eigen::MatrixXd::Zero(n, n);
  for (NodeId k = 0; k < g.size(); ++k)
    for (NodeId l : g.neighbors(k)) {
      const auto i = static_cast<Eigen::Index>(k), j = static_cast<Eigen::Index>(l);
      as(i, j) = 1.0 / (sqrt_deg(i) * sqrt_deg(j));
    }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(as);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::numerical_failure, "symmetric eigensolver did not converge");

  const Eigen::VectorXd& vals = solver.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(vals(a)), mb = std::abs(vals(b));
    if (ma != mb) return ma > mb;
    return vals(a) > vals(b);
  });

  SpectralData sd;
  sd.eigenvalues.resize(n);
  sd.sym.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto src = order[static_cast<std::size_t>(c)];
    sd.eigenvalues(c) = vals(src);
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    if (c == 0) {
      if (v.sum() < 0.0) v = -v;
    } else {
      for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(v(i)) > 1e-10) {
          if (v(i) < 0.0) v = -v;
          break;
        }
    }
    sd.sym.col(c) = v;
  }

  if (std::abs(sd.eigenvalues(0) - 1.0) > 1e-10)
    throw Error(ErrorCode::numerical_failure,
                "Perron eigenvalue is " + csv::format_double(sd.eigenvalues(0)) + ", expected 1");

  sd.right = sqrt_deg.cwiseInverse().asDiagonal() * sd.sym;
  sd.left = sqrt_deg.asDiagonal() * sd.sym;
  for (Eigen::Index c = 0; c < n; ++c) sd.left.col(c) /= sd.left.col(c).dot(sd.right.col(c));
  return sd;
}

double semicircle_radius(double eta) {
  if (!(eta > 0.0)) throw Error(ErrorCode::invalid_params, "network degree must be positive");
  return 2.0 / std::sqrt(eta);
}

double semicircle_density(double lambda, double eta_bar) {
  const double r = semicircle_radius(eta_bar);
  const double x = lambda / r;
  if (std::abs(x) >= 1.0) return 0.0;
  return 2.0 / (std::numbers::pi * r) * std::sqrt(1.0 - x * x);
}

double semicircle_tail(double y, double eta) {
  const double r = semicircle_radius(eta);
  if (y <= 0.0) return 1.0;
  if (y >= r) return 0.0;
  const double u = y / r;
  return 1.0 - 2.0 / std::numbers::pi * (std::asin(u) + u * std::sqrt(1.0 - u * u));
}

double lambda_k_theory(std::size_t k, std::size_t n, double eta, LambdaMethod method) {
  if (k < 2 || k > n) throw Error(ErrorCode::invalid_params, "need 2 <= k <= n");
  if (!(eta > 4.0)) throw Error(ErrorCode::invalid_params, "need eta > 4 so the support lies inside (-1, 1)");
  const double x = static_cast<double>(k) / static_cast<double>(n);
  const double r = semicircle_radius(eta);
  if (method == LambdaMethod::linear) return r * (1.0 - x);

  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::no_root, "tail fraction outside [0, 1]");
  // g is decreasing from 1 at y = 0 to 0 at y = R
  double lo = 0.0, hi = r;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (semicircle_tail(mid, eta) > x)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::string to_csv(const CombinationMatrix& cm) {
  const auto& w = cm.weights();
  std::string out;
  for (Eigen::Index l = 0; l < w.rows(); ++l) {
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
      if (k) out += ',';
      out += csv::format_double(w(l, k));
    }
    out += '\n';
  }
  return out;
}

CombinationMatrix parse_combination_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) row.push_back(csv::to_double(field));
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(l)].size()) != n)
      throw Error(ErrorCode::parse_error, "combination CSV must be square");
    for (Eigen::Index k = 0; k < n; ++k) w(l, k) = rows[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
  }
  return CombinationMatrix::from_weights(std::move(w));
}

void save_combination_csv(const CombinationMatrix& cm, const std::string& path) {
  csv::write_file(path, to_csv(cm));
}

CombinationMatrix load_combination_csv(const std::string& path) {
  return parse_combination_csv(csv::read_file(path));
}

}  // namespace difnet
