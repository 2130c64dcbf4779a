#include "difnet/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "difnet/csv.hpp"
#include "difnet/db.hpp"
#include "difnet/error.hpp"

namespace difnet {

namespace {

constexpr int kMaxPowerIterations = 100000;
constexpr int kNormRatioIterations = 5000;
constexpr double kPowerTol = 1e-10;
constexpr int kMaxDoublings = 60;
constexpr double kDoublingTol = 1e-14;

std::vector<double> informed_steps(const AdaptationConfig& cfg, const Graph& g) {
  const double mu = resolved_step(cfg, g);
  std::vector<double> step(g.size(), 0.0);
  for (NodeId k : cfg.informed) step[k] = mu;
  return step;
}

double network_degree(const Graph& g) { return degree_stats(g).eta; }

struct InformedSums {
  double degree = 0.0;        // sum n_l
  double noise_deg = 0.0;     // sum sigma_l^2 n_l
  double noise_deg_sq = 0.0;  // sum sigma_l^2 n_l^2
};

InformedSums informed_sums(const Graph& g, const SignalProfile& profile, std::span<const NodeId> informed) {
  if (informed.empty()) throw Error(ErrorCode::invalid_count, "at least one informed node is required");
  InformedSums s;
  for (NodeId l : informed) {
    if (l >= g.size()) throw Error(ErrorCode::bad_list, "informed node " + std::to_string(l) + " out of range");
    const double n = static_cast<double>(g.degree(l));
    const double sigma = profile.noise_vars.at(l);
    s.degree += n;
    s.noise_deg += sigma * n;
    s.noise_deg_sq += sigma * n * n;
  }
  return s;
}

// h(2/sqrt(eta)) / (N eta), or 0 for a single node (no non-Perron modes).
double kgt1_factor(const Graph& g) {
  const double eta = network_degree(g);
  if (g.size() == 1) return 0.0;
  if (!(eta > 4.0))
    throw Error(ErrorCode::eta_too_small,
                "network degree " + csv::format_double(eta) + " <= 4 puts the semicircle edge outside (-1, 1)");
  return h_func(2.0 / std::sqrt(eta)) / (static_cast<double>(g.size()) * eta);
}

// Power iteration for the spectral radius. For a non-negative matrix the
// Collatz-Wielandt quotients min/max (Bx)_i/x_i bracket rho(B) for any x > 0;
// otherwise the norm ratio of successive iterates is used, with a dense
// eigensolve if that does not settle.
double spectral_radius(const Eigen::MatrixXd& b) {
  const Eigen::Index n = b.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Eigen::VectorXd y(n);
  const bool nonneg = b.minCoeff() >= 0.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  double est = prev;

  for (int it = 0; it < kMaxPowerIterations; ++it) {
    y.noalias() = b * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;

    bool bracketed = nonneg;
    double lower = std::numeric_limits<double>::infinity(), upper = 0.0;
    if (nonneg) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!(x(i) > 0.0)) {
          bracketed = false;
          break;
        }
        const double q = y(i) / x(i);
        lower = std::min(lower, q);
        upper = std::max(upper, q);
      }
    }
    prev = est;
    if (bracketed) {
      est = 0.5 * (lower + upper);
      if (upper - lower <= kPowerTol) return est;
    } else {
      est = norm;
      if (it > 0 && std::abs(est - prev) <= 1e-3 * kPowerTol) return est;
      // a complex or opposite-sign dominant pair keeps the ratio oscillating
      if (it == kNormRatioIterations) return b.eigenvalues().cwiseAbs().maxCoeff();
    }
    x = y / norm;
  }
  throw Error(ErrorCode::no_convergence, "power iteration stalled; last estimates " + csv::format_double(prev) +
                                             " and " + csv::format_double(est));
}

// Tr(sum_j P^j Y P^jT) via T <- T + P T P^T, P <- P^2.
double doubling_trace(const Eigen::MatrixXd& b, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd t = y;
  Eigen::MatrixXd p = b;
  Eigen::MatrixXd tmp(b.rows(), b.cols()), inc(b.rows(), b.cols());
  for (int d = 0; d < kMaxDoublings; ++d) {
    tmp.noalias() = p * t;
    inc.noalias() = tmp * p.transpose();
    t += inc;
    const double total = t.trace();
    if (!std::isfinite(total)) break;
    if (std::abs(inc.trace()) <= kDoublingTol * std::abs(total)) return total;
    tmp.noalias() = p * p;
    p.swap(tmp);
  }
  throw Error(ErrorCode::no_convergence,
              "MSD series did not converge within " + std::to_string(kMaxDoublings) + " doublings");
}

}  // namespace

ErrorSystem ErrorSystem::from_dense(Eigen::MatrixXd b, Eigen::MatrixXd y, std::size_t n_nodes, std::size_t m_dim) {
  const auto nm = static_cast<Eigen::Index>(n_nodes * m_dim);
  if (nm == 0 || b.rows() != nm || b.cols() != nm || y.rows() != nm || y.cols() != nm)
    throw Error(ErrorCode::invalid_params, "B and Y must both be NM x NM");
  std::vector<ErrorBlock> blocks;
  blocks.push_back({std::move(b), std::move(y)});
  return ErrorSystem(std::move(blocks), n_nodes, m_dim, false);
}

namespace {

Eigen::MatrixXd assemble(std::span<const ErrorBlock> blocks, std::size_t n, std::size_t m,
                         const Eigen::MatrixXd ErrorBlock::*field) {
  const auto N = static_cast<Eigen::Index>(n), M = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N * M, N * M);
  for (Eigen::Index j = 0; j < M; ++j) {
    const auto& blk = blocks[static_cast<std::size_t>(j)].*field;
    for (Eigen::Index k = 0; k < N; ++k)
      for (Eigen::Index l = 0; l < N; ++l) out(k * M + j, l * M + j) = blk(k, l);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd ErrorSystem::dense_b() const {
  return coordinate_blocks_ ? assemble(blocks_, n_nodes_, m_dim_, &ErrorBlock::b) : blocks_.front().b;
}

Eigen::MatrixXd ErrorSystem::dense_y() const {
  return coordinate_blocks_ ? assemble(blocks_, n_nodes_, m_dim_, &ErrorBlock::y) : blocks_.front().y;
}

ErrorSystem build_error_system(const CombinationMatrix& cm, const SignalProfile& profile,
                               const AdaptationConfig& cfg, const Graph& g, std::size_t dense_limit) {
  const std::size_t n = g.size(), m = profile.m_dim();
  if (n * m > dense_limit)
    throw Error(ErrorCode::dimension_overflow, "N*M = " + std::to_string(n * m) + " exceeds the dense limit " +
                                                   std::to_string(dense_limit));
  if (cm.size() != n || profile.n_nodes() != n)
    throw Error(ErrorCode::invalid_params, "graph, combination matrix and profile disagree on N");
  profile.validate();
  if (auto verdict = check_mean_stability(profile, cfg, g); !verdict)
    throw Error(ErrorCode::stability_violation, verdict.reason);

  const auto step = informed_steps(cfg, g);
  const auto N = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd at = cm.weights().transpose();
  Eigen::VectorXd mu(N), noise(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    mu(k) = step[static_cast<std::size_t>(k)];
    noise(k) = profile.noise_vars[static_cast<std::size_t>(k)];
  }

  std::vector<ErrorBlock> blocks(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double lambda = profile.ru_diag[j];
    const Eigen::VectorXd keep = (1.0 - lambda * mu.array()).matrix();
    const Eigen::VectorXd drive = (mu.array().square() * noise.array() * lambda).matrix();
    blocks[j].b = at * keep.asDiagonal();
    blocks[j].y = at * drive.asDiagonal() * cm.weights();
  }
  return ErrorSystem(std::move(blocks), n, m, true);
}

double exact_rate(const ErrorSystem& es) {
  double rho = 0.0;
  for (const auto& blk : es.blocks()) rho = std::max(rho, spectral_radius(blk.b));
  return rho * rho;
}

double exact_msd(const ErrorSystem& es, Execution exec) {
  const auto blocks = es.blocks();
  std::vector<double> traces(blocks.size(), 0.0);
  std::vector<std::string> failure(blocks.size());
  auto one = [&](std::size_t j) {
    try {
      traces[j] = doubling_trace(blocks[j].b, blocks[j].y);
    } catch (const std::exception& e) {
      failure[j] = e.what();
    }
  };
  const auto nb = static_cast<std::ptrdiff_t>(blocks.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < nb; ++j) one(static_cast<std::size_t>(j));
  } else {
    for (std::ptrdiff_t j = 0; j < nb; ++j) one(static_cast<std::size_t>(j));
  }
  double total = 0.0;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    if (!failure[j].empty()) throw Error(ErrorCode::no_convergence, failure[j]);
    total += traces[j];
  }
  return total / static_cast<double>(es.n_nodes());
}

Eigen::MatrixXd approx_eigs_B(const SpectralData& sd, const SignalProfile& profile, const AdaptationConfig& cfg,
                              const Graph& g) {
  const auto n = static_cast<Eigen::Index>(sd.size());
  if (static_cast<std::size_t>(n) != g.size()) throw Error(ErrorCode::invalid_params, "spectral data size mismatch");
  const double mu = resolved_step(cfg, g);
  std::vector<double> ru = profile.ru_diag;
  std::sort(ru.begin(), ru.end(), std::greater<>());

  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(ru.size()));
  for (Eigen::Index k = 0; k < n; ++k) {
    double overlap = 0.0;  // s_{k,I}^T r_{k,I}
    for (NodeId l : cfg.informed) {
      const auto i = static_cast<Eigen::Index>(l);
      overlap += sd.left(i, k) * sd.right(i, k);
    }
    for (std::size_t m = 0; m < ru.size(); ++m)
      out(k, static_cast<Eigen::Index>(m)) = sd.eigenvalues(k) * (1.0 - mu * ru[m] * overlap);
  }
  return out;
}

double rate_approx(const Graph& g, const SignalProfile& profile, const AdaptationConfig& cfg) {
  const auto sums = informed_sums(g, profile, cfg.informed);
  const double mu = resolved_step(cfg, g);
  const double n_eta = static_cast<double>(g.size()) * network_degree(g);
  const double rho = 1.0 - mu * profile.ru_min() * sums.degree / n_eta;
  return rho * rho;
}

MsdComponents msd_components(const Graph& g, const SignalProfile& profile, const AdaptationConfig& cfg) {
  const auto sums = informed_sums(g, profile, cfg.informed);
  const double mu = resolved_step(cfg, g);
  const double n_eta = static_cast<double>(g.size()) * network_degree(g);
  MsdComponents c;
  c.k1 = static_cast<double>(profile.m_dim()) * mu / (2.0 * n_eta) * sums.noise_deg_sq / sums.degree;
  c.kgt1 = mu * mu * profile.ru_trace() * kgt1_factor(g) * sums.noise_deg;
  c.total = c.k1 + c.kgt1;
  return c;
}

double h_func(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::domain_error, "h(alpha) needs alpha in (0, 1)");
  if (alpha < 0.01) {
    // a^2/3 + a^4/5 + ...; the closed form cancels badly here
    const double a2 = alpha * alpha;
    double term = a2, sum = 0.0;
    for (int j = 1; j <= 8; ++j) {
      sum += term / (2.0 * j + 1.0);
      term *= a2;
    }
    return sum;
  }
  return std::atanh(alpha) / alpha - 1.0;
}

double msd_fixed_rate(const Graph& g, const SignalProfile& profile, std::span<const NodeId> informed, double mu0) {
  if (!(mu0 > 0.0)) throw Error(ErrorCode::invalid_params, "mu0 must be positive");
  const auto sums = informed_sums(g, profile, informed);
  const double n_eta = static_cast<double>(g.size()) * network_degree(g);
  const double sq = sums.degree * sums.degree;
  const double first = static_cast<double>(profile.m_dim()) * mu0 / (2.0 * n_eta) * sums.noise_deg_sq / sq;
  const double second = mu0 * mu0 * profile.ru_trace() * kgt1_factor(g) * sums.noise_deg / sq;
  return first + second;
}

AddNodeReport add_node_analysis(const Graph& g, const SignalProfile& profile, std::span<const NodeId> informed,
                                NodeId candidate, AddNodeMode mode) {
  if (candidate >= g.size()) throw Error(ErrorCode::bad_list, "candidate out of range");
  if (std::find(informed.begin(), informed.end(), candidate) != informed.end())
    throw Error(ErrorCode::invalid_params, "candidate is already informed");
  const auto s = informed_sums(g, profile, informed);
  const double n = static_cast<double>(g.degree(candidate));
  const double sigma = profile.noise_vars.at(candidate);

  AddNodeReport r;
  r.threshold = s.noise_deg_sq / s.degree;
  if (mode == AddNodeMode::fixed_step) {
    // (S2 + sigma n^2)/(S1 + n) vs S2/S1
    r.k1_increases = sigma * n * s.degree > s.noise_deg_sq;
    r.kgt1_increases = sigma * n > 0.0;
    return r;
  }
  // (S2 + sigma n^2)/(S1 + n)^2 vs S2/S1^2, and likewise with T1 = sum sigma n
  const double s1 = s.degree;
  r.k1_increases = sigma * n * n * s1 * s1 > s.noise_deg_sq * (2.0 * s1 * n + n * n);
  r.kgt1_increases = sigma * n * s1 * s1 > s.noise_deg * (2.0 * s1 * n + n * n);
  r.c1 = 2.0 / (sigma * s1 * s1 / s.noise_deg_sq - 1.0);
  r.c2 = sigma * s1 / s.noise_deg - 2.0;
  double noise_sum = 0.0;
  for (NodeId l : informed) noise_sum += profile.noise_vars[l];
  r.beta = sigma / (noise_sum / static_cast<double>(informed.size()));
  return r;
}

double TheoryReport::msd_exact_db() const { return to_db(msd_exact); }
double TheoryReport::msd_approx_db() const { return to_db(msd_approx.total); }
double TheoryReport::msd_k1_db() const { return to_db(msd_approx.k1); }
double TheoryReport::msd_kgt1_db() const { return to_db(msd_approx.kgt1); }

TheoryReport theory_report(const Graph& g, const CombinationMatrix& cm, const SignalProfile& profile,
                           const AdaptationConfig& cfg, Execution exec) {
  const auto es = build_error_system(cm, profile, cfg, g);
  TheoryReport t;
  t.n_informed = cfg.informed.size();
  t.rate_exact = exact_rate(es);
  t.msd_exact = exact_msd(es, exec);
  t.rate_approx = rate_approx(g, profile, cfg);
  t.msd_approx = msd_components(g, profile, cfg);
  return t;
}

namespace {
const std::vector<std::string> kTheoryHeader = {"n_i",          "rate_exact",    "rate_approx", "msd_exact_db",
                                                "msd_approx_db", "msd_k1_db", "msd_kgt1_db"};
}

std::string to_csv(std::span<const TheoryReport> rows, const std::map<std::string, std::string>& metadata) {
  std::string out = csv::metadata_block(metadata);
  for (std::size_t i = 0; i < kTheoryHeader.size(); ++i) out += (i ? "," : "") + kTheoryHeader[i];
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.n_informed) + "," + csv::format_double(r.rate_exact) + "," +
           csv::format_double(r.rate_approx) + "," + csv::format_double(r.msd_exact_db()) + "," +
           csv::format_double(r.msd_approx_db()) + "," + csv::format_double(r.msd_k1_db()) + "," +
           csv::format_double(r.msd_kgt1_db()) + "\n";
  }
  return out;
}

std::vector<TheoryRow> parse_theory_csv(std::string_view text, std::map<std::string, std::string>* metadata) {
  auto t = csv::parse(text);
  csv::expect_header(t, kTheoryHeader);
  std::vector<TheoryRow> rows;
  for (const auto& f : t.rows)
    rows.push_back({csv::to_size(f[0]), csv::to_double(f[1]), csv::to_double(f[2]), csv::to_double(f[3]),
                    csv::to_double(f[4]), csv::to_double(f[5]), csv::to_double(f[6])});
  if (metadata) *metadata = std::move(t.metadata);
  return rows;
}

}  // namespace difnet
