#include "difnet/simulator.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "difnet/csv.hpp"
#include "difnet/error.hpp"

namespace difnet {

namespace {

using RowMatrix = RowMatrixXd;

struct WeightEntry {
  Eigen::Index from;
  double weight;
};

// Nonzero weights each node applies, column by column of A.
std::vector<std::vector<WeightEntry>> incoming_weights(const CombinationMatrix& cm) {
  const auto& a = cm.weights();
  std::vector<std::vector<WeightEntry>> in(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index k = 0; k < a.cols(); ++k)
    for (Eigen::Index l = 0; l < a.rows(); ++l)
      if (a(l, k) != 0.0) in[static_cast<std::size_t>(k)].push_back({l, a(l, k)});
  return in;
}

// Fixed-shape pairwise summation of f(0) + ... + f(n-1).
template <typename F>
double pairwise_sum(std::size_t begin, std::size_t end, const F& f) {
  const std::size_t n = end - begin;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += f(i);
    return s;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum(begin, mid, f) + pairwise_sum(mid, end, f);
}

}  // namespace

std::vector<double> atc_run(const Graph& g, const CombinationMatrix& cm, const SignalProfile& profile,
                            const AdaptationConfig& cfg, std::size_t n_iters, std::uint64_t seed) {
  const std::size_t n = g.size();
  if (cm.size() != n || profile.n_nodes() != n)
    throw Error(ErrorCode::invalid_params, "graph, combination matrix and profile disagree on N");
  if (auto verdict = check_mean_stability(profile, cfg, g); !verdict)
    throw Error(ErrorCode::stability_violation, verdict.reason);

  const double mu = resolved_step(cfg, g);
  std::vector<double> step(n, 0.0);
  for (NodeId k : cfg.informed) step[k] = mu;

  const auto in = incoming_weights(cm);
  const auto rows = static_cast<Eigen::Index>(n);
  const auto m = static_cast<Eigen::Index>(profile.m_dim());
  Eigen::RowVectorXd w_true(m);
  for (Eigen::Index j = 0; j < m; ++j) w_true(j) = profile.w_true[static_cast<std::size_t>(j)];

  SampleStream stream(profile, n, seed);
  RowMatrix u(rows, m), w = RowMatrix::Zero(rows, m), psi(rows, m);
  Eigen::VectorXd d(rows);
  std::vector<double> out(n_iters);

  for (std::size_t i = 0; i < n_iters; ++i) {
    stream.next(u, d);
    for (Eigen::Index k = 0; k < rows; ++k) {
      const double mu_k = step[static_cast<std::size_t>(k)];
      if (mu_k == 0.0) {
        psi.row(k) = w.row(k);
      } else {
        const double err = d(k) - u.row(k).dot(w.row(k));
        psi.row(k) = w.row(k) + (mu_k * err) * u.row(k);
      }
    }
    double sq = 0.0;
    for (Eigen::Index k = 0; k < rows; ++k) {
      auto row = w.row(k);
      row.setZero();
      for (const auto& e : in[static_cast<std::size_t>(k)]) row += e.weight * psi.row(e.from);
      sq += (w_true - row).squaredNorm();
    }
    const double msd = sq / static_cast<double>(n);
    if (!(msd <= kDivergenceThreshold))
      throw Error(ErrorCode::divergence, "network squared error " + csv::format_double(msd) +
                                             " at iteration " + std::to_string(i));
    out[i] = msd;
  }
  return out;
}

TransientResult monte_carlo(const Graph& g, const CombinationMatrix& cm, const SignalProfile& profile,
                            const AdaptationConfig& cfg, std::size_t n_iters, std::size_t n_runs,
                            std::uint64_t base_seed, Execution exec) {
  if (n_runs < 1) throw Error(ErrorCode::invalid_params, "n_runs must be at least 1");

  std::vector<std::vector<double>> runs(n_runs);
  std::vector<std::string> failure(n_runs);
  std::vector<char> failed(n_runs, 0);
  // Exceptions must not cross the OpenMP region; collect and rethrow after.
  auto one_run = [&](std::size_t j) {
    try {
      runs[j] = atc_run(g, cm, profile, cfg, n_iters, base_seed + j);
    } catch (const std::exception& e) {
      failed[j] = 1;
      failure[j] = e.what();
    }
  };

  const auto runs_i = static_cast<std::ptrdiff_t>(n_runs);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < runs_i; ++j) one_run(static_cast<std::size_t>(j));
  } else {
    for (std::ptrdiff_t j = 0; j < runs_i; ++j) one_run(static_cast<std::size_t>(j));
  }
  for (std::size_t j = 0; j < n_runs; ++j)
    if (failed[j])
      throw Error(ErrorCode::divergence,
                  "run " + std::to_string(j) + " (seed " + std::to_string(base_seed + j) + "): " + failure[j]);

  TransientResult tr;
  tr.n_runs = n_runs;
  tr.n_iters = n_iters;
  tr.base_seed = base_seed;
  tr.msd_linear.resize(n_iters);
  tr.msd_db.resize(n_iters);
  const double scale = 1.0 / static_cast<double>(n_runs);
  auto reduce = [&](std::size_t i) {
    tr.msd_linear[i] = scale * pairwise_sum(0, n_runs, [&](std::size_t j) { return runs[j][i]; });
    tr.msd_db[i] = to_db(tr.msd_linear[i]);
  };
  const auto iters_i = static_cast<std::ptrdiff_t>(n_iters);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < iters_i; ++i) reduce(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < iters_i; ++i) reduce(static_cast<std::size_t>(i));
  }
  return tr;
}

SteadyState steady_state_estimate(const TransientResult& tr, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction < 1.0))
    throw Error(ErrorCode::invalid_params, "window_fraction must lie in (0, 1)");
  const std::size_t n = tr.msd_linear.size();
  const auto len = static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(n)));
  if (len < 2 || len > n) throw Error(ErrorCode::invalid_params, "trajectory too short for a steady-state window");

  const std::size_t begin = n - len;
  const std::size_t half = len / 2;
  auto mean = [&](std::size_t b, std::size_t e) {
    return pairwise_sum(b, e, [&](std::size_t i) { return tr.msd_linear[i]; }) / static_cast<double>(e - b);
  };
  const double first = mean(begin, begin + half);
  const double second = mean(begin + half, n);
  if (std::abs(to_db(first) - to_db(second)) > 0.5)
    throw Error(ErrorCode::not_converged, "window halves differ by " +
                                              csv::format_double(std::abs(to_db(first) - to_db(second))) + " dB");
  SteadyState ss;
  ss.linear = mean(begin, n);
  ss.db = to_db(ss.linear);
  ss.window_begin = begin;
  ss.window_len = len;
  return ss;
}

std::string to_csv(const TransientResult& tr, const std::map<std::string, std::string>& metadata) {
  auto meta = metadata;
  meta["n_runs"] = std::to_string(tr.n_runs);
  meta["n_iters"] = std::to_string(tr.n_iters);
  meta["base_seed"] = std::to_string(tr.base_seed);
  if (tr.steady_state) {
    meta["steady_state_db"] = csv::format_double(tr.steady_state->db);
    meta["steady_state_window"] =
        std::to_string(tr.steady_state->window_begin) + "+" + std::to_string(tr.steady_state->window_len);
  }
  std::string out = csv::metadata_block(meta);
  out += "iter,msd_linear,msd_db\n";
  for (std::size_t i = 0; i < tr.msd_linear.size(); ++i)
    out += std::to_string(i) + "," + csv::format_double(tr.msd_linear[i]) + "," + csv::format_double(tr.msd_db[i]) + "\n";
  return out;
}

TransientResult parse_transient_csv(std::string_view text, std::map<std::string, std::string>* metadata) {
  auto t = csv::parse(text);
  csv::expect_header(t, {"iter", "msd_linear", "msd_db"});
  TransientResult tr;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (csv::to_size(t.rows[r][0]) != r) throw Error(ErrorCode::parse_error, "iteration column out of order");
    tr.msd_linear.push_back(csv::to_double(t.rows[r][1]));
    tr.msd_db.push_back(csv::to_double(t.rows[r][2]));
  }
  tr.n_iters = tr.msd_linear.size();
  if (auto it = t.metadata.find("n_runs"); it != t.metadata.end()) tr.n_runs = csv::to_size(it->second);
  if (auto it = t.metadata.find("base_seed"); it != t.metadata.end())
    tr.base_seed = std::stoull(it->second);
  if (metadata) *metadata = std::move(t.metadata);
  return tr;
}

}  // namespace difnet
