// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "difnet/csv.hpp"
#include "difnet/error.hpp"
#include "difnet/experiment.hpp"
#include "difnet/simulator.hpp"
#include "difnet/theory.hpp"
#include "oracles.hpp"

using namespace difnet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// every (rate, lower bound) pair seen by the exact-theory criteria, for the
// rate-bound check at the end
struct RateSample {
  double rate;
  double lower;
};
std::vector<RateSample> g_rates;

void record_rate(double r, const SignalProfile& p, const AdaptationConfig& cfg, const Graph& g) {
  const double mu = resolved_step(cfg, g);
  const double lo = (1.0 - mu * p.ru_min()) * (1.0 - mu * p.ru_min());
  g_rates.push_back({r, lo});
}

const Artifact& artifact(const ExperimentOutput& out, const std::string& name) {
  for (const auto& f : out.files)
    if (f.name == name) return f;
  throw std::runtime_error("missing artifact " + name);
}

std::vector<NodeId> random_subset(const Graph& g, std::size_t count, std::uint64_t seed) {
  return select_informed(g, {InformedOrder::random, seed, {}}, count);
}

SignalProfile uniform_noise_profile(std::size_t m, std::size_t n, std::uint64_t seed) {
  return random_profile(m, 0.8, 1.8, n, 0.01, seed);
}

// --- criteria ---------------------------------------------------------------

Outcome msd_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Graph g = gen_erdos_renyi(4, 0.6, 100 + s, 1000);
    SignalProfile p = uniform_noise_profile(2, 4, 200 + s);
    SplitMix64 rng(300 + s);
    std::uniform_real_distribution<double> noise(0.001, 0.05), step(0.01, 0.3);
    for (double& v : p.noise_vars) v = noise(rng);
    const AdaptationConfig cfg{random_subset(g, 1 + s % 4, s), UniformStep{step(rng)}};
    const auto es = build_error_system(CombinationMatrix::uniform(g), p, cfg, g);
    const double got = exact_msd(es);
    const double ref = oracle::msd_kronecker(es.dense_b(), es.dense_y(), 4);
    worst = std::max(worst, std::abs(got - ref) / ref);
    record_rate(exact_rate(es), p, cfg, g);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-10 && t < 1.0, "max rel err " + fmt("%.2e", worst) + ", " + fmt("%.3f", t) + " s"};
}

Outcome rate_oracle() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t n = 5 + 2 * s;           // 5 .. 43
    const std::size_t m = std::max<std::size_t>(1, std::min<std::size_t>(8, 400 / n));
    const Graph g = gen_erdos_renyi(n, std::min(1.0, 4.0 / n), 400 + s, 10000);
    const auto p = uniform_noise_profile(m, n, 500 + s);
    const AdaptationConfig cfg{random_subset(g, 1 + (s * 7) % n, s), UniformStep{0.005 + 0.01 * (s % 5)}};
    const auto es = build_error_system(CombinationMatrix::uniform(g), p, cfg, g);
    const double r = exact_rate(es);
    const double rho = oracle::spectral_radius_dense(es.dense_b());
    worst = std::max(worst, std::abs(r - rho * rho));
    record_rate(r, p, cfg, g);
  }
  return {worst <= 1e-9, "max abs err " + fmt("%.2e", worst)};
}

Outcome closure() {
  const auto t0 = Clock::now();
  const Graph g = gen_erdos_renyi(20, 0.3, 7, 1000);
  const auto cm = CombinationMatrix::uniform(g);
  const auto p = uniform_noise_profile(5, 20, 7);
  const AdaptationConfig cfg{informed_order(g, {}), UniformStep{0.01}};
  const auto tr = monte_carlo(g, cm, p, cfg, 20000, 100, 1000);
  const auto ss = steady_state_estimate(tr, 0.1);
  const auto es = build_error_system(cm, p, cfg, g);
  const double theory = to_db(exact_msd(es));
  record_rate(exact_rate(es), p, cfg, g);
  const double t = seconds_since(t0);
  const double gap = ss.db - theory;
  return {std::abs(gap) <= 1.0 && t < 60.0, "sim " + fmt("%.2f", ss.db) + " dB vs theory " + fmt("%.2f", theory) +
                                                 " dB, " + fmt("%.1f", t) + " s"};
}

Outcome table2() {
  const auto t0 = Clock::now();
  const auto cfg = parse_config(R"({"experiment": "table2", "seed": 2024,
      "topology": {"kind": "erdos_renyi", "N": 200, "n0": 10}, "sim": {"runs": 30}})");
  const auto t = csv::parse(artifact(run_experiment(cfg), "table2.csv").contents);
  const double eta_ref[] = {5.13, 15.83, 4.93, 16.33};
  const double lam_ref[] = {0.883, 0.503, 0.900, 0.495};
  bool ok = t.rows.size() == 4;
  std::string detail;
  for (std::size_t i = 0; ok && i < 4; ++i) {
    const double eta = csv::to_double(t.rows[i][2]), lam = csv::to_double(t.rows[i][3]);
    ok = ok && std::abs(eta / eta_ref[i] - 1.0) <= 0.05 && std::abs(lam / lam_ref[i] - 1.0) <= 0.05;
    detail += t.rows[i][1] + ":(" + fmt("%.2f", eta) + "," + fmt("%.3f", lam) + ") ";
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 120.0, detail + fmt("%.1f", secs) + " s"};
}

Outcome semicircle() {
  double sum = 0.0, sum_sq = 0.0, lambda2 = 0.0, eta = 0.0;
  std::size_t count = 0;
  const int seeds = 30;
  for (int s = 0; s < seeds; ++s) {
    const Graph g = gen_erdos_renyi(200, 0.075, derive_seed(77 + s, stream_tag::graph), 1000);
    eta += degree_stats(g).eta;
    const auto ev = spectral_decompose(CombinationMatrix::uniform(g)).eigenvalues;
    lambda2 += std::abs(ev(1));
    for (Eigen::Index k = 1; k < ev.size(); ++k) {
      sum += ev(k);
      sum_sq += ev(k) * ev(k);
      ++count;
    }
  }
  eta /= seeds;
  lambda2 /= seeds;
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  const double r = semicircle_radius(eta);
  const double var_ref = r * r / 4.0;
  const bool mean_ok = std::abs(mean) <= 0.02;
  const bool var_ok = std::abs(var / var_ref - 1.0) <= 0.15;
  const bool l2_ok = std::abs(lambda2 / r - 1.0) <= 0.10;
  return {mean_ok && var_ok && l2_ok, "mean " + fmt("%.4f", mean) + (mean_ok ? "" : " (outside +-0.02)") +
                                          ", var/(R^2/4) " + fmt("%.3f", var / var_ref) + ", |lambda_2|/R " +
                                          fmt("%.3f", lambda2 / r)};
}

Outcome nested_rate() {
  int pairs = 0, bad = 0;
  double worst = -1.0;
  for (std::uint64_t s = 0; pairs < 200; ++s) {
    const std::size_t n = 5 + s % 11;  // 5 .. 15
    const Graph g = gen_erdos_renyi(n, 0.4, 900 + s, 10000);
    const auto cm = CombinationMatrix::uniform(g);
    const auto p = uniform_noise_profile(1 + s % 3, n, 900 + s);
    const auto order = informed_order(g, {InformedOrder::random, s, {}});
    SplitMix64 rng(s);
    const std::size_t small = 1 + rng() % (n - 1);
    const std::size_t large = small + 1 + rng() % (n - small);
    const double mu = 0.01 + 0.04 * static_cast<double>(s % 4);
    const AdaptationConfig a{{order.begin(), order.begin() + static_cast<std::ptrdiff_t>(small)}, UniformStep{mu}};
    const AdaptationConfig b{{order.begin(), order.begin() + static_cast<std::ptrdiff_t>(large)}, UniformStep{mu}};
    const double ra = exact_rate(build_error_system(cm, p, a, g));
    const double rb = exact_rate(build_error_system(cm, p, b, g));
    record_rate(ra, p, a, g);
    record_rate(rb, p, b, g);
    worst = std::max(worst, rb - ra);
    if (rb > ra + 1e-12) ++bad;
    ++pairs;
  }
  return {bad == 0, std::to_string(pairs) + " pairs, " + std::to_string(bad) + " violations, max increase " +
                        fmt("%.2e", worst)};
}

std::vector<TheoryRow> sweep_rows(const std::string& text) {
  return parse_theory_csv(artifact(run_experiment(parse_config(text)), "theory.csv").contents);
}

Outcome approximation() {
  const auto rows = sweep_rows(R"({"experiment": "informed_sweep", "seed": 1,
      "topology": {"kind": "erdos_renyi", "N": 100, "p": 0.075},
      "adaptation": {"order": "top_degree", "step": 0.01}})");
  double rate_gap = 0.0, msd_gap = 0.0;
  for (const auto& r : rows) {
    rate_gap = std::max(rate_gap, std::abs(r.rate_approx - r.rate_exact));
    msd_gap = std::max(msd_gap, std::abs(r.msd_approx_db - r.msd_exact_db));
  }
  return {!rows.empty() && rate_gap <= 5e-3 && msd_gap <= 1.5,
          std::to_string(rows.size()) + " points, max rate gap " + fmt("%.2e", rate_gap) + ", max MSD gap " +
              fmt("%.3f", msd_gap) + " dB"};
}

Outcome h_checks() {
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) worst = std::max(worst, std::abs(h_func(0.1 * i) - oracle::h_quadrature(0.1 * i)));
  bool mono = true, convex = true;
  std::vector<double> v;
  for (int i = 1; i <= 99; ++i) v.push_back(h_func(0.01 * i));
  for (std::size_t i = 1; i < v.size(); ++i) mono = mono && v[i] > v[i - 1];
  for (std::size_t i = 1; i + 1 < v.size(); ++i) convex = convex && v[i + 1] - 2 * v[i] + v[i - 1] > 0.0;
  return {worst <= 1e-8 && mono && convex, "max quad err " + fmt("%.2e", worst) + (mono ? ", increasing" : ", NOT increasing") +
                                               (convex ? ", convex" : ", NOT convex")};
}

Outcome tradeoff() {
  const auto rows = sweep_rows(R"({"experiment": "informed_sweep", "seed": 1,
      "topology": {"kind": "erdos_renyi", "N": 200, "p": 0.02},
      "adaptation": {"order": "top_degree", "step": 0.01}})");
  bool decreasing = true;
  double prev = 2.0;
  for (const auto& r : rows) {
    if (r.n_i < 50) continue;
    decreasing = decreasing && r.rate_exact < prev;
    prev = r.rate_exact;
  }
  const auto best = std::min_element(rows.begin(), rows.end(),
                                     [](const auto& a, const auto& b) { return a.msd_exact_db < b.msd_exact_db; });
  const double at_n = rows.back().msd_exact_db;
  const bool rises = rows.back().n_i == 200 && at_n > best->msd_exact_db;
  return {decreasing && rises, std::string(decreasing ? "rate decreasing" : "rate NOT decreasing") +
                                   " on N_I>=50; MSD min " + fmt("%.2f", best->msd_exact_db) + " dB at N_I=" +
                                   std::to_string(best->n_i) + ", at N_I=200 " + fmt("%.2f", at_n) + " dB"};
}

Outcome fixed_rate() {
  std::string sweep = "[";
  for (int k = 10; k <= 50; ++k) sweep += std::to_string(k) + (k < 50 ? "," : "]");
  const auto er = sweep_rows(R"({"experiment": "fixed_rate_sweep", "seed": 3,
      "topology": {"kind": "erdos_renyi", "N": 50, "p": 0.2},
      "adaptation": {"rule": "normalized", "step": 0.1, "sweep": )" + sweep + "}}");
  double lo = 1.0, hi = 0.0;
  for (const auto& r : er) {
    lo = std::min(lo, r.rate_exact);
    hi = std::max(hi, r.rate_exact);
  }
  const double spread = (hi - lo) / lo;

  const auto sf = sweep_rows(R"({"experiment": "fixed_rate_sweep", "seed": 3,
      "topology": {"kind": "scale_free", "N": 200, "m": 2, "n0": 10},
      "adaptation": {"rule": "normalized", "step": 0.1, "order": "bottom_degree"}})");
  const auto best = std::min_element(sf.begin(), sf.end(),
                                     [](const auto& a, const auto& b) { return a.msd_approx_db < b.msd_approx_db; });
  const bool hubs_last = sf.back().n_i == 200 && sf.back().msd_approx_db > best->msd_approx_db;
  return {spread < 0.01 && hubs_last, "ER rate spread " + fmt("%.2e", spread) + "; SF fixed-rate MSD min " +
                                          fmt("%.2f", best->msd_approx_db) + " dB at N_I=" + std::to_string(best->n_i) +
                                          ", at N_I=200 " + fmt("%.2f", sf.back().msd_approx_db) + " dB"};
}

Outcome kgt1_monotone() {
  int sweeps = 0, bad = 0;
  auto check = [&](const Graph& g, const SignalProfile& p, const InformedRule& rule) {
    const auto order = informed_order(g, rule);
    double prev = -1.0;
    for (std::size_t n = 1; n <= g.size(); ++n) {
      const AdaptationConfig cfg{{order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n)}, UniformStep{0.01}};
      const double v = msd_components(g, p, cfg).kgt1;
      if (!(v > prev)) ++bad;
      prev = v;
    }
    ++sweeps;
  };
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Graph er = gen_erdos_renyi(200, 0.075, 40 + s, 1000);
    const Graph sf = gen_scale_free(200, 8, 10, 40 + s);
    SignalProfile p = uniform_noise_profile(5, 200, 40 + s);
    SplitMix64 rng(s);
    std::uniform_real_distribution<double> noise(0.001, 0.1);
    for (double& v : p.noise_vars) v = noise(rng);
    for (const auto& order : {InformedOrder::top_degree, InformedOrder::bottom_degree, InformedOrder::random}) {
      check(er, p, {order, s, {}});
      check(sf, p, {order, s, {}});
    }
  }
  return {bad == 0, std::to_string(sweeps) + " nested sweeps, " + std::to_string(bad) + " non-increasing steps"};
}

Outcome rate_bounds() {
  int bad = 0;
  for (const auto& s : g_rates)
    if (!(s.lower <= s.rate * (1.0 + 1e-12) && s.rate < 1.0)) ++bad;
  return {!g_rates.empty() && bad == 0,
          std::to_string(g_rates.size()) + " configurations, " + std::to_string(bad) + " outside the bounds"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"exact MSD doubling vs Kronecker inverse", msd_oracle},
      {"power-iteration rate vs dense eigensolve", rate_oracle},
      {"simulation vs exact theory steady state", closure},
      {"network degree and |lambda_2| table", table2},
      {"semicircle law moments and edge", semicircle},
      {"rate never increases for nested informed sets", nested_rate},
      {"approximate rate and MSD accuracy", approximation},
      {"h(alpha) closed form, monotone, convex", h_checks},
      {"rate / MSD trade-off along top-degree sweep", tradeoff},
      {"fixed-rate sweep behaviour", fixed_rate},
      {"MSD_{k>1} increases along nested sweeps", kgt1_monotone},
      // runs last: it checks every configuration gathered above
      {"rate bounds (1 - mu lambda_min)^2 <= r < 1", rate_bounds},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
