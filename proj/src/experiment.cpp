#include "difnet/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "difnet/combination.hpp"
#include "difnet/csv.hpp"
#include "difnet/error.hpp"
#include "difnet/rng.hpp"
#include "difnet/simulator.hpp"
#include "difnet/theory.hpp"

namespace difnet {

using json = nlohmann::json;

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 5> kKinds = {{
    {ExperimentKind::transient, "transient"},
    {ExperimentKind::informed_sweep, "informed_sweep"},
    {ExperimentKind::eigen_dist, "eigen_dist"},
    {ExperimentKind::fixed_rate_sweep, "fixed_rate_sweep"},
    {ExperimentKind::table2, "table2"},
}};

constexpr std::array<std::pair<GraphKind, std::string_view>, 3> kGraphKinds = {{
    {GraphKind::erdos_renyi, "erdos_renyi"},
    {GraphKind::scale_free, "scale_free"},
    {GraphKind::explicit_list, "explicit"},
}};

constexpr std::array<std::pair<InformedOrder, std::string_view>, 4> kOrders = {{
    {InformedOrder::top_degree, "top_degree"},
    {InformedOrder::bottom_degree, "bottom_degree"},
    {InformedOrder::random, "random"},
    {InformedOrder::explicit_list, "explicit"},
}};

constexpr std::array<std::pair<StepKind, std::string_view>, 2> kStepKinds = {{
    {StepKind::uniform, "uniform"},
    {StepKind::normalized, "normalized"},
}};

template <class E, std::size_t K>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, K>& table, E value) {
  for (const auto& [v, name] : table)
    if (v == value) return name;
  return "?";
}

template <class E, std::size_t K>
E enum_of(const std::array<std::pair<E, std::string_view>, K>& table, const std::string& field,
          const std::string& text) {
  for (const auto& [v, name] : table)
    if (name == text) return v;
  std::string allowed;
  for (const auto& [v, name] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw ConfigError(field, "unknown value '" + text + "' (expected one of " + allowed + ")");
}

// Every documented key, flattened to its dotted path.
const std::set<std::string> kKeys = {
    "experiment",         "seed",          "output",           "topology.kind",       "topology.N",
    "topology.p",         "topology.m",    "topology.n0",      "topology.max_attempts", "topology.edge_list",
    "signal.M",           "signal.ru_range", "signal.ru_diag", "signal.noise_var",    "signal.w_true",
    "adaptation.rule",    "adaptation.order", "adaptation.count", "adaptation.nodes",  "adaptation.sweep",
    "adaptation.step",    "sim.iters",     "sim.runs",         "sim.window_fraction",
};
const std::set<std::string> kSections = {"topology", "signal", "adaptation", "sim"};

void flatten(const json& node, const std::string& prefix, std::map<std::string, json>& out) {
  for (const auto& [key, value] : node.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      if (!kSections.contains(path)) throw ConfigError(path, "unknown section");
      flatten(value, path, out);
      continue;
    }
    if (!kKeys.contains(path)) throw ConfigError(path, "unknown key");
    if (!out.emplace(path, value).second) throw ConfigError(path, "given twice");
  }
}

class Reader {
 public:
  explicit Reader(std::map<std::string, json> values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.contains(key); }

  const json& raw(const std::string& key) const { return values_.at(key); }

  double number(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    return v.get<double>();
  }

  std::uint64_t integer(const std::string& key) const { return integer_value(raw(key), key); }

  std::string text(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_array()) throw ConfigError(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(key, "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> integers(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_array()) throw ConfigError(key, "expected an array of non-negative integers");
    std::vector<std::size_t> out;
    for (const auto& x : v) out.push_back(integer_value(x, key));
    return out;
  }

 private:
  static std::uint64_t integer_value(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) throw ConfigError(key, "must be non-negative, got " + v.dump());
    throw ConfigError(key, "expected a non-negative integer, got " + v.dump());
  }

  std::map<std::string, json> values_;
};

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

double default_step(StepKind kind) { return kind == StepKind::uniform ? 0.01 : 0.1; }

InformedOrder default_order(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::fixed_rate_sweep:
      return InformedOrder::bottom_degree;
    case ExperimentKind::transient:
      return InformedOrder::random;
    default:
      return InformedOrder::top_degree;
  }
}

// Re-raise module errors with the stage that produced them.
template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.detail());
  }
}

// Like `staged`, over independent items that may run on several threads.
void parallel_for(std::size_t n, const char* stage, const std::function<void(std::size_t)>& body) {
  std::vector<std::optional<Error>> failures(n);
  std::vector<std::string> other(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(i);
    try {
      body(j);
    } catch (const Error& e) {
      failures[j] = e;
    } catch (const std::exception& e) {
      other[j] = e.what();
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (failures[j]) throw Error(failures[j]->code(), std::string(stage) + ": " + failures[j]->detail());
    if (!other[j].empty()) throw std::runtime_error(std::string(stage) + ": " + other[j]);
  }
}

Graph build_graph(const ExperimentConfig::Topology& t, std::uint64_t seed) {
  switch (t.kind) {
    case GraphKind::erdos_renyi:
      return gen_erdos_renyi(t.n, t.p, seed, t.max_attempts);
    case GraphKind::scale_free:
      return gen_scale_free(t.n, t.m, t.n0, seed);
    case GraphKind::explicit_list:
      break;
  }
  Graph g = load_edge_list(t.edge_list);
  if (g.size() != t.n)
    throw ConfigError("topology.N", "edge list has " + std::to_string(g.size()) + " nodes, config says " +
                                        std::to_string(t.n));
  return g;
}

SignalProfile build_profile(const ExperimentConfig& cfg) {
  const auto& s = cfg.signal;
  const std::size_t n = cfg.topology.n;
  const std::size_t m = s.ru_diag.empty() ? s.m_dim : s.ru_diag.size();
  const double noise0 = s.noise_vars.empty() ? 0.01 : s.noise_vars.front();
  SignalProfile p = random_profile(m, s.ru_lo, s.ru_hi, n, noise0, derive_seed(cfg.seed, stream_tag::profile));
  if (!s.ru_diag.empty()) p.ru_diag = s.ru_diag;
  if (!s.w_true.empty()) p.w_true = s.w_true;
  if (s.noise_vars.size() == n) p.noise_vars = s.noise_vars;
  p.validate();
  return p;
}

InformedRule informed_rule(const ExperimentConfig& cfg) {
  InformedRule rule;
  rule.order = cfg.adaptation.order.value_or(default_order(cfg.experiment));
  rule.seed = derive_seed(cfg.seed, stream_tag::informed);
  rule.nodes = cfg.adaptation.nodes;
  return rule;
}

StepRule step_rule(const ExperimentConfig& cfg) {
  const double step = cfg.effective_step();
  if (cfg.effective_step_kind() == StepKind::uniform) return UniformStep{step};
  return NormalizedStep{step};
}

std::vector<std::size_t> sweep_grid(const ExperimentConfig& cfg) {
  if (!cfg.adaptation.sweep.empty()) return cfg.adaptation.sweep;
  const std::size_t n = cfg.topology.n;
  const std::size_t stride = (n + 39) / 40;
  std::vector<std::size_t> grid{1};
  for (std::size_t k = stride; k < n; k += stride)
    if (k > 1) grid.push_back(k);
  if (grid.back() != n) grid.push_back(n);
  return grid;
}

std::map<std::string, std::string> base_metadata(const ExperimentConfig& cfg) {
  const auto& t = cfg.topology;
  std::map<std::string, std::string> md{
      {"experiment", std::string(to_string(cfg.experiment))},
      {"config_hash", cfg.hash()},
      {"seed", std::to_string(cfg.seed)},
      {"topology", std::string(name_of(kGraphKinds, t.kind))},
      {"N", std::to_string(t.n)},
  };
  if (t.kind == GraphKind::erdos_renyi) md["p"] = csv::format_double(t.p);
  if (t.kind == GraphKind::scale_free) {
    md["m"] = std::to_string(t.m);
    md["n0"] = std::to_string(t.n0);
  }
  return md;
}

void add_graph_metadata(std::map<std::string, std::string>& md, const Graph& g, const SignalProfile& p) {
  const auto ds = degree_stats(g);
  md["eta"] = csv::format_double(ds.eta);
  md["M"] = std::to_string(p.m_dim());
  std::string diag;
  for (double x : p.ru_diag) diag += (diag.empty() ? "" : " ") + csv::format_double(x);
  md["ru_diag"] = diag;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

// --- experiments -----------------------------------------------------------

ExperimentOutput run_transient(const ExperimentConfig& cfg) {
  const Graph g = staged("topology", [&] { return build_graph(cfg.topology, derive_seed(cfg.seed, stream_tag::graph)); });
  const SignalProfile profile = staged("signal", [&] { return build_profile(cfg); });
  const auto cm = CombinationMatrix::uniform(g);
  AdaptationConfig ad;
  ad.step = step_rule(cfg);
  ad.informed = staged("informed", [&] {
    return select_informed(g, informed_rule(cfg), cfg.adaptation.count.value_or(g.size()));
  });

  TransientResult tr = staged("simulation", [&] {
    return monte_carlo(g, cm, profile, ad, cfg.sim.iters, cfg.sim.runs, derive_seed(cfg.seed, stream_tag::data));
  });
  auto md = base_metadata(cfg);
  add_graph_metadata(md, g, profile);
  md["n_i"] = std::to_string(ad.informed.size());
  md["mu"] = csv::format_double(resolved_step(ad, g));

  std::vector<std::string> summary;
  try {
    tr.steady_state = steady_state_estimate(tr, cfg.sim.window_fraction);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::not_converged) throw;
    md["steady_state"] = "not_converged";
    summary.push_back("steady state: not converged (" + std::string(e.what()) + ")");
  }

  const TheoryReport th = staged("theory", [&] { return theory_report(g, cm, profile, ad); });
  md["theory_rate_exact"] = csv::format_double(th.rate_exact);
  md["theory_msd_exact_db"] = csv::format_double(th.msd_exact_db());

  ExperimentOutput out;
  out.files.push_back({"transient.csv", to_csv(tr, md)});
  std::vector<TheoryReport> rows{th};
  out.files.push_back({"theory.csv", to_csv(rows, base_metadata(cfg))});

  summary.insert(summary.begin(), "transient: N=" + std::to_string(g.size()) + " N_I=" +
                                      std::to_string(ad.informed.size()) + " runs=" + std::to_string(tr.n_runs) +
                                      " iters=" + std::to_string(tr.n_iters));
  if (tr.steady_state) summary.push_back("simulated steady-state MSD (dB): " + csv::format_double(tr.steady_state->db));
  summary.push_back("theory MSD (dB): " + csv::format_double(th.msd_exact_db()) +
                    ", rate: " + csv::format_double(th.rate_exact));
  out.summary = join(summary);
  return out;
}

ExperimentOutput run_sweep(const ExperimentConfig& cfg) {
  const Graph g = staged("topology", [&] { return build_graph(cfg.topology, derive_seed(cfg.seed, stream_tag::graph)); });
  const SignalProfile profile = staged("signal", [&] { return build_profile(cfg); });
  const auto cm = CombinationMatrix::uniform(g);
  const auto order = staged("informed", [&] { return informed_order(g, informed_rule(cfg)); });
  const auto grid = sweep_grid(cfg);
  for (std::size_t k : grid)
    if (k < 1 || k > g.size()) throw ConfigError("adaptation.sweep", "N_I = " + std::to_string(k) + " out of range");

  std::vector<TheoryReport> rows(grid.size());
  parallel_for(grid.size(), "theory", [&](std::size_t i) {
    AdaptationConfig ad;
    ad.step = step_rule(cfg);
    ad.informed.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(grid[i]));
    rows[i] = theory_report(g, cm, profile, ad, Execution::serial);
  });

  auto md = base_metadata(cfg);
  add_graph_metadata(md, g, profile);
  md["order"] = std::string(name_of(kOrders, informed_rule(cfg).order));
  md["step_rule"] = std::string(name_of(kStepKinds, cfg.effective_step_kind()));
  md["step"] = csv::format_double(cfg.effective_step());

  ExperimentOutput out;
  out.files.push_back({"theory.csv", to_csv(rows, md)});
  auto best = std::min_element(rows.begin(), rows.end(),
                               [](const auto& a, const auto& b) { return a.msd_exact < b.msd_exact; });
  out.summary = join({std::string(to_string(cfg.experiment)) + ": " + std::to_string(rows.size()) +
                          " sweep points, eta=" + md["eta"],
                      "minimum exact MSD (dB): " + csv::format_double(best->msd_exact_db()) + " at N_I=" +
                          std::to_string(best->n_informed),
                      "exact MSD at N_I=" + std::to_string(rows.back().n_informed) +
                          " (dB): " + csv::format_double(rows.back().msd_exact_db())});
  return out;
}

ExperimentOutput run_eigen_dist(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.topology.n, runs = cfg.sim.runs;
  if (n < 2) throw ConfigError("topology.N", "eigen_dist needs at least two nodes");
  std::vector<Eigen::VectorXd> spectra(runs);
  std::vector<double> etas(runs);
  parallel_for(runs, "spectrum", [&](std::size_t s) {
    const Graph g = build_graph(cfg.topology, derive_seed(cfg.seed + s, stream_tag::graph));
    etas[s] = degree_stats(g).eta;
    spectra[s] = spectral_decompose(CombinationMatrix::uniform(g)).eigenvalues;
  });

  const double eta = std::accumulate(etas.begin(), etas.end(), 0.0) / static_cast<double>(runs);
  const double radius = semicircle_radius(eta);

  // |lambda_k| averaged over seeds, k = 1..N (already sorted by magnitude)
  std::string body = "k,abs_lambda_mean,theory_exact_g,theory_linear\n";
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (const auto& ev : spectra) acc += std::abs(ev(static_cast<Eigen::Index>(k)));
    double exact = 1.0, linear = 1.0;
    if (k > 0) {
      exact = staged("theory", [&] { return lambda_k_theory(k + 1, n, eta, LambdaMethod::exact_g); });
      linear = lambda_k_theory(k + 1, n, eta, LambdaMethod::linear);
    }
    body += std::to_string(k + 1) + "," + csv::format_double(acc / static_cast<double>(runs)) + "," +
            csv::format_double(exact) + "," + csv::format_double(linear) + "\n";
  }

  // pooled histogram of the non-Perron eigenvalues against the semicircle
  constexpr int kBins = 50;
  constexpr double lo = -1.0, hi = 1.0, width = (hi - lo) / kBins;
  std::vector<std::size_t> counts(kBins, 0);
  std::size_t total = 0;
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& ev : spectra) {
    for (Eigen::Index k = 1; k < ev.size(); ++k) {
      const double x = ev(k);
      const int b = std::clamp(static_cast<int>((x - lo) / width), 0, kBins - 1);
      ++counts[static_cast<std::size_t>(b)];
      ++total;
      sum += x;
      sum_sq += x * x;
    }
  }
  std::string hist = "bin_center,density_empirical,density_theory\n";
  for (int b = 0; b < kBins; ++b) {
    const double c = lo + (b + 0.5) * width;
    const double dens = static_cast<double>(counts[static_cast<std::size_t>(b)]) / (static_cast<double>(total) * width);
    hist += csv::format_double(c) + "," + csv::format_double(dens) + "," +
            csv::format_double(semicircle_density(c, eta)) + "\n";
  }

  const double mean = sum / static_cast<double>(total);
  const double var = sum_sq / static_cast<double>(total) - mean * mean;
  auto md = base_metadata(cfg);
  md["runs"] = std::to_string(runs);
  md["eta_mean"] = csv::format_double(eta);
  md["radius"] = csv::format_double(radius);

  ExperimentOutput out;
  out.files.push_back({"eigen_dist.csv", csv::metadata_block(md) + body});
  out.files.push_back({"semicircle.csv", csv::metadata_block(md) + hist});
  out.summary = join({"eigen_dist: " + std::to_string(runs) + " graphs, mean eta=" + csv::format_double(eta),
                      "non-Perron eigenvalues: mean " + csv::format_double(mean) + ", variance " +
                          csv::format_double(var) + " (semicircle R^2/4 = " +
                          csv::format_double(radius * radius / 4.0) + ")"});
  return out;
}

ExperimentOutput run_table2(const ExperimentConfig& cfg) {
  struct Case {
    std::string model;
    ExperimentConfig::Topology topo;
    std::string param;
  };
  std::vector<Case> cases;
  for (double p : {0.02, 0.075}) {
    ExperimentConfig::Topology t = cfg.topology;
    t.kind = GraphKind::erdos_renyi;
    t.p = p;
    t.max_attempts = std::max(t.max_attempts, 10000);
    cases.push_back({"erdos_renyi", t, csv::format_double(p)});
  }
  for (std::size_t m : {2, 8}) {
    ExperimentConfig::Topology t = cfg.topology;
    t.kind = GraphKind::scale_free;
    t.m = m;
    t.n0 = std::max(t.n0, m);
    cases.push_back({"scale_free", t, std::to_string(m)});
  }

  const std::size_t runs = cfg.sim.runs;
  std::vector<double> eta(cases.size() * runs), lambda2(cases.size() * runs);
  parallel_for(cases.size() * runs, "table2", [&](std::size_t job) {
    const std::size_t c = job / runs, s = job % runs;
    const Graph g = build_graph(cases[c].topo, derive_seed(cfg.seed + s, stream_tag::graph));
    eta[job] = degree_stats(g).eta;
    const auto ev = spectral_decompose(CombinationMatrix::uniform(g)).eigenvalues;
    lambda2[job] = ev.size() > 1 ? std::abs(ev(1)) : 0.0;
  });

  auto md = base_metadata(cfg);
  md.erase("topology");
  md.erase("p");
  md.erase("m");
  md["runs"] = std::to_string(runs);
  std::string body = "model,param,eta_mean,lambda2_mean\n";
  std::vector<std::string> summary{"table2: N=" + std::to_string(cfg.topology.n) + ", " + std::to_string(runs) +
                                   " seeds"};
  for (std::size_t c = 0; c < cases.size(); ++c) {
    double e = 0.0, l = 0.0;
    for (std::size_t s = 0; s < runs; ++s) {
      e += eta[c * runs + s];
      l += lambda2[c * runs + s];
    }
    e /= static_cast<double>(runs);
    l /= static_cast<double>(runs);
    body += cases[c].model + "," + cases[c].param + "," + csv::format_double(e) + "," + csv::format_double(l) + "\n";
    summary.push_back(cases[c].model + " " + cases[c].param + ": eta=" + csv::format_double(e) +
                      " |lambda_2|=" + csv::format_double(l));
  }
  ExperimentOutput out;
  out.files.push_back({"table2.csv", csv::metadata_block(md) + body});
  out.summary = join(summary);
  return out;
}

std::string manifest(const ExperimentConfig& cfg, const std::vector<Artifact>& files) {
  std::string out = "experiment=" + std::string(to_string(cfg.experiment)) + "\n";
  out += "config_hash=" + cfg.hash() + "\n";
  out += "seed=" + std::to_string(cfg.seed) + "\n";
  out += "sim.iters=" + std::to_string(cfg.sim.iters) + "\n";
  out += "sim.runs=" + std::to_string(cfg.sim.runs) + "\n";
  out += "sim.window_fraction=" + csv::format_double(cfg.sim.window_fraction) + "\n";
  out += "files:\n";
  for (const auto& f : files) out += f.name + " " + std::to_string(f.contents.size()) + " " + hex64(fnv1a(f.contents)) + "\n";
  return out;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) { return name_of(kKinds, kind); }

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (const auto& [v, n] : kKinds)
    if (n == name) return v;
  return std::nullopt;
}

std::string ExperimentConfig::canonical() const {
  json j;
  j["experiment"] = to_string(experiment);
  j["seed"] = seed;
  j["output"] = output;
  j["topology"] = {{"kind", name_of(kGraphKinds, topology.kind)},
                   {"N", topology.n},
                   {"p", topology.p},
                   {"m", topology.m},
                   {"n0", topology.n0},
                   {"max_attempts", topology.max_attempts},
                   {"edge_list", topology.edge_list}};
  j["signal"] = {{"M", signal.m_dim},           {"ru_range", {signal.ru_lo, signal.ru_hi}},
                 {"ru_diag", signal.ru_diag},   {"noise_var", signal.noise_vars},
                 {"w_true", signal.w_true}};
  const auto order = adaptation.order.value_or(default_order(experiment));
  j["adaptation"] = {{"rule", name_of(kStepKinds, effective_step_kind())},
                     {"order", name_of(kOrders, order)},
                     {"count", adaptation.count ? json(*adaptation.count) : json(nullptr)},
                     {"nodes", adaptation.nodes},
                     {"sweep", adaptation.sweep},
                     {"step", effective_step()}};
  j["sim"] = {{"iters", sim.iters}, {"runs", sim.runs}, {"window_fraction", sim.window_fraction}};
  return j.dump();  // std::map ordering makes this stable
}

StepKind ExperimentConfig::effective_step_kind() const {
  if (adaptation.step_kind) return *adaptation.step_kind;
  return experiment == ExperimentKind::fixed_rate_sweep ? StepKind::normalized : StepKind::uniform;
}

double ExperimentConfig::effective_step() const {
  return adaptation.step.value_or(default_step(effective_step_kind()));
}

std::string ExperimentConfig::hash() const {
  // output directory does not change results
  ExperimentConfig c = *this;
  c.output = ".";
  return hex64(fnv1a(c.canonical()));
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("<root>", "expected a JSON object");

  std::map<std::string, json> flat;
  flatten(root, "", flat);
  const Reader r(std::move(flat));

  for (const char* key : {"experiment", "seed", "topology.kind"})
    if (!r.has(key)) throw ConfigError(key, "required key missing");

  ExperimentConfig cfg;
  const auto kind = parse_experiment_kind(r.text("experiment"));
  if (!kind) cfg.experiment = enum_of(kKinds, "experiment", r.text("experiment"));
  else cfg.experiment = *kind;
  cfg.seed = r.integer("seed");
  if (r.has("output")) cfg.output = r.text("output");

  auto& t = cfg.topology;
  t.kind = enum_of(kGraphKinds, "topology.kind", r.text("topology.kind"));
  if (r.has("topology.N")) t.n = r.integer("topology.N");
  if (r.has("topology.p")) t.p = r.number("topology.p");
  if (r.has("topology.m")) t.m = r.integer("topology.m");
  if (r.has("topology.n0")) t.n0 = r.integer("topology.n0");
  if (r.has("topology.max_attempts")) {
    const auto a = r.integer("topology.max_attempts");
    if (a > 100000000) throw ConfigError("topology.max_attempts", "too large");
    t.max_attempts = static_cast<int>(a);
  }
  if (r.has("topology.edge_list")) t.edge_list = r.text("topology.edge_list");

  auto& s = cfg.signal;
  if (r.has("signal.M")) s.m_dim = r.integer("signal.M");
  if (r.has("signal.ru_range")) {
    const auto range = r.numbers("signal.ru_range");
    if (range.size() != 2) throw ConfigError("signal.ru_range", "expected [lo, hi]");
    s.ru_lo = range[0];
    s.ru_hi = range[1];
  }
  if (r.has("signal.ru_diag")) {
    s.ru_diag = r.numbers("signal.ru_diag");
    if (r.has("signal.M") && s.ru_diag.size() != s.m_dim)
      throw ConfigError("signal.ru_diag", "length differs from signal.M");
    s.m_dim = s.ru_diag.size();
  }
  if (r.has("signal.noise_var")) {
    const auto& v = r.raw("signal.noise_var");
    s.noise_vars = v.is_array() ? r.numbers("signal.noise_var") : std::vector<double>{r.number("signal.noise_var")};
  }
  if (r.has("signal.w_true")) s.w_true = r.numbers("signal.w_true");

  auto& a = cfg.adaptation;
  if (r.has("adaptation.rule")) a.step_kind = enum_of(kStepKinds, "adaptation.rule", r.text("adaptation.rule"));
  if (r.has("adaptation.order")) a.order = enum_of(kOrders, "adaptation.order", r.text("adaptation.order"));
  if (r.has("adaptation.count")) a.count = r.integer("adaptation.count");
  if (r.has("adaptation.nodes")) a.nodes = r.integers("adaptation.nodes");
  if (r.has("adaptation.sweep")) a.sweep = r.integers("adaptation.sweep");
  if (r.has("adaptation.step")) a.step = r.number("adaptation.step");

  if (r.has("sim.iters")) cfg.sim.iters = r.integer("sim.iters");
  if (r.has("sim.runs")) cfg.sim.runs = r.integer("sim.runs");
  if (r.has("sim.window_fraction")) cfg.sim.window_fraction = r.number("sim.window_fraction");

  validate(cfg);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  const auto& t = cfg.topology;
  if (t.n < 1) throw ConfigError("topology.N", "must be at least 1");
  switch (t.kind) {
    case GraphKind::erdos_renyi:
      if (!(t.p > 0.0 && t.p <= 1.0)) throw ConfigError("topology.p", "must lie in (0, 1]");
      break;
    case GraphKind::scale_free:
      if (t.m < 1) throw ConfigError("topology.m", "must be at least 1");
      if (t.n0 < t.m) throw ConfigError("topology.n0", "must be at least topology.m");
      if (t.n0 > t.n) throw ConfigError("topology.n0", "must not exceed topology.N");
      break;
    case GraphKind::explicit_list:
      if (t.edge_list.empty()) throw ConfigError("topology.edge_list", "required for explicit topologies");
      break;
  }
  if (t.max_attempts < 1) throw ConfigError("topology.max_attempts", "must be at least 1");

  const auto& s = cfg.signal;
  if (s.m_dim < 1) throw ConfigError("signal.M", "must be at least 1");
  if (!(s.ru_lo > 0.0) || !(s.ru_hi >= s.ru_lo) || !std::isfinite(s.ru_hi))
    throw ConfigError("signal.ru_range", "need 0 < lo <= hi");
  for (double x : s.ru_diag)
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("signal.ru_diag", "entries must be positive");
  if (!s.ru_diag.empty() && s.ru_diag.size() != s.m_dim) throw ConfigError("signal.ru_diag", "length differs from signal.M");
  if (!s.noise_vars.empty() && s.noise_vars.size() != 1 && s.noise_vars.size() != t.n)
    throw ConfigError("signal.noise_var", "give one value or one per node");
  for (double x : s.noise_vars)
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("signal.noise_var", "entries must be non-negative");
  if (!s.w_true.empty() && s.w_true.size() != s.m_dim) throw ConfigError("signal.w_true", "length differs from signal.M");

  const auto& a = cfg.adaptation;
  if (a.step && (!(*a.step > 0.0) || !std::isfinite(*a.step)))
    throw ConfigError("adaptation.step", "must be positive, got " + csv::format_double(*a.step));
  if (a.count && (*a.count < 1 || *a.count > t.n))
    throw ConfigError("adaptation.count", "must lie in [1, topology.N]");
  for (std::size_t k : a.sweep)
    if (k < 1 || k > t.n) throw ConfigError("adaptation.sweep", "entries must lie in [1, topology.N]");
  if (!std::is_sorted(a.sweep.begin(), a.sweep.end()))
    throw ConfigError("adaptation.sweep", "entries must be increasing");
  if (a.order == InformedOrder::explicit_list) {
    if (a.nodes.empty()) throw ConfigError("adaptation.nodes", "required when adaptation.order is explicit");
    for (NodeId k : a.nodes)
      if (k >= t.n) throw ConfigError("adaptation.nodes", "node " + std::to_string(k) + " out of range");
  } else if (!a.nodes.empty()) {
    throw ConfigError("adaptation.nodes", "only allowed with adaptation.order = explicit");
  }

  if (cfg.sim.iters < 1) throw ConfigError("sim.iters", "must be at least 1");
  if (cfg.sim.runs < 1) throw ConfigError("sim.runs", "must be at least 1");
  if (!(cfg.sim.window_fraction > 0.0 && cfg.sim.window_fraction < 1.0))
    throw ConfigError("sim.window_fraction", "must lie in (0, 1)");
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentOutput out;
  switch (cfg.experiment) {
    case ExperimentKind::transient:
      out = run_transient(cfg);
      break;
    case ExperimentKind::informed_sweep:
    case ExperimentKind::fixed_rate_sweep:
      out = run_sweep(cfg);
      break;
    case ExperimentKind::eigen_dist:
      out = run_eigen_dist(cfg);
      break;
    case ExperimentKind::table2:
      out = run_table2(cfg);
      break;
  }
  out.files.push_back({"manifest.txt", manifest(cfg, out.files)});
  return out;
}

void write_outputs(const ExperimentOutput& out, const std::string& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& f : out.files) csv::write_file((std::filesystem::path(directory) / f.name).string(), f.contents);
}

}  // namespace difnet
