#include "difnet/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "difnet/csv.hpp"
#include "difnet/error.hpp"

namespace difnet {

double SignalProfile::ru_max() const { return *std::max_element(ru_diag.begin(), ru_diag.end()); }
double SignalProfile::ru_min() const { return *std::min_element(ru_diag.begin(), ru_diag.end()); }
double SignalProfile::ru_trace() const { return std::accumulate(ru_diag.begin(), ru_diag.end(), 0.0); }

void SignalProfile::validate() const {
  if (ru_diag.empty()) throw Error(ErrorCode::invalid_params, "filter length M must be at least 1");
  if (w_true.size() != ru_diag.size())
    throw Error(ErrorCode::invalid_params, "w_true length differs from M");
  for (double r : ru_diag)
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::invalid_params, "R_u entries must be positive");
  if (noise_vars.empty()) throw Error(ErrorCode::invalid_params, "noise variances missing");
  for (double s : noise_vars)
    if (!(s >= 0.0) || !std::isfinite(s))
      throw Error(ErrorCode::invalid_params, "noise variances must be non-negative");
}

SignalProfile random_profile(std::size_t m_dim, double ru_lo, double ru_hi, std::size_t n_nodes,
                             double noise_var, std::uint64_t seed) {
  if (!(ru_lo > 0.0 && ru_hi >= ru_lo)) throw Error(ErrorCode::invalid_params, "need 0 < ru_lo <= ru_hi");
  SplitMix64 gen(derive_seed(seed, stream_tag::profile));
  std::uniform_real_distribution<double> ru(ru_lo, ru_hi);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  SignalProfile p;
  p.ru_diag.resize(m_dim);
  for (auto& r : p.ru_diag) r = ru_lo == ru_hi ? ru_lo : ru(gen);
  p.w_true.resize(m_dim);
  for (auto& x : p.w_true) x = w(gen);
  p.noise_vars.assign(n_nodes, noise_var);
  p.validate();
  return p;
}

std::vector<NodeId> informed_order(const Graph& g, const InformedRule& rule) {
  const std::size_t n = g.size();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  switch (rule.order) {
    case InformedOrder::top_degree:
    case InformedOrder::bottom_degree:
      std::stable_sort(order.begin(), order.end(),
                       [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
      if (rule.order == InformedOrder::bottom_degree) std::reverse(order.begin(), order.end());
      break;
    case InformedOrder::random: {
      SplitMix64 gen(derive_seed(rule.seed, stream_tag::informed));
      std::shuffle(order.begin(), order.end(), gen);
      break;
    }
    case InformedOrder::explicit_list: {
      std::vector<bool> seen(n, false);
      for (NodeId k : rule.nodes) {
        if (k >= n) throw Error(ErrorCode::bad_list, "node " + std::to_string(k) + " out of range");
        if (seen[k]) throw Error(ErrorCode::bad_list, "node " + std::to_string(k) + " listed twice");
        seen[k] = true;
      }
      order = rule.nodes;
      break;
    }
  }
  return order;
}

std::vector<NodeId> select_informed(const Graph& g, const InformedRule& rule, std::size_t count) {
  if (count < 1 || count > g.size())
    throw Error(ErrorCode::invalid_count, "informed count " + std::to_string(count) + " not in [1, " +
                                              std::to_string(g.size()) + "]");
  auto order = informed_order(g, rule);
  if (count > order.size())
    throw Error(ErrorCode::invalid_count, "explicit list holds only " + std::to_string(order.size()) + " nodes");
  order.resize(count);
  return order;
}

namespace {

void check_informed(const AdaptationConfig& cfg, std::size_t n) {
  if (cfg.informed.empty()) throw Error(ErrorCode::invalid_count, "at least one informed node is required");
  std::vector<bool> seen(n, false);
  for (NodeId k : cfg.informed) {
    if (k >= n) throw Error(ErrorCode::bad_list, "informed node " + std::to_string(k) + " out of range");
    if (seen[k]) throw Error(ErrorCode::bad_list, "informed node " + std::to_string(k) + " listed twice");
    seen[k] = true;
  }
}

}  // namespace

double resolved_step(const AdaptationConfig& cfg, const Graph& g) {
  if (const auto* u = std::get_if<UniformStep>(&cfg.step)) return u->mu;
  const double mu0 = std::get<NormalizedStep>(cfg.step).mu0;
  double degree_sum = 0.0;
  for (NodeId k : cfg.informed) degree_sum += static_cast<double>(g.degree(k));
  return degree_sum > 0.0 ? mu0 / degree_sum : 0.0;
}

std::vector<double> resolve_steps(const AdaptationConfig& cfg, const Graph& g, const SignalProfile& profile) {
  check_informed(cfg, g.size());
  const double mu = resolved_step(cfg, g);
  const double product = mu * profile.ru_max();
  if (!(mu > 0.0) || !(product < 1.0))
    throw Error(ErrorCode::stability_violation,
                "step " + csv::format_double(mu) + " gives mu*max(R_u) = " + csv::format_double(product) +
                    ", outside (0, 1)");
  std::vector<double> steps(g.size(), 0.0);
  for (NodeId k : cfg.informed) steps[k] = mu;
  return steps;
}

StabilityVerdict check_mean_stability(const SignalProfile& profile, const AdaptationConfig& cfg, const Graph& g) {
  if (cfg.informed.empty()) return {false, "no informed node"};
  for (NodeId k : cfg.informed)
    if (k >= g.size()) return {false, "informed node " + std::to_string(k) + " out of range"};

  const double product = resolved_step(cfg, g) * profile.ru_max();
  if (!(product > 0.0 && product < 2.0))
    return {false, "step condition violated: mu*rho(R_u) = " + csv::format_double(product) + " not in (0, 2)"};

  // With self-loops every path can be padded to a common length, so the
  // path condition reduces to: each component holds an informed node.
  auto label = g.components();
  const std::size_t n_comp = *std::max_element(label.begin(), label.end()) + 1;
  std::vector<bool> covered(n_comp, false);
  for (NodeId k : cfg.informed) covered[label[k]] = true;
  for (std::size_t c = 0; c < n_comp; ++c)
    if (!covered[c]) {
      const auto node = static_cast<std::size_t>(std::find(label.begin(), label.end(), c) - label.begin());
      return {false, "path condition violated: node " + std::to_string(node) + " is unreachable from every informed node"};
    }
  return {true, {}};
}

SampleStream::SampleStream(const SignalProfile& profile, std::size_t n_nodes, std::uint64_t seed)
    : n_nodes_(n_nodes), gen_(derive_seed(seed, stream_tag::data)) {
  profile.validate();
  if (profile.n_nodes() != n_nodes) throw Error(ErrorCode::invalid_params, "profile has wrong node count");
  const auto m = static_cast<Eigen::Index>(profile.m_dim());
  ru_sd_.resize(m);
  w_true_.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    ru_sd_(j) = std::sqrt(profile.ru_diag[static_cast<std::size_t>(j)]);
    w_true_(j) = profile.w_true[static_cast<std::size_t>(j)];
  }
  noise_sd_.resize(static_cast<Eigen::Index>(n_nodes));
  for (std::size_t k = 0; k < n_nodes; ++k) noise_sd_(static_cast<Eigen::Index>(k)) = std::sqrt(profile.noise_vars[k]);
}

void SampleStream::next(Eigen::Ref<RowMatrixXd> u, Eigen::Ref<Eigen::VectorXd> d) {
  const Eigen::Index m = ru_sd_.size();
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n_nodes_); ++k) {
    double clean = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double x = ru_sd_(j) * normal_(gen_);
      u(k, j) = x;
      clean += x * w_true_(j);
    }
    d(k) = clean + noise_sd_(k) * normal_(gen_);
  }
}

}  // namespace difnet
