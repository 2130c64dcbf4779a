#include "difnet/topology.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "difnet/csv.hpp"
#include "difnet/error.hpp"
#include "difnet/rng.hpp"

namespace difnet {

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges, GraphModel model) {
  if (n == 0) throw Error(ErrorCode::invalid_params, "graph needs at least one node");
  std::vector<std::vector<NodeId>> adj(n);
  for (NodeId k = 0; k < n; ++k) adj[k].push_back(k);
  for (auto [k, l] : edges) {
    if (k >= n || l >= n)
      throw Error(ErrorCode::invalid_params,
                  "edge (" + std::to_string(k) + "," + std::to_string(l) + ") out of range");
    if (k == l) continue;
    adj[k].push_back(l);
    adj[l].push_back(k);
  }
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return Graph(std::move(adj), model);
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> d(size());
  for (NodeId k = 0; k < size(); ++k) d[k] = adj_[k].size();
  return d;
}

bool Graph::has_edge(NodeId k, NodeId l) const {
  const auto& nb = adj_.at(k);
  return std::binary_search(nb.begin(), nb.end(), l);
}

std::vector<std::size_t> Graph::components() const {
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(size(), unset);
  std::size_t next = 0;
  std::queue<NodeId> frontier;
  for (NodeId root = 0; root < size(); ++root) {
    if (label[root] != unset) continue;
    label[root] = next;
    frontier.push(root);
    while (!frontier.empty()) {
      NodeId k = frontier.front();
      frontier.pop();
      for (NodeId l : adj_[k]) {
        if (label[l] == unset) {
          label[l] = next;
          frontier.push(l);
        }
      }
    }
    ++next;
  }
  return label;
}

bool Graph::is_connected() const {
  auto label = components();
  return std::all_of(label.begin(), label.end(), [](std::size_t c) { return c == 0; });
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (NodeId k = 0; k < size(); ++k)
    for (NodeId l : adj_[k])
      if (l > k) out.emplace_back(k, l);
  return out;
}

Graph Graph::relabeled(std::span<const NodeId> perm) const {
  if (perm.size() != size()) throw Error(ErrorCode::invalid_params, "permutation size mismatch");
  std::vector<Edge> e;
  for (auto [k, l] : edges()) e.emplace_back(perm[k], perm[l]);
  return from_edges(size(), e, model_);
}

Graph gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed, int max_attempts) {
  if (n == 0) throw Error(ErrorCode::invalid_params, "n must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::invalid_params, "p must lie in [0, 1]");
  if (max_attempts < 1) throw Error(ErrorCode::invalid_params, "max_attempts must be positive");

  SplitMix64 gen(derive_seed(seed, stream_tag::graph));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  GraphModel model{GraphKind::erdos_renyi, p, 0, 0};
  std::vector<Edge> edges;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    edges.clear();
    for (NodeId k = 0; k < n; ++k)
      for (NodeId l = k + 1; l < n; ++l)
        if (unif(gen) < p) edges.emplace_back(k, l);
    Graph g = Graph::from_edges(n, edges, model);
    if (g.is_connected()) return g;
  }
  throw Error(ErrorCode::not_connected, "no connected G(" + std::to_string(n) + ", " +
                                            csv::format_double(p) + ") sample in " +
                                            std::to_string(max_attempts) + " attempts");
}

namespace {

std::vector<Edge> ring_edges(std::size_t n0) {
  std::vector<Edge> e;
  if (n0 == 2) e.emplace_back(0, 1);
  if (n0 >= 3)
    for (NodeId k = 0; k < n0; ++k) e.emplace_back(k, (k + 1) % n0);
  return e;
}

}  // namespace

Graph gen_scale_free(std::size_t n, std::size_t m, std::size_t n0, std::uint64_t seed) {
  if (m < 1 || m > n0 || n0 > n)
    throw Error(ErrorCode::invalid_params, "need 1 <= m <= n0 <= n (m=" + std::to_string(m) +
                                               ", n0=" + std::to_string(n0) + ", n=" + std::to_string(n) + ")");

  SplitMix64 gen(derive_seed(seed, stream_tag::graph));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<Edge> edges = ring_edges(n0);
  std::vector<double> degree(n, 1.0);
  for (auto [k, l] : edges) {
    degree[k] += 1.0;
    degree[l] += 1.0;
  }

  std::vector<double> weight;
  std::vector<NodeId> targets;
  for (NodeId arrival = n0; arrival < n; ++arrival) {
    weight.assign(degree.begin(), degree.begin() + static_cast<std::ptrdiff_t>(arrival));
    double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    targets.clear();
    for (std::size_t j = 0; j < m; ++j) {
      double u = unif(gen) * total;
      NodeId pick = arrival - 1;
      for (NodeId l = 0; l < arrival; ++l) {
        if (weight[l] == 0.0) continue;
        if (u < weight[l]) {
          pick = l;
          break;
        }
        u -= weight[l];
      }
      // rounding can leave u past the end; fall back to the last live node
      while (weight[pick] == 0.0) --pick;
      targets.push_back(pick);
      total -= weight[pick];
      weight[pick] = 0.0;
    }
    for (NodeId t : targets) {
      edges.emplace_back(t, arrival);
      degree[t] += 1.0;
      degree[arrival] += 1.0;
    }
  }
  return Graph::from_edges(n, edges, GraphModel{GraphKind::scale_free, 0.0, m, n0});
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  auto d = g.degrees();
  s.n_min = *std::min_element(d.begin(), d.end());
  s.n_max = *std::max_element(d.begin(), d.end());
  std::size_t total = 0;
  for (auto n : d) {
    total += n;
    ++s.degree_histogram[n];
  }
  s.eta = static_cast<double>(total) / static_cast<double>(d.size());
  const auto& model = g.model();
  if (model.kind == GraphKind::erdos_renyi)
    s.eta_expected = static_cast<double>(g.size() - 1) * model.p + 1.0;
  else if (model.kind == GraphKind::scale_free)
    s.eta_expected = 2.0 * static_cast<double>(model.m) + 1.0;
  return s;
}

std::string to_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "N " << g.size() << "\n";
  for (auto [k, l] : g.edges()) out << k << " " << l << "\n";
  return out.str();
}

Graph parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "N")
    throw Error(ErrorCode::parse_error, "edge list must start with 'N <n>'");
  std::vector<Edge> edges;
  long long k = 0, l = 0;
  while (in >> k >> l) {
    if (k < 0 || l < 0 || static_cast<std::size_t>(k) >= n || static_cast<std::size_t>(l) >= n)
      throw Error(ErrorCode::parse_error, "edge (" + std::to_string(k) + "," + std::to_string(l) +
                                              ") out of range for N=" + std::to_string(n));
    edges.emplace_back(static_cast<NodeId>(k), static_cast<NodeId>(l));
  }
  if (!in.eof()) throw Error(ErrorCode::parse_error, "malformed edge line");
  return Graph::from_edges(n, edges);
}

void save_edge_list(const Graph& g, const std::string& path) { csv::write_file(path, to_edge_list(g)); }

Graph load_edge_list(const std::string& path) { return parse_edge_list(csv::read_file(path)); }

}  // namespace difnet
