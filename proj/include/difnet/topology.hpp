#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace difnet {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

enum class GraphKind { erdos_renyi, scale_free, explicit_list };

/// Generating model of a graph. Only the fields relevant to `kind` are set.
struct GraphModel {
  GraphKind kind = GraphKind::explicit_list;
  double p = 0.0;       // erdos_renyi
  std::size_t m = 0;    // scale_free: edges per arrival
  std::size_t n0 = 0;   // scale_free: seed graph size
};

/// Undirected topology in which every neighborhood contains the node itself.
///
/// Neighbor lists are sorted and symmetric by construction; connectivity is
/// not enforced here (explicit graphs may be disconnected) but both random
/// generators only ever return connected graphs.
class Graph {
 public:
  /// Builds a graph on `n` nodes from undirected edges. Self-loops in the
  /// input are ignored (they are always present), duplicates are merged.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges, GraphModel model = {});

  std::size_t size() const noexcept { return adj_.size(); }
  std::span<const NodeId> neighbors(NodeId k) const { return adj_.at(k); }
  std::size_t degree(NodeId k) const { return adj_.at(k).size(); }
  std::vector<std::size_t> degrees() const;
  const GraphModel& model() const noexcept { return model_; }

  bool has_edge(NodeId k, NodeId l) const;
  bool is_connected() const;
  /// Component label per node (labels are 0.. in order of first appearance).
  std::vector<std::size_t> components() const;
  /// Undirected edges with k < l, self-loops omitted, lexicographic order.
  std::vector<Edge> edges() const;

  /// Same topology with node `k` renamed to `perm[k]`.
  Graph relabeled(std::span<const NodeId> perm) const;

 private:
  Graph(std::vector<std::vector<NodeId>> adj, GraphModel model)
      : adj_(std::move(adj)), model_(model) {}

  std::vector<std::vector<NodeId>> adj_;
  GraphModel model_;
};

struct DegreeStats {
  double eta = 0.0;                     // realized network degree
  std::optional<double> eta_expected;   // model prediction; absent for explicit graphs
  std::size_t n_min = 0;
  std::size_t n_max = 0;
  std::map<std::size_t, std::size_t> degree_histogram;
};

inline constexpr int kDefaultMaxAttempts = 100;

/// G(n, p) with self-loops, resampled until connected.
/// Throws Error{not_connected} after `max_attempts` failed draws.
Graph gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed,
                      int max_attempts = kDefaultMaxAttempts);

/// Preferential attachment grown from a ring of `n0` nodes; each arrival links
/// to `m` distinct existing nodes drawn with probability proportional to their
/// self-inclusive degree.
Graph gen_scale_free(std::size_t n, std::size_t m, std::size_t n0, std::uint64_t seed);

DegreeStats degree_stats(const Graph& g);

/// Edge-list text: `N <n>` then one `k l` line per undirected edge.
std::string to_edge_list(const Graph& g);
Graph parse_edge_list(std::string_view text);
void save_edge_list(const Graph& g, const std::string& path);
Graph load_edge_list(const std::string& path);

}  // namespace difnet
