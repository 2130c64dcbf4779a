#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "difnet/signal_model.hpp"
#include "difnet/topology.hpp"

namespace difnet {

enum class ExperimentKind { transient, informed_sweep, eigen_dist, fixed_rate_sweep, table2 };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);

enum class StepKind { uniform, normalized };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::transient;

  struct Topology {
    GraphKind kind = GraphKind::erdos_renyi;
    std::size_t n = 200;
    double p = 0.02;
    std::size_t m = 2;
    std::size_t n0 = 10;
    int max_attempts = 1000;
    std::string edge_list;  // explicit graphs: path to an edge-list file
  } topology;

  struct Signal {
    std::size_t m_dim = 5;
    double ru_lo = 0.8;
    double ru_hi = 1.8;
    std::vector<double> ru_diag;     // overrides the range when non-empty
    std::vector<double> noise_vars;  // per node; size 1 means all nodes
    std::vector<double> w_true;      // drawn when empty
  } signal;

  struct Adaptation {
    std::optional<InformedOrder> order;  // experiment-dependent default
    std::optional<std::size_t> count;    // all nodes when absent
    std::vector<NodeId> nodes;           // explicit order
    std::vector<std::size_t> sweep;      // N_I grid for sweeps
    std::optional<StepKind> step_kind;   // normalized for fixed_rate_sweep, else uniform
    std::optional<double> step;          // 0.01 uniform, 0.1 normalized
  } adaptation;

  struct Sim {
    std::size_t iters = 10000;
    std::size_t runs = 30;
    double window_fraction = 0.1;
  } sim;

  std::uint64_t seed = 0;
  std::string output = ".";

  /// Canonical JSON text of every field (defaults filled in); hashed into
  /// CSV headers and the manifest.
  std::string canonical() const;
  std::string hash() const;

  StepKind effective_step_kind() const;
  double effective_step() const;
};

/// Strict parse of a JSON object whose keys are sections (`topology`, ...)
/// holding nested objects, or equivalent dotted keys (`topology.N`).
/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(std::string_view text);

/// Re-validates a programmatically built config. Throws ConfigError.
void validate(const ExperimentConfig& cfg);

struct Artifact {
  std::string name;  // file name relative to the output directory
  std::string contents;
};

struct ExperimentOutput {
  std::vector<Artifact> files;  // includes manifest.txt last
  std::string summary;
};

/// Runs the configured experiment entirely in memory.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Writes every artifact under cfg.output (created if missing).
void write_outputs(const ExperimentOutput& out, const std::string& directory);

}  // namespace difnet
