#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "difnet/csv.hpp"
#include "difnet/error.hpp"
#include "difnet/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int run(const std::string& experiment, const std::string& config_path, std::optional<std::uint64_t> seed,
        std::optional<std::string> out_dir) {
  std::string text;
  try {
    text = difnet::csv::read_file(config_path);
  } catch (const difnet::Error& e) {
    throw difnet::ConfigError("--config", e.what());
  }
  auto cfg = difnet::parse_config(text);
  if (difnet::to_string(cfg.experiment) != experiment)
    throw difnet::ConfigError("experiment", "config is for '" + std::string(difnet::to_string(cfg.experiment)) +
                                                "' but '" + experiment + "' was requested");
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.output = *out_dir;

  const auto out = difnet::run_experiment(cfg);
  difnet::write_outputs(out, cfg.output);
  std::cout << out.summary;
  for (const auto& f : out.files) std::cout << "wrote " << cfg.output << "/" << f.name << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion LMS workbench: simulate networks with informed agents and compare against theory"};
  std::string experiment, config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("experiment", experiment, "transient | informed_sweep | eigen_dist | fixed_rate_sweep | table2")
      ->required()
      ->check(CLI::IsMember({"transient", "informed_sweep", "eigen_dist", "fixed_rate_sweep", "table2"}));
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    return run(experiment, config_path, seed, out_dir);
  } catch (const difnet::Error& e) {
    std::cerr << "difnet: " << e.what() << "\n";
    return e.code() == difnet::ErrorCode::config_error ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "difnet: " << e.what() << "\n";
    return kExitNumerical;
  }
}
