#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "difnet/csv.hpp"
#include "difnet/error.hpp"
#include "difnet/experiment.hpp"
#include "difnet/simulator.hpp"
#include "difnet/theory.hpp"

using namespace difnet;

namespace {

const Artifact& find(const ExperimentOutput& out, const std::string& name) {
  for (const auto& f : out.files)
    if (f.name == name) return f;
  FAIL("missing artifact " << name);
  return out.files.front();
}

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::string body(const std::string& text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const std::string line = text.substr(pos, end - pos);
    if (line.rfind("#", 0) != 0) out += line + "\n";
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("minimal config picks up defaults") {
  const auto cfg = parse_config(R"({"experiment": "informed_sweep", "topology": {"kind": "erdos_renyi"},
                                    "signal": {}, "seed": 3})");
  CHECK(cfg.experiment == ExperimentKind::informed_sweep);
  CHECK(cfg.seed == 3);
  CHECK(cfg.topology.n == 200);
  CHECK(cfg.topology.n0 == 10);
  CHECK(cfg.sim.runs == 30);
  CHECK(cfg.sim.window_fraction == 0.1);
  CHECK(cfg.signal.m_dim == 5);
  CHECK(cfg.effective_step() == 0.01);
  CHECK(cfg.effective_step_kind() == StepKind::uniform);

  const auto fr = parse_config(R"({"experiment": "fixed_rate_sweep", "topology.kind": "scale_free", "seed": 0})");
  CHECK(fr.effective_step_kind() == StepKind::normalized);
  CHECK(fr.effective_step() == 0.1);
}

TEST_CASE("dotted and nested keys are equivalent") {
  const auto a = parse_config(R"({"experiment": "transient", "seed": 1,
      "topology": {"kind": "scale_free", "N": 50, "m": 3, "n0": 6},
      "signal": {"M": 2, "ru_range": [1.0, 1.5], "noise_var": 0.02},
      "adaptation": {"order": "bottom_degree", "count": 10, "step": 0.02},
      "sim": {"iters": 100, "runs": 4}})");
  const auto b = parse_config(R"({"experiment": "transient", "seed": 1,
      "topology.kind": "scale_free", "topology.N": 50, "topology.m": 3, "topology.n0": 6,
      "signal.M": 2, "signal.ru_range": [1.0, 1.5], "signal.noise_var": 0.02,
      "adaptation.order": "bottom_degree", "adaptation.count": 10, "adaptation.step": 0.02,
      "sim.iters": 100, "sim.runs": 4})");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash() == b.hash());
  CHECK(a.topology.m == 3);
  CHECK(*a.adaptation.order == InformedOrder::bottom_degree);
  CHECK(a.signal.noise_vars == std::vector<double>{0.02});
}

TEST_CASE("config errors name the key") {
  const std::string base = R"("experiment": "transient", "seed": 1, "topology": {"kind": "erdos_renyi")";
  CHECK(field_of("{" + base + R"(, "q": 3}})") == "topology.q");
  CHECK(field_of("{" + base + R"(}, "topology.q": 3})") == "topology.q");
  CHECK(field_of("{" + base + R"(}, "adaptation": {"step": -0.1}})") == "adaptation.step");
  CHECK(field_of("{" + base + R"(}, "adaptation": {"step": 0}})") == "adaptation.step");
  CHECK(field_of("{" + base + R"(}, "sim": {"runs": -2}})") == "sim.runs");
  CHECK(field_of("{" + base + R"(}, "sim": {"iters": 1.5}})") == "sim.iters");
  CHECK(field_of("{" + base + R"(, "p": 1.5}})") == "topology.p");
  CHECK(field_of("{" + base + R"(, "kind": "lattice"}})") == "topology.kind");
  CHECK(field_of("{" + base + R"(}, "signal": {"noise_var": [0.1, 0.2]}})") == "signal.noise_var");
  CHECK(field_of("{" + base + R"(}, "signal": {"ru_range": [0.5]}})") == "signal.ru_range");
  CHECK(field_of("{" + base + R"(}, "extra": {"a": 1}})") == "extra");
  CHECK(field_of(R"({"experiment": "transient", "topology": {"kind": "erdos_renyi"}})") == "seed");
  CHECK(field_of(R"({"experiment": "plot", "seed": 1, "topology": {"kind": "erdos_renyi"}})") == "experiment");
  CHECK(field_of("{" + base + R"(, "kind": "scale_free", "m": 5, "n0": 3}})") == "topology.n0");
  CHECK(field_of("{" + base + R"(}, "adaptation": {"order": "explicit"}})") == "adaptation.nodes");
  CHECK(field_of("[1, 2]") == "<root>");
  CHECK(field_of("{not json") == "<root>");
}

TEST_CASE("default sweep grid") {
  auto cfg = parse_config(R"({"experiment": "informed_sweep", "seed": 4,
      "topology": {"kind": "erdos_renyi", "N": 60, "p": 0.2}, "signal": {"M": 2}})");
  const auto out = run_experiment(cfg);
  const auto rows = parse_theory_csv(find(out, "theory.csv").contents);
  // ceil(60 / 40) = 2
  std::vector<std::size_t> got;
  for (const auto& r : rows) got.push_back(r.n_i);
  std::vector<std::size_t> want{1};
  for (std::size_t k = 2; k < 60; k += 2) want.push_back(k);
  want.push_back(60);
  CHECK(got == want);
  CHECK(out.files.back().name == "manifest.txt");
  CHECK(out.files.back().contents.find("config_hash=" + cfg.hash()) != std::string::npos);
}

TEST_CASE("sweep with only N_I = N matches direct calls") {
  const auto cfg = parse_config(R"({"experiment": "informed_sweep", "seed": 9,
      "topology": {"kind": "erdos_renyi", "N": 40, "p": 0.25}, "signal": {"M": 3},
      "adaptation": {"sweep": [40]}})");
  const auto rows = parse_theory_csv(find(run_experiment(cfg), "theory.csv").contents);
  REQUIRE(rows.size() == 1);

  const Graph g = gen_erdos_renyi(40, 0.25, derive_seed(9, stream_tag::graph), cfg.topology.max_attempts);
  const auto p = random_profile(3, 0.8, 1.8, 40, 0.01, derive_seed(9, stream_tag::profile));
  const auto order = informed_order(g, {});
  const AdaptationConfig ad{order, UniformStep{0.01}};
  const auto t = theory_report(g, CombinationMatrix::uniform(g), p, ad);
  CHECK(rows[0].n_i == 40);
  CHECK(rows[0].rate_exact == t.rate_exact);
  CHECK(rows[0].msd_exact_db == t.msd_exact_db());
  CHECK(rows[0].msd_approx_db == t.msd_approx_db());
  CHECK(rows[0].msd_k1_db == to_db(msd_components(g, p, ad).k1));
}

TEST_CASE("single-node transient settles at the stand-alone LMS value") {
  const auto cfg = parse_config(R"({"experiment": "transient", "seed": 2,
      "topology": {"kind": "erdos_renyi", "N": 1, "p": 0.5},
      "signal": {"M": 5, "ru_diag": [1, 1, 1, 1, 1], "noise_var": 0.01},
      "adaptation": {"step": 0.01}, "sim": {"iters": 4000, "runs": 200}})");
  const auto out = run_experiment(cfg);
  std::map<std::string, std::string> md;
  const auto tr = parse_transient_csv(find(out, "transient.csv").contents, &md);
  CHECK(tr.n_iters == 4000);
  REQUIRE(md.contains("steady_state_db"));
  const double expect = to_db(5 * 0.01 * 0.01 / 2.0);
  CHECK(std::abs(csv::to_double(md.at("steady_state_db")) - expect) < 0.5);
  CHECK(std::abs(csv::to_double(md.at("theory_msd_exact_db")) - expect) < 0.05);
  CHECK(parse_theory_csv(find(out, "theory.csv").contents).size() == 1);
}

TEST_CASE("reruns are byte identical") {
  const std::string text = R"({"experiment": "transient", "seed": 5,
      "topology": {"kind": "scale_free", "N": 30, "m": 2, "n0": 4},
      "signal": {"M": 2}, "adaptation": {"count": 12}, "sim": {"iters": 300, "runs": 6}})";
  const auto a = run_experiment(parse_config(text));
  const auto b = run_experiment(parse_config(text));
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].name == b.files[i].name);
    CHECK(a.files[i].contents == b.files[i].contents);
  }
  CHECK(body(find(a, "transient.csv").contents).rfind("iter,msd_linear,msd_db\n", 0) == 0);

  auto other = parse_config(text);
  other.seed = 6;
  CHECK(other.hash() != parse_config(text).hash());
}

TEST_CASE("eigen_dist and table2 outputs parse back") {
  const auto ed = run_experiment(parse_config(R"({"experiment": "eigen_dist", "seed": 1,
      "topology": {"kind": "erdos_renyi", "N": 80, "p": 0.15}, "sim": {"runs": 3}})"));
  const auto t = csv::parse(find(ed, "eigen_dist.csv").contents);
  csv::expect_header(t, {"k", "abs_lambda_mean", "theory_exact_g", "theory_linear"});
  CHECK(t.rows.size() == 80);
  CHECK(csv::to_double(t.rows[0][1]) == doctest::Approx(1.0));
  CHECK(t.metadata.at("experiment") == "eigen_dist");
  const auto h = csv::parse(find(ed, "semicircle.csv").contents);
  csv::expect_header(h, {"bin_center", "density_empirical", "density_theory"});
  double mass = 0.0;
  for (const auto& r : h.rows) mass += csv::to_double(r[1]) * 0.04;
  CHECK(mass == doctest::Approx(1.0));

  const auto t2 = run_experiment(parse_config(R"({"experiment": "table2", "seed": 1,
      "topology": {"kind": "erdos_renyi", "N": 200}, "sim": {"runs": 1}})"));
  const auto tt = csv::parse(find(t2, "table2.csv").contents);
  csv::expect_header(tt, {"model", "param", "eta_mean", "lambda2_mean"});
  REQUIRE(tt.rows.size() == 4);
  CHECK(tt.rows[0][0] == "erdos_renyi");
  CHECK(tt.rows[3][1] == "8");
}

TEST_CASE("module errors carry the stage") {
  auto cfg = parse_config(R"({"experiment": "transient", "seed": 1,
      "topology": {"kind": "erdos_renyi", "N": 50, "p": 0.001, "max_attempts": 2}})");
  try {
    run_experiment(cfg);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_connected);
    CHECK(e.detail().rfind("topology: ", 0) == 0);
  }
}

TEST_CASE("write_outputs creates the directory") {
  const auto dir = std::filesystem::temp_directory_path() / "difnet_test_outputs";
  std::filesystem::remove_all(dir);
  ExperimentOutput out;
  out.files = {{"a.csv", "x\n1\n"}, {"manifest.txt", "files:\n"}};
  write_outputs(out, dir.string());
  CHECK(csv::read_file((dir / "a.csv").string()) == "x\n1\n");
  std::filesystem::remove_all(dir);
}
