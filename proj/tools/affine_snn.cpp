// affine-snn: command-line harness for the experiments.
//
//   affine-snn {minmax|teacher|mnist|discontinuity|fem|bounds} --config <json> --out <path>

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "affine_snn/experiments.hpp"

namespace {

using namespace affine_snn;

void write_rows(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_results_csv(out, rows);
}

json load_config(const std::string& path) { return path.empty() ? json::object() : read_json_file(path); }

int run(const std::string& command, const std::string& config_path, const std::string& out_path) {
  const auto start = std::chrono::steady_clock::now();
  const json cfg_json = load_config(config_path);
  if (command == "minmax") {
    const auto cfg = MinMaxConfig::from_json(cfg_json);
    const auto recs = run_minmax(cfg);
    write_rows(out_path, minmax_rows(cfg, recs));
    check_minmax(recs);
  } else if (command == "teacher") {
    const auto cfg = TeacherConfig::from_json(cfg_json);
    const auto res = run_teacher(cfg);
    write_rows(out_path, teacher_rows(cfg, res));
    for (const auto& model : cfg.models) {
      const auto med = median_curve(res.curves.at(model));
      std::cerr << model << ": median final test mse " << format_double(med.back()) << '\n';
    }
  } else if (command == "mnist") {
    const auto cfg = MnistConfig::from_json(cfg_json);
    const auto data = load_mnist(cfg);
    const auto runs = run_mnist(cfg, data);
    write_rows(out_path, mnist_rows(runs));
    for (const auto& variant : cfg.variants) {
      const auto med = mnist_median_error(runs, variant);
      std::cerr << variant << ": median final test error " << format_double(med.back()) << '\n';
    }
  } else if (command == "discontinuity") {
    ConfigReader r(cfg_json, "discontinuity");
    const auto grid = r.get<std::vector<double>>("eps_grid", {0.1, 0.01, 0.001});
    const auto t = r.get<double>("t", 0.0);
    r.finish();
    const auto recs = run_discontinuity(grid, t);
    write_rows(out_path, discontinuity_rows(recs));
    for (const auto& rec : recs)
      std::cout << rec.example << " param=" << format_double(rec.param) << " below=" << format_double(rec.below)
                << " above=" << format_double(rec.above) << " jump=" << format_double(rec.jump) << '\n';
    check_discontinuity(recs, t);
  } else if (command == "fem") {
    const auto cfg = FemConfig::from_json(cfg_json);
    const auto recs = run_fem(cfg, fem_problem(cfg));
    write_rows(out_path, fem_rows(recs));
    check_fem(recs);
  } else if (command == "bounds") {
    write_json_file(out_path, run_bounds(cfg_json));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << command << " finished in " << secs << " s, results in " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine spiking network experiments"};
  app.require_subcommand(1, 1);
  std::string config_path, out_path;
  for (const char* name : {"minmax", "teacher", "mnist", "discontinuity", "fem", "bounds"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "output path (CSV, or JSON for bounds)")->required();
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, config_path, out_path);
  } catch (const AssertFailed& e) {
    std::cerr << "assertion failed: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
