// Copyright 2026 The lastiter Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// lastiter command-line driver.
//
//   lastiter run configs/eg_hard.json --out-dir out
//   lastiter verify --seed 7
//   lastiter separation --plot-data
//   lastiter lower-bound configs/eg_spec.json --T 10,100,1000
//   lastiter export configs/instance.json --method eg --eta 0.0333 --T 1000
//
// Exit status is 0 only when every applicable check passed.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "lastiter/lastiter.hpp"

namespace {

namespace fs = std::filesystem;
using namespace lastiter;

struct GlobalFlags {
  std::uint64_t seed = 20260101;
  std::string out_dir = ".";
  bool strict_stepsize = false;
  bool plot_data = false;
};

std::string OutPath(const GlobalFlags& g, const std::string& file) {
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / file).string();
}

void PrintChecks(const std::vector<BoundCheck>& checks) {
  for (const auto& c : checks) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : c.rows) worst = std::min(worst, r.slack);
    fmt::print("  {:<16} {:<15} min slack {}{}\n", BoundKindName(c.kind),
               BoundStatusName(c.status), c.rows.empty() ? "-" : Num(worst),
               c.reason.empty() ? "" : "  (" + c.reason + ")");
  }
}

int CmdRun(const GlobalFlags& g, const std::string& config_path) {
  ExperimentConfig cfg = ExperimentConfigFromJson(ReadJsonFile(config_path));
  cfg.seed = g.seed;
  cfg.strict_stepsize = cfg.strict_stepsize || g.strict_stepsize;
  const ExperimentResult res = RunExperiment(cfg);
  WriteTextFile(OutPath(g, cfg.name + "_table.csv"), ExperimentToCsv(res));
  WriteTextFile(OutPath(g, cfg.name + "_bounds.csv"), BoundChecksToCsv(res.bound_checks));
  WriteTextFile(OutPath(g, cfg.name + "_summary.json"), ExperimentSummaryJson(res).dump(2) + "\n");
  if (g.plot_data) {
    WriteTextFile(OutPath(g, cfg.name + "_plot.json"), ExperimentPlotData(res).dump(2) + "\n");
  }
  fmt::print("{}: {} horizons\n", cfg.name, res.rows.size());
  for (const auto& [name, f] : res.fits) {
    fmt::print("  fit {:<18} alpha {:+.4f}  r2 {:.4f}  T in [{:g}, {:g}]\n", name, f.exponent_alpha,
               f.r_squared, f.T_min, f.T_max);
  }
  PrintChecks(res.bound_checks);
  for (const auto& w : res.warnings) fmt::print(stderr, "warning: {}\n", w);
  return res.bounds_ok() ? 0 : 1;
}

int CmdVerify(const GlobalFlags& g, std::size_t matrix_trials, std::size_t poly_trials) {
  BatteryOptions opts;
  opts.seed = g.seed;
  opts.matrix_trials = matrix_trials;
  opts.poly_trials = poly_trials;
  const auto reports = RunTheoryBattery(opts);
  json all = json::array();
  bool ok = true;
  for (const auto& r : reports) {
    fmt::print("  {:<32} trials {:>6}  violations {}  worst margin {}\n", r.name, r.trials,
               r.violations, Num(r.worst_margin));
    ok = ok && r.passed();
    all.push_back(ToJson(r));
  }
  WriteTextFile(OutPath(g, "verify.json"), all.dump(2) + "\n");
  return ok ? 0 : 1;
}

int CmdSeparation(const GlobalFlags& g, const SeparationOptions& opts) {
  const SeparationReport rep = RunSeparationReport(opts);
  WriteTextFile(OutPath(g, "separation.csv"), SeparationToCsv(rep));
  WriteTextFile(OutPath(g, "separation_summary.json"), SeparationSummaryJson(rep).dump(2) + "\n");
  if (g.plot_data) {
    WriteTextFile(OutPath(g, "separation_plot.json"), SeparationPlotData(rep).dump(2) + "\n");
  }
  fmt::print("last-iterate gap     alpha {:+.4f}  r2 {:.4f}\n", rep.last_fit.exponent_alpha,
             rep.last_fit.r_squared);
  fmt::print("averaged-iterate gap alpha {:+.4f}  r2 {:.4f}\n", rep.averaged_fit.exponent_alpha,
             rep.averaged_fit.r_squared);
  fmt::print("difference {:.4f} ({}), bracket {}\n", rep.exponent_difference,
             rep.difference_ok ? "in [0.4, 0.6]" : "outside [0.4, 0.6]",
             rep.bracket_ok ? "ok" : "violated");
  return rep.difference_ok && rep.bracket_ok ? 0 : 1;
}

int CmdLowerBound(const GlobalFlags& g, const std::string& spec_path, double L, double D,
                  const std::vector<std::size_t>& horizons) {
  const ScliSpec spec = ScliSpecFromJson(ReadJsonFile(spec_path));
  BoundHypotheses h;
  h.L = L;
  h.D = D;
  h.k = spec.k();
  h.consistent = CheckConsistency(spec).consistent;
  std::string csv = "loss,T,nu_star,horizon,loss_value,bound,slack\n";
  std::vector<BoundCheck> checks;
  const std::pair<LossKind, BoundKind> kinds[] = {
      {LossKind::kHam, BoundKind::kScliLowerHam},
      {LossKind::kGap, BoundKind::kScliLowerGap},
      {LossKind::kFunc, BoundKind::kScliLowerFunc}};
  for (const auto& [loss, bound] : kinds) {
    std::vector<std::pair<std::size_t, double>> obs;
    if (h.consistent) {
      for (std::size_t T : horizons) {
        const NuCertificate c = WorstCaseNuSearch(spec, L, D, T, loss);
        obs.emplace_back(T, c.loss_value);
        const double b = BoundValue(bound, h, T);
        csv += fmt::format("{},{},{},{},{},{},{}\n", LossKindName(loss), T, Num(c.nu_star),
                           c.horizon, Num(c.loss_value), Num(b), Num(c.loss_value - b));
      }
    }
    checks.push_back(CheckBounds(bound, h, obs));
  }
  WriteTextFile(OutPath(g, "lower_bound.csv"), csv);
  PrintChecks(checks);
  for (const auto& c : checks) {
    if (c.status == BoundStatus::kFail) return 1;
  }
  return 0;
}

int CmdExport(const GlobalFlags& g, const std::string& instance_path, const std::string& method,
              double eta, std::size_t T, bool averaged, const std::string& file) {
  const BilinearInstance inst = InstanceFromJson(ReadJsonFile(instance_path));
  const OperatorHandle op = AsOperator(inst);
  SolverConfig sc;
  sc.method = ParseMethod(method);
  sc.eta = eta;
  sc.T = T;
  sc.strict_stepsize = g.strict_stepsize;
  if (sc.method == Method::kEGTimeVarying) sc.schedule.assign(T, eta);
  Trace tr = RunSolver(op, sc);
  if (averaged) tr = AverageTrace(std::move(tr), op);
  WriteTextFile(OutPath(g, file), TraceToCsv(tr));
  for (const auto& w : tr.warnings) fmt::print(stderr, "warning: {}\n", w);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Last-iterate convergence experiments for monotone saddle-point problems"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--strict-stepsize", g.strict_stepsize,
               "Treat step sizes outside the upper-bound regime as errors");
  app.add_flag("--plot-data", g.plot_data, "Also write a JSON series bundle for plotting");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);

  std::size_t matrix_trials = 10000, poly_trials = 200;
  auto* verify = app.add_subcommand("verify", "Run the randomized lemma battery");
  verify->add_option("--matrix-trials", matrix_trials)->capture_default_str();
  verify->add_option("--poly-trials", poly_trials)->capture_default_str();

  SeparationOptions sep;
  std::size_t sep_tmin = 10, sep_tmax = 10000;
  auto* separation = app.add_subcommand("separation", "Last versus averaged iterate report");
  separation->add_option("--n", sep.n)->capture_default_str();
  separation->add_option("--L", sep.L)->capture_default_str();
  separation->add_option("--D", sep.D)->capture_default_str();
  separation->add_option("--eta", sep.eta)->capture_default_str();
  separation->add_option("--T-min", sep_tmin)->capture_default_str();
  separation->add_option("--T-max", sep_tmax)->capture_default_str();

  std::string spec_path;
  double lb_L = 1.0, lb_D = 1.0;
  std::vector<std::size_t> lb_T{10, 100, 1000};
  auto* lower = app.add_subcommand("lower-bound", "Worst-case nu certificates for an SCLI spec");
  lower->add_option("spec", spec_path, "SCLI spec JSON")->required()->check(CLI::ExistingFile);
  lower->add_option("--L", lb_L)->capture_default_str();
  lower->add_option("--D", lb_D)->capture_default_str();
  lower->add_option("--T", lb_T, "Horizons")->delimiter(',');

  std::string instance_path, method = "eg", export_file = "trace.csv";
  double eta = 1.0 / 30.0;
  std::size_t T = 1000;
  bool averaged = false;
  auto* exp = app.add_subcommand("export", "Run one solver and write its trace as CSV");
  exp->add_option("instance", instance_path, "Instance JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--method", method, "eg, eg_timevarying, pp or gda")->capture_default_str();
  exp->add_option("--eta", eta)->capture_default_str();
  exp->add_option("--T", T)->capture_default_str();
  exp->add_flag("--averaged", averaged);
  exp->add_option("--file", export_file)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return CmdRun(g, config_path);
    if (*verify) return CmdVerify(g, matrix_trials, poly_trials);
    if (*separation) {
      sep.T_grid = LogGrid(sep_tmin, sep_tmax);
      return CmdSeparation(g, sep);
    }
    if (*lower) return CmdLowerBound(g, spec_path, lb_L, lb_D, lb_T);
    if (*exp) return CmdExport(g, instance_path, method, eta, T, averaged, export_file);
  } catch (const lastiter::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 2;
}
