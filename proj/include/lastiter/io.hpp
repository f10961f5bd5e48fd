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

// JSON configuration parsing and CSV / JSON writers. Numbers are printed with
// 17 significant digits so identical runs produce identical files.

#ifndef LASTITER_IO_HPP_
#define LASTITER_IO_HPP_

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lastiter/core.hpp"
#include "lastiter/harness.hpp"
#include "lastiter/problem.hpp"
#include "lastiter/scli.hpp"
#include "lastiter/solvers.hpp"
#include "lastiter/theory_checks.hpp"

namespace lastiter {

using nlohmann::json;

inline std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

inline json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

inline void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

// {"n", "nu", "D"} for the hard family or {"M": rows, "b1", "b2"}.
inline BilinearInstance InstanceFromJson(const json& j) {
  if (j.contains("M")) {
    const Matrix M = MatrixFromJson(j.at("M"));
    auto vec = [](const json& a) {
      const auto v = a.get<std::vector<double>>();
      return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
    };
    return BilinearInstance(M, vec(j.at("b1")), vec(j.at("b2")));
  }
  HardInstanceParams p;
  p.n = j.value("n", p.n);
  p.nu = j.value("nu", p.nu);
  p.D = j.value("D", p.D);
  return MakeHardInstance(p);
}

inline json InstanceToJson(const BilinearInstance& inst) {
  if (const auto& hp = inst.hard_params()) {
    return {{"n", hp->n}, {"nu", hp->nu}, {"D", hp->D}};
  }
  return {{"M", MatrixToJson(inst.M())}, {"b1", VectorToJson(inst.b1())},
          {"b2", VectorToJson(inst.b2())}};
}

// {"k", "n_coeffs", "c0_coeffs"?}; without c0_coeffs the consistent C0 = 1 + y N
// is used. {"extragradient": eta} and {"tightness": k, "L": L} are shorthands.
inline ScliSpec ScliSpecFromJson(const json& j) {
  ScliSpec spec;
  if (j.contains("extragradient")) {
    spec = ScliSpec::Extragradient(j.at("extragradient").get<double>());
  } else if (j.contains("tightness")) {
    spec = BuildTightnessSpec(j.at("tightness").get<int>(), j.value("L", 1.0));
  } else {
    const int k = j.at("k").get<int>();
    auto n = j.value("n_coeffs", std::vector<double>{});
    if (j.contains("c0_coeffs")) {
      spec = ScliSpec(k, std::move(n), j.at("c0_coeffs").get<std::vector<double>>());
    } else {
      spec = ScliSpec::Consistent(k, std::move(n));
    }
  }
  spec.Validate();
  return spec;
}

inline json ScliSpecToJson(const ScliSpec& spec) {
  return {{"k", spec.k()}, {"n_coeffs", spec.n_coeffs()}, {"c0_coeffs", spec.c0_coeffs()}};
}

inline Method ParseMethod(const std::string& s) {
  for (Method m : {Method::kEG, Method::kEGTimeVarying, Method::kPP, Method::kGDA}) {
    if (s == MethodName(m)) return m;
  }
  throw PreconditionError("unknown method '" + s + "'");
}

inline NuMode ParseNuMode(const std::string& s) {
  for (NuMode m : {NuMode::kFixed, NuMode::kInverseSqrtT, NuMode::kWorstCase}) {
    if (s == NuModeName(m)) return m;
  }
  throw PreconditionError("unknown nu mode '" + s + "'");
}

inline LossKind ParseLossKind(const std::string& s) {
  for (LossKind k : {LossKind::kHam, LossKind::kGap, LossKind::kFunc, LossKind::kGapExact}) {
    if (s == LossKindName(k)) return k;
  }
  throw PreconditionError("unknown loss kind '" + s + "'");
}

inline StepSchedule ScheduleFromJson(const json& j) {
  StepSchedule s;
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") {
    s.kind = ScheduleKind::kConstant;
  } else if (kind == "inverse_sqrt") {
    s.kind = ScheduleKind::kInverseSqrt;
  } else if (kind == "geometric") {
    s.kind = ScheduleKind::kGeometric;
  } else {
    throw PreconditionError("unknown schedule kind '" + kind + "'");
  }
  s.scale = j.value("scale", s.scale);
  s.ratio = j.value("ratio", s.ratio);
  return s;
}

// Experiment config. Unknown keys are rejected so typos do not silently fall
// back to defaults.
inline ExperimentConfig ExperimentConfigFromJson(const json& j) {
  static const std::vector<std::string> kKeys = {
      "name", "instance", "L", "nu_mode", "nu_loss", "method", "spec", "eta", "schedule",
      "T_grid", "averaged", "bounds", "fit_T_min", "fit_T_max", "strict_stepsize", "seed",
      "threads"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw PreconditionError("unknown config key '" + key + "'");
    }
  }
  ExperimentConfig cfg;
  cfg.name = j.value("name", cfg.name);
  if (j.contains("instance")) {
    const json& inst = j.at("instance");
    if (inst.contains("M")) {
      cfg.custom_instance = InstanceFromJson(inst);
    } else {
      cfg.instance.n = inst.value("n", cfg.instance.n);
      cfg.instance.nu = inst.value("nu", cfg.instance.nu);
      cfg.instance.D = inst.value("D", cfg.instance.D);
    }
  }
  cfg.L = j.value("L", cfg.L);
  if (j.contains("nu_mode")) cfg.nu_mode = ParseNuMode(j.at("nu_mode").get<std::string>());
  if (j.contains("nu_loss")) cfg.nu_loss = ParseLossKind(j.at("nu_loss").get<std::string>());
  if (j.contains("method")) cfg.method = ParseMethod(j.at("method").get<std::string>());
  if (j.contains("spec")) cfg.spec = ScliSpecFromJson(j.at("spec"));
  cfg.eta = j.value("eta", cfg.eta);
  if (j.contains("schedule")) cfg.schedule = ScheduleFromJson(j.at("schedule"));
  if (j.contains("T_grid")) {
    const json& g = j.at("T_grid");
    if (g.is_object()) {
      cfg.T_grid = LogGrid(g.value("min", std::size_t{10}), g.value("max", std::size_t{10000}),
                           g.value("per_decade", 5));
    } else {
      cfg.T_grid = g.get<std::vector<std::size_t>>();
    }
  }
  cfg.averaged = j.value("averaged", cfg.averaged);
  if (j.contains("bounds")) {
    cfg.bounds.clear();
    for (const auto& b : j.at("bounds")) cfg.bounds.push_back(ParseBoundKind(b.get<std::string>()));
  }
  cfg.fit_T_min = j.value("fit_T_min", cfg.fit_T_min);
  cfg.fit_T_max = j.value("fit_T_max", cfg.fit_T_max);
  cfg.strict_stepsize = j.value("strict_stepsize", cfg.strict_stepsize);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.Validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// CSV.

inline std::string LossColumns(const std::string& prefix) {
  return fmt::format("{0}ham,{0}sqrt_ham,{0}gap_bilinear,{0}gap_linearized,{0}func_loss,"
                     "{0}dist_to_star",
                     prefix);
}

inline std::string LossFields(const LossRecord& r) {
  return fmt::format("{},{},{},{},{},{}", Num(r.ham), Num(r.sqrt_ham), Num(r.gap_bilinear),
                     Num(r.gap_linearized), Num(r.func_loss), Num(r.dist_to_star));
}

// One row per iterate: t, losses and (when present) the averaged losses.
inline std::string TraceToCsv(const Trace& tr) {
  const bool avg = !tr.averaged_losses.empty();
  std::string out = "t," + LossColumns("");
  if (avg) out += "," + LossColumns("avg_");
  out += "\n";
  for (std::size_t t = 0; t < tr.losses.size(); ++t) {
    out += fmt::format("{},{}", t, LossFields(tr.losses[t]));
    if (avg) out += "," + LossFields(tr.averaged_losses[t]);
    out += "\n";
  }
  return out;
}

inline std::string ExperimentToCsv(const ExperimentResult& res) {
  const bool avg = res.config.averaged;
  std::string out = "T,nu,status," + LossColumns("");
  if (avg) out += "," + LossColumns("avg_");
  out += ",func_loss_max_T_2T\n";
  LossRecord nan_rec;
  nan_rec.ham = nan_rec.sqrt_ham = nan_rec.gap_linearized = std::nan("");
  for (const auto& row : res.rows) {
    out += fmt::format("{},{},{},{}", row.T, Num(row.nu), row.status, LossFields(row.last));
    if (avg) out += "," + LossFields(row.averaged ? *row.averaged : nan_rec);
    out += "," + Num(row.func_loss_max_T_2T) + "\n";
  }
  return out;
}

inline std::string BoundChecksToCsv(const std::vector<BoundCheck>& checks) {
  std::string out = "bound,status,T,observed,bound_value,slack,pass,reason\n";
  for (const auto& c : checks) {
    if (c.rows.empty()) {
      out += fmt::format("{},{},,,,,,\"{}\"\n", BoundKindName(c.kind), BoundStatusName(c.status),
                         c.reason);
      continue;
    }
    for (const auto& r : c.rows) {
      out += fmt::format("{},{},{},{},{},{},{},\n", BoundKindName(c.kind),
                         BoundStatusName(c.status), r.T, Num(r.observed), Num(r.bound),
                         Num(r.slack), r.pass ? 1 : 0);
    }
  }
  return out;
}

inline std::string SeparationToCsv(const SeparationReport& rep) {
  std::string out =
      "T,nu_worst,last_gap_worst,last_gap_closed_form,last_sqrt_ham_worst,lower_sqrt_ham,"
      "upper_sqrt_ham,bracket_ok,last_gap_inv_sqrt,last_gap_fixed,avg_gap_fixed\n";
  for (const auto& r : rep.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.T, Num(r.nu_worst),
                       Num(r.last_gap_worst), Num(r.last_gap_closed_form),
                       Num(r.last_sqrt_ham_worst), Num(r.lower_sqrt_ham),
                       Num(r.upper_sqrt_ham), r.bracket_ok ? 1 : 0, Num(r.last_gap_inv_sqrt),
                       Num(r.last_gap_fixed), Num(r.avg_gap_fixed));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON.

inline json ToJson(const RateFit& f) {
  return {{"exponent_alpha", f.exponent_alpha}, {"log_constant", f.log_constant},
          {"r_squared", f.r_squared}, {"fit_range", {f.T_min, f.T_max}}, {"points", f.points}};
}

inline json ToJson(const BoundCheck& c) {
  json rows = json::array();
  for (const auto& r : c.rows) {
    rows.push_back({{"T", r.T}, {"observed", r.observed}, {"bound", r.bound},
                    {"slack", r.slack}, {"pass", r.pass}});
  }
  return {{"bound", BoundKindName(c.kind)}, {"status", BoundStatusName(c.status)},
          {"reason", c.reason}, {"rows", rows}};
}

inline json ToJson(const NuCertificate& c) {
  return {{"nu_star", c.nu_star}, {"loss_value", c.loss_value}, {"horizon", c.horizon},
          {"loss", LossKindName(c.loss)}};
}

inline json ExperimentSummaryJson(const ExperimentResult& res) {
  json fits = json::object();
  for (const auto& [name, f] : res.fits) fits[name] = ToJson(f);
  json checks = json::array();
  for (const auto& c : res.bound_checks) checks.push_back(ToJson(c));
  return {{"name", res.config.name}, {"fits", fits}, {"bound_checks", checks},
          {"warnings", res.warnings}, {"bounds_ok", res.bounds_ok()}};
}

// Series bundle for external plotting.
inline json ExperimentPlotData(const ExperimentResult& res) {
  json series = json::object();
  std::vector<double> T, sqrt_ham, gap, avg_gap;
  for (const auto& r : res.rows) {
    T.push_back(static_cast<double>(r.T));
    sqrt_ham.push_back(r.last.sqrt_ham);
    gap.push_back(r.last.gap_bilinear);
    if (r.averaged) avg_gap.push_back(r.averaged->gap_bilinear);
  }
  series["T"] = T;
  series["sqrt_ham"] = sqrt_ham;
  series["gap_bilinear"] = gap;
  if (!avg_gap.empty()) series["avg_gap_bilinear"] = avg_gap;
  return {{"name", res.config.name}, {"series", series}};
}

inline json SeparationSummaryJson(const SeparationReport& rep) {
  return {{"eta", rep.options.eta},
          {"last_fit", ToJson(rep.last_fit)},
          {"averaged_fit", ToJson(rep.averaged_fit)},
          {"exponent_difference", rep.exponent_difference},
          {"difference_ok", rep.difference_ok},
          {"bracket_ok", rep.bracket_ok}};
}

inline json SeparationPlotData(const SeparationReport& rep) {
  std::vector<double> T, last, avg, inv, fixed;
  for (const auto& r : rep.rows) {
    T.push_back(static_cast<double>(r.T));
    last.push_back(r.last_gap_worst);
    avg.push_back(r.avg_gap_fixed);
    inv.push_back(r.last_gap_inv_sqrt);
    fixed.push_back(r.last_gap_fixed);
  }
  return {{"T", T}, {"last_gap_worst_case_nu", last}, {"avg_gap_fixed_nu", avg},
          {"last_gap_nu_L_over_sqrtT", inv}, {"last_gap_fixed_nu", fixed}};
}

}  // namespace lastiter

#endif  // LASTITER_IO_HPP_
