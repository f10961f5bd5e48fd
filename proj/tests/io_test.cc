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

#include <gtest/gtest.h>

#include "lastiter/io.hpp"

namespace lastiter {
namespace {

TEST(IoTest, NumberFormatting) {
  EXPECT_EQ(Num(0.1), "0.10000000000000001");
  EXPECT_EQ(Num(1.0), "1");
  EXPECT_EQ(Num(std::nan("")), "nan");
  EXPECT_EQ(Num(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(IoTest, InstanceRoundTrip) {
  const BilinearInstance hard = InstanceFromJson(json{{"n", 4}, {"nu", 0.5}, {"D", 2.0}});
  EXPECT_EQ(hard.n(), 4);
  EXPECT_DOUBLE_EQ(hard.L(), 0.5);
  EXPECT_EQ(InstanceToJson(hard)["nu"].get<double>(), 0.5);
  const json general = {{"M", {{1.0, 0.5}, {-0.3, 0.8}}}, {"b1", {0.4, -0.2}}, {"b2", {0.1, 0.3}}};
  const BilinearInstance inst = InstanceFromJson(general);
  EXPECT_EQ(inst.M()(1, 0), -0.3);
  EXPECT_EQ(InstanceToJson(inst), general);
  EXPECT_THROW(InstanceFromJson(json{{"n", 3}}), PreconditionError);
}

TEST(IoTest, SpecParsing) {
  const ScliSpec eg = ScliSpecFromJson(json{{"extragradient", 0.25}});
  EXPECT_EQ(eg.k(), 2);
  const ScliSpec c = ScliSpecFromJson(json{{"k", 2}, {"n_coeffs", {-0.5, 0.1}}});
  EXPECT_EQ(c.c0_coeffs(), (std::vector<double>{1.0, -0.5, 0.1}));
  EXPECT_TRUE(CheckConsistency(c).consistent);
  const ScliSpec t = ScliSpecFromJson(json{{"tightness", 3}});
  EXPECT_EQ(t.k(), 3);
  EXPECT_THROW(ScliSpecFromJson(json{{"k", 0}}), PreconditionError);
  const ScliSpec round = ScliSpecFromJson(ScliSpecToJson(c));
  EXPECT_EQ(round.c0_coeffs(), c.c0_coeffs());
}

TEST(IoTest, ConfigParsing) {
  const json j = {{"name", "x"},
                  {"instance", {{"n", 4}, {"D", 2.0}}},
                  {"method", "eg_timevarying"},
                  {"schedule", {{"kind", "geometric"}, {"scale", 0.5}, {"ratio", 0.9}}},
                  {"nu_mode", "L_over_sqrtT"},
                  {"T_grid", {5, 50}},
                  {"bounds", {"TIMEVARYING_LB"}}};
  const ExperimentConfig cfg = ExperimentConfigFromJson(j);
  EXPECT_EQ(cfg.instance.n, 4);
  EXPECT_EQ(cfg.method, Method::kEGTimeVarying);
  EXPECT_EQ(cfg.schedule.kind, ScheduleKind::kGeometric);
  EXPECT_EQ(cfg.T_grid, (std::vector<std::size_t>{5, 50}));
  EXPECT_EQ(cfg.bounds[0], BoundKind::kTimeVaryingLower);
  EXPECT_THROW(ExperimentConfigFromJson(json{{"etaa", 1.0}}), PreconditionError);
  EXPECT_THROW(ExperimentConfigFromJson(json{{"method", "adam"}}), PreconditionError);
  EXPECT_THROW(ExperimentConfigFromJson(json{{"T_grid", {3, 2}}}), PreconditionError);
  const ExperimentConfig grid = ExperimentConfigFromJson(json{{"T_grid", {{"min", 10}, {"max", 1000}}}});
  EXPECT_EQ(grid.T_grid.front(), 10u);
  EXPECT_EQ(grid.T_grid.back(), 1000u);
}

TEST(IoTest, TraceCsvShape) {
  const OperatorHandle op = AsOperator(MakeHardInstance({2, 1.0, 1.0}));
  SolverConfig cfg;
  cfg.T = 5;
  const Trace tr = AverageTrace(RunEg(op, cfg), op);
  const std::string csv = TraceToCsv(tr);
  EXPECT_EQ(csv.rfind("t,ham,sqrt_ham,gap_bilinear,gap_linearized,func_loss,dist_to_star,avg_ham", 0),
            0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_NE(csv.find("\n0,0.9999999999999"), std::string::npos);
  EXPECT_NE(csv.find("\n5,"), std::string::npos);
}

TEST(IoTest, ReportJson) {
  CheckReport r;
  r.name = "demo";
  r.Record(0.5, [] { return json{{"a", 1}}; });
  r.Record(-0.5, [] { return json{{"a", 2}}; });
  const json j = ToJson(r);
  EXPECT_EQ(j["violations"], 1);
  EXPECT_EQ(j["witness"]["a"], 2);
  EXPECT_EQ(j["worst_margin"], -0.5);
}

}  // namespace
}  // namespace lastiter
