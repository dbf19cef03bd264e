#include <gtest/gtest.h>

#include "capplan/error.hpp"
#include "capplan/planner.hpp"
#include "test_support.hpp"

using namespace capplan;

namespace {

const PlanFound& found(const PlanResult& r) {
  static const PlanFound none{};
  if (!std::holds_alternative<PlanFound>(r)) {
    ADD_FAILURE() << "no plan";
    return none;
  }
  return std::get<PlanFound>(r);
}

}  // namespace

TEST(Planner, TransportScenarioNeedsOneHappening) {
  auto r = plan(capplan::testing::transport_scenario(), 3, capplan::testing::planner_config());
  const Plan& p = found(r).plan;
  ASSERT_EQ(p.happenings.size(), 1u);
  EXPECT_EQ(p.bound_happenings, 1);
  EXPECT_EQ(p.happenings[0].applied, (std::set<std::string>{"Transport"}));
  EXPECT_EQ(p.happenings[0].layer1.at("CurrentProductPosition"), Value(Rational(10)));
  EXPECT_EQ(p.parameters.at("Transport#t0").at("TargetPosition"), Value(Rational(10)));
  ASSERT_EQ(found(r).outcomes.size(), 1u);
  EXPECT_EQ(found(r).outcomes[0].status, BoundOutcome::Status::Sat);
}

TEST(Planner, ChainedScenarioDrivesFirst) {
  auto r = plan(capplan::testing::chained_scenario(), 3, capplan::testing::planner_config());
  const Plan& p = found(r).plan;
  ASSERT_EQ(p.happenings.size(), 2u);
  EXPECT_EQ(p.happenings[0].applied, (std::set<std::string>{"DriveTo"}));
  EXPECT_EQ(p.happenings[1].applied, (std::set<std::string>{"Transport"}));
  EXPECT_EQ(found(r).outcomes[0].status, BoundOutcome::Status::Unsat);
}

TEST(Planner, GoalAlreadyHoldsGivesEmptyHappening) {
  auto r = plan(capplan::testing::empty_plan_scenario(), 2, capplan::testing::planner_config());
  const Plan& p = found(r).plan;
  ASSERT_EQ(p.happenings.size(), 1u);
  EXPECT_TRUE(p.happenings[0].applied.empty());
}

TEST(Planner, UnreachableReportsEveryBound) {
  auto r = plan(capplan::testing::unreachable_scenario(), 3, capplan::testing::planner_config());
  ASSERT_TRUE(std::holds_alternative<NoPlanFound>(r));
  const auto& np = std::get<NoPlanFound>(r);
  ASSERT_EQ(np.outcomes.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(np.outcomes[k].bound, k);
    EXPECT_EQ(np.outcomes[k].status, BoundOutcome::Status::Unsat);
  }
  EXPECT_FALSE(np.any_unknown);
  EXPECT_TRUE(np.cores_available);
  EXPECT_FALSE(np.last_core.empty());
  ASSERT_TRUE(np.last_unsat_encoding.has_value());
  EXPECT_EQ(np.last_unsat_encoding->bound, 3);
}

TEST(Planner, ExpandedAndIncrementalAgree) {
  for (const auto& m : {capplan::testing::transport_scenario(), capplan::testing::chained_scenario(),
                        capplan::testing::clamp_scenario(), capplan::testing::unreachable_scenario()}) {
    auto base = plan(m, 2, capplan::testing::planner_config());
    auto expanded = plan(m, 2, capplan::testing::planner_config(true));
    PlannerConfig inc = capplan::testing::planner_config();
    inc.incremental = true;
    auto incremental = plan(m, 2, inc);
    ASSERT_EQ(base.index(), expanded.index());
    ASSERT_EQ(base.index(), incremental.index());
    if (base.index() == 0) {
      EXPECT_EQ(std::get<PlanFound>(base).plan.happenings.size(), std::get<PlanFound>(expanded).plan.happenings.size());
      EXPECT_EQ(std::get<PlanFound>(base).plan.happenings.size(),
                std::get<PlanFound>(incremental).plan.happenings.size());
    }
  }
}

TEST(Planner, InvalidModelIsRejected) {
  nlohmann::json doc = capplan::testing::load_json("clamp.json");
  doc["products"][0]["properties"][0]["instanceDescriptions"][0]["value"] = "2";
  EXPECT_THROW(plan(parse_model(doc), 1, capplan::testing::planner_config()), InvalidModel);
}

TEST(Planner, ExtractPlanNeedsEveryValue) {
  CapabilityModel m = capplan::testing::transport_bare();
  Encoding e = build(m, build_synonymy(m), 0);
  std::map<std::string, Value> valuation;
  for (const auto& [key, sort] : e.variables)
    valuation[symbol(key)] = sort == Sort::Bool ? Value(false) : Value(Rational(1));
  Plan p = extract_plan(e, valuation);
  EXPECT_EQ(p.happenings.size(), 1u);
  EXPECT_TRUE(p.happenings[0].applied.empty());
  EXPECT_EQ(p.classes.size(), 4u);
  valuation.erase("TargetPosition#t0#l1");
  EXPECT_THROW(extract_plan(e, valuation), IncompleteModel);
  valuation["TargetPosition#t0#l1"] = true;
  EXPECT_THROW(extract_plan(e, valuation), IncompleteModel);
}

TEST(Planner, ExplainContradiction) {
  auto r = plan(capplan::testing::contradictory_scenario(), 1, capplan::testing::planner_config());
  ASSERT_TRUE(std::holds_alternative<NoPlanFound>(r));
  Explanation ex = explain(std::get<NoPlanFound>(r), capplan::testing::contradictory_scenario());
  ASSERT_FALSE(ex.elements.empty());
  std::set<std::string> families;
  for (const auto& el : ex.elements) {
    families.insert(el.family);
    EXPECT_FALSE(el.rendering.empty());
    EXPECT_EQ(el.rendering.find('#'), std::string::npos) << el.rendering;
  }
  EXPECT_TRUE(families.contains("init"));
  auto j = explanation_to_json(ex);
  EXPECT_EQ(j["core"].size(), ex.core.size());
  EXPECT_EQ(j["elements"].size(), ex.elements.size());
}

TEST(Planner, ExplainWithoutCores) {
  PlannerConfig config = capplan::testing::planner_config();
  config.solver.produce_unsat_cores = false;
  auto r = plan(capplan::testing::unreachable_scenario(), 1, config);
  ASSERT_TRUE(std::holds_alternative<NoPlanFound>(r));
  EXPECT_FALSE(std::get<NoPlanFound>(r).cores_available);
  EXPECT_THROW(explain(std::get<NoPlanFound>(r), capplan::testing::unreachable_scenario()), CoresUnavailable);
}

TEST(Planner, MinimizedCoreIsNoLarger) {
  PlannerConfig config = capplan::testing::planner_config();
  auto plain = std::get<NoPlanFound>(plan(capplan::testing::unreachable_scenario(), 1, config));
  config.minimize_core = true;
  auto minimal = std::get<NoPlanFound>(plan(capplan::testing::unreachable_scenario(), 1, config));
  EXPECT_LE(minimal.last_core.size(), plain.last_core.size());
  EXPECT_FALSE(minimal.last_core.empty());
}

TEST(Planner, PlanJsonRoundTrip) {
  auto r = plan(capplan::testing::chained_scenario(), 2, capplan::testing::planner_config());
  const Plan& p = found(r).plan;
  nlohmann::json j = plan_to_json(p);
  EXPECT_EQ(j["boundHappenings"], 2);
  EXPECT_EQ(plan_from_json(j), p);
  EXPECT_EQ(plan_from_json(nlohmann::json::parse(j.dump())), p);
  EXPECT_THROW(plan_from_json(nlohmann::json::array()), SchemaError);
  nlohmann::json bad = j;
  bad["happenings"][0]["layer0"]["AGVPosition"] = "abc";
  EXPECT_THROW(plan_from_json(bad), SchemaError);
}

TEST(Planner, OutcomesJson) {
  std::vector<BoundOutcome> outcomes{{0, BoundOutcome::Status::Unsat, "", {"a"}, true},
                                     {1, BoundOutcome::Status::Unknown, "timeout", {}, false},
                                     {2, BoundOutcome::Status::Sat, "", {}, false}};
  auto j = outcomes_to_json(outcomes);
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0]["outcome"], "unsat");
  EXPECT_EQ(j[0]["happenings"], 1);
  EXPECT_EQ(j[0]["core"], nlohmann::json::array({"a"}));
  EXPECT_EQ(j[1]["reason"], "timeout");
  EXPECT_EQ(j[2]["outcome"], "sat");
}
