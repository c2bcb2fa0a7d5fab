#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mtdma/experiment.hpp"

using namespace mtdma;
using nlohmann::json;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ','))
    out.push_back(cell);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

Scenario quick(Scenario s, std::size_t samples = 300) {
  s.sampler.samples = samples;
  return s;
}

void expect_rejected(const json& doc, const std::string& prefix) {
  try {
    parse_scenario(doc);
    FAIL() << "accepted " << doc.dump();
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind(prefix, 0), 0u) << e.what();
  }
}

json minimal() { return {{"duty_cycles", {0.5, 0.5}}, {"slot_time_ms", 10}, {"delays_ms", {0, 10}}}; }

}  // namespace

TEST(DelaySweep, InclusiveRange) {
  const auto d = delay_sweep(0.0, 200.0, 5.0);
  ASSERT_EQ(d.size(), 41u);
  EXPECT_EQ(d.front(), 0.0);
  EXPECT_EQ(d.back(), 200.0);
  EXPECT_EQ(d[7], 35.0);
  EXPECT_EQ(delay_sweep(0.0, 1.0, 0.1).size(), 11u);
  EXPECT_THROW(delay_sweep(0.0, 10.0, 0.0), ValidationError);
  EXPECT_THROW(delay_sweep(10.0, 0.0, 1.0), ValidationError);
}

TEST(Algorithms, NamesRoundTrip) {
  for (Algorithm a : kAllAlgorithms)
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  EXPECT_EQ(parse_algorithm_list("eq2, minmax").size(), 2u);
  EXPECT_THROW(parse_algorithm("fastest"), ValidationError);
}

TEST(BuiltinScenarios, Shapes) {
  const auto c2 = builtin_scenarios("case2");
  ASSERT_EQ(c2.size(), 1u);
  EXPECT_EQ(c2[0].effective_delay(30.0, 0), 30.0);
  EXPECT_EQ(c2[0].effective_delay(30.0, 1), 50.0);
  EXPECT_EQ(c2[0].effective_delay(30.0, 2), 70.0);
  EXPECT_EQ(c2[0].delays.size(), 41u);
  const auto fig5 = builtin_scenarios("fig5");
  ASSERT_EQ(fig5.size(), 5u);
  EXPECT_EQ(fig5[0].duty_cycles, (std::vector<double>{1.0}));
  EXPECT_EQ(fig5[3].slot_time, 50.0);
  EXPECT_TRUE(builtin_scenarios("case9").empty());
  for (const char* n : {"case1", "case2", "case3", "fig5"})
    for (const auto& s : builtin_scenarios(n))
      EXPECT_NO_THROW(s.validate()) << s.name;
}

TEST(ParseScenario, Minimal) {
  const auto s = parse_scenario(minimal());
  EXPECT_EQ(s.name, "custom");
  EXPECT_EQ(s.delays, (std::vector<double>{0, 10}));
  EXPECT_EQ(s.sampler.samples, 10000u);
  EXPECT_EQ(s.sampler.mean_fraction, 0.25);
  EXPECT_EQ(s.loss_p, (std::vector<double>{0.0032}));
}

TEST(ParseScenario, FromFile) {
  const auto s = load_scenario_file(MTDMA_TEST_DATA_DIR "/two_ap.json");
  EXPECT_EQ(s.name, "two_ap");
  EXPECT_EQ(s.delays, (std::vector<double>{0, 20, 40, 60}));
  EXPECT_EQ(s.algorithms.size(), 3u);
  EXPECT_EQ(s.paths_at(20.0)[1].loss_p, 0.004);
  EXPECT_EQ(s.sampler.seed, 11u);
  EXPECT_THROW(load_scenario_file(MTDMA_TEST_DATA_DIR "/missing.json"), ValidationError);
}

TEST(ParseScenario, Errors) {
  auto with = [](const char* key, json v) {
    auto d = minimal();
    d[key] = std::move(v);
    return d;
  };
  expect_rejected(with("colour", "red"), "colour:");
  expect_rejected(with("duty_cycles", {0.5, 0.4}), "duty_cycles:");
  expect_rejected(with("duty_cycles", {0.5, "x"}), "duty_cycles:");
  expect_rejected(with("slot_time_ms", 0), "slot_time_ms:");
  expect_rejected(with("delays_ms", json::array()), "delays:");
  expect_rejected(with("delays_ms", {-5}), "delays:");
  expect_rejected(with("loss_p", 0.03), "loss_p:");
  expect_rejected(with("loss_p", {0.001, 0.002, 0.003}), "loss_p:");
  expect_rejected(with("delay_offsets_ms", {1}), "delay_offsets_ms:");
  expect_rejected(with("delay_offsets_ms", {-20, 0}), "delay_offsets_ms:");
  expect_rejected(with("samples", 0), "sampler:");
  expect_rejected(with("algorithms", "minmax,minmax"), "algorithms:");
  expect_rejected(with("delay_step_ms", 5), "delays_ms:");
  auto range = minimal();
  range.erase("delays_ms");
  range["delay_start_ms"] = 0;
  expect_rejected(range, "delay_stop_ms:");
  expect_rejected(json::array(), "scenario:");
}

TEST(ScheduleJson, RoundTripsRandomSchedules) {
  std::mt19937_64 rng(8);
  const auto plan = derive_slot_plan(DutyCycleSet{{0.65, 0.25, 0.10}}, 10.0);
  auto owners = std::vector<std::size_t>{0, 0, 0, 0, 0, 0, 1, 1, 2};
  for (int trial = 0; trial < 30; ++trial) {
    std::shuffle(owners.begin(), owners.end(), rng);
    const auto s = SlotSchedule::from_plan(plan, owners);
    const auto back = schedule_from_json(json::parse(schedule_to_json(s).dump()));
    EXPECT_EQ(back, s);
  }
}

TEST(ScheduleJson, RejectsInconsistentInput) {
  const json bad_size = {{"period_ms", 30}, {"slots", {{0, 10, 0}, {0, 20, 10}}}};
  EXPECT_THROW(schedule_from_json(bad_size), ValidationError);
  const json gap = {{"period_ms", 20}, {"slots", {{0, 10, 0}, {2, 10, 10}}}};
  EXPECT_THROW(schedule_from_json(gap), ValidationError);
  const json start = {{"period_ms", 20}, {"slots", {{0, 10, 0}, {1, 10, 11}}}};
  EXPECT_THROW(schedule_from_json(start), ValidationError);
  const json period = {{"period_ms", 25}, {"slots", {{0, 10, 0}, {1, 10, 10}}}};
  EXPECT_THROW(schedule_from_json(period), ValidationError);
  EXPECT_THROW(schedule_from_json(json::object()), ValidationError);
}

TEST(FormatNumber, SixSignificantDigits) {
  EXPECT_EQ(format_number(2064742.0), "2.06474e+06");
  EXPECT_EQ(format_number(37.5), "37.5");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.1234567), "0.123457");
  EXPECT_EQ(format_number(0.0), "0");
}

TEST(EmitCsv, EmptyTableIsHeaderOnly) {
  EXPECT_EQ(emit_csv({}), std::string(kCsvHeader) + "\n");
}

TEST(RunScenario, Case1RowCounts) {
  auto s = quick(builtin_scenarios("case1")[0]);
  s.algorithms = {Algorithm::nopolicy, Algorithm::minmax};
  const auto table = run_scenario(s);
  std::size_t aggregates = 0;
  for (const auto& r : table)
    aggregates += r.vsta ? 0 : 1;
  EXPECT_EQ(aggregates, 82u);
  EXPECT_EQ(table.size(), 82u * 6);
  const auto lines = lines_of(emit_csv(table));
  EXPECT_EQ(lines.size(), 1 + table.size());
  EXPECT_EQ(lines[0], kCsvHeader);
}

TEST(RunScenario, CsvIsSortedAndComplete) {
  auto s = quick(builtin_scenarios("case2")[0]);
  s.algorithms = {Algorithm::minmax, Algorithm::nopolicy, Algorithm::eq2};
  const auto lines = lines_of(emit_csv(run_scenario(s)));
  ASSERT_GT(lines.size(), 9u);
  const std::vector<std::string> want_first{"case2,eq2,0,0", "case2,eq2,0,1", "case2,eq2,0,2",
                                            "case2,eq2,0,all", "case2,minmax,0,0"};
  for (std::size_t k = 0; k < want_first.size(); ++k)
    EXPECT_EQ(lines[k + 1].rfind(want_first[k] + ",", 0), 0u) << lines[k + 1];
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cells = split(lines[k]);
    ASSERT_EQ(cells.size(), 9u) << lines[k];
    const bool all = cells[3] == "all";
    EXPECT_EQ(cells[4].empty(), all);
    EXPECT_EQ(cells[5].empty(), all);
    EXPECT_EQ(cells[6].empty(), !all);
    EXPECT_EQ(cells[8], "1");
  }
}

TEST(RunScenario, DeterministicForSeed) {
  auto s = quick(parse_scenario(minimal()));
  s.sampler.seed = 99;
  EXPECT_EQ(emit_csv(run_scenario(s)), emit_csv(run_scenario(s)));
  auto other = s;
  other.sampler.seed = 100;
  EXPECT_NE(emit_csv(run_scenario(s)), emit_csv(run_scenario(other)));
}

TEST(RunScenario, BaselineRatiosAndRttBounds) {
  auto s = quick(builtin_scenarios("case2")[0]);
  s.algorithms = {Algorithm::nopolicy, Algorithm::minmax};
  for (const auto& r : run_scenario(s)) {
    if (r.algorithm == Algorithm::nopolicy) {
      EXPECT_EQ(r.ratio_vs_nopolicy, 1.0);
    }
    if (r.vsta) {
      EXPECT_GE(*r.mean_rtt, s.effective_delay(r.base_delay, *r.vsta));
      EXPECT_GT(*r.throughput_bps, 0.0);
    }
  }
}

TEST(RunScenario, SingleVstaMatchesMathis) {
  auto s = parse_scenario(
      {{"duty_cycles", {1.0}}, {"slot_time_ms", 10}, {"delays_ms", {100}}, {"samples", 50}});
  const auto table = run_scenario(s);
  ASSERT_EQ(table.size(), 4u);
  EXPECT_NEAR(*table[1].aggregate_bps, 2.0647e6, 2.0647e6 * 1e-4);
  EXPECT_EQ(*table[0].mean_rtt, 100.0);
}

TEST(RunScenario, RecordsSchedules) {
  auto s = quick(parse_scenario(minimal()));
  s.algorithms = {Algorithm::minmax, Algorithm::eq1};
  std::vector<ScheduleRecord> records;
  run_scenario(s, &records);
  // minmax once, eq1 once per delay.
  EXPECT_EQ(records.size(), 1u + s.delays.size());
}

TEST(RunScenario, BudgetErrorNamesAlgorithm) {
  auto s = quick(builtin_scenarios("case1")[0]);
  s.algorithms = {Algorithm::eq2};
  s.enumeration_budget = 100;
  try {
    run_scenario(s);
    FAIL();
  } catch (const BudgetExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("eq2"), std::string::npos) << e.what();
  }
}

TEST(RunScenario, Case2MinMaxAheadFromTwentyMs) {
  auto s = builtin_scenarios("case2")[0];
  s.algorithms = {Algorithm::nopolicy, Algorithm::minmax};
  for (const auto& r : run_scenario(s)) {
    if (r.algorithm == Algorithm::minmax && !r.vsta && r.base_delay >= 20.0) {
      EXPECT_GE(r.ratio_vs_nopolicy, 1.0) << "base delay " << r.base_delay;
    }
  }
}
