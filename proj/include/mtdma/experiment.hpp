#pragma once

// Scenario configuration, delay sweeps and CSV emission.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtdma/allocation.hpp"
#include "mtdma/error.hpp"
#include "mtdma/rtt_model.hpp"
#include "mtdma/schedule.hpp"

namespace mtdma {

enum class Algorithm { nopolicy, minmax, eq1, eq2, upperbound };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::nopolicy, Algorithm::minmax,
                                              Algorithm::eq1, Algorithm::eq2,
                                              Algorithm::upperbound};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::nopolicy: return "nopolicy";
    case Algorithm::minmax: return "minmax";
    case Algorithm::eq1: return "eq1";
    case Algorithm::eq2: return "eq2";
    case Algorithm::upperbound: return "upperbound";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == name)
      return a;
  }
  throw ValidationError("algorithms: unknown algorithm '" + std::string(name) + "'");
}

/// Comma-separated algorithm list, e.g. "nopolicy,minmax".
inline std::vector<Algorithm> parse_algorithm_list(std::string_view list) {
  std::vector<Algorithm> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    auto item = list.substr(0, comma);
    while (!item.empty() && item.front() == ' ')
      item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ')
      item.remove_suffix(1);
    if (!item.empty())
      out.push_back(parse_algorithm(item));
    if (comma == std::string_view::npos)
      break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

/// Inclusive sweep start, start+step, ..., up to stop. Points are computed
/// as start + k*step so long sweeps do not accumulate error.
inline std::vector<Millis> delay_sweep(Millis start, Millis stop, Millis step) {
  if (!(step > 0.0))
    throw ValidationError("delay sweep: step must be positive");
  if (stop < start)
    throw ValidationError("delay sweep: stop must be >= start");
  std::vector<Millis> out;
  for (std::size_t k = 0;; ++k) {
    const Millis x = start + static_cast<double>(k) * step;
    if (x > stop + kTimeTolerance)
      break;
    out.push_back(x);
  }
  return out;
}

struct Scenario {
  std::string name = "custom";
  std::vector<double> duty_cycles;
  Millis slot_time = 0.0;
  std::vector<Millis> delays;
  /// Added to the base delay per VSTA; empty means all zero.
  std::vector<Millis> delay_offsets;
  /// One value for every VSTA, or one per VSTA.
  std::vector<double> loss_p{0.0032};
  double mss = 1460.0;
  Millis rtt_floor = 1.0;
  RttSamplerConfig sampler;
  std::vector<Algorithm> algorithms{Algorithm::nopolicy, Algorithm::minmax};
  std::uint64_t enumeration_budget = 1'000'000;

  std::size_t vsta_count() const noexcept { return duty_cycles.size(); }

  void validate() const {
    try {
      DutyCycleSet{duty_cycles};
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("duty_cycles: ") + e.what());
    }
    if (!(slot_time > 0.0))
      throw ValidationError("slot_time_ms: must be positive");
    if (delays.empty())
      throw ValidationError("delays: sweep is empty");
    for (Millis d : delays) {
      if (!std::isfinite(d) || d < 0.0)
        throw ValidationError("delays: every delay must be >= 0");
    }
    if (!delay_offsets.empty() && delay_offsets.size() != vsta_count())
      throw ValidationError("delay_offsets_ms: need one offset per VSTA or none");
    for (Millis o : delay_offsets) {
      if (!std::isfinite(o))
        throw ValidationError("delay_offsets_ms: offsets must be finite");
    }
    if (loss_p.size() != 1 && loss_p.size() != vsta_count())
      throw ValidationError("loss_p: need one value or one per VSTA");
    for (double p : loss_p) {
      if (!(p > 0.0 && p < kMaxLossRate))
        throw ValidationError("loss_p: must lie in (0, 0.02)");
    }
    if (!(mss > 0.0))
      throw ValidationError("mss_bytes: must be positive");
    if (!(rtt_floor > 0.0))
      throw ValidationError("rtt_floor_ms: must be positive");
    try {
      sampler.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("sampler: ") + e.what());
    }
    if (algorithms.empty())
      throw ValidationError("algorithms: at least one algorithm is required");
    std::set<Algorithm> seen(algorithms.begin(), algorithms.end());
    if (seen.size() != algorithms.size())
      throw ValidationError("algorithms: duplicate entry");
    for (Millis base : delays) {
      for (Millis o : delay_offsets) {
        if (base + o < 0.0)
          throw ValidationError("delay_offsets_ms: effective delay below zero");
      }
    }
  }

  Millis effective_delay(Millis base, std::size_t vsta) const {
    return base + (delay_offsets.empty() ? 0.0 : delay_offsets[vsta]);
  }

  std::vector<PathParams> paths_at(Millis base) const {
    std::vector<PathParams> out(vsta_count());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].delay = effective_delay(base, i);
      out[i].loss_p = loss_p.size() == 1 ? loss_p.front() : loss_p[i];
      out[i].mss = mss;
      out[i].rtt_floor = rtt_floor;
    }
    return out;
  }
};

/// Built-in scenarios: case1, case2, case3 and fig5. fig5 expands into one
/// single-AP scenario per disconnection time (0, 15, 25, 50, 75 ms), each
/// connected half of the time.
inline std::vector<Scenario> builtin_scenarios(std::string_view name) {
  Scenario s;
  s.delays = delay_sweep(0.0, 200.0, 5.0);
  s.algorithms.assign(std::begin(kAllAlgorithms), std::end(kAllAlgorithms));
  if (name == "case1") {
    s.name = "case1";
    s.duty_cycles = {0.5, 0.125, 0.125, 0.125, 0.125};
    s.slot_time = 15.0;
    return {s};
  }
  if (name == "case2") {
    s.name = "case2";
    s.duty_cycles = {0.5, 0.125, 0.375};
    s.slot_time = 12.5;
    s.delay_offsets = {0.0, 20.0, 40.0};
    return {s};
  }
  if (name == "case3") {
    s.name = "case3";
    s.duty_cycles = {0.65, 0.25, 0.10};
    s.slot_time = 10.0;
    return {s};
  }
  if (name == "fig5") {
    std::vector<Scenario> out;
    s.algorithms = {Algorithm::nopolicy};
    for (int off : {0, 15, 25, 50, 75}) {
      Scenario v = s;
      v.name = "fig5_d" + std::to_string(off);
      if (off == 0) {
        v.duty_cycles = {1.0};
        v.slot_time = 1.0;
      } else {
        v.duty_cycles = {0.5, 0.5};
        v.slot_time = off;
      }
      out.push_back(std::move(v));
    }
    return out;
  }
  return {};
}

/// Reads a scenario from a flat JSON object. Unknown keys are errors.
///
/// Keys: name, duty_cycles, slot_time_ms, delays_ms | (delay_start_ms,
/// delay_stop_ms, delay_step_ms), delay_offsets_ms, loss_p (number or list),
/// mss_bytes, rtt_floor_ms, samples, mean_fraction, seed, algorithms (list
/// or comma string), enumeration_budget.
inline Scenario parse_scenario(const nlohmann::json& doc) {
  using nlohmann::json;
  if (!doc.is_object())
    throw ValidationError("scenario: expected a JSON object");

  static const std::set<std::string> known{
      "name",           "duty_cycles",   "slot_time_ms",  "delays_ms",    "delay_start_ms",
      "delay_stop_ms",  "delay_step_ms", "delay_offsets_ms", "loss_p",    "mss_bytes",
      "rtt_floor_ms",   "samples",       "mean_fraction", "seed",         "algorithms",
      "enumeration_budget"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key))
      throw ValidationError(key + ": unknown key");
  }

  auto field = [&](const std::string& key, auto fn) {
    if (!doc.contains(key))
      return;
    try {
      fn(doc.at(key));
    } catch (const json::exception& e) {
      throw ValidationError(key + ": " + e.what());
    }
  };

  Scenario s;
  field("name", [&](const json& v) { s.name = v.get<std::string>(); });
  field("duty_cycles", [&](const json& v) { s.duty_cycles = v.get<std::vector<double>>(); });
  field("slot_time_ms", [&](const json& v) { s.slot_time = v.get<double>(); });
  field("delay_offsets_ms",
        [&](const json& v) { s.delay_offsets = v.get<std::vector<double>>(); });
  field("loss_p", [&](const json& v) {
    s.loss_p = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
  });
  field("mss_bytes", [&](const json& v) { s.mss = v.get<double>(); });
  field("rtt_floor_ms", [&](const json& v) { s.rtt_floor = v.get<double>(); });
  field("samples", [&](const json& v) { s.sampler.samples = v.get<std::size_t>(); });
  field("mean_fraction", [&](const json& v) { s.sampler.mean_fraction = v.get<double>(); });
  field("seed", [&](const json& v) { s.sampler.seed = v.get<std::uint64_t>(); });
  field("enumeration_budget",
        [&](const json& v) { s.enumeration_budget = v.get<std::uint64_t>(); });
  field("algorithms", [&](const json& v) {
    if (v.is_string()) {
      s.algorithms = parse_algorithm_list(v.get<std::string>());
    } else {
      s.algorithms.clear();
      for (const auto& a : v)
        s.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
  });

  const bool has_list = doc.contains("delays_ms");
  const bool has_range = doc.contains("delay_start_ms") || doc.contains("delay_stop_ms") ||
                         doc.contains("delay_step_ms");
  if (has_list && has_range)
    throw ValidationError("delays_ms: give either a list or start/stop/step, not both");
  if (has_list) {
    field("delays_ms", [&](const json& v) { s.delays = v.get<std::vector<double>>(); });
  } else if (has_range) {
    for (const char* k : {"delay_start_ms", "delay_stop_ms", "delay_step_ms"}) {
      if (!doc.contains(k))
        throw ValidationError(std::string(k) + ": missing");
    }
    double start = 0, stop = 0, step = 0;
    field("delay_start_ms", [&](const json& v) { start = v.get<double>(); });
    field("delay_stop_ms", [&](const json& v) { stop = v.get<double>(); });
    field("delay_step_ms", [&](const json& v) { step = v.get<double>(); });
    s.delays = delay_sweep(start, stop, step);
  }

  s.validate();
  return s;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("scenario: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("scenario: " + std::string(e.what()));
  }
  return parse_scenario(doc);
}

/// Serialized schedule: period plus ordered [owner, duration_ms, start_ms]
/// triples, owners 0-based.
inline nlohmann::json schedule_to_json(const SlotSchedule& s) {
  nlohmann::json slots = nlohmann::json::array();
  for (std::size_t j = 0; j < s.size(); ++j)
    slots.push_back({s.owners()[j], s.durations()[j], s.start_times()[j]});
  return {{"period_ms", s.period()}, {"slots", std::move(slots)}};
}

inline SlotSchedule schedule_from_json(const nlohmann::json& doc) {
  try {
    std::vector<std::size_t> owners;
    std::map<std::size_t, Millis> sizes;
    for (const auto& slot : doc.at("slots")) {
      if (!slot.is_array() || slot.size() != 3)
        throw ValidationError("slots: expected [owner, duration_ms, start_ms]");
      const auto owner = slot.at(0).get<std::size_t>();
      const auto duration = slot.at(1).get<double>();
      auto [it, inserted] = sizes.emplace(owner, duration);
      if (!inserted && std::abs(it->second - duration) > kTimeTolerance)
        throw ValidationError("slots: VSTA " + std::to_string(owner) + " has unequal slot sizes");
      owners.push_back(owner);
    }
    std::vector<Millis> size_vec;
    for (const auto& [owner, size] : sizes) {
      if (owner != size_vec.size())
        throw ValidationError("slots: VSTA indices must be contiguous from 0");
      size_vec.push_back(size);
    }
    SlotSchedule s(std::move(owners), std::move(size_vec));
    const auto& slots = doc.at("slots");
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (std::abs(slots[j].at(2).get<double>() - s.start_times()[j]) > 1e-6)
        throw ValidationError("slots: start time of slot " + std::to_string(j) + " is inconsistent");
    }
    if (std::abs(doc.at("period_ms").get<double>() - s.period()) > 1e-6)
      throw ValidationError("period_ms: does not match the slot durations");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("schedule: ") + e.what());
  }
}

struct ResultRow {
  std::string scenario;
  Algorithm algorithm = Algorithm::nopolicy;
  Millis base_delay = 0.0;
  std::optional<std::size_t> vsta;  // empty on the aggregate row
  std::optional<Millis> mean_rtt;
  std::optional<double> throughput_bps;
  std::optional<double> aggregate_bps;
  double ratio_vs_nopolicy = 1.0;
  std::uint64_t seed = 0;
};

using ResultTable = std::vector<ResultRow>;

struct ScheduleRecord {
  std::string scenario;
  Algorithm algorithm = Algorithm::nopolicy;
  std::optional<Millis> base_delay;  // set for delay-dependent algorithms
  AllocationResult allocation;
};

namespace detail {

inline void append_rows(ResultTable& table, const Scenario& sc, Algorithm algo, Millis base,
                        const ScheduleThroughput& eval, const ScheduleThroughput& baseline) {
  for (std::size_t i = 0; i < eval.per_vsta.size(); ++i) {
    ResultRow r;
    r.scenario = sc.name;
    r.algorithm = algo;
    r.base_delay = base;
    r.vsta = i;
    r.mean_rtt = eval.per_vsta[i].rtt.mean;
    r.throughput_bps = eval.per_vsta[i].throughput_bps;
    r.ratio_vs_nopolicy = algo == Algorithm::nopolicy
                              ? 1.0
                              : eval.per_vsta[i].throughput_bps / baseline.per_vsta[i].throughput_bps;
    r.seed = sc.sampler.seed;
    table.push_back(std::move(r));
  }
  ResultRow agg;
  agg.scenario = sc.name;
  agg.algorithm = algo;
  agg.base_delay = base;
  agg.aggregate_bps = eval.aggregate_bps;
  agg.ratio_vs_nopolicy =
      algo == Algorithm::nopolicy ? 1.0 : eval.aggregate_bps / baseline.aggregate_bps;
  agg.seed = sc.sampler.seed;
  table.push_back(std::move(agg));
}

}  // namespace detail

/// Runs every requested algorithm at every swept base delay. Ratios are
/// taken against the contiguous schedule under the same seed, whether or
/// not nopolicy itself was requested.
inline ResultTable run_scenario(const Scenario& sc, std::vector<ScheduleRecord>* schedules = nullptr) {
  sc.validate();
  const auto plan = derive_slot_plan(DutyCycleSet{sc.duty_cycles}, sc.slot_time);
  const EnumerationOptions enumeration{sc.enumeration_budget, false};

  // Delay-independent schedules are built once.
  std::map<Algorithm, AllocationResult> fixed;
  auto contiguous = build_contiguous_schedule(plan);
  for (Algorithm a : sc.algorithms) {
    try {
      switch (a) {
        case Algorithm::nopolicy:
          fixed.emplace(a, detail::make_result(contiguous, eq2_objective(contiguous), 1));
          break;
        case Algorithm::minmax:
          fixed.emplace(a, minmax_allocate(plan));
          break;
        case Algorithm::eq2:
          fixed.emplace(a, blind_allocate(plan, BlindObjective::eq2, {}, enumeration));
          break;
        default:
          break;
      }
    } catch (const BudgetExceeded& e) {
      throw BudgetExceeded(e.required(), e.budget(), std::string(to_string(a)));
    }
  }
  if (schedules != nullptr) {
    for (const auto& [a, res] : fixed)
      schedules->push_back({sc.name, a, std::nullopt, res});
  }

  ResultTable table;
  RttCache cache(sc.sampler);
  for (Millis base : sc.delays) {
    const auto paths = sc.paths_at(base);
    const auto baseline = evaluate_throughput(contiguous, paths, sc.sampler, &cache);
    for (Algorithm a : sc.algorithms) {
      std::optional<AllocationResult> per_delay;
      try {
        if (a == Algorithm::eq1)
          per_delay = blind_allocate(plan, BlindObjective::eq1, paths, enumeration);
        else if (a == Algorithm::upperbound)
          per_delay = upper_bound_allocate(plan, paths, sc.sampler, enumeration);
      } catch (const BudgetExceeded& e) {
        throw BudgetExceeded(e.required(), e.budget(), std::string(to_string(a)));
      }

      const SlotSchedule& schedule = per_delay ? per_delay->schedule : fixed.at(a).schedule;
      const auto eval = evaluate_throughput(schedule, paths, sc.sampler, &cache);
      detail::append_rows(table, sc, a, base, eval, baseline);
      if (per_delay && schedules != nullptr)
        schedules->push_back({sc.name, a, base, std::move(*per_delay)});
    }
  }
  return table;
}

/// 6 significant digits, "%.6g" style, independent of the C locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

inline constexpr std::string_view kCsvHeader =
    "scenario,algorithm,base_delay_ms,vsta,mean_rtt_ms,throughput_bps,aggregate_bps,"
    "ratio_vs_nopolicy,seed";

/// CSV with one row per VSTA plus one `all` row per (delay, algorithm),
/// sorted by scenario, base delay, algorithm name, then VSTA (`all` last).
inline std::string emit_csv(ResultTable table) {
  std::stable_sort(table.begin(), table.end(), [](const ResultRow& a, const ResultRow& b) {
    const auto va = a.vsta.value_or(std::numeric_limits<std::size_t>::max());
    const auto vb = b.vsta.value_or(std::numeric_limits<std::size_t>::max());
    return std::forward_as_tuple(a.scenario, a.base_delay, to_string(a.algorithm), va) <
           std::forward_as_tuple(b.scenario, b.base_delay, to_string(b.algorithm), vb);
  });

  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : table) {
    out += r.scenario;
    out += ',';
    out += to_string(r.algorithm);
    out += ',';
    out += format_number(r.base_delay);
    out += ',';
    out += r.vsta ? std::to_string(*r.vsta) : std::string("all");
    out += ',';
    out += opt(r.mean_rtt);
    out += ',';
    out += opt(r.throughput_bps);
    out += ',';
    out += opt(r.aggregate_bps);
    out += ',';
    out += format_number(r.ratio_vs_nopolicy);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

}  // namespace mtdma
