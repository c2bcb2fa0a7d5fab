#pragma once

// Slot allocation strategies.
//
//  * minmax_allocate: greedy heuristic. VSTAs are served in decreasing slot
//    count; each one picks, among the still-free positions, the set that
//    minimizes its largest circular index gap.
//  * blind_allocate: exhaustive search over every feasible schedule for the
//    delay-agnostic objective (sum of inverse max disconnections) or the
//    delay-aware throughput penalty.
//  * upper_bound_allocate: exhaustive search scoring every schedule by the
//    Monte-Carlo aggregate throughput.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "mtdma/error.hpp"
#include "mtdma/rtt_model.hpp"
#include "mtdma/schedule.hpp"

namespace mtdma {

struct AllocationResult {
  SlotSchedule schedule;
  std::vector<Millis> per_vsta_max_disconnection;
  double objective_value = 0.0;
  std::uint64_t evaluations = 0;
};

struct EnumerationOptions {
  std::uint64_t budget = 1'000'000;
  /// Visit one representative (the lexicographically smallest rotation) per
  /// rotation class instead of every schedule.
  bool collapse_rotations = false;
};

struct MinMaxOptions {
  /// Largest number of position combinations examined exactly in one step;
  /// bigger steps fall back to nearest-to-ideal greedy placement.
  std::uint64_t combination_budget = 1'000'000;
};

namespace detail {

inline constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a)
    return kSaturated;
  return a * b;
}

/// C(n, k), saturating at 2^64 - 1.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n)
    return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at every step.
    const std::uint64_t num = n - k + i;
    const std::uint64_t g = std::gcd(r, i);
    const std::uint64_t rr = saturating_mul(r / g, num / (i / g));
    if (rr == kSaturated)
      return kSaturated;
    r = rr;
  }
  return r;
}

inline std::vector<Millis> max_disconnections(const SlotSchedule& s) {
  std::vector<Millis> out;
  out.reserve(s.vsta_count());
  for (std::size_t i = 0; i < s.vsta_count(); ++i)
    out.push_back(max_disconnection(s, i));
  return out;
}

inline AllocationResult make_result(SlotSchedule schedule, double objective,
                                    std::uint64_t evaluations) {
  auto maxes = max_disconnections(schedule);
  return AllocationResult{std::move(schedule), std::move(maxes), objective, evaluations};
}

/// Largest circular index distance between consecutive sorted positions.
inline std::size_t max_index_gap(std::span<const std::size_t> sorted, std::size_t G) {
  std::size_t gap = sorted.front() + G - sorted.back();
  for (std::size_t k = 1; k < sorted.size(); ++k)
    gap = std::max(gap, sorted[k] - sorted[k - 1]);
  return gap;
}

/// Relative comparison so that schedules equal up to rounding tie.
inline bool clearly_greater(double a, double b) {
  if (std::isinf(a) || std::isinf(b))
    return a > b;
  return a > b + 1e-12 * std::max(1.0, std::abs(b));
}

inline bool is_canonical_rotation(std::span<const std::size_t> owners) {
  const std::size_t G = owners.size();
  for (std::size_t k = 1; k < G; ++k) {
    for (std::size_t j = 0; j < G; ++j) {
      const std::size_t a = owners[(j + k) % G];
      if (a != owners[j]) {
        if (a < owners[j])
          return false;
        break;
      }
    }
  }
  return true;
}

/// Picks `count` positions out of `free` minimizing the max circular index
/// gap; ties go to the lexicographically smallest choice.
inline std::vector<std::size_t> pick_min_max_gap(std::span<const std::size_t> free,
                                                 std::size_t count, std::size_t G,
                                                 std::uint64_t budget,
                                                 std::uint64_t& evaluations) {
  const std::uint64_t combos = binomial(free.size(), count);
  if (combos <= budget) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<std::size_t> chosen(count), best;
    std::size_t best_gap = std::numeric_limits<std::size_t>::max();
    while (true) {
      ++evaluations;
      for (std::size_t k = 0; k < count; ++k)
        chosen[k] = free[idx[k]];
      const std::size_t gap = max_index_gap(chosen, G);
      if (gap < best_gap) {
        best_gap = gap;
        best = chosen;
      }
      // Next combination in lexicographic order.
      std::size_t k = count;
      while (k > 0 && idx[k - 1] == free.size() - count + (k - 1))
        --k;
      if (k == 0)
        break;
      ++idx[k - 1];
      for (std::size_t m = k; m < count; ++m)
        idx[m] = idx[m - 1] + 1;
    }
    return best;
  }

  // Greedy: walk ideal, evenly spaced targets from the first free position
  // and take the nearest unused free position for each.
  ++evaluations;
  std::vector<bool> used(free.size(), false);
  std::vector<std::size_t> out;
  out.reserve(count);
  const double step = static_cast<double>(G) / static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double target = std::fmod(static_cast<double>(free.front()) + step * k, G);
    std::size_t best = free.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < free.size(); ++m) {
      if (used[m])
        continue;
      const double d = std::abs(static_cast<double>(free[m]) - target);
      const double dist = std::min(d, G - d);
      if (dist < best_dist) {
        best_dist = dist;
        best = m;
      }
    }
    used[best] = true;
    out.push_back(free[best]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Number of ways to split G into `parts` gaps, each in [1, cap]; saturating.
inline std::uint64_t count_gap_sequences(std::size_t G, std::size_t parts, std::size_t cap) {
  std::vector<std::uint64_t> ways(G + 1, 0);
  ways[0] = 1;
  for (std::size_t p = 0; p < parts; ++p) {
    std::vector<std::uint64_t> next(G + 1, 0);
    for (std::size_t s = 0; s <= G; ++s) {
      if (ways[s] == 0)
        continue;
      for (std::size_t g = 1; g <= cap && s + g <= G; ++g)
        next[s + g] = next[s + g] > kSaturated - ways[s] ? kSaturated : next[s + g] + ways[s];
    }
    ways = std::move(next);
  }
  return ways[G];
}

/// Placements of `count` slots over G positions, anchored at position 0,
/// whose largest circular gap is the minimum possible, ceil(G / count).
/// Even spacing comes first; the rest follow in lexicographic order.
inline std::vector<std::vector<std::size_t>> first_vsta_placements(std::size_t G, std::size_t count,
                                                                   std::uint64_t budget) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> even;
  for (std::size_t k = 0; k < count; ++k) {
    const auto p = static_cast<std::size_t>(
        std::round(static_cast<double>(k) * static_cast<double>(G) / static_cast<double>(count)));
    if (even.empty() || even.back() != p)
      even.push_back(p);
  }
  out.push_back(even);

  const std::size_t cap = (G + count - 1) / count;
  if (count_gap_sequences(G, count, cap) > budget)
    return out;

  std::vector<std::size_t> positions{0};
  auto extend = [&](auto&& self, std::size_t at) -> void {
    if (positions.size() == count) {
      if (G - at <= cap && positions != even)
        out.push_back(positions);
      return;
    }
    const std::size_t left = count - positions.size();
    for (std::size_t g = 1; g <= cap; ++g) {
      const std::size_t next = at + g;
      // Remaining slots must still fit, and the closing gap must not exceed cap.
      if (next + left > G || G - next > left * cap)
        continue;
      positions.push_back(next);
      self(self, next);
      positions.pop_back();
    }
  };
  extend(extend, 0);
  return out;
}

}  // namespace detail

/// Number of distinct schedules for a plan: G! / prod(g_i!), saturating.
inline std::uint64_t multinomial_count(const SlotPlan& plan) {
  std::uint64_t total = 1;
  std::size_t placed = 0;
  for (std::size_t g : plan.slot_counts) {
    placed += g;
    total = detail::saturating_mul(total, detail::binomial(placed, g));
  }
  return total;
}

/// Visits every feasible schedule of `plan` in lexicographic owner order and
/// returns how many were visited. Throws BudgetExceeded before visiting
/// anything when the multinomial count exceeds the budget.
template <typename Visitor>
std::uint64_t enumerate_schedules(const SlotPlan& plan, Visitor&& visit,
                                  const EnumerationOptions& options = {}) {
  const std::uint64_t total = multinomial_count(plan);
  if (total > options.budget)
    throw BudgetExceeded(total, options.budget);

  std::vector<std::size_t> owners;
  owners.reserve(plan.total_slots);
  for (std::size_t i = 0; i < plan.vsta_count(); ++i)
    owners.insert(owners.end(), plan.slot_counts[i], i);

  std::uint64_t visited = 0;
  do {
    if (options.collapse_rotations && !detail::is_canonical_rotation(owners))
      continue;
    ++visited;
    visit(SlotSchedule::from_plan(plan, owners));
  } while (std::next_permutation(owners.begin(), owners.end()));
  return visited;
}

/// Delay-agnostic objective: sum over VSTAs of 1 / max disconnection (1/ms).
/// Infinite when some VSTA is never disconnected.
inline double eq2_objective(const SlotSchedule& schedule) {
  double total = 0.0;
  for (std::size_t i = 0; i < schedule.vsta_count(); ++i) {
    const Millis worst = max_disconnection(schedule, i);
    if (worst <= 0.0)
      return std::numeric_limits<double>::infinity();
    total += 1.0 / worst;
  }
  return total;
}

/// Throughput lost to disconnection under the worst-case RTT model, summed
/// over VSTAs (bits per second). Lower is better.
inline double eq1_penalty(const SlotSchedule& schedule, std::span<const PathParams> paths) {
  if (paths.size() != schedule.vsta_count())
    throw ValidationError("eq1 needs one path per VSTA");
  double total = 0.0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    p.validate();
    const Millis base = std::max(p.delay, p.rtt_floor);
    const Millis worst = std::max(worst_case_rtt(schedule, i, p.delay), p.rtt_floor);
    total += mathis_throughput(p.mss, base, p.loss_p) - mathis_throughput(p.mss, worst, p.loss_p);
  }
  return total;
}

/// Min-max disconnection heuristic.
///
/// The VSTA with the most slots is placed first with the smallest possible
/// largest index gap. Several placements can reach that gap (9 positions,
/// 6 slots: gaps {2,1,2,1,2,1} or {1,1,2,1,2,2}, ...); each is completed by
/// the remaining steps and the one whose per-VSTA max disconnections (ms, in
/// service order) are lexicographically smallest wins.
inline AllocationResult minmax_allocate(const SlotPlan& plan, const MinMaxOptions& options = {}) {
  const std::size_t N = plan.vsta_count();
  const std::size_t G = plan.total_slots;
  if (N == 0 || G == 0)
    throw ValidationError("empty plan");

  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return plan.slot_counts[a] > plan.slot_counts[b];
  });

  if (N == 1) {
    auto s = SlotSchedule::from_plan(plan, std::vector<std::size_t>(G, 0));
    const double obj = eq2_objective(s);
    return detail::make_result(std::move(s), obj, 1);
  }

  const auto placements =
      detail::first_vsta_placements(G, plan.slot_counts[order.front()], options.combination_budget);
  std::uint64_t evaluations = placements.size();

  std::optional<SlotSchedule> best;
  std::vector<Millis> best_score;
  for (const auto& first : placements) {
    std::vector<std::size_t> owners(G, N);
    for (std::size_t p : first)
      owners[p] = order.front();

    for (std::size_t step = 1; step < N; ++step) {
      const std::size_t vsta = order[step];
      std::vector<std::size_t> free;
      for (std::size_t j = 0; j < G; ++j) {
        if (owners[j] == N)
          free.push_back(j);
      }
      if (step + 1 == N) {
        ++evaluations;
        for (std::size_t p : free)
          owners[p] = vsta;
        break;
      }
      for (std::size_t p : detail::pick_min_max_gap(free, plan.slot_counts[vsta], G,
                                                     options.combination_budget, evaluations))
        owners[p] = vsta;
    }

    auto schedule = SlotSchedule::from_plan(plan, std::move(owners));
    std::vector<Millis> score;
    score.reserve(N);
    for (std::size_t v : order)
      score.push_back(max_disconnection(schedule, v));

    const bool better =
        !best || std::lexicographical_compare(score.begin(), score.end(), best_score.begin(),
                                              best_score.end(), [](Millis a, Millis b) {
                                                return a < b - kTimeTolerance;
                                              });
    if (better) {
      best = std::move(schedule);
      best_score = std::move(score);
    }
  }

  const double obj = eq2_objective(*best);
  return detail::make_result(std::move(*best), obj, evaluations);
}

enum class BlindObjective { eq1, eq2 };

/// Exhaustive search. eq2 maximizes eq2_objective; eq1 minimizes
/// eq1_penalty and needs one PathParams per VSTA. Ties keep the
/// lexicographically smallest owner vector.
inline AllocationResult blind_allocate(const SlotPlan& plan, BlindObjective objective,
                                       std::span<const PathParams> paths = {},
                                       const EnumerationOptions& options = {}) {
  if (objective == BlindObjective::eq1 && paths.size() != plan.vsta_count())
    throw ValidationError("eq1 objective needs one path per VSTA");

  std::optional<SlotSchedule> best;
  double best_value = 0.0;
  const std::uint64_t visited = enumerate_schedules(
      plan,
      [&](const SlotSchedule& s) {
        // Score as "higher is better" for both objectives.
        const double value =
            objective == BlindObjective::eq2 ? eq2_objective(s) : -eq1_penalty(s, paths);
        if (!best || detail::clearly_greater(value, best_value)) {
          best = s;
          best_value = value;
        }
      },
      options);

  const double reported = objective == BlindObjective::eq2 ? best_value : -best_value;
  return detail::make_result(std::move(*best), reported, visited);
}

/// Exhaustive search for the schedule with the highest Monte-Carlo
/// aggregate throughput (bits per second).
inline AllocationResult upper_bound_allocate(const SlotPlan& plan, std::span<const PathParams> paths,
                                             const RttSamplerConfig& cfg,
                                             const EnumerationOptions& options = {}) {
  if (paths.size() != plan.vsta_count())
    throw ValidationError("upper bound needs one path per VSTA");
  RttCache cache(cfg);
  std::optional<SlotSchedule> best;
  double best_value = 0.0;
  const std::uint64_t visited = enumerate_schedules(
      plan,
      [&](const SlotSchedule& s) {
        const double value = evaluate_throughput(s, paths, cfg, &cache).aggregate_bps;
        if (!best || detail::clearly_greater(value, best_value)) {
          best = s;
          best_value = value;
        }
      },
      options);
  return detail::make_result(std::move(*best), best_value, visited);
}

}  // namespace mtdma
