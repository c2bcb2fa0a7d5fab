#pragma once

// Slot-plan arithmetic and the periodic slot schedule.
//
// A station time-shares one radio between N virtual stations (VSTAs), each
// bound to a different AP. The upper-layer scheduler hands us duty cycles
// f_i; from them we derive a wireless period T, a slot count g_i and a slot
// size per VSTA, and the G = sum(g_i) slot positions are then assigned to
// VSTAs by one of the allocation strategies.
//
// Positions and VSTA indices are 0-based everywhere in this library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mtdma/error.hpp"

namespace mtdma {

using Millis = double;

/// Comparison tolerance for times in milliseconds.
inline constexpr double kTimeTolerance = 1e-9;

/// Sum tolerance for duty cycles; inputs within kDutyNormalizeTolerance of 1
/// are rescaled to sum to exactly 1.
inline constexpr double kDutySumTolerance = 1e-9;
inline constexpr double kDutyNormalizeTolerance = 1e-6;

/// Fractions of the wireless period granted to each VSTA.
class DutyCycleSet {
public:
  explicit DutyCycleSet(std::vector<double> fractions) : f_(std::move(fractions)) {
    if (f_.empty())
      throw ValidationError("duty cycle set is empty");
    for (std::size_t i = 0; i < f_.size(); ++i) {
      if (!std::isfinite(f_[i]) || f_[i] <= 0.0)
        throw ValidationError("duty cycle " + std::to_string(i) + " must be positive");
    }
    const double sum = std::accumulate(f_.begin(), f_.end(), 0.0);
    if (std::abs(sum - 1.0) > kDutyNormalizeTolerance)
      throw ValidationError("duty cycles sum to " + std::to_string(sum) + ", expected 1");
    if (std::abs(sum - 1.0) > 0.0) {
      for (auto& f : f_)
        f /= sum;
    }
  }

  std::size_t size() const noexcept { return f_.size(); }
  double operator[](std::size_t i) const { return f_.at(i); }
  std::span<const double> fractions() const noexcept { return f_; }
  double min() const { return *std::min_element(f_.begin(), f_.end()); }

private:
  std::vector<double> f_;
};

/// Derived timing for a duty-cycle set: the period T, the global minimum
/// slot time, and per-VSTA slot counts and sizes.
struct SlotPlan {
  Millis period = 0.0;
  Millis slot_time = 0.0;
  std::vector<std::size_t> slot_counts;
  std::vector<Millis> slot_sizes;
  std::size_t total_slots = 0;

  std::size_t vsta_count() const noexcept { return slot_counts.size(); }
};

/// T = SlotTime / min f, g_i = floor(f_i T / SlotTime), SlotTime_i = f_i T / g_i.
inline SlotPlan derive_slot_plan(const DutyCycleSet& duty, Millis slot_time) {
  if (!std::isfinite(slot_time) || slot_time <= 0.0)
    throw ValidationError("slot time must be positive");

  SlotPlan plan;
  plan.slot_time = slot_time;
  plan.period = slot_time / duty.min();
  plan.slot_counts.reserve(duty.size());
  plan.slot_sizes.reserve(duty.size());
  for (std::size_t i = 0; i < duty.size(); ++i) {
    const double share = duty[i] * plan.period;
    // Ratios such as 0.3/0.1 land a hair below the integer.
    const auto g = static_cast<std::size_t>(std::floor(share / slot_time + 1e-9));
    if (g < 1)
      throw ValidationError("VSTA " + std::to_string(i) + " received no slot");
    plan.slot_counts.push_back(g);
    plan.slot_sizes.push_back(share / static_cast<double>(g));
  }
  plan.total_slots =
      std::accumulate(plan.slot_counts.begin(), plan.slot_counts.end(), std::size_t{0});
  return plan;
}

/// An assignment of every slot position in one period to a VSTA.
///
/// Slot j lasts slot_size(owner(j)). Start times are rebuilt from per-VSTA
/// slot counts rather than by adding rounded durations one after another,
/// so boundaries like 65/6 ms do not drift.
class SlotSchedule {
public:
  SlotSchedule(std::vector<std::size_t> owners, std::vector<Millis> slot_sizes)
      : owners_(std::move(owners)), sizes_(std::move(slot_sizes)) {
    if (owners_.empty())
      throw ValidationError("schedule has no slots");
    if (sizes_.empty())
      throw ValidationError("schedule has no VSTAs");
    for (Millis s : sizes_) {
      if (!std::isfinite(s) || s <= 0.0)
        throw ValidationError("slot sizes must be positive");
    }

    counts_.assign(sizes_.size(), 0);
    for (std::size_t o : owners_) {
      if (o >= sizes_.size())
        throw ValidationError("slot owner " + std::to_string(o) + " is not a VSTA");
      ++counts_[o];
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] == 0)
        throw ValidationError("VSTA " + std::to_string(i) + " owns no slot");
    }

    durations_.reserve(owners_.size());
    starts_.reserve(owners_.size());
    std::vector<std::size_t> seen(sizes_.size(), 0);
    for (std::size_t o : owners_) {
      starts_.push_back(elapsed(seen));
      durations_.push_back(sizes_[o]);
      ++seen[o];
    }
    period_ = elapsed(counts_);
  }

  /// Builds a schedule for `plan`, checking that each VSTA owns exactly g_i slots.
  static SlotSchedule from_plan(const SlotPlan& plan, std::vector<std::size_t> owners) {
    if (owners.size() != plan.total_slots)
      throw ValidationError("schedule length " + std::to_string(owners.size()) +
                            " does not match plan G=" + std::to_string(plan.total_slots));
    SlotSchedule s(std::move(owners), plan.slot_sizes);
    if (s.counts_ != plan.slot_counts)
      throw ValidationError("schedule slot counts do not match the plan");
    return s;
  }

  std::size_t size() const noexcept { return owners_.size(); }
  std::size_t vsta_count() const noexcept { return sizes_.size(); }
  Millis period() const noexcept { return period_; }

  std::span<const std::size_t> owners() const noexcept { return owners_; }
  std::span<const Millis> durations() const noexcept { return durations_; }
  std::span<const Millis> start_times() const noexcept { return starts_; }
  std::span<const Millis> slot_sizes() const noexcept { return sizes_; }

  std::size_t owner(std::size_t position) const { return owners_.at(position); }
  std::size_t slots_owned(std::size_t vsta) const { return counts_.at(checked(vsta)); }
  Millis slot_size(std::size_t vsta) const { return sizes_.at(checked(vsta)); }

  /// Ascending positions owned by `vsta`.
  std::vector<std::size_t> positions(std::size_t vsta) const {
    checked(vsta);
    std::vector<std::size_t> out;
    out.reserve(counts_[vsta]);
    for (std::size_t j = 0; j < owners_.size(); ++j) {
      if (owners_[j] == vsta)
        out.push_back(j);
    }
    return out;
  }

  /// Circular shift: position j of the result holds the owner of position
  /// (j + k) mod G of this schedule.
  SlotSchedule rotated(std::size_t k) const {
    std::vector<std::size_t> o(owners_.size());
    for (std::size_t j = 0; j < o.size(); ++j)
      o[j] = owners_[(j + k) % owners_.size()];
    return SlotSchedule(std::move(o), sizes_);
  }

  std::size_t checked(std::size_t vsta) const {
    if (vsta >= sizes_.size())
      throw ValidationError("unknown VSTA index " + std::to_string(vsta));
    return vsta;
  }

  friend bool operator==(const SlotSchedule& a, const SlotSchedule& b) {
    return a.owners_ == b.owners_ && a.sizes_ == b.sizes_;
  }

private:
  Millis elapsed(const std::vector<std::size_t>& counts) const {
    Millis t = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i)
      t += static_cast<double>(counts[i]) * sizes_[i];
    return t;
  }

  std::vector<std::size_t> owners_;
  std::vector<Millis> sizes_;
  std::vector<std::size_t> counts_;
  std::vector<Millis> durations_;
  std::vector<Millis> starts_;
  Millis period_ = 0.0;
};

/// "No policy": each VSTA's slots back to back, in VSTA index order.
inline SlotSchedule build_contiguous_schedule(const SlotPlan& plan) {
  std::vector<std::size_t> owners;
  owners.reserve(plan.total_slots);
  for (std::size_t i = 0; i < plan.vsta_count(); ++i)
    owners.insert(owners.end(), plan.slot_counts[i], i);
  return SlotSchedule::from_plan(plan, std::move(owners));
}

/// Disconnection cost c_{i,l}: summed duration of the slots strictly between
/// the l-th and (l+1)-th owned positions of `vsta`, wrapping from the last
/// owned position back to the first.
inline std::vector<Millis> disconnection_costs(const SlotSchedule& schedule, std::size_t vsta) {
  const auto owned = schedule.positions(vsta);
  const auto durations = schedule.durations();
  const std::size_t G = schedule.size();

  std::vector<Millis> costs;
  costs.reserve(owned.size());
  for (std::size_t l = 0; l < owned.size(); ++l) {
    const std::size_t next = owned[(l + 1) % owned.size()];
    Millis c = 0.0;
    for (std::size_t j = (owned[l] + 1) % G; j != next; j = (j + 1) % G)
      c += durations[j];
    costs.push_back(c);
  }
  return costs;
}

/// Longest disconnection of `vsta` within a period; 0 when it owns every slot.
inline Millis max_disconnection(const SlotSchedule& schedule, std::size_t vsta) {
  const auto costs = disconnection_costs(schedule, vsta);
  return *std::max_element(costs.begin(), costs.end());
}

}  // namespace mtdma
