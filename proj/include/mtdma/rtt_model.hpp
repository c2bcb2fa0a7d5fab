#pragma once

// TCP round-trip time under a periodic multi-AP schedule, and the mapping
// from RTT to throughput.
//
// A TCP ACK travelling back towards a VSTA reaches its AP after the wired
// delay d. If the station is tuned to that AP the ACK is delivered at once;
// otherwise the AP buffers it until the VSTA's next slot begins. In steady
// state new data is only sent while connected (right after an ACK), so the
// observed RTT of a segment sent at t is delivery(t + d) - t.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include "mtdma/error.hpp"
#include "mtdma/schedule.hpp"

namespace mtdma {

/// Mathis validity bound on the congestion-signal rate.
inline constexpr double kMaxLossRate = 0.02;

struct PathParams {
  Millis delay = 0.0;          // end-to-end wired delay d_i
  double loss_p = 0.0032;      // congestion signals per acknowledged packet
  double mss = 1460.0;         // bytes
  Millis rtt_floor = 1.0;      // lower clamp on RTT before the Mathis mapping

  void validate() const {
    if (!std::isfinite(delay) || delay < 0.0)
      throw ValidationError("path delay must be >= 0");
    if (!(loss_p > 0.0 && loss_p < kMaxLossRate))
      throw ModelValidityError("loss rate must lie in (0, 0.02)");
    if (!std::isfinite(mss) || mss <= 0.0)
      throw ValidationError("mss must be positive");
    if (!std::isfinite(rtt_floor) || rtt_floor <= 0.0)
      throw ValidationError("rtt floor must be positive");
  }
};

struct RttSamplerConfig {
  std::size_t samples = 10000;
  /// Mean of the exponential send offset, as a fraction of the VSTA's
  /// connected time per period.
  double mean_fraction = 0.25;
  std::uint64_t seed = 1;

  void validate() const {
    if (samples < 1)
      throw ValidationError("sample count must be >= 1");
    if (!(mean_fraction > 0.0 && mean_fraction <= 1.0))
      throw ValidationError("mean fraction must lie in (0, 1]");
  }

  friend auto operator<=>(const RttSamplerConfig&, const RttSamplerConfig&) = default;
};

struct RttStats {
  Millis mean = 0.0;
  Millis min = 0.0;
  Millis max = 0.0;
  std::size_t count = 0;

  friend bool operator==(const RttStats&, const RttStats&) = default;
};

/// Half-open wall-clock interval [begin, end) within one period.
struct Interval {
  Millis begin = 0.0;
  Millis end = 0.0;

  Millis length() const noexcept { return end - begin; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, disjoint intervals during which `vsta` is tuned to its AP.
/// Adjacent owned slots merge into one interval.
inline std::vector<Interval> connected_intervals(const SlotSchedule& schedule, std::size_t vsta) {
  schedule.checked(vsta);
  const auto owners = schedule.owners();
  const auto starts = schedule.start_times();

  std::vector<Interval> out;
  for (std::size_t j = 0; j < owners.size(); ++j) {
    if (owners[j] != vsta)
      continue;
    const Millis end = j + 1 < owners.size() ? starts[j + 1] : schedule.period();
    if (!out.empty() && std::abs(out.back().end - starts[j]) <= kTimeTolerance)
      out.back().end = end;
    else
      out.push_back({starts[j], end});
  }
  return out;
}

namespace detail {

/// Periodic connectivity of one VSTA: its intervals repeated every period.
class Connectivity {
public:
  Connectivity(std::vector<Interval> intervals, Millis period)
      : intervals_(std::move(intervals)), period_(period) {
    cumulative_.reserve(intervals_.size() + 1);
    cumulative_.push_back(0.0);
    for (const auto& iv : intervals_)
      cumulative_.push_back(cumulative_.back() + iv.length());
  }

  /// Same pattern shifted so that the first interval begins at 0.
  Connectivity rebased() const {
    std::vector<Interval> shifted = intervals_;
    const Millis origin = intervals_.front().begin;
    for (auto& iv : shifted) {
      iv.begin -= origin;
      iv.end -= origin;
    }
    return Connectivity(std::move(shifted), period_);
  }

  Millis period() const noexcept { return period_; }
  Millis connected_time() const noexcept { return cumulative_.back(); }
  std::span<const Interval> intervals() const noexcept { return intervals_; }

  bool is_connected(Millis t) const { return wait_from(phase_of(t)) == 0.0; }

  /// Delivery delay for a packet reaching the AP at absolute time `t`.
  Millis wait_at(Millis t) const { return wait_from(phase_of(t)); }

  /// Maps an offset in concatenated connected time, [0, connected_time()),
  /// to a wall-clock instant within the period.
  Millis wall_clock(Millis offset) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), offset);
    std::size_t k = static_cast<std::size_t>(it - cumulative_.begin());
    k = std::clamp<std::size_t>(k, 1, intervals_.size()) - 1;
    return intervals_[k].begin + (offset - cumulative_[k]);
  }

  Millis rtt(Millis send_t, Millis delay) const { return delay + wait_at(send_t + delay); }

private:
  Millis phase_of(Millis t) const {
    Millis phase = std::fmod(t, period_);
    if (phase < 0.0)
      phase += period_;
    if (period_ - phase <= kTimeTolerance)
      phase = 0.0;
    return phase;
  }

  Millis wait_from(Millis phase) const {
    // First interval that has not ended yet.
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), phase,
                               [](Millis p, const Interval& iv) { return p < iv.end; });
    if (it == intervals_.end())
      return intervals_.front().begin + period_ - phase;
    if (it->begin <= phase + kTimeTolerance)
      return 0.0;
    return it->begin - phase;
  }

  std::vector<Interval> intervals_;
  std::vector<Millis> cumulative_;
  Millis period_;
};

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::vector<Millis> draw_rtts(const Connectivity& link, Millis delay,
                                     const RttSamplerConfig& cfg) {
  const Millis connected = link.connected_time();
  const Millis mean = cfg.mean_fraction * connected;
  std::mt19937_64 rng(cfg.seed);
  std::vector<Millis> out;
  out.reserve(cfg.samples);
  for (std::size_t n = 0; n < cfg.samples; ++n) {
    // Offsets past the connected time roll over to the next period.
    Millis offset = std::fmod(-mean * std::log1p(-unit_uniform(rng)), connected);
    const Millis send_t = link.wall_clock(offset);
    out.push_back(link.rtt(send_t, delay));
  }
  return out;
}

inline Connectivity connectivity_of(const SlotSchedule& schedule, std::size_t vsta) {
  return Connectivity(connected_intervals(schedule, vsta), schedule.period());
}

}  // namespace detail

inline RttStats summarize(std::span<const Millis> rtts) {
  if (rtts.empty())
    throw ValidationError("no RTT samples");
  RttStats s;
  s.count = rtts.size();
  s.min = *std::min_element(rtts.begin(), rtts.end());
  s.max = *std::max_element(rtts.begin(), rtts.end());
  double sum = 0.0;
  for (Millis r : rtts)
    sum += r;
  s.mean = std::clamp(sum / static_cast<double>(s.count), s.min, s.max);
  return s;
}

/// RTT of a segment sent at `send_t` (wall clock, any period) by `vsta`.
/// The send must happen while the VSTA is connected.
inline Millis rtt_for_send_time(const SlotSchedule& schedule, std::size_t vsta, Millis send_t,
                                Millis delay) {
  if (!std::isfinite(delay) || delay < 0.0)
    throw ValidationError("delay must be >= 0");
  const auto link = detail::connectivity_of(schedule, vsta);
  if (!link.is_connected(send_t))
    throw ValidationError("send time lies outside the VSTA's connected intervals");
  return link.rtt(send_t, delay);
}

/// Raw Monte-Carlo RTT samples; sample_rtts() summarizes them.
inline std::vector<Millis> draw_rtt_samples(const SlotSchedule& schedule, std::size_t vsta,
                                            const PathParams& path,
                                            const RttSamplerConfig& cfg) {
  path.validate();
  cfg.validate();
  return detail::draw_rtts(detail::connectivity_of(schedule, vsta).rebased(), path.delay, cfg);
}

inline RttStats sample_rtts(const SlotSchedule& schedule, std::size_t vsta,
                            const PathParams& path, const RttSamplerConfig& cfg) {
  return summarize(draw_rtt_samples(schedule, vsta, path, cfg));
}

/// Mathis steady-state TCP throughput MSS / (RTT sqrt(p)), in bits per second.
inline double mathis_throughput(double mss_bytes, Millis rtt, double loss_p) {
  if (!(loss_p > 0.0 && loss_p < kMaxLossRate))
    throw ModelValidityError("Mathis model needs 0 < p < 0.02");
  if (!(rtt > 0.0) || !std::isfinite(rtt))
    throw ModelValidityError("Mathis model needs a positive RTT");
  if (!(mss_bytes > 0.0))
    throw ValidationError("mss must be positive");
  return (mss_bytes * 8.0) / ((rtt / 1000.0) * std::sqrt(loss_p));
}

/// Worst-case RTT: the wired delay plus the longest disconnection.
inline Millis worst_case_rtt(const SlotSchedule& schedule, std::size_t vsta, Millis delay) {
  return delay + max_disconnection(schedule, vsta);
}

/// Memoizes RTT statistics by connectivity pattern. The pattern is taken
/// relative to its first interval, so rotated schedules share entries.
class RttCache {
public:
  explicit RttCache(RttSamplerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const RttSamplerConfig& config() const noexcept { return cfg_; }
  std::size_t size() const noexcept { return entries_.size(); }

  RttStats stats(const SlotSchedule& schedule, std::size_t vsta, Millis delay) {
    const auto link = detail::connectivity_of(schedule, vsta).rebased();
    Key key{quantize(delay), quantize(link.period()), {}};
    for (const auto& iv : link.intervals()) {
      key.bounds.push_back(quantize(iv.begin));
      key.bounds.push_back(quantize(iv.end));
    }
    auto it = entries_.find(key);
    if (it != entries_.end())
      return it->second;
    const auto rtts = detail::draw_rtts(link, delay, cfg_);
    return entries_.emplace(std::move(key), summarize(rtts)).first->second;
  }

private:
  struct Key {
    std::int64_t delay;
    std::int64_t period;
    std::vector<std::int64_t> bounds;
    friend auto operator<=>(const Key&, const Key&) = default;
  };

  // Picosecond grid; far below any meaningful slot boundary difference.
  static std::int64_t quantize(Millis t) { return std::llround(t * 1e9); }

  RttSamplerConfig cfg_;
  std::map<Key, RttStats> entries_;
};

struct VstaThroughput {
  RttStats rtt;
  double throughput_bps = 0.0;
};

struct ScheduleThroughput {
  std::vector<VstaThroughput> per_vsta;
  double aggregate_bps = 0.0;
};

/// Mean model RTT and Mathis throughput for every VSTA of `schedule`.
/// Every VSTA draws from the same seeded stream, so VSTAs with identical
/// connectivity and paths see identical samples.
inline ScheduleThroughput evaluate_throughput(const SlotSchedule& schedule,
                                              std::span<const PathParams> paths,
                                              const RttSamplerConfig& cfg,
                                              RttCache* cache = nullptr) {
  if (paths.size() != schedule.vsta_count())
    throw ValidationError("need one path per VSTA");
  cfg.validate();
  if (cache != nullptr && cache->config() != cfg)
    throw ValidationError("RTT cache was built for a different sampler configuration");

  ScheduleThroughput out;
  out.per_vsta.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    paths[i].validate();
    VstaThroughput v;
    v.rtt = cache != nullptr ? cache->stats(schedule, i, paths[i].delay)
                             : sample_rtts(schedule, i, paths[i], cfg);
    v.throughput_bps = mathis_throughput(paths[i].mss, std::max(v.rtt.mean, paths[i].rtt_floor),
                                         paths[i].loss_p);
    out.aggregate_bps += v.throughput_bps;
    out.per_vsta.push_back(v);
  }
  return out;
}

inline double aggregate_throughput(const SlotSchedule& schedule, std::span<const PathParams> paths,
                                   const RttSamplerConfig& cfg) {
  return evaluate_throughput(schedule, paths, cfg).aggregate_bps;
}

}  // namespace mtdma
