#pragma once

// Test-only reference computations. None of these call into the code paths
// they are used to check: costs come from wall-clock start times, RTTs from
// an unrolled multi-period timeline, counts and optima from plain N^G
// enumeration.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

struct Timeline {
  std::vector<std::size_t> owners;
  std::vector<double> durations;

  std::vector<double> starts() const {
    std::vector<double> s(owners.size());
    double t = 0.0;
    for (std::size_t j = 0; j < owners.size(); ++j) {
      s[j] = t;
      t += durations[j];
    }
    return s;
  }
  double period() const {
    double t = 0.0;
    for (double d : durations)
      t += d;
    return t;
  }
};

/// Idle time between the end of each owned slot and the start of the next
/// owned slot, read off wall-clock boundaries.
inline std::vector<double> gap_costs(const Timeline& tl, std::size_t vsta) {
  const auto s = tl.starts();
  const double T = tl.period();
  std::vector<std::size_t> own;
  for (std::size_t j = 0; j < tl.owners.size(); ++j)
    if (tl.owners[j] == vsta)
      own.push_back(j);
  std::vector<double> out;
  for (std::size_t l = 0; l < own.size(); ++l) {
    const double end = s[own[l]] + tl.durations[own[l]];
    double next = s[own[(l + 1) % own.size()]];
    if (l + 1 == own.size())
      next += T;
    out.push_back(next - end);
  }
  return out;
}

/// Earliest connected instant >= t, found by scanning owned slots laid out
/// over enough consecutive periods.
inline double delivery_time(const Timeline& tl, std::size_t vsta, double t) {
  const auto s = tl.starts();
  const double T = tl.period();
  const long first = static_cast<long>(std::floor(t / T)) - 1;
  for (long k = first; k < first + 4; ++k) {
    for (std::size_t j = 0; j < tl.owners.size(); ++j) {
      if (tl.owners[j] != vsta)
        continue;
      const double a = s[j] + k * T;
      const double b = a + tl.durations[j];
      if (t >= a - 1e-9 && t < b)
        return t;
      if (a >= t)
        return a;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline double rtt(const Timeline& tl, std::size_t vsta, double send_t, double d) {
  return delivery_time(tl, vsta, send_t + d) - send_t;
}

/// Calls `visit` for every length-G owner vector with the given counts,
/// by filtering all N^G assignments.
inline void for_each_assignment(const std::vector<std::size_t>& counts,
                                const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::size_t G = 0;
  for (auto c : counts)
    G += c;
  const std::size_t N = counts.size();
  std::vector<std::size_t> o(G, 0);
  while (true) {
    std::vector<std::size_t> seen(N, 0);
    for (auto x : o)
      ++seen[x];
    if (seen == counts)
      visit(o);
    std::size_t k = 0;
    while (k < G && ++o[k] == N) {
      o[k] = 0;
      ++k;
    }
    if (k == G)
      break;
  }
}

inline double eq2(const Timeline& tl, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double worst = 0.0;
    for (double c : gap_costs(tl, i))
      worst = std::max(worst, c);
    total += 1.0 / worst;
  }
  return total;
}

/// Simpson's rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int k = 1; k < n; ++k)
    acc += f(a + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace oracle
