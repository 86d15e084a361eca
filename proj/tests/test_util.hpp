#pragma once

#include <cstdint>
#include <vector>

#include "peakgrid/follower.hpp"
#include "peakgrid/mip.hpp"
#include "peakgrid/model.hpp"

namespace testutil {

inline uint64_t mix(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
inline double u01(uint64_t h) { return double(h >> 11) * 0x1.0p-53; }

struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  double next() { return u01(state = mix(state)); }
  int next_int(int n) {  // 0..n-1
    const int v = static_cast<int>(next() * n);
    return v >= n ? n - 1 : v;
  }
};

// Random instance with at most `max_jobs` jobs on a short horizon; always
// valid, windows at least two slots wide.
inline peakgrid::Instance tiny_instance(Rng& rng, int horizon, int max_jobs,
                                        double kappa, bool with_competitor) {
  peakgrid::Instance inst;
  inst.horizon = horizon;
  inst.price_cap.assign(horizon, 10.0);
  inst.kappa = kappa;
  if (with_competitor)
    inst.competitor_prices = std::vector<double>(horizon, 10.0);
  const int jobs = 1 + rng.next_int(max_jobs);
  peakgrid::Customer cust;
  cust.id = "c0";
  cust.lambda = 2.0 * rng.next();
  for (int j = 0; j < jobs; ++j) {
    const int b = rng.next_int(horizon - 1);
    const int e = b + 1 + rng.next_int(horizon - 1 - b);
    const double beta = 0.5 + 2.5 * rng.next();
    const double demand = beta * (0.25 + (e - b + 0.7) * rng.next());
    cust.jobs.push_back(
        peakgrid::Job{"a" + std::to_string(j), demand, beta, b, e});
  }
  inst.customers.push_back(cust);
  return inst;
}

// Exhaustive price-grid oracle: every coordinate runs over
// {0, pmax/steps, ..., pmax}; follower responses come from the exact greedy
// oracle; returns the best leader value seen.
inline double grid_best(const peakgrid::Instance& inst, bool competitive,
                        int steps = 20) {
  const int horizon = inst.horizon;
  std::vector<int> digit(horizon, 0);
  double best = -1e300;
  while (true) {
    peakgrid::PriceVector prices;
    prices.p.resize(horizon);
    for (int h = 0; h < horizon; ++h)
      prices.p[h] = inst.price_cap[h] * digit[h] / steps;
    const peakgrid::FollowerSolution sol =
        competitive ? peakgrid::best_response_cp(inst, prices)
                    : peakgrid::best_response_mp(inst, prices);
    best = std::max(best,
                    peakgrid::leader_value(inst, prices, sol.schedule));
    int pos = 0;
    while (pos < horizon && ++digit[pos] > steps) {
      digit[pos] = 0;
      ++pos;
    }
    if (pos == horizon) break;
  }
  return best;
}

// Analytic upper bound on the leader's optimum: full-cap revenue minus the
// smallest possible peak penalty (total energy spread over the union of all
// windows; zero when a competitor can absorb the load).
inline double leader_value_cap(const peakgrid::Instance& inst,
                               bool competitive) {
  double energy = 0.0;
  double cap = 0.0;
  std::vector<char> in_union(inst.horizon, 0);
  for (const auto& ref : peakgrid::flatten(inst)) {
    energy += ref.job->demand;
    for (int h = ref.job->tw_begin; h <= ref.job->tw_end; ++h) in_union[h] = 1;
    double cap_h = 0.0;
    for (int h = ref.job->tw_begin; h <= ref.job->tw_end; ++h)
      cap_h = std::max(cap_h, inst.price_cap[h]);
    cap += cap_h * ref.job->demand;
  }
  int union_size = 0;
  for (char c : in_union) union_size += c;
  double min_peak = 0.0;
  if (!competitive && union_size > 0) min_peak = energy / union_size;
  return cap - inst.kappa * min_peak;
}

}  // namespace testutil
