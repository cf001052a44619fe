#pragma once

#include <numeric>

#include "apfree/aps.hpp"

namespace apfree {

// Extends `set` greedily in a seeded random insertion order, keeping it
// restricted-3-AP free; accept() filters candidate indices (pass nullptr for
// no filter). Stops at `target` members or when the order is exhausted.
template <typename Accept>
void greedy_extend_free(PointSet& set, Index target, std::uint64_t seed, Accept accept) {
  const int p = set.p(), n = set.n();
  const Index size = set.universe();
  std::vector<Index> order(size);
  std::iota(order.begin(), order.end(), Index(0));
  CounterRng rng(seed, 77);
  for (Index i = size - 1; i > 0; --i)
    std::swap(order[i], order[rng.next_below(std::uint64_t(i) + 1)]);

  const Index diffs = checked_pow(3, n);
  std::vector<int> xd(n), ad(n, 0);
  std::vector<Index> strides(n);
  for (int i = 0; i < n; ++i) strides[i] = checked_pow(p, i);
  for (Index cand : order) {
    if (set.size() >= target) break;
    if (set.contains(cand)) continue;
    decode_digits(cand, p, n, xd);
    if (!accept(xd)) continue;
    std::fill(ad.begin(), ad.end(), 0);
    bool ok = true;
    for (Index ai = 1; ai < diffs && ok; ++ai) {
      for (int i = 0; i < n; ++i) {
        if (++ad[i] < 3) break;
        ad[i] = 0;
      }
      // The candidate can sit at any of the three positions of x, x+a, x+2a.
      Index plus1 = 0, plus2 = 0, minus1 = 0, minus2 = 0;
      for (int i = 0; i < n; ++i) {
        plus1 += Index((xd[i] + ad[i]) % p) * strides[i];
        plus2 += Index((xd[i] + 2 * ad[i]) % p) * strides[i];
        minus1 += Index((xd[i] + p - ad[i]) % p) * strides[i];
        minus2 += Index((xd[i] + 2 * (p - ad[i])) % p) * strides[i];
      }
      if ((set.contains(plus1) && set.contains(plus2)) ||
          (set.contains(minus1) && set.contains(plus1)) ||
          (set.contains(minus2) && set.contains(minus1)))
        ok = false;
    }
    if (ok) set.insert(cand);
  }
}

inline PointSet greedy_free_set(int p, int n, Index target, std::uint64_t seed,
                                bool hyperplane = false) {
  PointSet set(p, n);
  greedy_extend_free(set, target, seed, [&](const std::vector<int>& xd) {
    return !hyperplane || std::accumulate(xd.begin(), xd.end(), 0) % p == 0;
  });
  return set;
}

}  // namespace apfree
