#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../tools/greedy.h"
#include "apfree/aps.hpp"

using namespace apfree;

namespace {

// Freeness oracle straight from the definition: enumerate every (x, a).
std::optional<FreeWitness> naive_find_ap(const PointSet& a_set) {
  const int p = a_set.p(), n = a_set.n();
  const Index diffs = checked_pow(3, n);
  std::vector<int> xd(n), ad(n);
  for (Index x = 0; x < a_set.universe(); ++x) {
    if (!a_set.contains(x)) continue;
    decode_digits(x, p, n, xd);
    for (Index ai = 1; ai < diffs; ++ai) {
      decode_digits(ai, 3, n, ad);
      std::vector<int> y1(n), y2(n);
      for (int i = 0; i < n; ++i) {
        y1[i] = (xd[i] + ad[i]) % p;
        y2[i] = (xd[i] + 2 * ad[i]) % p;
      }
      if (a_set.contains(encode_digits(y1, p)) && a_set.contains(encode_digits(y2, p)))
        return FreeWitness{xd, ad};
    }
  }
  return std::nullopt;
}

// Largest free subset by brute force over all subsets; universes <= 2^12.
int brute_force_extremal(int p, int n) {
  const Index size = checked_pow(p, n);
  REQUIRE(size <= 12);
  int best = 0;
  for (std::uint32_t mask = 0; mask < (1u << size); ++mask) {
    PointSet s(p, n);
    for (Index x = 0; x < size; ++x)
      if (mask >> x & 1) s.insert(x);
    if (int(s.size()) > best && is_restricted_ap_free(s)) best = int(s.size());
  }
  return best;
}

Cplx naive_triple(const DenseFunction& f, const DenseFunction& g, const DenseFunction& h) {
  const int p = f.p(), n = f.n();
  const Index diffs = checked_pow(3, n);
  std::vector<int> xd(n), ad(n);
  Cplx acc{0.0, 0.0};
  for (Index x = 0; x < f.size(); ++x) {
    decode_digits(x, p, n, xd);
    for (Index ai = 0; ai < diffs; ++ai) {
      decode_digits(ai, 3, n, ad);
      std::vector<int> y1(n), y2(n);
      for (int i = 0; i < n; ++i) {
        y1[i] = (xd[i] + ad[i]) % p;
        y2[i] = (xd[i] + 2 * ad[i]) % p;
      }
      acc += f.values()[x] * g.values()[encode_digits(y1, p)] * h.values()[encode_digits(y2, p)];
    }
  }
  return acc / (double(f.size()) * double(diffs));
}

}  // namespace

TEST_CASE("restricted_ap_distribution atoms cover exactly p * |diffs| triples") {
  const TripleDistribution mu = restricted_ap_distribution(5);
  CHECK(mu.atoms().size() == 15);
  double total = 0.0;
  for (const auto& atom : mu.atoms()) {
    total += atom.probability;
    const auto [x, y, z] = std::tuple{atom.point[0], atom.point[1], atom.point[2]};
    const int a = ((y - x) % 5 + 5) % 5;
    CHECK(a <= 2);
    CHECK(z == (x + 2 * a) % 5);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("find_restricted_ap agrees with the naive oracle on random sets") {
  CounterRng rng(23, 0);
  for (int t = 0; t < 60; ++t) {
    const int p = t % 2 == 0 ? 3 : 5;
    const int n = 1 + int(rng.next_below(3));
    PointSet a(p, n);
    for (Index x = 0; x < a.universe(); ++x)
      if (rng.next_bernoulli(0.35)) a.insert(x);
    const auto fast = find_restricted_ap(a);
    const auto slow = naive_find_ap(a);
    CHECK(fast.has_value() == slow.has_value());
    if (fast && slow) {
      // Both report the first hit in lexicographic (x, a) order.
      CHECK(fast->x == slow->x);
      CHECK(fast->a == slow->a);
    }
  }
}

TEST_CASE("witness points really form a restricted AP inside the set") {
  const PointSet a = [&] {
    PointSet s(5, 1);
    s.insert(0);
    s.insert(1);
    s.insert(2);
    return s;
  }();
  const auto w = find_restricted_ap(a);
  REQUIRE(w.has_value());
  CHECK(w->x == std::vector<int>{0});
  CHECK(w->a == std::vector<int>{1});
}

TEST_CASE("free-set identity Lambda = 3^{-n} mu(A)") {
  CounterRng rng(29, 0);
  for (int t = 0; t < 20; ++t) {
    const int p = t % 2 == 0 ? 3 : 5;
    const int n = 2 + int(rng.next_below(2));
    const PointSet a = greedy_free_set(p, n, checked_pow(p, n) / 4 + 1, 1000 + t);
    REQUIRE(is_restricted_ap_free(a));
    const DenseFunction f = a.to_function();
    const Cplx lam = triple_correlation(f, f, f, TripleCorrelationMethod::Direct);
    CHECK(std::abs(lam - Cplx(std::pow(3.0, -n) * f.mean_real(), 0.0)) < 1e-12);
  }
}

TEST_CASE("triple correlation: direct, Fourier, and naive oracle all agree") {
  CounterRng rng(31, 0);
  for (int t = 0; t < 10; ++t) {
    const int p = 3, n = 2;
    const Index size = checked_pow(p, n);
    Eigen::VectorXcd vf(size), vg(size), vh(size);
    for (Index i = 0; i < size; ++i) {
      vf[i] = std::polar(rng.next_double(), 6.28 * rng.next_double());
      vg[i] = std::polar(rng.next_double(), 6.28 * rng.next_double());
      vh[i] = std::polar(rng.next_double(), 6.28 * rng.next_double());
    }
    const DenseFunction f(p, n, Kind::Complex, vf), g(p, n, Kind::Complex, vg),
        h(p, n, Kind::Complex, vh);
    const Cplx direct = triple_correlation(f, g, h, TripleCorrelationMethod::Direct);
    const Cplx fourier = triple_correlation(f, g, h, TripleCorrelationMethod::Fourier);
    const Cplx oracle = naive_triple(f, g, h);
    CHECK(std::abs(direct - fourier) < 1e-10);
    CHECK(std::abs(direct - oracle) < 1e-10);
  }
}

TEST_CASE("all-ones set has Lambda = 1") {
  const DenseFunction one = DenseFunction::constant(5, 2, Cplx{1.0, 0.0}, Kind::Boolean);
  CHECK(std::abs(triple_correlation(one, one, one, TripleCorrelationMethod::Fourier) -
                 Cplx{1.0, 0.0}) < 1e-10);
}

TEST_CASE("pairwise connectivity holds for AP supports") {
  for (int p : {5, 7, 11, 13}) {
    const auto conn = pairwise_connected(restricted_ap_distribution(p));
    CHECK(conn[0]);
    CHECK(conn[1]);
    CHECK(conn[2]);
  }
}

TEST_CASE("extremal search matches subset brute force") {
  CHECK(brute_force_extremal(3, 1) == 2);
  CHECK(brute_force_extremal(5, 1) == 2);
  const ExtremalSearchResult e31 = extremal_search(3, 1, SearchMode::Exhaustive);
  CHECK(e31.size == 2);
  CHECK(e31.optimal);
  const ExtremalSearchResult e51 = extremal_search(5, 1, SearchMode::Exhaustive);
  CHECK(e51.size == 2);
  CHECK(e51.optimal);
  const ExtremalSearchResult e32 = extremal_search(3, 2, SearchMode::Exhaustive);
  CHECK(e32.size == 4);
  CHECK(e32.optimal);
  // The reported set itself is free and has the reported size.
  PointSet s(3, 2);
  for (Index x : e32.set) s.insert(x);
  CHECK(s.size() == 4);
  CHECK(is_restricted_ap_free(s));
}

TEST_CASE("branch and bound agrees with exhaustive where both run") {
  for (const auto& [p, n] : {std::pair{3, 2}, {5, 1}, {3, 1}}) {
    const ExtremalSearchResult ex = extremal_search(p, n, SearchMode::Exhaustive);
    const ExtremalSearchResult bb = extremal_search(p, n, SearchMode::BranchBound, 10'000'000);
    CHECK(bb.size == ex.size);
    if (bb.optimal) CHECK(bb.size == ex.size);
  }
}
