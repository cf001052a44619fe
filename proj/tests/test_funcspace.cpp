#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "apfree/funcspace.hpp"

using namespace apfree;

namespace {

Eigen::VectorXcd random_values(Index size, CounterRng& rng) {
  Eigen::VectorXcd v(size);
  for (Index i = 0; i < size; ++i) {
    const double r = std::sqrt(rng.next_double());
    const double t = 2.0 * std::acos(-1.0) * rng.next_double();
    v[i] = std::polar(r, t);
  }
  return v;
}

// Quadratic-time DFT straight from the definition, the oracle for the fast
// per-coordinate transform.
Eigen::VectorXcd naive_fourier(const DenseFunction& f) {
  const int p = f.p(), n = f.n();
  const Index size = f.size();
  Eigen::VectorXcd out(size);
  std::vector<int> ad(n), xd(n);
  for (Index a = 0; a < size; ++a) {
    decode_digits(a, p, n, ad);
    Cplx acc{0.0, 0.0};
    for (Index x = 0; x < size; ++x) {
      decode_digits(x, p, n, xd);
      int dot = 0;
      for (int i = 0; i < n; ++i) dot = (dot + ad[i] * xd[i]) % p;
      acc += f.values()[x] * std::conj(unit_root(dot, p));
    }
    out[a] = acc / double(size);
  }
  return out;
}

// f^{=S} from first principles: for the uniform measure, f^{=S}(x) =
// sum_{T subseteq S} (-1)^{|S|-|T|} E[f | x_T], with the conditional mean
// computed by direct enumeration.
DenseFunction naive_part(const DenseFunction& f, Subset s) {
  const int p = f.p(), n = f.n();
  const Index size = f.size();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(size);
  std::vector<int> xd(n), yd(n);
  for (Subset t = 0; t < (Subset(1) << n); ++t) {
    if (t & ~s) continue;  // only subsets of s
    const int sign = (subset_size(s) - subset_size(t)) % 2 == 0 ? 1 : -1;
    for (Index x = 0; x < size; ++x) {
      decode_digits(x, p, n, xd);
      Cplx acc{0.0, 0.0};
      Index count = 0;
      for (Index y = 0; y < size; ++y) {
        decode_digits(y, p, n, yd);
        bool match = true;
        for (int i = 0; i < n; ++i)
          if ((t >> i & 1) && yd[i] != xd[i]) match = false;
        if (!match) continue;
        acc += f.values()[y];
        ++count;
      }
      out[x] += double(sign) * acc / double(count);
    }
  }
  return DenseFunction(p, n, Kind::Complex, std::move(out));
}

}  // namespace

TEST_CASE("DenseFunction constructors and statistics") {
  const DenseFunction one = DenseFunction::constant(3, 2, Cplx{1.0, 0.0});
  CHECK(one.mean() == Cplx{1.0, 0.0});
  CHECK(one.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));

  const DenseFunction ind = DenseFunction::indicator(3, 2, {0, 4, 8});
  CHECK(ind.kind() == Kind::Boolean);
  CHECK(ind.mean_real() == doctest::Approx(3.0 / 9.0).epsilon(1e-12));

  const DenseFunction chi = DenseFunction::character(5, 2, {1, 3});
  CHECK(chi.sup_norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(chi.mean()) < kTolAccum);
  CHECK_NOTHROW(chi.assert_one_bounded());
}

TEST_CASE("fast Fourier transform matches the naive DFT") {
  CounterRng rng(1, 0);
  for (const auto& [p, n] : {std::pair{3, 3}, {5, 2}, {7, 2}}) {
    const DenseFunction f(p, n, Kind::Complex, random_values(checked_pow(p, n), rng));
    const Eigen::VectorXcd fast = fourier_transform(f);
    const Eigen::VectorXcd slow = naive_fourier(f);
    CHECK((fast - slow).cwiseAbs().maxCoeff() < kTolAccum);
    const DenseFunction back = inverse_fourier(fast, p, n);
    CHECK((back.values() - f.values()).cwiseAbs().maxCoeff() < kTolAccum);
  }
}

TEST_CASE("characters diagonalize the transform") {
  const std::vector<int> alpha{2, 0, 1};
  const DenseFunction chi = DenseFunction::character(3, 3, alpha);
  const Eigen::VectorXcd coeffs = fourier_transform(chi);
  for (Index a = 0; a < coeffs.size(); ++a) {
    const double expected = a == encode_digits(alpha, 3) ? 1.0 : 0.0;
    CHECK(std::abs(coeffs[a] - Cplx{expected, 0.0}) < kTolAccum);
  }
}

TEST_CASE("Efron-Stein parts match the conditional-mean oracle") {
  CounterRng rng(2, 0);
  const int p = 3, n = 3;
  const DenseFunction f(p, n, Kind::Complex, random_values(checked_pow(p, n), rng));
  for (Subset s = 0; s < (Subset(1) << n); ++s) {
    const DenseFunction lib = efron_stein_part(f, s).part;
    const DenseFunction oracle = naive_part(f, s);
    const DenseFunction grouped = efron_stein_part_fourier(f, s);
    CHECK((lib.values() - oracle.values()).cwiseAbs().maxCoeff() < kTolAccum);
    CHECK((grouped.values() - oracle.values()).cwiseAbs().maxCoeff() < kTolAccum);
  }
}

TEST_CASE("parts reconstruct f and are orthogonal") {
  CounterRng rng(3, 0);
  const int p = 5, n = 3;
  const Index size = checked_pow(p, n);
  const DenseFunction f(p, n, Kind::Complex, random_values(size, rng));
  Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(size);
  std::vector<DenseFunction> parts;
  for (Subset s = 0; s < (Subset(1) << n); ++s) {
    parts.push_back(efron_stein_part(f, s).part);
    sum += parts.back().values();
  }
  CHECK((sum - f.values()).cwiseAbs().maxCoeff() < kTolAccum);
  for (size_t i = 0; i < parts.size(); ++i)
    for (size_t j = i + 1; j < parts.size(); ++j)
      CHECK(std::abs(inner_product(parts[i], parts[j])) < kTolAccum);
}

TEST_CASE("level weights sum to the total mass and group by support size") {
  CounterRng rng(4, 0);
  const int p = 3, n = 4;
  const DenseFunction f(p, n, Kind::Complex, random_values(checked_pow(p, n), rng));
  const std::vector<double> levels = level_weights_all(f);
  REQUIRE(int(levels.size()) == n + 1);
  double total = 0.0;
  for (double w : levels) total += w;
  CHECK(total == doctest::Approx(f.norm_sq()).epsilon(1e-9));

  // Oracle per level: sum of |hat f(alpha)|^2 with |supp(alpha)| = d.
  const Eigen::VectorXcd coeffs = fourier_transform(f);
  std::vector<double> oracle(n + 1, 0.0);
  std::vector<int> ad(n);
  for (Index a = 0; a < coeffs.size(); ++a) {
    decode_digits(a, p, n, ad);
    int w = 0;
    for (int i = 0; i < n; ++i) w += ad[i] != 0;
    oracle[w] += std::norm(coeffs[a]);
  }
  for (int d = 0; d <= n; ++d) CHECK(levels[d] == doctest::Approx(oracle[d]).epsilon(1e-9));
  for (int d = 0; d <= n; ++d) {
    double at_most = 0.0;
    for (int l = 0; l <= d; ++l) at_most += oracle[l];
    CHECK(level_weight(f, d, LevelMode::AtMost) == doctest::Approx(at_most).epsilon(1e-9));
    CHECK(level_weight(f, d, LevelMode::Exact) == doctest::Approx(oracle[d]).epsilon(1e-9));
  }
}

TEST_CASE("restrict_function fixes coordinates by direct lookup") {
  CounterRng rng(5, 0);
  const int p = 3, n = 4;
  const DenseFunction f(p, n, Kind::Complex, random_values(checked_pow(p, n), rng));
  Restriction r;
  r.alive = {1, 3};
  r.fixed_coords = {0, 2};
  r.fixed_values = {2, 1};
  r.validate(n, p);
  const DenseFunction g = restrict_function(f, r);
  REQUIRE(g.n() == 2);
  std::vector<int> gd(2);
  for (Index y = 0; y < g.size(); ++y) {
    decode_digits(y, p, 2, gd);
    const std::vector<int> full{2, gd[0], 1, gd[1]};
    CHECK(std::abs(g.values()[y] - f.values()[encode_digits(full, p)]) < kTolPointwise);
  }
}

TEST_CASE("restriction mean square: closed form equals enumeration") {
  CounterRng rng(6, 0);
  for (double q : {0.2, 0.5, 0.8}) {
    const DenseFunction f(3, 3, Kind::Complex, random_values(27, rng));
    const double exact = restriction_mean_square_exact(f, q);
    const double enumerated = restriction_mean_square_enumerated(f, q);
    CHECK(exact == doctest::Approx(enumerated).epsilon(1e-9));
  }
}

TEST_CASE("bump search finds a planted dense fiber") {
  // f concentrated on {x_0 = 1}: fixing x_0 = 1 bumps the mean from 1/3 to 1.
  const int p = 3, n = 4;
  std::vector<Index> points;
  std::vector<int> xd(n);
  for (Index x = 0; x < checked_pow(p, n); ++x) {
    decode_digits(x, p, n, xd);
    if (xd[0] == 1) points.push_back(x);
  }
  const DenseFunction f = DenseFunction::indicator(p, n, points);
  const BumpSearchResult res = restriction_bump_search(f, 2, 0.5, 20000, 9);
  CHECK(res.found);
  CHECK(res.achieved_mean >= res.target);
  // The restriction really achieves what it claims.
  CHECK(restrict_function(f, res.restriction).mean_real() ==
        doctest::Approx(res.achieved_mean).epsilon(1e-12));
}

TEST_CASE("correlation event probability matches the subset-survival oracle") {
  // g = chi_alpha with one live coordinate: the restricted mean is 1 exactly
  // when that coordinate is fixed, so the hit probability is 1 - keep.
  const int d = 4;
  const DenseFunction g = DenseFunction::character(3, 3, {1, 0, 0});
  const CorrelationEventResult res = restriction_correlation_event(g, d, 1.0, 20000, 11);
  const double keep = 0.5 / d;
  CHECK(std::abs(res.empirical_probability - (1.0 - keep)) < 3.0 * res.stderr_estimate + 0.01);
  CHECK(res.threshold == doctest::Approx(std::sqrt(1.0 / (2.0 * std::exp(1.0)))).epsilon(1e-12));
}

TEST_CASE("sampled restrictions are reproducible under seed") {
  CounterRng a(3, 9), b(3, 9);
  const Eigen::VectorXd measure;
  for (int t = 0; t < 50; ++t) {
    const Restriction ra = sample_random_restriction(6, 3, 0.3, measure, a);
    const Restriction rb = sample_random_restriction(6, 3, 0.3, measure, b);
    CHECK(ra.alive == rb.alive);
    CHECK(ra.fixed_values == rb.fixed_values);
  }
}
