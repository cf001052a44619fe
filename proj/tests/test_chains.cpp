#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "apfree/aps.hpp"
#include "apfree/chains.hpp"

using namespace apfree;

namespace {

// Independent oracle: lambda_2 as the largest singular value of
// D^{1/2} (T - 1 pi^T) D^{-1/2} for stationary pi (uniform here), computed
// with Eigen's SVD on the explicitly deflated operator.
double svd_lambda2(const MarkovChain& chain) {
  const int m = chain.alphabet_size();
  const Eigen::VectorXd pi = chain.stationary();
  Eigen::MatrixXd deflated = chain.transition();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) deflated(i, j) -= pi[j];
  Eigen::MatrixXd weighted(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      weighted(i, j) = std::sqrt(pi[i]) * deflated(i, j) / std::sqrt(pi[j]);
  return weighted.jacobiSvd().singularValues()[0];
}

}  // namespace

TEST_CASE("ap_difference_chain is row stochastic with uniform stationary") {
  for (int p : {3, 5, 7, 11, 13}) {
    const MarkovChain c = ap_difference_chain(p);
    CHECK((c.transition().rowwise().sum() - Eigen::VectorXd::Ones(p)).cwiseAbs().maxCoeff() <
          kTolPointwise * 10);
    CHECK((c.transition().colwise().sum() - Eigen::VectorXd::Ones(p).transpose())
              .cwiseAbs()
              .maxCoeff() < kTolPointwise * 10);
    CHECK(c.connected());
    // Row y: mass 1/3 at y, y+1, y+2.
    for (int y = 0; y < p; ++y)
      for (int a = 0; a < 3; ++a)
        CHECK(c.transition()(y, (y + a) % p) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("p = 3 degenerates to complete averaging") {
  const MarkovChain c = ap_difference_chain(3);
  const MarkovChain avg = complete_averaging_chain(3);
  CHECK((c.transition() - avg.transition()).cwiseAbs().maxCoeff() < kTolPointwise * 10);
  CHECK(second_eigenvalue(c) < kTolAccum);
}

TEST_CASE("identity and averaging chains bracket the spectrum") {
  CHECK(second_eigenvalue(identity_chain(5)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(second_eigenvalue(complete_averaging_chain(5)) < kTolAccum);
}

TEST_CASE("lambda2 against the circulant formula and an SVD oracle") {
  for (int p : {5, 7, 11, 13}) {
    const MarkovChain c = ap_difference_chain(p);
    const double circulant = ap_chain_lambda2_circulant(p);
    CHECK(second_eigenvalue(c) == doctest::Approx(circulant).epsilon(1e-10));
    CHECK(svd_lambda2(c) == doctest::Approx(circulant).epsilon(1e-10));
  }
  // The operative constant: lambda_2(5) = ((1 + sqrt 5)/2)/3.
  CHECK(ap_chain_lambda2_circulant(5) ==
        doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("second_eigenvalue_report separates singular value from eigen modulus") {
  const SecondEigenvalueReport rep = second_eigenvalue_report(ap_difference_chain(5));
  CHECK(rep.singular_value >= rep.eigenvalue_modulus - kTolAccum);
  CHECK(rep.singular_value == doctest::Approx(ap_chain_lambda2_circulant(5)).epsilon(1e-10));
}

TEST_CASE("apply_tensor agrees with direct expectation") {
  CounterRng rng(13, 0);
  const int p = 3, n = 2;
  const Index size = checked_pow(p, n);
  Eigen::VectorXcd v(size);
  for (Index i = 0; i < size; ++i) v[i] = Cplx(rng.next_double(), rng.next_double());
  const DenseFunction g(p, n, Kind::Complex, v);
  const MarkovChain chain = ap_difference_chain(p);
  const DenseFunction tg = apply_tensor(chain, g);

  std::vector<int> xd(n), yd(n);
  for (Index x = 0; x < size; ++x) {
    decode_digits(x, p, n, xd);
    Cplx acc{0.0, 0.0};
    for (Index y = 0; y < size; ++y) {
      decode_digits(y, p, n, yd);
      double w = 1.0;
      for (int i = 0; i < n; ++i) w *= chain.transition()(xd[i], yd[i]);
      acc += w * g.values()[y];
    }
    CHECK(std::abs(tg.values()[x] - acc) < kTolAccum);
  }
}

TEST_CASE("W equals the tensor inner product on an indicator") {
  // <1_A, T^{tensor n} 1_A> = E_{x, a}[1_A(x) 1_A(x + a)]; brute force both.
  const int p = 5, n = 2;
  const DenseFunction f = DenseFunction::indicator(p, n, {0, 7, 13, 21, 24});
  const MarkovChain chain = ap_difference_chain(p);
  const double inner = inner_product(f, apply_tensor(chain, f)).real();

  double direct = 0.0;
  const Index diffs = checked_pow(3, n);
  std::vector<int> xd(n), ad(n);
  for (Index x = 0; x < f.size(); ++x) {
    if (f.values()[x].real() < 0.5) continue;
    decode_digits(x, p, n, xd);
    for (Index a = 0; a < diffs; ++a) {
      decode_digits(a, 3, n, ad);
      std::vector<int> y(n);
      for (int i = 0; i < n; ++i) y[i] = (xd[i] + ad[i]) % p;
      if (f.values()[encode_digits(y, p)].real() > 0.5) direct += 1.0;
    }
  }
  direct /= double(f.size()) * double(diffs);
  CHECK(inner == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("correlation bound majorant dominates on random boolean pairs") {
  CounterRng rng(17, 0);
  const int p = 5, n = 3;
  const MarkovChain chain = ap_difference_chain(p);
  for (int t = 0; t < 25; ++t) {
    std::vector<Index> af, ag;
    for (Index x = 0; x < checked_pow(p, n); ++x) {
      if (rng.next_bernoulli(0.4)) af.push_back(x);
      if (rng.next_bernoulli(0.4)) ag.push_back(x);
    }
    const DenseFunction f = DenseFunction::indicator(p, n, af);
    const DenseFunction g = DenseFunction::indicator(p, n, ag);
    const CorrelationBoundReport rep = correlation_lower_bound_check(f, g, chain, 1);
    CHECK(std::abs(rep.inner - rep.alpha * rep.beta) <= rep.full_majorant + kTolAccum);
    CHECK(rep.low_levels_actual <= rep.low_levels_bound + kTolAccum);
    CHECK(rep.high_levels_actual <= rep.high_levels_bound + kTolAccum);
    CHECK(rep.lambda2 == doctest::Approx(ap_chain_lambda2_circulant(p)).epsilon(1e-10));
  }
}
