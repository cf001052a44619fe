#include "apfree/chains.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace apfree {

MarkovChain::MarkovChain(Eigen::MatrixXd transition, Eigen::VectorXd stationary)
    : transition_(std::move(transition)), stationary_(std::move(stationary)) {
  const Index k = transition_.rows();
  if (transition_.cols() != k || stationary_.size() != k)
    throw std::invalid_argument("MarkovChain: shape mismatch");
  for (Index i = 0; i < k; ++i) {
    double row = 0.0;
    for (Index j = 0; j < k; ++j) {
      if (transition_(i, j) < -kTolPointwise)
        throw std::invalid_argument("MarkovChain: negative transition probability");
      row += transition_(i, j);
    }
    if (std::abs(row - 1.0) > kTolPointwise)
      throw std::invalid_argument("MarkovChain: row does not sum to 1");
  }
  if ((stationary_.transpose() * transition_ - stationary_.transpose()).cwiseAbs().maxCoeff() >
      1e-10)
    throw std::invalid_argument("MarkovChain: mu is not stationary");
}

bool MarkovChain::connected() const {
  const int k = alphabet_size();
  std::vector<char> seen(k, 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    for (int b = 0; b < k; ++b) {
      // Undirected reachability over nonzero transitions.
      if (!seen[b] && (transition_(a, b) > 0.0 || transition_(b, a) > 0.0)) {
        seen[b] = 1;
        stack.push_back(b);
      }
    }
  }
  for (char c : seen)
    if (!c) return false;
  return true;
}

double MarkovChain::min_transition_probability() const {
  double q = 1.0;
  for (Index i = 0; i < transition_.rows(); ++i)
    for (Index j = 0; j < transition_.cols(); ++j)
      if (transition_(i, j) > 0.0) q = std::min(q, transition_(i, j));
  return q;
}

MarkovChain ap_difference_chain(int p) {
  if (p < 3 || !is_prime(p)) throw std::invalid_argument("ap_difference_chain: bad p");
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
  for (int y = 0; y < p; ++y)
    for (int a = 0; a < 3; ++a) t(y, (y + a) % p) += 1.0 / 3.0;
  return MarkovChain(std::move(t), Eigen::VectorXd::Constant(p, 1.0 / p));
}

MarkovChain complete_averaging_chain(int p) {
  return MarkovChain(Eigen::MatrixXd::Constant(p, p, 1.0 / p),
                     Eigen::VectorXd::Constant(p, 1.0 / p));
}

MarkovChain identity_chain(int p) {
  return MarkovChain(Eigen::MatrixXd::Identity(p, p), Eigen::VectorXd::Constant(p, 1.0 / p));
}

SecondEigenvalueReport second_eigenvalue_report(const MarkovChain& chain) {
  const int k = chain.alphabet_size();
  const Eigen::VectorXd sqrt_mu = chain.stationary().cwiseSqrt();
  // Similarity transform into the standard inner product, then project out
  // the direction of sqrt(mu) (the constants).
  Eigen::MatrixXd b = sqrt_mu.asDiagonal() * chain.transition() *
                      sqrt_mu.cwiseInverse().asDiagonal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(sqrt_mu);
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd w = q.rightCols(k - 1);  // orthonormal complement of sqrt(mu)
  const Eigen::MatrixXd a = w.transpose() * b * w;

  SecondEigenvalueReport rep;
  rep.singular_value = a.jacobiSvd().singularValues()(0);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  rep.eigenvalue_modulus = es.eigenvalues().cwiseAbs().maxCoeff();
  return rep;
}

double second_eigenvalue(const MarkovChain& chain) {
  return second_eigenvalue_report(chain).singular_value;
}

double ap_chain_lambda2_circulant(int p) {
  double best = 0.0;
  for (int t = 1; t < p; ++t) {
    const Cplx lam = (Cplx{1.0, 0.0} + unit_root(t, p) + unit_root((2 * t) % p, p)) / 3.0;
    best = std::max(best, std::abs(lam));
  }
  return best;
}

DenseFunction apply_tensor(const MarkovChain& chain, const DenseFunction& g) {
  if (chain.alphabet_size() != g.p()) throw std::invalid_argument("apply_tensor: alphabet mismatch");
  const int p = g.p(), n = g.n();
  Eigen::VectorXcd v = g.values();
  std::vector<Cplx> buf(p);
  Index stride = 1;
  for (int i = 0; i < n; ++i) {
    const Index block = stride * p;
    for (Index base = 0; base < v.size(); base += block) {
      for (Index off = 0; off < stride; ++off) {
        for (int s = 0; s < p; ++s) buf[s] = v[base + off + s * stride];
        for (int x = 0; x < p; ++x) {
          Cplx acc{0.0, 0.0};
          for (int y = 0; y < p; ++y) acc += chain.transition()(x, y) * buf[y];
          v[base + off + x * stride] = acc;
        }
      }
    }
    stride = block;
  }
  return DenseFunction(p, n, g.kind() == Kind::Boolean ? Kind::Real : g.kind(), std::move(v),
                       g.uniform_measure() ? Eigen::VectorXd() : g.measure());
}

CorrelationBoundReport correlation_lower_bound_check(const DenseFunction& f,
                                                     const DenseFunction& g,
                                                     const MarkovChain& chain, int d) {
  if (f.kind() != Kind::Boolean || g.kind() != Kind::Boolean)
    throw std::invalid_argument("correlation_lower_bound_check: boolean functions only");
  if (!chain.connected())
    throw std::invalid_argument("correlation_lower_bound_check: chain must be connected");
  const int n = f.n();
  if (n > 20) throw std::invalid_argument("correlation_lower_bound_check: n too large");

  CorrelationBoundReport rep;
  rep.d = d;
  rep.alpha = f.mean_real();
  rep.beta = g.mean_real();
  rep.lambda2 = second_eigenvalue(chain);
  rep.inner = inner_product(f, apply_tensor(chain, g)).real();

  const Subset full = (Subset(1) << n) - 1;
  for (Subset s = 1; s <= full; ++s) {
    const auto fs = efron_stein_part(f, s);
    const auto gs = efron_stein_part(g, s);
    const double fn = std::sqrt(fs.part.norm_sq());
    const double gn = std::sqrt(gs.part.norm_sq());
    const double actual = std::abs(inner_product(fs.part, apply_tensor(chain, gs.part)));
    const double lam_pow = std::pow(rep.lambda2, subset_size(s));
    rep.full_majorant += lam_pow * fn * gn;
    if (subset_size(s) <= d) {
      rep.low_levels_actual += actual;
      rep.low_levels_bound += fn * gn;
    } else {
      rep.high_levels_actual += actual;
      rep.high_levels_bound += lam_pow * fn * gn;
    }
  }
  return rep;
}

}  // namespace apfree
