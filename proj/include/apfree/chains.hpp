#pragma once

#include <Eigen/Dense>
#include <vector>

#include "apfree/funcspace.hpp"

namespace apfree {

// Row-stochastic chain on the alphabet with stationary distribution mu.
// Dense storage; alphabets here are tiny (|Sigma| <= 97 at the CLI).
class MarkovChain {
 public:
  MarkovChain(Eigen::MatrixXd transition, Eigen::VectorXd stationary);

  int alphabet_size() const { return static_cast<int>(transition_.rows()); }
  const Eigen::MatrixXd& transition() const { return transition_; }
  const Eigen::VectorXd& stationary() const { return stationary_; }

  bool connected() const;
  double min_transition_probability() const;  // over nonzero entries

 private:
  Eigen::MatrixXd transition_;
  Eigen::VectorXd stationary_;
};

// The chain y -> y + a, a uniform in {0,1,2}; stationary = uniform.
// For p = 3 this degenerates to the complete averaging chain (allowed).
MarkovChain ap_difference_chain(int p);

MarkovChain complete_averaging_chain(int p);
MarkovChain identity_chain(int p);

struct SecondEigenvalueReport {
  double singular_value = 0.0;    // contraction constant on the mean-zero subspace
  double eigenvalue_modulus = 0.0;  // max |lambda| over nontrivial eigenvectors
};

// lambda_2 as the top singular value of the chain restricted to the
// mean-zero subspace under the mu-weighted inner product. The chain may be
// non-reversible, so moduli of eigenvalues and singular values can differ;
// the contraction property is what the correlation bound uses, hence the
// singular value is the headline number.
SecondEigenvalueReport second_eigenvalue_report(const MarkovChain& chain);
double second_eigenvalue(const MarkovChain& chain);

// Exact circulant eigenvalues of ap_difference_chain:
// max_{t != 0} |(1 + w^t + w^{2t})| / 3, w = e^{2 pi i / p}.
double ap_chain_lambda2_circulant(int p);

// (T^{tensor n} g)(x) = E_{y ~ T^{tensor n} x}[g(y)], one pass per coordinate.
DenseFunction apply_tensor(const MarkovChain& chain, const DenseFunction& g);

struct CorrelationBoundReport {
  double inner = 0.0;          // <f, T^{tensor n} g>
  double alpha = 0.0;
  double beta = 0.0;
  double lambda2 = 0.0;
  // sum over nonempty S of |<f^{=S}, T^{tensor n} g^{=S}>| split at level d,
  // and the norm-product majorants from the proof's two bounds.
  double low_levels_actual = 0.0;
  double low_levels_bound = 0.0;   // sum_{0<|S|<=d} ||f^{=S}|| ||g^{=S}||
  double high_levels_actual = 0.0;
  double high_levels_bound = 0.0;  // sum_{|S|>d} lambda2^{|S|} ||f^{=S}|| ||g^{=S}||
  double full_majorant = 0.0;      // sum_{S != 0} lambda2^{|S|} ||f^{=S}|| ||g^{=S}||
  int d = 0;
};

CorrelationBoundReport correlation_lower_bound_check(const DenseFunction& f,
                                                     const DenseFunction& g,
                                                     const MarkovChain& chain, int d);

}  // namespace apfree
