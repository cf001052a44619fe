#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "apfree/core.hpp"
#include "apfree/rng.hpp"

namespace apfree {

enum class Kind { Boolean, Real, Complex };

// Coordinate subsets as bitmasks, coordinate i <-> bit i (0-based).
using Subset = std::uint64_t;

inline int subset_size(Subset s) { return __builtin_popcountll(s); }

// A table of values of f: F_p^n -> C indexed by encode_point, together with
// a per-coordinate measure on the alphabet (uniform unless stated).
// Immutable after construction; transforms return fresh objects.
class DenseFunction {
 public:
  DenseFunction(int p, int n, Kind kind, Eigen::VectorXcd values,
                Eigen::VectorXd measure = Eigen::VectorXd());

  static DenseFunction constant(int p, int n, Cplx c, Kind kind = Kind::Complex);
  static DenseFunction zero(int p, int n, Kind kind = Kind::Complex);
  // Indicator of a set of point indices.
  static DenseFunction indicator(int p, int n, const std::vector<Index>& points);
  // chi_alpha(x) = omega^{alpha . x}, omega = e^{2 pi i / p}.
  static DenseFunction character(int p, int n, const std::vector<int>& alpha);

  int p() const { return p_; }
  int n() const { return n_; }
  Kind kind() const { return kind_; }
  Index size() const { return values_.size(); }
  const Eigen::VectorXcd& values() const { return values_; }
  const Eigen::VectorXd& measure() const { return measure_; }
  bool uniform_measure() const { return uniform_; }

  // Product measure weight of a point.
  double point_weight(Index idx) const;

  Cplx mean() const;          // E_mu[f]
  double mean_real() const;   // real part of mean (densities)
  double norm_sq() const;     // E_mu[|f|^2]
  double sup_norm() const;

  void assert_one_bounded(double tol = kTolPointwise) const;

 private:
  int p_, n_;
  Kind kind_;
  Eigen::VectorXcd values_;
  Eigen::VectorXd measure_;
  bool uniform_;
};

// f^{=S} together with its subset tag.
struct EfronSteinPart {
  Subset subset = 0;
  DenseFunction part;
};

// Alive set I and assignment y on the complement.
struct Restriction {
  std::vector<int> alive;         // sorted coordinate list
  std::vector<int> fixed_coords;  // sorted complement
  std::vector<int> fixed_values;  // y, aligned with fixed_coords

  void validate(int n, int p) const;
  static Restriction full(int n);  // I = [n], empty y
};

struct BumpSearchResult {
  bool found = false;
  Restriction restriction;
  double achieved_mean = 0.0;  // E[f_{I-bar -> y}] of the returned/best restriction
  double target = 0.0;         // E[f] + xi/(4e)
  double best_mean = 0.0;      // best over everything examined
};

struct CorrelationEventResult {
  double empirical_probability = 0.0;
  double stderr_estimate = 0.0;
  double threshold = 0.0;  // sqrt(xi/2e)
  Index trials = 0;
};

Cplx inner_product(const DenseFunction& f, const DenseFunction& g);

// hat f(alpha) = E_x[f(x) conj(omega^{alpha.x})], uniform measure only.
// Per-coordinate fast transform, O(n p p^n) scalar operations.
Eigen::VectorXcd fourier_transform(const DenseFunction& f);
DenseFunction inverse_fourier(const Eigen::VectorXcd& coeffs, int p, int n);

// (E_{subseteq T} f)(x): average all coordinates outside T under mu.
DenseFunction average_outside(const DenseFunction& f, Subset t);

// Inclusion-exclusion definition: f^{=S} = sum_{T subseteq S} (-1)^{|S\T|} E_{subseteq T} f.
EfronSteinPart efron_stein_part(const DenseFunction& f, Subset s);

// Uniform-measure route: f^{=S} = sum_{supp(alpha)=S} hat f(alpha) chi_alpha.
DenseFunction efron_stein_part_fourier(const DenseFunction& f, Subset s);

enum class LevelMode { Exact, AtMost };

double level_weight(const DenseFunction& f, int d, LevelMode mode);

// W_{=d} for every d at once; Fourier grouping when uniform, Moebius
// inversion over ||E_{subseteq T} f||^2 otherwise.
std::vector<double> level_weights_all(const DenseFunction& f);

DenseFunction restrict_function(const DenseFunction& f, const Restriction& r);

Restriction sample_random_restriction(int n, int p, double keep_prob,
                                      const Eigen::VectorXd& measure, CounterRng& rng);

// Searches for a restriction achieving E[f_{I-bar->y}] >= E[f] + xi/(4e)
// with |I| >= n/(2d). Exhaustive over all (I, y) when the state space is
// small, sampled from the 1/d keep distribution otherwise. Best-effort:
// the guarantee needs xi >= 2^{-c n/d^2} for an unspecified c, so a
// NotFound outcome reports the best bump seen.
BumpSearchResult restriction_bump_search(const DenseFunction& f, int d, double xi,
                                         Index sample_budget = 20000,
                                         std::uint64_t seed = 1);

// Monte-Carlo estimate of Pr[|E[g_{I-bar->y}]| >= sqrt(xi/2e)] under the
// 1/2d keep distribution.
CorrelationEventResult restriction_correlation_event(const DenseFunction& g, int d, double xi,
                                                     Index trials, std::uint64_t seed);

// Exact E_{I,y}[Z^2] under per-coordinate keep probability q, via
// E_I [ sum_S ||f^{=S}||^2 1{S subseteq I-bar} ] = sum_S ||f^{=S}||^2 (1-q)^{|S|}.
double restriction_mean_square_exact(const DenseFunction& f, double keep_prob);

// Same quantity by direct enumeration over all (I, y); small n only.
double restriction_mean_square_enumerated(const DenseFunction& f, double keep_prob);

}  // namespace apfree
