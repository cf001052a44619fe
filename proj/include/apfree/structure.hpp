#pragma once

#include <optional>
#include <vector>

#include "apfree/funcspace.hpp"

namespace apfree {

// c * prod_i f_i(x_i) with |c| = 1 and every factor value an |H|-th root of
// unity; the class P(H) of product functions.
class ProductFunction {
 public:
  ProductFunction(int p, FiniteAbelianGroup group, Cplx scalar,
                  std::vector<std::vector<Cplx>> factors);

  static ProductFunction constant_one(int p, FiniteAbelianGroup group, int n);
  // chi_alpha as a product function over H = Z_p.
  static ProductFunction from_character(int p, const std::vector<int>& alpha);

  int p() const { return p_; }
  int n() const { return static_cast<int>(factors_.size()); }
  const FiniteAbelianGroup& group() const { return group_; }
  Cplx scalar() const { return scalar_; }
  const std::vector<std::vector<Cplx>>& factors() const { return factors_; }

  DenseFunction materialize() const;

 private:
  int p_;
  FiniteAbelianGroup group_;
  Cplx scalar_;
  std::vector<std::vector<Cplx>> factors_;  // factors_[i][letter]
};

// n' disjoint-support 0/1 vectors v plus n - n' completion vectors u; the
// change of variables M(x, z) = sum_i x_i v_i + sum_j z_j u_j.
class SpecialBasis {
 public:
  SpecialBasis(int p, int n, std::vector<std::vector<int>> v, std::vector<std::vector<int>> u);

  static SpecialBasis identity(int p, int n, int n_prime);
  // Completes v to a basis with standard basis vectors in index order.
  static SpecialBasis complete(int p, int n, std::vector<std::vector<int>> v);

  int p() const { return p_; }
  int n() const { return n_; }
  int n_prime() const { return static_cast<int>(v_.size()); }
  int z_dim() const { return n_ - n_prime(); }
  const std::vector<std::vector<int>>& v() const { return v_; }
  const std::vector<std::vector<int>>& u() const { return u_; }

  // Original-coordinate image of (x, z).
  std::vector<int> map(std::span<const int> x, std::span<const int> z) const;
  // H_i(z) = sum_j z_j u_j[i] for every original coordinate i.
  std::vector<int> shifts(std::span<const int> z) const;
  // Block owning original coordinate i, or -1 when i lies outside every v.
  int owner(int coordinate) const { return owner_[coordinate]; }

 private:
  int p_, n_;
  std::vector<std::vector<int>> v_, u_;
  std::vector<int> owner_;
};

// Random disjoint supports covering at least one coordinate per block,
// completed deterministically with standard basis vectors.
SpecialBasis sample_special_basis(int p, int n, int n_prime, CounterRng& rng);

struct BasisChangedView {
  SpecialBasis basis;
  DenseFunction source;
  std::optional<std::vector<int>> z;
};

// f^sharp(x, z) = f(M(x, z)) on F_p^n, x-part first.
DenseFunction apply_basis_change(const DenseFunction& f, const SpecialBasis& b);

// x |-> f(M(x, z)) on F_p^{n'}.
DenseFunction restrict_z(const DenseFunction& f, const SpecialBasis& b, std::span<const int> z);
DenseFunction restrict_z(const BasisChangedView& view);

// The closed-form image of P under the same operation: factors
// f'_j(t) = prod_{i in supp(v_j)} f_i(t + H_i(z)) and scalar
// C(z) = c * prod_{i outside all supports} f_i(H_i(z)).
ProductFunction product_closure_under_basis_change(const ProductFunction& product,
                                                   const SpecialBasis& b, std::span<const int> z);

struct CharacterCorrelation {
  std::vector<int> alpha;
  double value = 0.0;
  Cplx coefficient{0.0, 0.0};
};

// argmax_alpha |hat f(alpha)|, ties to the smallest encoded index.
CharacterCorrelation best_character_correlation(const DenseFunction& f);

struct AscentResult {
  ProductFunction product;
  double correlation = 0.0;
  int passes = 0;
  std::vector<double> trace;  // |<f,P>| after each accepted move
};

// Coordinate ascent over P(H): re-optimize one factor at a time by
// conditioning, round each letter to the nearest |H|-th root of unity
// (ties to smallest argument), accept only strict improvements.
AscentResult product_ascent_search(const DenseFunction& f, const FiniteAbelianGroup& h,
                                   int restarts, std::uint64_t seed);

struct RobustifyParams {
  double epsilon = 0.05;
  double delta = 0.1;
  double beta = 0.01;
  int max_iters = 8;  // N
  int samples = 32;   // bases sampled per iteration
  int z_dim = 1;      // completion coordinates per sampled basis
  std::uint64_t seed = 1;

  void validate() const;
};

enum class RobustifyStatus { DensityBump, RobustPair, Exhausted };

struct RobustifyStep {
  int iteration = 0;
  int basis_index = -1;
  double collapse_fraction = 0.0;
  double correlation_before = 0.0, correlation_after = 0.0;
  double density_before = 0.0, density_after = 0.0;
  bool accepted = false;
};

struct AppliedRestriction {
  SpecialBasis basis;
  std::vector<int> z;
};

struct RobustifyResult {
  RobustifyStatus status;
  DenseFunction f;          // final function (bumped restriction for DensityBump)
  ProductFunction product;  // matching closed-form product
  double correlation = 0.0;
  double density = 0.0;
  // Statistical certificate: the adversary is sampled, not exhaustive.
  Index bases_examined = 0;
  std::vector<RobustifyStep> trace;
  // (basis, z) pairs applied to the input, in order; replaying them through
  // restrict_z reproduces f bit-exactly.
  std::vector<AppliedRestriction> applied;
};

// The iterative correlation-robustification loop: each accepted step gains
// at least epsilon*delta/4 in |<f,P>| while the density never drops below
// E[f] - beta^{1-2j/N}; any intermediate fiber with E >= E[f] + beta
// short-circuits into DensityBump.
RobustifyResult robustify_correlation(const DenseFunction& f, const ProductFunction& product,
                                      const RobustifyParams& params);

}  // namespace apfree
