#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <vector>

#include "apfree/core.hpp"

namespace apfree {

using BigInt = boost::multiprecision::cpp_int;

// A finite k-ary support P subseteq Sigma_1 x ... x Sigma_k. Only the
// support matters for embeddability, so no probabilities here.
struct Support {
  std::vector<int> alphabet_sizes;
  std::vector<std::vector<int>> atoms;

  void validate() const;
  int arity() const { return static_cast<int>(alphabet_sizes.size()); }
};

// Maps sigma_1..sigma_k of the alphabets into a common Abelian target with
// sigma_1(x_1) + ... + sigma_k(x_k) = 0 on every atom. target_orders empty
// means (Z,+); otherwise the target is Z_{m_1} x ... x Z_{m_j}.
struct EmbeddingCertificate {
  std::vector<int> target_orders;
  // maps[c][letter] = target element, one coordinate per cyclic component
  // (exactly one coordinate for Z).
  std::vector<std::vector<std::vector<BigInt>>> maps;

  bool is_trivial() const;  // all k maps constant
};

// The 0/1 linear system of the embedding condition: one row per atom,
// columns indexed by (coordinate block, letter).
class RelationLattice {
 public:
  explicit RelationLattice(const Support& support);

  int rows() const { return static_cast<int>(matrix_.size()); }
  int cols() const { return cols_; }
  const std::vector<std::vector<BigInt>>& matrix() const { return matrix_; }
  int block_offset(int coordinate) const { return offsets_[coordinate]; }
  const std::vector<int>& block_sizes() const { return block_sizes_; }

 private:
  std::vector<std::vector<BigInt>> matrix_;
  std::vector<int> offsets_;
  std::vector<int> block_sizes_;
  int cols_;
};

struct ZEmbeddingResult {
  int kernel_dimension = 0;  // over Q
  int trivial_dimension = 0; // k - 1
  std::optional<EmbeddingCertificate> certificate;  // nontrivial, integer entries
};

// Exact rational kernel of the relation lattice. Nontrivial certificate iff
// kernel dimension exceeds the k-1 dimensional space of constant solutions.
ZEmbeddingResult z_embedding(const Support& support);

// Exact rank over Q (fraction-free elimination); used to cross-check the
// kernel dimension through modular ranks as well.
int lattice_rank(const RelationLattice& lattice);
int lattice_rank_mod(const RelationLattice& lattice, int prime);

struct UniversalEmbeddingResult {
  // Invariant factors d_1 | d_2 | ... (> 1 entries only); the universal
  // finite embedding group is Z_{d_1} x ... x Z_{d_j}.
  std::vector<BigInt> invariant_factors;
  int free_rank = 0;  // rank of the Z-solution lattice, includes trivial dims
  // One generator certificate per invariant factor, into the cyclic Z_{d_i}.
  std::vector<EmbeddingCertificate> generators;
};

// Smith normal form of the relation lattice; the torsion of the solution
// cokernel is the universal finite embedding group, through which every
// finite-group embedding of the support factors.
UniversalEmbeddingResult universal_finite_embedding(const Support& support);

bool verify_certificate(const EmbeddingCertificate& cert, const Support& support);

}  // namespace apfree
