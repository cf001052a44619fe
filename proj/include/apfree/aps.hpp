#pragma once

#include <array>
#include <optional>
#include <vector>

#include "apfree/funcspace.hpp"

namespace apfree {

// A distribution over Sigma x Gamma x Phi given by its atoms.
class TripleDistribution {
 public:
  struct Atom {
    std::array<int, 3> point;
    double probability;
  };

  TripleDistribution(int sigma_size, int gamma_size, int phi_size, std::vector<Atom> atoms);

  int sigma_size() const { return sizes_[0]; }
  int gamma_size() const { return sizes_[1]; }
  int phi_size() const { return sizes_[2]; }
  int size(int coordinate) const { return sizes_.at(coordinate); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::vector<std::array<int, 3>> support() const;

 private:
  std::array<int, 3> sizes_;
  std::vector<Atom> atoms_;
};

// A subset of F_p^n as a bitset over encode_point indices.
class PointSet {
 public:
  PointSet(int p, int n);
  static PointSet from_function(const DenseFunction& f);

  int p() const { return p_; }
  int n() const { return n_; }
  Index universe() const { return universe_; }
  Index size() const;  // number of members

  bool contains(Index x) const { return bits_[x >> 6] >> (x & 63) & 1; }
  void insert(Index x) { bits_[x >> 6] |= std::uint64_t(1) << (x & 63); }
  void erase(Index x) { bits_[x >> 6] &= ~(std::uint64_t(1) << (x & 63)); }

  std::vector<Index> members() const;
  DenseFunction to_function() const;

 private:
  int p_, n_;
  Index universe_;
  std::vector<std::uint64_t> bits_;
};

// mu: the distribution of (x, x+a, x+2a), x ~ F_p, a ~ {0,1,2}, both uniform.
// The optional difference set hook exists to reproduce the {0,1} variant in
// the embedding detector; the increment engine refuses anything but {0,1,2}.
TripleDistribution restricted_ap_distribution(int p, const std::vector<int>& diffs = {0, 1, 2});

enum class TripleCorrelationMethod { Direct, Fourier };

// Lambda(f,g,h) = E_{x ~ F_p^n, a ~ {0,1,2}^n}[f(x) g(x+a) h(x+2a)].
// Direct enumeration is O(p^n 3^n); the Fourier route is
// sum_{beta,gamma} hat f(-beta-gamma) hat g(beta) hat h(gamma)
//   prod_i S(beta_i + 2 gamma_i), S(t) = (1 + w^t + w^{2t})/3.
Cplx triple_correlation(const DenseFunction& f, const DenseFunction& g, const DenseFunction& h,
                        TripleCorrelationMethod method = TripleCorrelationMethod::Direct);

struct FreeWitness {
  std::vector<int> x;  // point coordinates
  std::vector<int> a;  // difference in {0,1,2}^n
};

// True iff no (x, a), a in {0,1,2}^n \ {0}, with x, x+a, x+2a all in A.
// On failure the witness is the first hit in lexicographic (x, a) order.
std::optional<FreeWitness> find_restricted_ap(const PointSet& a_set);
bool is_restricted_ap_free(const PointSet& a_set);

// Per-pair connectivity of the bipartite support graphs.
std::array<bool, 3> pairwise_connected(const TripleDistribution& mu);

enum class SearchMode { Exhaustive, BranchBound };

struct ExtremalSearchResult {
  int size = 0;
  std::vector<Index> set;
  bool optimal = false;
  std::uint64_t nodes_explored = 0;
};

// Largest restricted-3-AP-free subset of F_p^n: exact DFS over the
// forbidden-triple hypergraph with a greedy initial bound. Exhaustive mode
// requires p^n <= 25; branch-and-bound takes a node budget and reports
// optimality only when the space was exhausted.
ExtremalSearchResult extremal_search(int p, int n, SearchMode mode,
                                     std::uint64_t budget = 10'000'000);

}  // namespace apfree
