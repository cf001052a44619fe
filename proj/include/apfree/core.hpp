#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace apfree {

using Index = std::int64_t;
using Cplx = std::complex<double>;

inline constexpr double kTolPointwise = 1e-12;  // pointwise algebra
inline constexpr double kTolAccum = 1e-9;       // identities after O(p^n) sums

// p^n with overflow guard; table sizes everywhere run through this.
Index checked_pow(int p, int n);

bool is_prime(int p);

// Prime modulus p >= 3, verified by trial division at construction.
class PrimeField {
 public:
  explicit PrimeField(int p);
  int p() const { return p_; }

  int add(int a, int b) const { return (a + b) % p_; }
  int neg(int a) const { return (p_ - a) % p_; }
  int mul(int a, int b) const { return static_cast<int>(std::int64_t(a) * b % p_); }

 private:
  int p_;
};

// A point of F_p^n as a digit vector, coordinates in [0, p).
struct FpPoint {
  int p = 0;
  std::vector<int> coords;
};

// Little-endian base-p encoding: index = sum_i coords[i] * p^i.
// Frozen; the function-table file format depends on this layout.
Index encode_point(const FpPoint& x);
Index encode_digits(std::span<const int> digits, int p);
FpPoint decode_point(Index idx, int p, int n);
void decode_digits(Index idx, int p, int n, std::span<int> out);

// Common difference a in {0,1,2}^n; nonzero flag asserts a != 0.
struct RestrictedDifference {
  std::vector<int> coords;
  bool nonzero = false;

  void validate() const;
};

// Explicit product of cyclic groups Z_{m_1} x ... x Z_{m_k}.
// Every group H in scope has bounded order, so no abstract interface.
class FiniteAbelianGroup {
 public:
  explicit FiniteAbelianGroup(std::vector<int> cyclic_orders);

  const std::vector<int>& cyclic_orders() const { return orders_; }
  int rank() const { return static_cast<int>(orders_.size()); }
  Index order() const { return order_; }

  std::vector<int> add(std::span<const int> a, std::span<const int> b) const;
  std::vector<int> element(Index idx) const;  // mixed-radix decode
  Index element_index(std::span<const int> h) const;

  bool operator==(const FiniteAbelianGroup& o) const { return orders_ == o.orders_; }

 private:
  std::vector<int> orders_;
  Index order_;
};

// chi(h) = exp(2*pi*i * sum_j a_j h_j / m_j).
class GroupCharacter {
 public:
  GroupCharacter(FiniteAbelianGroup group, std::vector<int> exponents);

  const FiniteAbelianGroup& group() const { return group_; }
  const std::vector<int>& exponents() const { return exponents_; }

 private:
  FiniteAbelianGroup group_;
  std::vector<int> exponents_;
};

Cplx char_eval(const GroupCharacter& chi, std::span<const int> h);

// exp(2*pi*i*k/r), cached per call site via root_table when hot.
Cplx unit_root(int k, int r);
std::vector<Cplx> root_table(int r);

// Checks h^r == 1 pointwise for a map valued in r-th roots of unity.
// Throws if some value is not an r-th root of unity to begin with.
bool char_power_trivial(std::span<const Cplx> h_fn, int r);

}  // namespace apfree
