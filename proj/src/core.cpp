#include "apfree/core.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace apfree {

Index checked_pow(int p, int n) {
  if (p < 2 || n < 0) throw std::invalid_argument("checked_pow: bad arguments");
  Index r = 1;
  for (int i = 0; i < n; ++i) {
    if (r > std::numeric_limits<Index>::max() / p)
      throw std::overflow_error("checked_pow: p^n overflows");
    r *= p;
  }
  return r;
}

bool is_prime(int p) {
  if (p < 2) return false;
  for (int d = 2; static_cast<std::int64_t>(d) * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

PrimeField::PrimeField(int p) : p_(p) {
  if (p < 3) throw std::invalid_argument("PrimeField: p must be >= 3");
  if (!is_prime(p)) throw std::invalid_argument("PrimeField: p is not prime");
}

Index encode_digits(std::span<const int> digits, int p) {
  Index idx = 0;
  Index stride = 1;
  for (int d : digits) {
    if (d < 0 || d >= p) throw std::invalid_argument("encode_digits: digit out of range");
    idx += stride * d;
    stride *= p;
  }
  return idx;
}

Index encode_point(const FpPoint& x) { return encode_digits(x.coords, x.p); }

void decode_digits(Index idx, int p, int n, std::span<int> out) {
  for (int i = 0; i < n; ++i) {
    out[i] = static_cast<int>(idx % p);
    idx /= p;
  }
}

FpPoint decode_point(Index idx, int p, int n) {
  FpPoint x;
  x.p = p;
  x.coords.resize(n);
  decode_digits(idx, p, n, x.coords);
  return x;
}

void RestrictedDifference::validate() const {
  bool any = false;
  for (int c : coords) {
    if (c < 0 || c > 2) throw std::invalid_argument("RestrictedDifference: coordinate not in {0,1,2}");
    any |= (c != 0);
  }
  if (nonzero && !any)
    throw std::invalid_argument("RestrictedDifference: nonzero flag set on zero vector");
}

FiniteAbelianGroup::FiniteAbelianGroup(std::vector<int> cyclic_orders)
    : orders_(std::move(cyclic_orders)) {
  order_ = 1;
  for (int m : orders_) {
    if (m < 2) throw std::invalid_argument("FiniteAbelianGroup: cyclic order must be >= 2");
    order_ *= m;
  }
}

std::vector<int> FiniteAbelianGroup::add(std::span<const int> a, std::span<const int> b) const {
  if (a.size() != orders_.size() || b.size() != orders_.size())
    throw std::invalid_argument("FiniteAbelianGroup::add: arity mismatch");
  std::vector<int> r(orders_.size());
  for (size_t j = 0; j < orders_.size(); ++j) r[j] = (a[j] + b[j]) % orders_[j];
  return r;
}

std::vector<int> FiniteAbelianGroup::element(Index idx) const {
  std::vector<int> h(orders_.size());
  for (size_t j = 0; j < orders_.size(); ++j) {
    h[j] = static_cast<int>(idx % orders_[j]);
    idx /= orders_[j];
  }
  return h;
}

Index FiniteAbelianGroup::element_index(std::span<const int> h) const {
  Index idx = 0, stride = 1;
  for (size_t j = 0; j < orders_.size(); ++j) {
    if (h[j] < 0 || h[j] >= orders_[j])
      throw std::invalid_argument("FiniteAbelianGroup: element out of range");
    idx += stride * h[j];
    stride *= orders_[j];
  }
  return idx;
}

GroupCharacter::GroupCharacter(FiniteAbelianGroup group, std::vector<int> exponents)
    : group_(std::move(group)), exponents_(std::move(exponents)) {
  if (exponents_.size() != static_cast<size_t>(group_.rank()))
    throw std::invalid_argument("GroupCharacter: exponent arity mismatch");
  for (int j = 0; j < group_.rank(); ++j)
    if (exponents_[j] < 0 || exponents_[j] >= group_.cyclic_orders()[j])
      throw std::invalid_argument("GroupCharacter: exponent out of range");
}

Cplx unit_root(int k, int r) {
  const double theta = 2.0 * std::numbers::pi * k / r;
  return {std::cos(theta), std::sin(theta)};
}

std::vector<Cplx> root_table(int r) {
  std::vector<Cplx> w(r);
  for (int k = 0; k < r; ++k) w[k] = unit_root(k, r);
  return w;
}

Cplx char_eval(const GroupCharacter& chi, std::span<const int> h) {
  const auto& orders = chi.group().cyclic_orders();
  if (h.size() != orders.size())
    throw std::invalid_argument("char_eval: element/group mismatch");
  double theta = 0.0;
  for (size_t j = 0; j < orders.size(); ++j) {
    if (h[j] < 0 || h[j] >= orders[j])
      throw std::invalid_argument("char_eval: element out of range");
    theta += 2.0 * std::numbers::pi * chi.exponents()[j] * h[j] / orders[j];
  }
  return {std::cos(theta), std::sin(theta)};
}

bool char_power_trivial(std::span<const Cplx> h_fn, int r) {
  if (r < 1) throw std::invalid_argument("char_power_trivial: r must be >= 1");
  bool ok = true;
  for (Cplx v : h_fn) {
    Cplx pw{1.0, 0.0};
    for (int k = 0; k < r; ++k) pw *= v;
    if (std::abs(pw - Cplx{1.0, 0.0}) > 1e-9)
      throw std::invalid_argument("char_power_trivial: value is not an r-th root of unity");
    ok = ok && std::abs(pw - Cplx{1.0, 0.0}) <= 1e-9;
  }
  return ok;
}

}  // namespace apfree
