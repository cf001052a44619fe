#include "apfree/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace apfree {

namespace {

constexpr double kUnitTol = 1e-9;

void check_root_of_unity(Cplx v, int r) {
  if (std::abs(std::abs(v) - 1.0) > kUnitTol)
    throw std::invalid_argument("ProductFunction: factor value not on the unit circle");
  Cplx pw{1.0, 0.0};
  for (int k = 0; k < r; ++k) pw *= v;
  if (std::abs(pw - Cplx{1.0, 0.0}) > kUnitTol)
    throw std::invalid_argument("ProductFunction: factor value not an |H|-th root of unity");
}

int nearest_root_index(Cplx w, int r) {
  if (std::abs(w) == 0.0) return 0;
  const double sector = 2.0 * std::numbers::pi / r;
  long long k = std::llround(std::arg(w) / sector);
  k %= r;
  if (k < 0) k += r;
  return static_cast<int>(k);
}

}  // namespace

ProductFunction::ProductFunction(int p, FiniteAbelianGroup group, Cplx scalar,
                                 std::vector<std::vector<Cplx>> factors)
    : p_(p), group_(std::move(group)), scalar_(scalar), factors_(std::move(factors)) {
  if (p_ < 2) throw std::invalid_argument("ProductFunction: bad alphabet size");
  if (std::abs(std::abs(scalar_) - 1.0) > kUnitTol)
    throw std::invalid_argument("ProductFunction: scalar must be unimodular");
  const int r = static_cast<int>(group_.order());
  for (const auto& table : factors_) {
    if (static_cast<int>(table.size()) != p_)
      throw std::invalid_argument("ProductFunction: factor table size mismatch");
    for (Cplx v : table) check_root_of_unity(v, r);
  }
}

ProductFunction ProductFunction::constant_one(int p, FiniteAbelianGroup group, int n) {
  return ProductFunction(p, std::move(group), Cplx{1.0, 0.0},
                         std::vector<std::vector<Cplx>>(n, std::vector<Cplx>(p, Cplx{1.0, 0.0})));
}

ProductFunction ProductFunction::from_character(int p, const std::vector<int>& alpha) {
  std::vector<std::vector<Cplx>> factors(alpha.size(), std::vector<Cplx>(p));
  for (size_t i = 0; i < alpha.size(); ++i)
    for (int s = 0; s < p; ++s) factors[i][s] = unit_root(alpha[i] * s % p, p);
  return ProductFunction(p, FiniteAbelianGroup({p}), Cplx{1.0, 0.0}, std::move(factors));
}

DenseFunction ProductFunction::materialize() const {
  const Index sz = checked_pow(p_, n());
  Eigen::VectorXcd v(sz);
  std::vector<int> digits(n(), 0);
  for (Index idx = 0; idx < sz; ++idx) {
    Cplx acc = scalar_;
    for (int i = 0; i < n(); ++i) acc *= factors_[i][digits[i]];
    v[idx] = acc;
    for (int i = 0; i < n(); ++i) {
      if (++digits[i] < p_) break;
      digits[i] = 0;
    }
  }
  return DenseFunction(p_, n(), Kind::Complex, std::move(v));
}

SpecialBasis::SpecialBasis(int p, int n, std::vector<std::vector<int>> v,
                           std::vector<std::vector<int>> u)
    : p_(p), n_(n), v_(std::move(v)), u_(std::move(u)), owner_(n, -1) {
  if (!is_prime(p_) || p_ < 3) throw std::invalid_argument("SpecialBasis: bad p");
  if (static_cast<int>(v_.size()) + static_cast<int>(u_.size()) != n_)
    throw std::invalid_argument("SpecialBasis: need n vectors in total");
  for (size_t j = 0; j < v_.size(); ++j) {
    if (static_cast<int>(v_[j].size()) != n_)
      throw std::invalid_argument("SpecialBasis: vector length mismatch");
    bool nonzero = false;
    for (int i = 0; i < n_; ++i) {
      const int e = v_[j][i];
      if (e != 0 && e != 1) throw std::invalid_argument("SpecialBasis: v entries must be 0/1");
      if (e == 1) {
        if (owner_[i] != -1)
          throw std::invalid_argument("SpecialBasis: v supports must be disjoint");
        owner_[i] = static_cast<int>(j);
        nonzero = true;
      }
    }
    if (!nonzero) throw std::invalid_argument("SpecialBasis: zero v vector");
  }
  for (const auto& uv : u_) {
    if (static_cast<int>(uv.size()) != n_)
      throw std::invalid_argument("SpecialBasis: vector length mismatch");
    for (int e : uv)
      if (e < 0 || e >= p_) throw std::invalid_argument("SpecialBasis: u entry out of F_p");
  }
  // Invertibility by elimination over F_p.
  std::vector<std::vector<int>> m;
  m.insert(m.end(), v_.begin(), v_.end());
  m.insert(m.end(), u_.begin(), u_.end());
  const PrimeField fp(p_);
  int rank = 0;
  for (int c = 0; c < n_ && rank < n_; ++c) {
    int sel = -1;
    for (int i = rank; i < n_; ++i)
      if (m[i][c] != 0) {
        sel = i;
        break;
      }
    if (sel < 0) continue;
    std::swap(m[rank], m[sel]);
    for (int i = rank + 1; i < n_; ++i) {
      if (m[i][c] == 0) continue;
      // m[i] -= (m[i][c]/m[rank][c]) m[rank]
      int inv = 1;
      for (int k = 0; k < p_ - 2; ++k) inv = fp.mul(inv, m[rank][c]);
      const int factor = fp.mul(m[i][c], inv);
      for (int k = 0; k < n_; ++k) m[i][k] = fp.add(m[i][k], fp.neg(fp.mul(factor, m[rank][k])));
    }
    ++rank;
  }
  if (rank != n_) throw std::invalid_argument("SpecialBasis: (v, u) is not a basis of F_p^n");
}

SpecialBasis SpecialBasis::identity(int p, int n, int n_prime) {
  std::vector<std::vector<int>> v, u;
  for (int j = 0; j < n_prime; ++j) {
    std::vector<int> e(n, 0);
    e[j] = 1;
    v.push_back(std::move(e));
  }
  for (int j = n_prime; j < n; ++j) {
    std::vector<int> e(n, 0);
    e[j] = 1;
    u.push_back(std::move(e));
  }
  return SpecialBasis(p, n, std::move(v), std::move(u));
}

SpecialBasis SpecialBasis::complete(int p, int n, std::vector<std::vector<int>> v) {
  const PrimeField fp(p);
  // Echelon rows spanned so far, with pivot columns.
  std::vector<std::vector<int>> rows;
  std::vector<int> pivot_col;
  auto try_insert = [&](std::vector<int> cand) {
    for (size_t r = 0; r < rows.size(); ++r) {
      if (cand[pivot_col[r]] == 0) continue;
      int inv = 1;
      for (int k = 0; k < p - 2; ++k) inv = fp.mul(inv, rows[r][pivot_col[r]]);
      const int factor = fp.mul(cand[pivot_col[r]], inv);
      for (int k = 0; k < n; ++k) cand[k] = fp.add(cand[k], fp.neg(fp.mul(factor, rows[r][k])));
    }
    for (int c = 0; c < n; ++c)
      if (cand[c] != 0) {
        rows.push_back(std::move(cand));
        pivot_col.push_back(c);
        return true;
      }
    return false;
  };
  for (const auto& vec : v)
    if (!try_insert(vec)) throw std::invalid_argument("SpecialBasis: v vectors are dependent");
  std::vector<std::vector<int>> u;
  for (int i = 0; i < n && int(v.size() + u.size()) < n; ++i) {
    std::vector<int> e(n, 0);
    e[i] = 1;
    if (try_insert(e)) u.push_back(std::move(e));
  }
  return SpecialBasis(p, n, std::move(v), std::move(u));
}

std::vector<int> SpecialBasis::map(std::span<const int> x, std::span<const int> z) const {
  if (static_cast<int>(x.size()) != n_prime() || static_cast<int>(z.size()) != z_dim())
    throw std::invalid_argument("SpecialBasis::map: shape mismatch");
  std::vector<int> y(n_, 0);
  for (int j = 0; j < n_prime(); ++j)
    for (int i = 0; i < n_; ++i) y[i] = (y[i] + x[j] * v_[j][i]) % p_;
  for (int j = 0; j < z_dim(); ++j)
    for (int i = 0; i < n_; ++i) y[i] = (y[i] + z[j] * u_[j][i]) % p_;
  return y;
}

std::vector<int> SpecialBasis::shifts(std::span<const int> z) const {
  if (static_cast<int>(z.size()) != z_dim())
    throw std::invalid_argument("SpecialBasis::shifts: z length mismatch");
  std::vector<int> h(n_, 0);
  for (int j = 0; j < z_dim(); ++j)
    for (int i = 0; i < n_; ++i) h[i] = (h[i] + z[j] * u_[j][i]) % p_;
  return h;
}

SpecialBasis sample_special_basis(int p, int n, int n_prime, CounterRng& rng) {
  if (n_prime < 1 || n_prime > n) throw std::invalid_argument("sample_special_basis: bad n'");
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.next_below(std::uint64_t(i) + 1)]);
  // One guaranteed coordinate per block, the rest join a block half the time.
  std::vector<int> owner(n, -1);
  for (int j = 0; j < n_prime; ++j) owner[perm[j]] = j;
  for (int i = n_prime; i < n; ++i)
    if (rng.next_bernoulli(0.5)) owner[perm[i]] = static_cast<int>(rng.next_below(n_prime));
  std::vector<std::vector<int>> v(n_prime, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i)
    if (owner[i] >= 0) v[owner[i]][i] = 1;
  return SpecialBasis::complete(p, n, std::move(v));
}

DenseFunction apply_basis_change(const DenseFunction& f, const SpecialBasis& b) {
  if (f.p() != b.p() || f.n() != b.n())
    throw std::invalid_argument("apply_basis_change: shape mismatch");
  if (!f.uniform_measure())
    throw std::invalid_argument("apply_basis_change: uniform measure only");
  const int p = f.p(), n = f.n(), np = b.n_prime();
  Eigen::VectorXcd out(f.size());
  std::vector<int> digits(n);
  for (Index idx = 0; idx < f.size(); ++idx) {
    decode_digits(idx, p, n, digits);
    const std::span<const int> x(digits.data(), np);
    const std::span<const int> z(digits.data() + np, n - np);
    out[idx] = f.values()[encode_digits(b.map(x, z), p)];
  }
  return DenseFunction(p, n, f.kind(), std::move(out));
}

DenseFunction restrict_z(const DenseFunction& f, const SpecialBasis& b, std::span<const int> z) {
  if (f.p() != b.p() || f.n() != b.n())
    throw std::invalid_argument("restrict_z: shape mismatch");
  if (!f.uniform_measure()) throw std::invalid_argument("restrict_z: uniform measure only");
  for (int e : z)
    if (e < 0 || e >= f.p()) throw std::invalid_argument("restrict_z: z entry out of F_p");
  const int p = f.p(), np = b.n_prime();
  const Index sz = checked_pow(p, np);
  Eigen::VectorXcd out(sz);
  std::vector<int> xd(np);
  for (Index idx = 0; idx < sz; ++idx) {
    decode_digits(idx, p, np, xd);
    out[idx] = f.values()[encode_digits(b.map(xd, z), p)];
  }
  return DenseFunction(p, np, f.kind(), std::move(out));
}

DenseFunction restrict_z(const BasisChangedView& view) {
  if (!view.z) throw std::invalid_argument("restrict_z: view has no z assignment");
  return restrict_z(view.source, view.basis, *view.z);
}

ProductFunction product_closure_under_basis_change(const ProductFunction& product,
                                                   const SpecialBasis& b,
                                                   std::span<const int> z) {
  if (product.p() != b.p() || product.n() != b.n())
    throw std::invalid_argument("product_closure_under_basis_change: shape mismatch");
  const int p = b.p();
  const std::vector<int> h = b.shifts(z);
  std::vector<std::vector<Cplx>> factors(b.n_prime(), std::vector<Cplx>(p, Cplx{1.0, 0.0}));
  Cplx scalar = product.scalar();
  for (int i = 0; i < b.n(); ++i) {
    const auto& table = product.factors()[i];
    const int j = b.owner(i);
    if (j < 0) {
      scalar *= table[h[i]];
    } else {
      for (int t = 0; t < p; ++t) factors[j][t] *= table[(t + h[i]) % p];
    }
  }
  // Products of unit values drift in the last bits; renormalize.
  scalar /= std::abs(scalar);
  for (auto& table : factors)
    for (Cplx& v : table) v /= std::abs(v);
  return ProductFunction(p, product.group(), scalar, std::move(factors));
}

CharacterCorrelation best_character_correlation(const DenseFunction& f) {
  if (!f.uniform_measure())
    throw std::invalid_argument("best_character_correlation: uniform measure only");
  const Eigen::VectorXcd fh = fourier_transform(f);
  Index best = 0;
  double best_abs = std::abs(fh[0]);
  for (Index a = 1; a < fh.size(); ++a) {
    const double v = std::abs(fh[a]);
    if (v > best_abs) {
      best_abs = v;
      best = a;
    }
  }
  CharacterCorrelation res;
  res.alpha.resize(f.n());
  decode_digits(best, f.p(), f.n(), res.alpha);
  res.value = best_abs;
  res.coefficient = fh[best];
  return res;
}

namespace {

struct AscentState {
  const DenseFunction* f;
  int p, n, r;
  std::vector<Cplx> roots;
  std::vector<std::vector<int>> factor_idx;  // root-of-unity index per letter
  Eigen::VectorXcd residual;                 // f(x) conj(prod f_i(x_i))
  Cplx correlation;

  void rebuild() {
    residual = f->values();
    std::vector<int> digits(n);
    for (Index x = 0; x < residual.size(); ++x) {
      decode_digits(x, p, n, digits);
      for (int i = 0; i < n; ++i) residual[x] *= std::conj(roots[factor_idx[i][digits[i]]]);
    }
    correlation = residual.mean();
  }

  // Best single-factor move for coordinate i; returns improvement.
  double improve(int i) {
    // w(s) = E over the fiber x_i = s of f conj(prod_{j != i} f_j).
    std::vector<Cplx> w(p, Cplx{0.0, 0.0});
    std::vector<int> digits(n);
    for (Index x = 0; x < residual.size(); ++x) {
      decode_digits(x, p, n, digits);
      w[digits[i]] += residual[x];
    }
    const double inv = 1.0 / double(residual.size());
    for (int s = 0; s < p; ++s) w[s] = w[s] * inv * roots[factor_idx[i][s]];

    std::vector<int> cand(p);
    Cplx new_corr{0.0, 0.0};
    for (int s = 0; s < p; ++s) {
      cand[s] = nearest_root_index(w[s], r);
      new_corr += std::conj(roots[cand[s]]) * w[s];
    }
    const double gain = std::abs(new_corr) - std::abs(correlation);
    if (gain <= 1e-10) return 0.0;
    for (Index x = 0; x < residual.size(); ++x) {
      decode_digits(x, p, n, digits);
      const int s = digits[i];
      residual[x] *= std::conj(roots[cand[s]]) * roots[factor_idx[i][s]];
    }
    factor_idx[i] = cand;
    correlation = new_corr;
    return gain;
  }
};

}  // namespace

AscentResult product_ascent_search(const DenseFunction& f, const FiniteAbelianGroup& h,
                                   int restarts, std::uint64_t seed) {
  if (!f.uniform_measure())
    throw std::invalid_argument("product_ascent_search: uniform measure only");
  if (restarts < 1) throw std::invalid_argument("product_ascent_search: restarts must be >= 1");
  const int p = f.p(), n = f.n();
  const int r = static_cast<int>(h.order());

  AscentState st;
  st.f = &f;
  st.p = p;
  st.n = n;
  st.r = r;
  st.roots = root_table(r);

  std::optional<AscentResult> best;
  for (int k = 0; k < restarts; ++k) {
    CounterRng rng(seed, std::uint64_t(k));
    st.factor_idx.assign(n, std::vector<int>(p, 0));
    if (k == 0 && r % p == 0) {
      // Seed the first restart from the best Fourier character.
      const CharacterCorrelation cc = best_character_correlation(f);
      const int step = r / p;
      for (int i = 0; i < n; ++i)
        for (int s = 0; s < p; ++s) st.factor_idx[i][s] = cc.alpha[i] * s % p * step;
    } else {
      for (int i = 0; i < n; ++i)
        for (int s = 0; s < p; ++s) st.factor_idx[i][s] = static_cast<int>(rng.next_below(r));
    }
    st.rebuild();

    std::vector<double> trace = {std::abs(st.correlation)};
    int passes = 0;
    for (; passes < 200; ++passes) {
      bool moved = false;
      for (int i = 0; i < n; ++i) {
        if (st.improve(i) > 0.0) {
          moved = true;
          trace.push_back(std::abs(st.correlation));
        }
      }
      if (!moved) break;
    }

    const double corr_abs = std::abs(st.correlation);
    if (!best || corr_abs > best->correlation) {
      std::vector<std::vector<Cplx>> factors(n, std::vector<Cplx>(p));
      for (int i = 0; i < n; ++i)
        for (int s = 0; s < p; ++s) factors[i][s] = st.roots[st.factor_idx[i][s]];
      const Cplx scalar =
          corr_abs > 0.0 ? st.correlation / corr_abs : Cplx{1.0, 0.0};
      best = AscentResult{ProductFunction(p, h, scalar, std::move(factors)), corr_abs, passes,
                          std::move(trace)};
    }
  }
  return *best;
}

void RobustifyParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) ||
      !(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("RobustifyParams: epsilon, delta, beta must lie in (0,1)");
  if (max_iters < 1 || samples < 1 || z_dim < 1)
    throw std::invalid_argument("RobustifyParams: max_iters, samples, z_dim must be positive");
}

namespace {

double pair_correlation(const DenseFunction& f, const ProductFunction& product) {
  return std::abs(inner_product(f, product.materialize()));
}

}  // namespace

RobustifyResult robustify_correlation(const DenseFunction& f, const ProductFunction& product,
                                      const RobustifyParams& params) {
  params.validate();
  if (f.kind() == Kind::Complex)
    throw std::invalid_argument("robustify_correlation: f must be real-valued");
  if (f.sup_norm() > 1.0 + kTolPointwise)
    throw std::invalid_argument("robustify_correlation: f must be 1-bounded");
  const double corr0 = pair_correlation(f, product);
  if (corr0 < params.epsilon)
    throw std::invalid_argument("robustify_correlation: |<f,P>| below epsilon");

  const int p = f.p();
  const double base_density = f.mean_real();
  CounterRng rng(params.seed, 0);

  DenseFunction cur_f = f;
  ProductFunction cur_p = product;
  double cur_corr = corr0;

  RobustifyResult res{RobustifyStatus::Exhausted, cur_f, cur_p, cur_corr, base_density, 0, {}, {}};

  const Index z_count = checked_pow(p, params.z_dim);
  std::vector<int> zd(params.z_dim);
  for (int iter = 0; iter < params.max_iters; ++iter) {
    if (cur_f.n() - params.z_dim < 1) break;
    bool collapse_seen = false;
    bool stepped = false;
    for (int bi = 0; bi < params.samples && !stepped; ++bi) {
      const SpecialBasis basis =
          sample_special_basis(p, cur_f.n(), cur_f.n() - params.z_dim, rng);
      int collapsed = 0;
      double best_corr = -1.0, best_density = 0.0;
      std::optional<std::pair<DenseFunction, ProductFunction>> best_pair;
      std::vector<int> best_z;
      for (Index zi = 0; zi < z_count; ++zi) {
        decode_digits(zi, p, params.z_dim, zd);
        DenseFunction fz = restrict_z(cur_f, basis, zd);
        ProductFunction pz = product_closure_under_basis_change(cur_p, basis, zd);
        const double dz = fz.mean_real();
        const double cz = pair_correlation(fz, pz);
        if (dz >= base_density + params.beta) {
          res.status = RobustifyStatus::DensityBump;
          res.f = std::move(fz);
          res.product = std::move(pz);
          res.correlation = cz;
          res.density = dz;
          res.applied.push_back({basis, std::vector<int>(zd)});
          return res;
        }
        if (cz < params.epsilon / 2.0) ++collapsed;
        if (cz > best_corr) {
          best_corr = cz;
          best_density = dz;
          best_pair.emplace(std::move(fz), std::move(pz));
          best_z = zd;
        }
      }
      ++res.bases_examined;
      const double fraction = double(collapsed) / double(z_count);
      if (fraction <= params.delta) continue;
      collapse_seen = true;

      RobustifyStep step;
      step.iteration = iter;
      step.basis_index = bi;
      step.collapse_fraction = fraction;
      step.correlation_before = cur_corr;
      step.correlation_after = best_corr;
      step.density_before = cur_f.mean_real();
      step.density_after = best_density;
      const double gain_floor = cur_corr + params.epsilon * params.delta / 4.0;
      const double density_floor =
          base_density - std::pow(params.beta, 1.0 - 2.0 * double(iter + 1) / params.max_iters);
      step.accepted = best_corr >= gain_floor && best_density >= density_floor;
      res.trace.push_back(step);
      if (step.accepted) {
        cur_f = std::move(best_pair->first);
        cur_p = std::move(best_pair->second);
        cur_corr = best_corr;
        res.applied.push_back({basis, best_z});
        stepped = true;
      }
    }
    if (!collapse_seen) {
      res.status = RobustifyStatus::RobustPair;
      break;
    }
    if (!stepped) break;  // collapse observed but no admissible step: Exhausted
  }
  res.f = cur_f;
  res.product = cur_p;
  res.correlation = cur_corr;
  res.density = cur_f.mean_real();
  return res;
}

}  // namespace apfree
