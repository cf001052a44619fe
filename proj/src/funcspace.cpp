#include "apfree/funcspace.hpp"

#include <algorithm>
#include <cmath>

namespace apfree {

namespace {

Eigen::VectorXd make_uniform(int p) {
  return Eigen::VectorXd::Constant(p, 1.0 / p);
}

bool is_uniform(const Eigen::VectorXd& m) {
  const double u = 1.0 / m.size();
  for (Index i = 0; i < m.size(); ++i)
    if (std::abs(m[i] - u) > kTolPointwise) return false;
  return true;
}

}  // namespace

DenseFunction::DenseFunction(int p, int n, Kind kind, Eigen::VectorXcd values,
                             Eigen::VectorXd measure)
    : p_(p), n_(n), kind_(kind), values_(std::move(values)) {
  if (p < 2 || n < 0) throw std::invalid_argument("DenseFunction: bad p or n");
  const Index sz = checked_pow(p, n);
  if (values_.size() != sz) throw std::invalid_argument("DenseFunction: wrong table length");
  if (measure.size() == 0) {
    measure_ = make_uniform(p);
    uniform_ = true;
  } else {
    if (measure.size() != p) throw std::invalid_argument("DenseFunction: measure length != p");
    double total = 0.0;
    for (Index i = 0; i < measure.size(); ++i) {
      if (measure[i] <= 0.0)
        throw std::invalid_argument("DenseFunction: measure atoms must be positive");
      total += measure[i];
    }
    if (std::abs(total - 1.0) > 1e-10)
      throw std::invalid_argument("DenseFunction: measure does not sum to 1");
    measure_ = std::move(measure);
    uniform_ = is_uniform(measure_);
  }
  if (kind_ == Kind::Boolean) {
    for (Index i = 0; i < values_.size(); ++i) {
      const Cplx v = values_[i];
      if (std::abs(v.imag()) > kTolPointwise ||
          (std::abs(v.real()) > kTolPointwise && std::abs(v.real() - 1.0) > kTolPointwise))
        throw std::invalid_argument("DenseFunction: boolean kind stores only {0,1}");
    }
  } else if (kind_ == Kind::Real) {
    for (Index i = 0; i < values_.size(); ++i)
      if (std::abs(values_[i].imag()) > kTolPointwise)
        throw std::invalid_argument("DenseFunction: real kind stores only reals");
  }
}

DenseFunction DenseFunction::constant(int p, int n, Cplx c, Kind kind) {
  return DenseFunction(p, n, kind, Eigen::VectorXcd::Constant(checked_pow(p, n), c));
}

DenseFunction DenseFunction::zero(int p, int n, Kind kind) {
  return constant(p, n, Cplx{0.0, 0.0}, kind);
}

DenseFunction DenseFunction::indicator(int p, int n, const std::vector<Index>& points) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(checked_pow(p, n));
  for (Index x : points) {
    if (x < 0 || x >= v.size()) throw std::invalid_argument("indicator: point out of range");
    v[x] = Cplx{1.0, 0.0};
  }
  return DenseFunction(p, n, Kind::Boolean, std::move(v));
}

DenseFunction DenseFunction::character(int p, int n, const std::vector<int>& alpha) {
  if (alpha.size() != static_cast<size_t>(n)) throw std::invalid_argument("character: bad alpha");
  const Index sz = checked_pow(p, n);
  const auto roots = root_table(p);
  Eigen::VectorXcd v(sz);
  std::vector<int> digits(n);
  for (Index x = 0; x < sz; ++x) {
    decode_digits(x, p, n, digits);
    int dot = 0;
    for (int i = 0; i < n; ++i) dot = (dot + alpha[i] * digits[i]) % p;
    v[x] = roots[dot];
  }
  return DenseFunction(p, n, Kind::Complex, std::move(v));
}

double DenseFunction::point_weight(Index idx) const {
  if (uniform_) return 1.0 / static_cast<double>(size());
  double w = 1.0;
  for (int i = 0; i < n_; ++i) {
    w *= measure_[idx % p_];
    idx /= p_;
  }
  return w;
}

Cplx DenseFunction::mean() const {
  if (uniform_) return values_.sum() / static_cast<double>(size());
  Cplx acc{0.0, 0.0};
  for (Index x = 0; x < size(); ++x) acc += point_weight(x) * values_[x];
  return acc;
}

double DenseFunction::mean_real() const { return mean().real(); }

double DenseFunction::norm_sq() const {
  if (uniform_) return values_.squaredNorm() / static_cast<double>(size());
  double acc = 0.0;
  for (Index x = 0; x < size(); ++x) acc += point_weight(x) * std::norm(values_[x]);
  return acc;
}

double DenseFunction::sup_norm() const {
  double m = 0.0;
  for (Index x = 0; x < size(); ++x) m = std::max(m, std::abs(values_[x]));
  return m;
}

void DenseFunction::assert_one_bounded(double tol) const {
  if (sup_norm() > 1.0 + tol)
    throw std::invalid_argument("DenseFunction: function is not 1-bounded");
}

void Restriction::validate(int n, int p) const {
  if (alive.size() + fixed_coords.size() != static_cast<size_t>(n))
    throw std::invalid_argument("Restriction: alive and fixed do not partition [n]");
  if (fixed_values.size() != fixed_coords.size())
    throw std::invalid_argument("Restriction: fixed assignment length mismatch");
  std::vector<char> seen(n, 0);
  for (int i : alive) {
    if (i < 0 || i >= n || seen[i]) throw std::invalid_argument("Restriction: bad alive set");
    seen[i] = 1;
  }
  for (size_t k = 0; k < fixed_coords.size(); ++k) {
    const int i = fixed_coords[k];
    if (i < 0 || i >= n || seen[i]) throw std::invalid_argument("Restriction: bad fixed set");
    seen[i] = 1;
    if (fixed_values[k] < 0 || fixed_values[k] >= p)
      throw std::invalid_argument("Restriction: fixed value out of alphabet");
  }
}

Restriction Restriction::full(int n) {
  Restriction r;
  r.alive.resize(n);
  for (int i = 0; i < n; ++i) r.alive[i] = i;
  return r;
}

Cplx inner_product(const DenseFunction& f, const DenseFunction& g) {
  if (f.p() != g.p() || f.n() != g.n())
    throw std::invalid_argument("inner_product: shape mismatch");
  if ((f.measure() - g.measure()).cwiseAbs().maxCoeff() > kTolPointwise)
    throw std::invalid_argument("inner_product: measure mismatch");
  if (f.uniform_measure()) {
    Cplx acc{0.0, 0.0};
    for (Index x = 0; x < f.size(); ++x) acc += f.values()[x] * std::conj(g.values()[x]);
    return acc / static_cast<double>(f.size());
  }
  Cplx acc{0.0, 0.0};
  for (Index x = 0; x < f.size(); ++x)
    acc += f.point_weight(x) * f.values()[x] * std::conj(g.values()[x]);
  return acc;
}

Eigen::VectorXcd fourier_transform(const DenseFunction& f) {
  if (!f.uniform_measure())
    throw std::invalid_argument("fourier_transform: non-uniform measure");
  const int p = f.p(), n = f.n();
  const auto roots = root_table(p);
  Eigen::VectorXcd v = f.values();
  // One DFT pass per coordinate; coordinate i has stride p^i.
  Eigen::MatrixXcd dft(p, p);
  for (int t = 0; t < p; ++t)
    for (int s = 0; s < p; ++s) dft(t, s) = std::conj(roots[(t * s) % p]) / double(p);
  std::vector<Cplx> buf(p);
  Index stride = 1;
  for (int i = 0; i < n; ++i) {
    const Index block = stride * p;
    for (Index base = 0; base < v.size(); base += block) {
      for (Index off = 0; off < stride; ++off) {
        for (int s = 0; s < p; ++s) buf[s] = v[base + off + s * stride];
        for (int t = 0; t < p; ++t) {
          Cplx acc{0.0, 0.0};
          for (int s = 0; s < p; ++s) acc += dft(t, s) * buf[s];
          v[base + off + t * stride] = acc;
        }
      }
    }
    stride = block;
  }
  return v;
}

DenseFunction inverse_fourier(const Eigen::VectorXcd& coeffs, int p, int n) {
  if (coeffs.size() != checked_pow(p, n))
    throw std::invalid_argument("inverse_fourier: wrong length");
  const auto roots = root_table(p);
  Eigen::VectorXcd v = coeffs;
  Eigen::MatrixXcd idft(p, p);
  for (int t = 0; t < p; ++t)
    for (int s = 0; s < p; ++s) idft(t, s) = roots[(t * s) % p];
  std::vector<Cplx> buf(p);
  Index stride = 1;
  for (int i = 0; i < n; ++i) {
    const Index block = stride * p;
    for (Index base = 0; base < v.size(); base += block) {
      for (Index off = 0; off < stride; ++off) {
        for (int s = 0; s < p; ++s) buf[s] = v[base + off + s * stride];
        for (int t = 0; t < p; ++t) {
          Cplx acc{0.0, 0.0};
          for (int s = 0; s < p; ++s) acc += idft(t, s) * buf[s];
          v[base + off + t * stride] = acc;
        }
      }
    }
    stride = block;
  }
  return DenseFunction(p, n, Kind::Complex, std::move(v));
}

DenseFunction average_outside(const DenseFunction& f, Subset t) {
  const int p = f.p(), n = f.n();
  Eigen::VectorXcd v = f.values();
  std::vector<Cplx> buf(p);
  Index stride = 1;
  for (int i = 0; i < n; ++i) {
    const Index block = stride * p;
    if (!(t >> i & 1)) {
      for (Index base = 0; base < v.size(); base += block) {
        for (Index off = 0; off < stride; ++off) {
          Cplx acc{0.0, 0.0};
          for (int s = 0; s < p; ++s) acc += f.measure()[s] * v[base + off + s * stride];
          for (int s = 0; s < p; ++s) v[base + off + s * stride] = acc;
        }
      }
    }
    stride = block;
  }
  return DenseFunction(p, n, Kind::Complex, std::move(v),
                       f.uniform_measure() ? Eigen::VectorXd() : f.measure());
}

EfronSteinPart efron_stein_part(const DenseFunction& f, Subset s) {
  if (f.n() < 64 && (s >> f.n())) throw std::invalid_argument("efron_stein_part: S not in [n]");
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(f.size());
  // Iterate subsets T of S.
  Subset t = s;
  while (true) {
    const int sign = (subset_size(s) - subset_size(t)) % 2 ? -1 : 1;
    acc += double(sign) * average_outside(f, t).values();
    if (t == 0) break;
    t = (t - 1) & s;
  }
  return EfronSteinPart{
      s, DenseFunction(f.p(), f.n(), Kind::Complex, std::move(acc),
                       f.uniform_measure() ? Eigen::VectorXd() : f.measure())};
}

DenseFunction efron_stein_part_fourier(const DenseFunction& f, Subset s) {
  Eigen::VectorXcd coeffs = fourier_transform(f);
  const int p = f.p(), n = f.n();
  std::vector<int> digits(n);
  for (Index a = 0; a < coeffs.size(); ++a) {
    decode_digits(a, p, n, digits);
    Subset supp = 0;
    for (int i = 0; i < n; ++i)
      if (digits[i] != 0) supp |= Subset(1) << i;
    if (supp != s) coeffs[a] = Cplx{0.0, 0.0};
  }
  return inverse_fourier(coeffs, p, n);
}

std::vector<double> level_weights_all(const DenseFunction& f) {
  const int p = f.p(), n = f.n();
  std::vector<double> w(n + 1, 0.0);
  if (f.uniform_measure()) {
    const Eigen::VectorXcd coeffs = fourier_transform(f);
    std::vector<int> digits(n);
    for (Index a = 0; a < coeffs.size(); ++a) {
      decode_digits(a, p, n, digits);
      int lvl = 0;
      for (int i = 0; i < n; ++i) lvl += (digits[i] != 0);
      w[lvl] += std::norm(coeffs[a]);
    }
    return w;
  }
  if (n > 24) throw std::invalid_argument("level_weights_all: n too large for subset route");
  // ||E_{subseteq T} f||^2 for every T, then Moebius inversion:
  // ||f^{=S}||^2 = sum_{T subseteq S} (-1)^{|S\T|} ||E_{subseteq T} f||^2.
  const Subset full = (Subset(1) << n) - 1;
  std::vector<double> msq(std::size_t(1) << n);
  for (Subset t = 0; t <= full; ++t) msq[t] = average_outside(f, t).norm_sq();
  for (Subset s = 0; s <= full; ++s) {
    double part = 0.0;
    Subset t = s;
    while (true) {
      const int sign = (subset_size(s) - subset_size(t)) % 2 ? -1 : 1;
      part += sign * msq[t];
      if (t == 0) break;
      t = (t - 1) & s;
    }
    w[subset_size(s)] += part;
  }
  return w;
}

double level_weight(const DenseFunction& f, int d, LevelMode mode) {
  if (d < 0 || d > f.n()) throw std::invalid_argument("level_weight: d out of range");
  const std::vector<double> w = level_weights_all(f);
  if (mode == LevelMode::Exact) return w[d];
  double acc = 0.0;
  for (int i = 0; i <= d; ++i) acc += w[i];
  return acc;
}

DenseFunction restrict_function(const DenseFunction& f, const Restriction& r) {
  r.validate(f.n(), f.p());
  const int p = f.p();
  const int m = static_cast<int>(r.alive.size());
  Index base = 0;
  for (size_t k = 0; k < r.fixed_coords.size(); ++k)
    base += checked_pow(p, r.fixed_coords[k]) * r.fixed_values[k];
  std::vector<Index> strides(m);
  for (int k = 0; k < m; ++k) strides[k] = checked_pow(p, r.alive[k]);
  const Index out_size = checked_pow(p, m);
  Eigen::VectorXcd v(out_size);
  std::vector<int> digits(m);
  for (Index z = 0; z < out_size; ++z) {
    decode_digits(z, p, m, digits);
    Index idx = base;
    for (int k = 0; k < m; ++k) idx += strides[k] * digits[k];
    v[z] = f.values()[idx];
  }
  return DenseFunction(f.p(), m, f.kind(), std::move(v),
                       f.uniform_measure() ? Eigen::VectorXd() : f.measure());
}

Restriction sample_random_restriction(int n, int p, double keep_prob,
                                      const Eigen::VectorXd& measure, CounterRng& rng) {
  if (!(keep_prob > 0.0 && keep_prob < 1.0))
    throw std::invalid_argument("sample_random_restriction: keep_prob not in (0,1)");
  Eigen::VectorXd mu = measure.size() ? measure : Eigen::VectorXd::Constant(p, 1.0 / p);
  Restriction r;
  for (int i = 0; i < n; ++i) {
    if (rng.next_bernoulli(keep_prob)) {
      r.alive.push_back(i);
    } else {
      double u = rng.next_double();
      int s = 0;
      while (s + 1 < p && u >= mu[s]) u -= mu[s], ++s;
      r.fixed_coords.push_back(i);
      r.fixed_values.push_back(s);
    }
  }
  return r;
}

namespace {

double restricted_mean(const DenseFunction& f, const Restriction& r) {
  // E over alive coordinates of the fiber; avoids materializing the table.
  const int p = f.p();
  const int m = static_cast<int>(r.alive.size());
  Index base = 0;
  for (size_t k = 0; k < r.fixed_coords.size(); ++k)
    base += checked_pow(p, r.fixed_coords[k]) * r.fixed_values[k];
  std::vector<Index> strides(m);
  for (int k = 0; k < m; ++k) strides[k] = checked_pow(p, r.alive[k]);
  const Index fiber = checked_pow(p, m);
  double acc = 0.0;
  double wacc = 0.0;
  std::vector<int> digits(m);
  for (Index z = 0; z < fiber; ++z) {
    decode_digits(z, p, m, digits);
    Index idx = base;
    double w = 1.0;
    for (int k = 0; k < m; ++k) {
      idx += strides[k] * digits[k];
      w *= f.measure()[digits[k]];
    }
    acc += w * f.values()[idx].real();
    wacc += w;
  }
  return wacc > 0.0 ? acc / wacc : 0.0;
}

Cplx restricted_mean_cplx(const DenseFunction& f, const Restriction& r) {
  const int p = f.p();
  const int m = static_cast<int>(r.alive.size());
  Index base = 0;
  for (size_t k = 0; k < r.fixed_coords.size(); ++k)
    base += checked_pow(p, r.fixed_coords[k]) * r.fixed_values[k];
  std::vector<Index> strides(m);
  for (int k = 0; k < m; ++k) strides[k] = checked_pow(p, r.alive[k]);
  const Index fiber = checked_pow(p, m);
  Cplx acc{0.0, 0.0};
  double wacc = 0.0;
  std::vector<int> digits(m);
  for (Index z = 0; z < fiber; ++z) {
    decode_digits(z, p, m, digits);
    Index idx = base;
    double w = 1.0;
    for (int k = 0; k < m; ++k) {
      idx += strides[k] * digits[k];
      w *= f.measure()[digits[k]];
    }
    acc += w * f.values()[idx];
    wacc += w;
  }
  return wacc > 0.0 ? acc / wacc : Cplx{0.0, 0.0};
}

}  // namespace

BumpSearchResult restriction_bump_search(const DenseFunction& f, int d, double xi,
                                         Index sample_budget, std::uint64_t seed) {
  if (f.kind() != Kind::Boolean)
    throw std::invalid_argument("restriction_bump_search: boolean functions only");
  if (d < 1 || d > f.n()) throw std::invalid_argument("restriction_bump_search: bad d");
  if (!(xi > 0.0)) throw std::invalid_argument("restriction_bump_search: xi must be positive");
  const double alpha = f.mean_real();
  const double target = alpha + xi / (4.0 * std::exp(1.0));
  const int n = f.n(), p = f.p();
  const double min_alive = double(n) / (2.0 * d);

  BumpSearchResult best;
  best.target = target;
  best.best_mean = -1.0;

  auto consider = [&](const Restriction& r) {
    if (static_cast<double>(r.alive.size()) < min_alive) return;
    const double m = restricted_mean(f, r);
    if (m > best.best_mean) {
      best.best_mean = m;
      if (!best.found) {
        best.restriction = r;
        best.achieved_mean = m;
      }
    }
    if (m >= target && (!best.found || m > best.achieved_mean)) {
      best.found = true;
      best.restriction = r;
      best.achieved_mean = m;
    }
  };

  // Exhaustive over every (I, y) when the total fiber count is small;
  // this covers the support of the proof's restriction distribution.
  const bool exhaustive = n <= 16 && checked_pow(2, n) * f.size() <= Index(1) << 24;
  if (exhaustive) {
    const Subset full = (Subset(1) << n) - 1;
    for (Subset alive_mask = 0; alive_mask <= full; ++alive_mask) {
      Restriction r;
      for (int i = 0; i < n; ++i)
        if (alive_mask >> i & 1)
          r.alive.push_back(i);
        else
          r.fixed_coords.push_back(i);
      if (static_cast<double>(r.alive.size()) < min_alive) continue;
      const int nfixed = static_cast<int>(r.fixed_coords.size());
      const Index fibers = checked_pow(p, nfixed);
      r.fixed_values.assign(nfixed, 0);
      for (Index y = 0; y < fibers; ++y) {
        decode_digits(y, p, nfixed, r.fixed_values);
        consider(r);
      }
    }
  } else {
    CounterRng rng(seed, 0);
    for (Index t = 0; t < sample_budget; ++t) {
      consider(sample_random_restriction(n, p, 1.0 / d, f.measure(), rng));
    }
  }
  return best;
}

CorrelationEventResult restriction_correlation_event(const DenseFunction& g, int d, double xi,
                                                     Index trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("restriction_correlation_event: trials < 1");
  if (!(xi > 0.0)) throw std::invalid_argument("restriction_correlation_event: xi must be positive");
  g.assert_one_bounded(1e-9);
  CorrelationEventResult res;
  res.threshold = std::sqrt(xi / (2.0 * std::exp(1.0)));
  res.trials = trials;
  CounterRng rng(seed, 1);
  Index hits = 0;
  for (Index t = 0; t < trials; ++t) {
    const Restriction r =
        sample_random_restriction(g.n(), g.p(), 1.0 / (2.0 * d), g.measure(), rng);
    if (std::abs(restricted_mean_cplx(g, r)) >= res.threshold) ++hits;
  }
  res.empirical_probability = double(hits) / double(trials);
  res.stderr_estimate =
      std::sqrt(std::max(res.empirical_probability * (1.0 - res.empirical_probability), 1e-12) /
                double(trials));
  return res;
}

double restriction_mean_square_exact(const DenseFunction& f, double keep_prob) {
  double acc = 0.0;
  if (f.uniform_measure()) {
    const Eigen::VectorXcd coeffs = fourier_transform(f);
    std::vector<int> digits(f.n());
    for (Index a = 0; a < coeffs.size(); ++a) {
      decode_digits(a, f.p(), f.n(), digits);
      int lvl = 0;
      for (int i = 0; i < f.n(); ++i) lvl += (digits[i] != 0);
      acc += std::norm(coeffs[a]) * std::pow(1.0 - keep_prob, lvl);
    }
    return acc;
  }
  const std::vector<double> w = level_weights_all(f);
  for (size_t lvl = 0; lvl < w.size(); ++lvl)
    acc += w[lvl] * std::pow(1.0 - keep_prob, double(lvl));
  return acc;
}

double restriction_mean_square_enumerated(const DenseFunction& f, double keep_prob) {
  const int n = f.n(), p = f.p();
  if (n > 12) throw std::invalid_argument("restriction_mean_square_enumerated: n too large");
  const Subset full = (Subset(1) << n) - 1;
  double acc = 0.0;
  for (Subset alive_mask = 0; alive_mask <= full; ++alive_mask) {
    const int na = subset_size(alive_mask);
    const double pmask =
        std::pow(keep_prob, na) * std::pow(1.0 - keep_prob, n - na);
    Restriction r;
    for (int i = 0; i < n; ++i)
      if (alive_mask >> i & 1)
        r.alive.push_back(i);
      else
        r.fixed_coords.push_back(i);
    const int nfixed = static_cast<int>(r.fixed_coords.size());
    const Index fibers = checked_pow(p, nfixed);
    r.fixed_values.assign(nfixed, 0);
    for (Index y = 0; y < fibers; ++y) {
      decode_digits(y, p, nfixed, r.fixed_values);
      double wy = 1.0;
      for (int v : r.fixed_values) wy *= f.measure()[v];
      acc += pmask * wy * std::norm(restricted_mean_cplx(f, r));
    }
  }
  return acc;
}

}  // namespace apfree
