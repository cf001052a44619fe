#include "apfree/aps.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace apfree {

TripleDistribution::TripleDistribution(int sigma_size, int gamma_size, int phi_size,
                                       std::vector<Atom> atoms)
    : sizes_{sigma_size, gamma_size, phi_size}, atoms_(std::move(atoms)) {
  double total = 0.0;
  for (const Atom& at : atoms_) {
    for (int c = 0; c < 3; ++c)
      if (at.point[c] < 0 || at.point[c] >= sizes_[c])
        throw std::invalid_argument("TripleDistribution: atom letter out of range");
    if (at.probability <= 0.0)
      throw std::invalid_argument("TripleDistribution: probabilities must be positive");
    total += at.probability;
  }
  if (std::abs(total - 1.0) > kTolPointwise)
    throw std::invalid_argument("TripleDistribution: probabilities do not sum to 1");
}

std::vector<std::array<int, 3>> TripleDistribution::support() const {
  std::vector<std::array<int, 3>> s;
  s.reserve(atoms_.size());
  for (const Atom& at : atoms_) s.push_back(at.point);
  return s;
}

PointSet::PointSet(int p, int n) : p_(p), n_(n), universe_(checked_pow(p, n)) {
  bits_.assign((universe_ + 63) / 64, 0);
}

PointSet PointSet::from_function(const DenseFunction& f) {
  if (f.kind() != Kind::Boolean)
    throw std::invalid_argument("PointSet: boolean functions only");
  PointSet s(f.p(), f.n());
  for (Index x = 0; x < f.size(); ++x)
    if (f.values()[x].real() > 0.5) s.insert(x);
  return s;
}

Index PointSet::size() const {
  Index c = 0;
  for (std::uint64_t w : bits_) c += __builtin_popcountll(w);
  return c;
}

std::vector<Index> PointSet::members() const {
  std::vector<Index> m;
  m.reserve(size());
  for (Index x = 0; x < universe_; ++x)
    if (contains(x)) m.push_back(x);
  return m;
}

DenseFunction PointSet::to_function() const {
  return DenseFunction::indicator(p_, n_, members());
}

TripleDistribution restricted_ap_distribution(int p, const std::vector<int>& diffs) {
  if (p < 3 || !is_prime(p)) throw std::invalid_argument("restricted_ap_distribution: bad p");
  if (diffs.empty()) throw std::invalid_argument("restricted_ap_distribution: empty diffs");
  std::vector<TripleDistribution::Atom> atoms;
  const double prob = 1.0 / (double(p) * diffs.size());
  for (int x = 0; x < p; ++x)
    for (int a : diffs)
      atoms.push_back({{x, (x + a) % p, (x + 2 * a) % p}, prob});
  return TripleDistribution(p, p, p, std::move(atoms));
}

namespace {

// Index of x + a over F_p^n from digit arrays.
Index shifted_index(std::span<const int> xd, std::span<const int> ad, int mult, int p) {
  Index idx = 0, stride = 1;
  for (size_t i = 0; i < xd.size(); ++i) {
    idx += stride * ((xd[i] + mult * ad[i]) % p);
    stride *= p;
  }
  return idx;
}

Cplx triple_correlation_direct(const DenseFunction& f, const DenseFunction& g,
                               const DenseFunction& h) {
  const int p = f.p(), n = f.n();
  const Index sz = f.size();
  const Index na = checked_pow(3, n);
  std::vector<int> ad(n, 0), xd(n);
  Cplx acc{0.0, 0.0};
  for (Index ai = 0; ai < na; ++ai) {
    for (Index x = 0; x < sz; ++x) {
      decode_digits(x, p, n, xd);
      acc += f.values()[x] * g.values()[shifted_index(xd, ad, 1, p)] *
             h.values()[shifted_index(xd, ad, 2, p)];
    }
    // odometer over {0,1,2}^n
    for (int i = 0; i < n; ++i) {
      if (++ad[i] < 3) break;
      ad[i] = 0;
    }
  }
  return acc / (double(sz) * double(na));
}

Cplx triple_correlation_fourier(const DenseFunction& f, const DenseFunction& g,
                                const DenseFunction& h) {
  const int p = f.p(), n = f.n();
  const Eigen::VectorXcd fh = fourier_transform(f);
  const Eigen::VectorXcd gh = fourier_transform(g);
  const Eigen::VectorXcd hh = fourier_transform(h);
  std::vector<Cplx> s_hat(p);
  for (int t = 0; t < p; ++t)
    s_hat[t] = (Cplx{1.0, 0.0} + unit_root(t, p) + unit_root(2 * t % p, p)) / 3.0;
  std::vector<int> bd(n), gd(n);
  Cplx acc{0.0, 0.0};
  for (Index beta = 0; beta < fh.size(); ++beta) {
    decode_digits(beta, p, n, bd);
    for (Index gamma = 0; gamma < fh.size(); ++gamma) {
      decode_digits(gamma, p, n, gd);
      Cplx kernel{1.0, 0.0};
      Index minus = 0, stride = 1;
      for (int i = 0; i < n; ++i) {
        kernel *= s_hat[(bd[i] + 2 * gd[i]) % p];
        minus += stride * ((2 * p - bd[i] - gd[i]) % p);
        stride *= p;
      }
      acc += fh[minus] * gh[beta] * hh[gamma] * kernel;
    }
  }
  return acc;
}

}  // namespace

Cplx triple_correlation(const DenseFunction& f, const DenseFunction& g, const DenseFunction& h,
                        TripleCorrelationMethod method) {
  if (f.p() != g.p() || f.p() != h.p() || f.n() != g.n() || f.n() != h.n())
    throw std::invalid_argument("triple_correlation: shape mismatch");
  return method == TripleCorrelationMethod::Direct ? triple_correlation_direct(f, g, h)
                                                   : triple_correlation_fourier(f, g, h);
}

std::optional<FreeWitness> find_restricted_ap(const PointSet& a_set) {
  const int p = a_set.p(), n = a_set.n();
  const Index na = checked_pow(3, n);
  std::vector<int> xd(n), ad(n);
  std::vector<Index> strides(n);
  for (int i = 0; i < n; ++i) strides[i] = checked_pow(p, i);

  // delta[i][x_digit][old_a_digit]: change of idx(x+a) when a_i steps along
  // the odometer (old -> old+1, or 2 -> 0). The third point idx(x+2a) is
  // only computed on a hit, which happens with probability ~density.
  std::vector<std::array<std::array<Index, 3>, 5>> delta(n);
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < p && s < 5; ++s)
      for (int old = 0; old < 3; ++old) {
        const int next = old + 1 == 3 ? 0 : old + 1;
        delta[i][s][old] = strides[i] * (Index((s + next) % p) - Index((s + old) % p));
      }
  const bool small_p = p <= 5;

  for (Index x = 0; x < a_set.universe(); ++x) {
    if (!a_set.contains(x)) continue;
    decode_digits(x, p, n, xd);
    std::fill(ad.begin(), ad.end(), 0);
    Index idx1 = x;  // idx(x+a), maintained incrementally
    for (Index ai = 1; ai < na; ++ai) {
      for (int i = 0; i < n; ++i) {
        const int old = ad[i];
        if (small_p) {
          idx1 += delta[i][xd[i]][old];
        } else {
          idx1 -= strides[i] * ((xd[i] + old) % p);
          idx1 += strides[i] * ((xd[i] + (old + 1 == 3 ? 0 : old + 1)) % p);
        }
        ad[i] = old + 1 == 3 ? 0 : old + 1;
        if (ad[i] != 0) break;
      }
      if (a_set.contains(idx1)) {
        Index idx2 = 0;
        for (int i = 0; i < n; ++i) idx2 += strides[i] * ((xd[i] + 2 * ad[i]) % p);
        if (a_set.contains(idx2)) return FreeWitness{xd, ad};
      }
    }
  }
  return std::nullopt;
}

bool is_restricted_ap_free(const PointSet& a_set) { return !find_restricted_ap(a_set).has_value(); }

std::array<bool, 3> pairwise_connected(const TripleDistribution& mu) {
  const std::array<std::array<int, 2>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
  std::array<bool, 3> result{};
  for (int k = 0; k < 3; ++k) {
    const int ci = pairs[k][0], cj = pairs[k][1];
    const int left = mu.size(ci), right = mu.size(cj);
    std::vector<int> parent(left + right);
    for (size_t v = 0; v < parent.size(); ++v) parent[v] = int(v);
    auto find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (const auto& at : mu.atoms()) {
      const int a = find(at.point[ci]);
      const int b = find(left + at.point[cj]);
      parent[a] = b;
    }
    const int root = find(0);
    bool connected = true;
    for (size_t v = 0; v < parent.size(); ++v) connected &= (find(int(v)) == root);
    result[k] = connected;
  }
  return result;
}

namespace {

struct SearchState {
  std::vector<std::array<Index, 3>> triples;
  std::vector<std::vector<int>> incident;  // point -> triple ids
  std::vector<int> order;                  // points in branch order
  std::vector<char> status;                // 0 undecided, 1 in, 2 out
  int best = 0;
  std::vector<Index> best_set;
  std::vector<Index> current;
  std::uint64_t nodes = 0;
  std::uint64_t budget = 0;
  bool exhausted_budget = false;

  bool can_take(Index q) const {
    for (int tid : incident[q]) {
      int in_count = 0;
      for (Index other : triples[tid])
        if (other != q && status[other] == 1) ++in_count;
      // Triples may repeat a point only when p=3 collapses nothing; the
      // three members are always distinct for prime p >= 3.
      if (in_count == 2) return false;
    }
    return true;
  }

  void dfs(size_t depth) {
    if (budget && nodes >= budget) {
      exhausted_budget = true;
      return;
    }
    ++nodes;
    if (depth == order.size()) {
      if (int(current.size()) > best) {
        best = int(current.size());
        best_set = current;
      }
      return;
    }
    if (int(current.size()) + int(order.size() - depth) <= best) return;  // bound
    const Index q = order[depth];
    if (can_take(q)) {
      status[q] = 1;
      current.push_back(q);
      dfs(depth + 1);
      current.pop_back();
    }
    status[q] = 2;
    dfs(depth + 1);
    status[q] = 0;
  }
};

}  // namespace

ExtremalSearchResult extremal_search(int p, int n, SearchMode mode, std::uint64_t budget) {
  const Index universe = checked_pow(p, n);
  if (mode == SearchMode::Exhaustive && universe > 25)
    throw std::invalid_argument("extremal_search: exhaustive mode requires p^n <= 25");

  SearchState st;
  st.budget = mode == SearchMode::Exhaustive ? 0 : budget;
  st.status.assign(universe, 0);
  st.incident.assign(universe, {});

  // Forbidden triples {x, x+a, x+2a}, a != 0, deduplicated as sets.
  std::set<std::array<Index, 3>> seen;
  const Index na = checked_pow(3, n);
  std::vector<int> xd(n), ad(n);
  for (Index x = 0; x < universe; ++x) {
    decode_digits(x, p, n, xd);
    for (Index ai = 1; ai < na; ++ai) {
      decode_digits(ai, 3, n, ad);
      std::array<Index, 3> t = {x, shifted_index(xd, ad, 1, p), shifted_index(xd, ad, 2, p)};
      std::sort(t.begin(), t.end());
      seen.insert(t);
    }
  }
  st.triples.assign(seen.begin(), seen.end());
  for (size_t tid = 0; tid < st.triples.size(); ++tid)
    for (Index q : st.triples[tid]) st.incident[q].push_back(int(tid));

  // Branch on high-degree points first; ties by index.
  st.order.resize(universe);
  for (Index q = 0; q < universe; ++q) st.order[q] = int(q);
  std::stable_sort(st.order.begin(), st.order.end(), [&](int a, int b) {
    return st.incident[a].size() > st.incident[b].size();
  });

  // Greedy seed in branch order.
  for (int q : st.order) {
    if (st.can_take(q)) {
      st.status[q] = 1;
      st.current.push_back(q);
    }
  }
  st.best = int(st.current.size());
  st.best_set = st.current;
  for (Index q : st.current) st.status[q] = 0;
  st.current.clear();

  st.dfs(0);

  ExtremalSearchResult res;
  res.size = st.best;
  res.set = st.best_set;
  std::sort(res.set.begin(), res.set.end());
  res.optimal = !st.exhausted_budget;
  res.nodes_explored = st.nodes;
  return res;
}

}  // namespace apfree
