#include "apfree/increment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace apfree {

void IncrementConfig::validate() const {
  if (d < 1) throw std::invalid_argument("IncrementConfig: d must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("IncrementConfig: epsilon");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("IncrementConfig: beta");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("IncrementConfig: delta");
  if (robustify_iters < 1 || robustify_samples < 1 || robustify_z_dim < 1)
    throw std::invalid_argument("IncrementConfig: robustify parameters must be positive");
  if (restriction_samples < 1 || bump_budget < 1)
    throw std::invalid_argument("IncrementConfig: sample budgets must be positive");
  if (r < 0) throw std::invalid_argument("IncrementConfig: r must be >= 0");
  if (keep_prob < 0.0 || keep_prob >= 1.0)
    throw std::invalid_argument("IncrementConfig: keep_prob out of range");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("IncrementConfig: eta");
  if (!(good_block_fraction > 0.0 && good_block_fraction <= 1.0))
    throw std::invalid_argument("IncrementConfig: good_block_fraction");
  if (!(max_dimension_loss > 0.0 && max_dimension_loss < 1.0))
    throw std::invalid_argument("IncrementConfig: max_dimension_loss");
}

int IncrementConfig::min_dimension(int n) const {
  const int m = static_cast<int>(std::ceil(double(n) * (1.0 - max_dimension_loss) - 1e-12));
  return std::max(1, m);
}

DenseFunction replay_trace(const DenseFunction& input, const IncrementTrace& trace) {
  DenseFunction f = input;
  std::optional<SpecialBasis> pending;
  for (const TraceStep& step : trace.steps) {
    switch (step.type) {
      case TraceStep::Type::CoordinateDrop:
        break;  // informational only; the coordinates leave through the z-part
      case TraceStep::Type::BasisChange:
        if (pending) throw std::invalid_argument("replay_trace: dangling BasisChange");
        pending = step.basis;
        break;
      case TraceStep::Type::ZRestriction:
        if (!pending) throw std::invalid_argument("replay_trace: ZRestriction without basis");
        f = restrict_z(f, *pending, step.z);
        pending.reset();
        break;
      case TraceStep::Type::RandomRestriction:
        f = restrict_function(f, step.restriction);
        break;
    }
  }
  if (pending) throw std::invalid_argument("replay_trace: trailing BasisChange");
  return f;
}

WReport pair_correlation_W_report(const DenseFunction& f) {
  if (f.kind() != Kind::Boolean)
    throw std::invalid_argument("pair_correlation_W: boolean functions only");
  const int p = f.p(), n = f.n();
  const MarkovChain chain = ap_difference_chain(p);
  WReport rep;
  rep.operator_route = inner_product(f, apply_tensor(chain, f)).real();

  // W = sum_alpha |hat f(alpha)|^2 prod_i lambda_{alpha_i},
  // lambda_t = (1 + w^t + w^{2t}) / 3 (the chain's eigenvalue at chi_t).
  const Eigen::VectorXcd fh = fourier_transform(f);
  std::vector<Cplx> lam(p);
  for (int t = 0; t < p; ++t)
    lam[t] = (Cplx{1.0, 0.0} + unit_root(t, p) + unit_root(2 * t % p, p)) / 3.0;
  std::vector<int> digits(n);
  Cplx acc{0.0, 0.0};
  for (Index a = 0; a < fh.size(); ++a) {
    decode_digits(a, p, n, digits);
    Cplx prod{1.0, 0.0};
    for (int i = 0; i < n; ++i) prod *= lam[digits[i]];
    acc += std::norm(fh[a]) * prod;
  }
  rep.fourier_route = acc.real();
  if (std::abs(rep.operator_route - rep.fourier_route) > kTolAccum)
    throw std::logic_error("pair_correlation_W: operator and Fourier routes disagree");
  rep.value = rep.operator_route;
  return rep;
}

double pair_correlation_W(const DenseFunction& f) { return pair_correlation_W_report(f).value; }

namespace {

LowWeightOutcome low_weight_with(const DenseFunction& f, const IncrementConfig& cfg, double w) {
  LowWeightOutcome out;
  out.w = w;
  out.alpha = f.mean_real();
  out.activated = w <= out.alpha * out.alpha / 100.0;
  if (!out.activated) return out;
  const std::vector<double> levels = level_weights_all(f);
  const int d = std::min(cfg.d, f.n());
  for (int lvl = 1; lvl <= d; ++lvl) out.w_low += levels[lvl];
  out.bump = restriction_bump_search(f, d, std::max(out.w_low, kTolPointwise), cfg.bump_budget,
                                     cfg.seed ^ 0x1u);
  return out;
}

DenseFunction subtract_mean(const DenseFunction& f) {
  const double alpha = f.mean_real();
  Eigen::VectorXcd v = f.values();
  for (Index x = 0; x < v.size(); ++x) v[x] -= alpha;
  return DenseFunction(f.p(), f.n(), Kind::Real, std::move(v));
}

bool all_zero(const std::vector<int>& v) {
  return std::all_of(v.begin(), v.end(), [](int x) { return x == 0; });
}

CorrelationBranchResult correlation_with(const DenseFunction& f, const IncrementConfig& cfg,
                                         double w) {
  const double alpha = f.mean_real();
  if (w <= alpha * alpha / 100.0)
    throw std::invalid_argument("correlation_branch: requires W > alpha^2/100");
  CorrelationBranchResult res;
  const double trivial = std::pow(3.0, -f.n());
  res.lambda_value = std::abs(trivial * alpha - alpha * w);
  res.lambda_floor = alpha * alpha * alpha / 200.0;
  res.size_floor_ok = trivial <= alpha * alpha / 200.0;

  const CharacterCorrelation cc = best_character_correlation(subtract_mean(f));
  if (!all_zero(cc.alpha) && cc.value >= cfg.epsilon) {
    res.success = true;
    res.product = ProductFunction::from_character(f.p(), cc.alpha);
    res.f_prime = f;
    res.correlation = cc.value;
    return res;
  }

  // Random restrictions at keep probability 1/(2d),
  // looking for a fiber whose centered function correlates with a character.
  CounterRng rng(cfg.seed, 11);
  const double keep = cfg.restriction_keep(f.p());
  const int min_dim = cfg.min_dimension(f.n());
  double best_seen = cc.value;
  for (int s = 0; s < cfg.restriction_samples; ++s) {
    const Restriction r =
        sample_random_restriction(f.n(), f.p(), keep, f.measure(), rng);
    if (static_cast<int>(r.alive.size()) < min_dim || r.alive.size() == size_t(f.n())) continue;
    DenseFunction fr = restrict_function(f, r);
    if (fr.mean_real() < alpha - cfg.eta) continue;
    const CharacterCorrelation ccr = best_character_correlation(subtract_mean(fr));
    best_seen = std::max(best_seen, ccr.value);
    if (!all_zero(ccr.alpha) && ccr.value >= cfg.epsilon) {
      res.success = true;
      res.product = ProductFunction::from_character(fr.p(), ccr.alpha);
      res.f_prime = std::move(fr);
      res.restriction = r;
      res.correlation = ccr.value;
      return res;
    }
  }
  std::ostringstream os;
  os << "no character correlation >= " << cfg.epsilon << " found (best " << best_seen << ")";
  res.diagnostics = os.str();
  return res;
}

}  // namespace

LowWeightOutcome low_weight_branch(const DenseFunction& f, const IncrementConfig& cfg) {
  cfg.validate();
  return low_weight_with(f, cfg, pair_correlation_W(f));
}

CorrelationBranchResult correlation_branch(const DenseFunction& f, const IncrementConfig& cfg) {
  cfg.validate();
  return correlation_with(f, cfg, pair_correlation_W(f));
}

namespace {

int table_root_index(Cplx v, int r) {
  const double sector = 2.0 * std::numbers::pi_v<double> / r;
  long long k = std::llround(std::arg(v) / sector);
  k %= r;
  if (k < 0) k += r;
  const Cplx root = unit_root(static_cast<int>(k), r);
  if (std::abs(v - root) > 1e-6)
    throw std::invalid_argument("pigeonhole_block_step: factor value is not a root of unity");
  return static_cast<int>(k);
}

// Inverse of the basis matrix over F_p: columns are the images of the basis
// vectors, solved once so membership in a (z, z') fiber is a matrix-vector
// product per point.
std::vector<std::vector<int>> invert_basis(const SpecialBasis& b) {
  const int n = b.n(), p = b.p();
  const PrimeField fp(p);
  // m = [v | u] as columns: m[row][col] with col j < n' from v, else u.
  std::vector<std::vector<int>> m(n, std::vector<int>(2 * n, 0));
  for (int j = 0; j < b.n_prime(); ++j)
    for (int i = 0; i < n; ++i) m[i][j] = b.v()[j][i];
  for (int j = 0; j < b.z_dim(); ++j)
    for (int i = 0; i < n; ++i) m[i][b.n_prime() + j] = b.u()[j][i];
  for (int i = 0; i < n; ++i) m[i][n + i] = 1;  // augment with identity
  int row = 0;
  for (int c = 0; c < n; ++c) {
    int sel = -1;
    for (int i = row; i < n; ++i)
      if (m[i][c] != 0) {
        sel = i;
        break;
      }
    if (sel < 0) throw std::logic_error("invert_basis: singular basis");
    std::swap(m[row], m[sel]);
    int inv = 1;
    for (int k = 0; k < p - 2; ++k) inv = fp.mul(inv, m[row][c]);
    for (int k = 0; k < 2 * n; ++k) m[row][k] = fp.mul(m[row][k], inv);
    for (int i = 0; i < n; ++i) {
      if (i == row || m[i][c] == 0) continue;
      const int factor = m[i][c];
      for (int k = 0; k < 2 * n; ++k)
        m[i][k] = fp.add(m[i][k], fp.neg(fp.mul(factor, m[row][k])));
    }
    ++row;
  }
  std::vector<std::vector<int>> inv(n, std::vector<int>(n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) inv[i][k] = m[i][n + k];
  return inv;
}

}  // namespace

PigeonholeResult pigeonhole_block_step(const DenseFunction& f_prime,
                                       const ProductFunction& product,
                                       const IncrementConfig& cfg, int min_dim,
                                       std::uint64_t seed_stream) {
  cfg.validate();
  if (f_prime.kind() != Kind::Boolean)
    throw std::invalid_argument("pigeonhole_block_step: boolean functions only");
  if (f_prime.p() != product.p() || f_prime.n() != product.n())
    throw std::invalid_argument("pigeonhole_block_step: shape mismatch");
  const int p = f_prime.p(), n = f_prime.n();
  const int r_h = static_cast<int>(product.group().order());

  // Group coordinates by their factor tables as exact root-of-unity indices.
  std::map<std::vector<int>, std::vector<int>> classes;
  std::vector<std::vector<int>> keys(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> key(p);
    for (int s = 0; s < p; ++s) key[s] = table_root_index(product.factors()[i][s], r_h);
    classes[key].push_back(i);
    keys[i] = std::move(key);
  }
  std::vector<int> big;
  for (int i = 0; i < n; ++i) {  // first-seen tie break, by smallest coordinate
    const auto& cls = classes[keys[i]];
    if (cls.size() > big.size()) big = cls;
  }

  // Smallest b with b * (k_t - k_0) = 0 mod r_h for all letters t; block
  // products of length b then collapse to constants (Fact-5.3 cancellation).
  const std::vector<int>& key = keys[big.front()];
  int b_eff = 1;
  for (int s = 0; s < p; ++s) {
    int diff = ((key[s] - key[0]) % r_h + r_h) % r_h;
    const int need = r_h / std::gcd(r_h, diff == 0 ? r_h : diff);
    b_eff = std::lcm(b_eff, need);
  }

  const int total_blocks = static_cast<int>(big.size()) / b_eff;
  if (total_blocks < 1) throw NoGoodZ("pigeonhole_block_step: class smaller than one block");
  const int drop = static_cast<int>(big.size()) % b_eff;
  std::vector<int> dropped(big.end() - drop, big.end());
  big.resize(big.size() - drop);

  std::vector<std::vector<int>> v(total_blocks, std::vector<int>(n, 0));
  for (size_t k = 0; k < big.size(); ++k) v[k / b_eff][big[k]] = 1;
  const SpecialBasis basis = SpecialBasis::complete(p, n, std::move(v));
  const int z_dim = basis.z_dim();

  // Express every member of the set in basis coordinates once, bucketed by
  // its z-part, so scoring a sampled (z, z') costs one bucket scan.
  const auto inv = invert_basis(basis);
  std::map<std::vector<int>, std::vector<std::vector<int>>> by_z;  // z -> x'-parts
  {
    std::vector<int> yd(n), coords(n);
    for (Index y = 0; y < f_prime.size(); ++y) {
      if (f_prime.values()[y].real() < 0.5) continue;
      decode_digits(y, p, n, yd);
      for (int i = 0; i < n; ++i) {
        int acc = 0;
        for (int k = 0; k < n; ++k) acc = (acc + inv[i][k] * yd[k]) % p;
        coords[i] = acc;
      }
      std::vector<int> zpart(coords.begin() + basis.n_prime(), coords.end());
      by_z[zpart].emplace_back(coords.begin(), coords.begin() + basis.n_prime());
    }
  }

  struct Candidate {
    std::vector<int> z;
    std::vector<int> good;  // good block indices, ascending
    std::vector<int> z_fix; // values for the bad blocks, aligned with bad
    Index members = 0;
    double density = 0.0;
    bool meets_floor = false;
  };
  std::optional<Candidate> best;

  auto try_z = [&](const std::vector<int>& z) {
    const std::vector<int> h = basis.shifts(z);
    std::vector<int> good, bad;
    for (int j = 0; j < total_blocks; ++j) {
      bool ok = true;
      for (size_t k = size_t(j) * b_eff; k < size_t(j + 1) * b_eff; ++k)
        ok &= h[big[k]] == 0;
      (ok ? good : bad).push_back(j);
    }
    if (double(good.size()) + 1e-12 < cfg.good_block_fraction * total_blocks) return;
    if (good.empty()) return;

    // Best z' for the bad blocks: the modal bad-coordinate pattern of the
    // members living in this z-fiber (all-zero when the fiber is empty).
    std::vector<int> z_fix(bad.size(), 0);
    Index count = 0;
    const auto it = by_z.find(z);
    if (it != by_z.end()) {
      std::map<std::vector<int>, Index> pattern_count;
      for (const auto& xp : it->second) {
        std::vector<int> pat(bad.size());
        for (size_t t = 0; t < bad.size(); ++t) pat[t] = xp[bad[t]];
        ++pattern_count[pat];
      }
      for (const auto& [pat, c] : pattern_count)
        if (c > count) {
          count = c;
          z_fix = pat;
        }
    }
    Candidate cand;
    cand.z = z;
    cand.good = good;
    cand.z_fix = z_fix;
    cand.members = count;
    cand.density = double(count) / double(checked_pow(p, int(good.size())));
    cand.meets_floor = static_cast<int>(good.size()) >= min_dim;
    const auto better = [](const Candidate& a, const Candidate& b) {
      if (a.meets_floor != b.meets_floor) return a.meets_floor;
      if (a.density != b.density) return a.density > b.density;
      return a.good.size() > b.good.size();
    };
    if (!best || better(cand, *best)) best = std::move(cand);
  };

  std::vector<int> z(z_dim, 0);
  try_z(z);  // deterministic fallback: z = 0 makes every shift vanish
  CounterRng rng(cfg.seed, seed_stream);
  const Index budget =
      std::min<Index>(16 * checked_pow(p, std::min(cfg.block_size(p), 8)), 200000);
  for (Index t = 0; t < budget; ++t) {
    for (int k = 0; k < z_dim; ++k) z[k] = static_cast<int>(rng.next_below(p));
    try_z(z);
  }
  if (!best) throw NoGoodZ("pigeonhole_block_step: no good z within the sample budget");

  // Materialize through the same calls the replay uses.
  DenseFunction fz = restrict_z(f_prime, basis, best->z);
  ProductFunction pz = product_closure_under_basis_change(product, basis, best->z);

  TraceStep drop_step;
  drop_step.type = TraceStep::Type::CoordinateDrop;
  drop_step.dropped = dropped;
  drop_step.n_before = drop_step.n_after = n;
  drop_step.density_before = drop_step.density_after = f_prime.mean_real();

  TraceStep basis_step;
  basis_step.type = TraceStep::Type::BasisChange;
  basis_step.basis = basis;
  basis_step.n_before = basis_step.n_after = n;
  basis_step.density_before = basis_step.density_after = f_prime.mean_real();

  TraceStep z_step;
  z_step.type = TraceStep::Type::ZRestriction;
  z_step.z = best->z;
  z_step.n_before = n;
  z_step.n_after = basis.n_prime();
  z_step.density_before = f_prime.mean_real();
  z_step.density_after = fz.mean_real();

  IncrementTrace trace;
  trace.steps = {drop_step, basis_step, z_step};

  DenseFunction g = fz;
  if (static_cast<int>(best->good.size()) < total_blocks) {
    Restriction fix;
    std::vector<char> is_good(total_blocks, 0);
    for (int j : best->good) is_good[j] = 1;
    size_t t = 0;
    for (int j = 0; j < total_blocks; ++j) {
      if (is_good[j]) {
        fix.alive.push_back(j);
      } else {
        fix.fixed_coords.push_back(j);
        fix.fixed_values.push_back(best->z_fix[t++]);
      }
    }
    g = restrict_function(fz, fix);
    TraceStep fix_step;
    fix_step.type = TraceStep::Type::RandomRestriction;
    fix_step.restriction = fix;
    fix_step.n_before = total_blocks;
    fix_step.n_after = static_cast<int>(best->good.size());
    fix_step.density_before = fz.mean_real();
    fix_step.density_after = g.mean_real();
    trace.steps.push_back(fix_step);
  }

  // The restricted product must be a constant (the proof's C(z, z')).
  double constancy = 0.0;
  {
    std::vector<Cplx> vals;
    vals.reserve(g.size());
    std::vector<int> xd(basis.n_prime());
    size_t t = 0;
    std::vector<char> is_good(total_blocks, 0);
    for (int j : best->good) is_good[j] = 1;
    for (Index xg = 0; xg < g.size(); ++xg) {
      std::vector<int> gd(static_cast<int>(best->good.size()));
      decode_digits(xg, p, static_cast<int>(best->good.size()), gd);
      t = 0;
      size_t gi = 0;
      for (int j = 0; j < total_blocks; ++j)
        xd[j] = is_good[j] ? gd[gi++] : best->z_fix[t++];
      Cplx acc = pz.scalar();
      for (int j = 0; j < total_blocks; ++j) acc *= pz.factors()[j][xd[j]];
      vals.push_back(acc);
    }
    Cplx mean{0.0, 0.0};
    for (Cplx c : vals) mean += c;
    mean /= double(vals.size());
    double dev = 0.0;
    for (Cplx c : vals) dev = std::max(dev, std::abs(c - mean));
    constancy = dev;
    if (dev > kTolAccum)
      throw std::logic_error("pigeonhole_block_step: restricted product is not constant");
  }

  const int n_out = static_cast<int>(best->good.size());
  PigeonholeResult res{std::move(g), std::move(trace), n_out,     n_out,
                       total_blocks, b_eff,            dropped,   0.0,
                       constancy};
  res.density = res.g.mean_real();
  return res;
}

namespace {

struct Candidate {
  DenseFunction g;
  IncrementTrace trace;
  std::string branch;
};

void check_free_or_throw(const DenseFunction& f, const char* who) {
  const auto witness = find_restricted_ap(PointSet::from_function(f));
  if (witness) {
    std::ostringstream os;
    os << who << ": function is not restricted-3-AP free (witness x=[";
    for (int c : witness->x) os << c << " ";
    os << "], a=[";
    for (int c : witness->a) os << c << " ";
    os << "])";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

StepResult increment_step(const DenseFunction& f, const IncrementConfig& cfg) {
  cfg.validate();
  if (f.kind() != Kind::Boolean)
    throw std::invalid_argument("increment_step: boolean functions only");
  const double alpha = f.mean_real();
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("increment_step: need 0 < E[f] < 1");
  check_free_or_throw(f, "increment_step");

  StepResult res;
  res.n_before = f.n();
  res.density_before = alpha;
  res.w = pair_correlation_W_report(f);
  const int min_dim = cfg.min_dimension(f.n());

  std::vector<Candidate> candidates;
  std::vector<std::string> notes;

  const LowWeightOutcome lw = low_weight_with(f, cfg, res.w.value);
  if (lw.activated) {
    if (lw.bump.found) {
      Candidate c{restrict_function(f, lw.bump.restriction), {}, "low_weight"};
      TraceStep step;
      step.type = TraceStep::Type::RandomRestriction;
      step.restriction = lw.bump.restriction;
      step.n_before = f.n();
      step.n_after = static_cast<int>(lw.bump.restriction.alive.size());
      step.density_before = alpha;
      step.density_after = c.g.mean_real();
      c.trace.steps.push_back(step);
      candidates.push_back(std::move(c));
    } else {
      std::ostringstream os;
      os << "low_weight: no bump restriction found (best mean " << lw.bump.best_mean
         << " vs target " << lw.bump.target << ")";
      notes.push_back(os.str());
    }
  } else {
    const CorrelationBranchResult cb = correlation_with(f, cfg, res.w.value);
    if (!cb.success) {
      notes.push_back("correlation: " + cb.diagnostics);
    } else {
      IncrementTrace base_trace;
      if (cb.restriction) {
        TraceStep step;
        step.type = TraceStep::Type::RandomRestriction;
        step.restriction = *cb.restriction;
        step.n_before = f.n();
        step.n_after = cb.f_prime->n();
        step.density_before = alpha;
        step.density_after = cb.f_prime->mean_real();
        step.correlation_after = cb.correlation;
        base_trace.steps.push_back(step);
      }

      RobustifyParams rp;
      rp.epsilon = std::min(cb.correlation, cfg.epsilon);
      rp.delta = cfg.delta;
      rp.beta = cfg.beta;
      rp.max_iters = cfg.robustify_iters;
      rp.samples = cfg.robustify_samples;
      rp.z_dim = std::min(cfg.robustify_z_dim, cb.f_prime->n() - 1);
      rp.seed = cfg.seed ^ 0x9e3779b97f4a7c15ull;
      const RobustifyResult rb = robustify_correlation(*cb.f_prime, *cb.product, rp);

      IncrementTrace rb_trace = base_trace;
      {
        DenseFunction stepped = *cb.f_prime;
        for (const AppliedRestriction& ar : rb.applied) {
          TraceStep bstep;
          bstep.type = TraceStep::Type::BasisChange;
          bstep.basis = ar.basis;
          bstep.n_before = bstep.n_after = stepped.n();
          bstep.density_before = bstep.density_after = stepped.mean_real();
          rb_trace.steps.push_back(bstep);
          TraceStep zstep;
          zstep.type = TraceStep::Type::ZRestriction;
          zstep.z = ar.z;
          zstep.n_before = stepped.n();
          zstep.density_before = stepped.mean_real();
          stepped = restrict_z(stepped, ar.basis, ar.z);
          zstep.n_after = stepped.n();
          zstep.density_after = stepped.mean_real();
          rb_trace.steps.push_back(zstep);
        }
      }

      if (rb.status == RobustifyStatus::DensityBump) {
        candidates.push_back(Candidate{rb.f, rb_trace, "robustify_bump"});
      } else {
        if (rb.status == RobustifyStatus::Exhausted)
          notes.push_back("robustify: exhausted; proceeding with its final pair");
        try {
          PigeonholeResult ph = pigeonhole_block_step(rb.f, rb.product, cfg, min_dim, 13);
          IncrementTrace full = rb_trace;
          full.steps.insert(full.steps.end(), ph.trace.steps.begin(), ph.trace.steps.end());
          candidates.push_back(Candidate{std::move(ph.g), std::move(full), "pigeonhole"});
        } catch (const NoGoodZ& e) {
          notes.push_back(e.what());
        }
      }
    }
  }

  const Candidate* winner = nullptr;
  for (const Candidate& c : candidates) {
    if (c.g.n() < min_dim) {
      notes.push_back(c.branch + ": output dimension " + std::to_string(c.g.n()) +
                      " below floor " + std::to_string(min_dim));
      continue;
    }
    if (c.g.mean_real() <= alpha) {
      notes.push_back(c.branch + ": no density gain");
      continue;
    }
    if (!winner || c.g.mean_real() > winner->g.mean_real()) winner = &c;
  }

  if (!winner) {
    res.status = StepStatus::Stuck;
    std::ostringstream os;
    for (const auto& m : notes) os << m << "; ";
    res.diagnostics = os.str();
    return res;
  }

  check_free_or_throw(winner->g, "increment_step output");
  res.status = StepStatus::Improved;
  res.g = winner->g;
  res.trace = winner->trace;
  res.branch = winner->branch;
  res.n_after = winner->g.n();
  res.density_after = winner->g.mean_real();
  return res;
}

RunResult increment_run(const DenseFunction& f, const IncrementConfig& cfg, int max_iters) {
  cfg.validate();
  if (max_iters < 1) throw std::invalid_argument("increment_run: max_iters must be >= 1");
  check_free_or_throw(f, "increment_run");

  RunResult run;
  DenseFunction cur = f;
  run.densities.push_back(cur.mean_real());
  for (int it = 0; it < max_iters; ++it) {
    if (cur.mean_real() >= 0.99) {
      // Endgame union bound: a set of density >= 0.99 has Lambda >= 0.97 of
      // the trivial maximum, which forces a nontrivial triple; a function
      // that reached this point free must therefore be below it.
      run.final_lambda = std::pow(3.0, -cur.n()) * cur.mean_real();
      run.endgame_checked = true;
      run.status = RunStatus::DensityTarget;
      run.final_f = cur;
      return run;
    }
    if (cur.n() < 2) {
      run.status = RunStatus::DimensionFloor;
      run.final_f = cur;
      run.diagnostics = "dimension floor reached";
      return run;
    }
    StepResult step = increment_step(cur, cfg);
    if (step.status == StepStatus::Stuck) {
      run.status = RunStatus::Stuck;
      run.final_f = cur;
      run.diagnostics = step.diagnostics;
      run.steps.push_back(std::move(step));
      return run;
    }
    cur = *step.g;
    if (cur.mean_real() <= run.densities.back())
      throw std::logic_error("increment_run: density failed to increase");
    run.densities.push_back(cur.mean_real());
    run.steps.push_back(std::move(step));
  }
  run.status = RunStatus::MaxIters;
  run.final_f = cur;
  return run;
}

}  // namespace apfree
