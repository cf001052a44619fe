// Acceptance gate: one timed pass/fail line per criterion, nonzero exit on
// any failure. Tolerances are pinned inline next to each check.

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "../tools/greedy.h"
#include "apfree/io.hpp"

using namespace apfree;
using nlohmann::json;

namespace {

struct Gate {
  int failures = 0;

  void run(int id, const std::string& label, const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << id << " [" << label << "]: "
              << (error.empty() ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(2)
              << secs << "s)";
    if (!error.empty()) {
      std::cout << " -- " << error;
      ++failures;
    }
    std::cout << "\n";
  }
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

Eigen::VectorXcd random_one_bounded(Index size, CounterRng& rng) {
  Eigen::VectorXcd v(size);
  for (Index i = 0; i < size; ++i)
    v[i] = std::polar(std::sqrt(rng.next_double()), 6.283185307179586 * rng.next_double());
  return v;
}

Support ap_support(int p, const std::vector<int>& diffs) {
  Support s;
  s.alphabet_sizes = {p, p, p};
  for (int x = 0; x < p; ++x)
    for (int a : diffs) s.atoms.push_back({x, (x + a) % p, (x + 2 * a) % p});
  return s;
}

// Exhaustive Z_m solution count by DFS with unit propagation (SNF oracle).
std::uint64_t count_zm_solutions(const Support& support, int m) {
  const RelationLattice lattice(support);
  const int cols = lattice.cols();
  std::vector<std::vector<int>> rows;
  for (const auto& row : lattice.matrix()) {
    std::vector<int> vars;
    for (int c = 0; c < cols; ++c)
      if (row[c] != 0) vars.push_back(c);
    rows.push_back(std::move(vars));
  }
  std::vector<int> value(cols, -1);
  std::uint64_t count = 0;
  auto dfs = [&](auto&& self) -> void {
    for (const auto& vars : rows) {
      int unassigned = -1, sum = 0;
      for (int v : vars) {
        if (value[v] < 0) {
          if (unassigned >= 0) {
            unassigned = -2;
            break;
          }
          unassigned = v;
        } else {
          sum = (sum + value[v]) % m;
        }
      }
      if (unassigned == -2) continue;
      if (unassigned == -1) {
        if (sum % m != 0) return;
        continue;
      }
      value[unassigned] = (m - sum) % m;
      self(self);
      value[unassigned] = -1;
      return;
    }
    int branch = -1;
    for (int c = 0; c < cols && branch < 0; ++c)
      if (value[c] < 0) branch = c;
    if (branch < 0) {
      ++count;
      return;
    }
    for (int x = 0; x < m; ++x) {
      value[branch] = x;
      self(self);
    }
    value[branch] = -1;
  };
  dfs(dfs);
  return count;
}

void criterion1() {  // exact free-set count identity, 50 verified sets
  int done = 0;
  for (int t = 0; done < 50; ++t) {
    const int p = t % 2 == 0 ? 5 : 3;
    const int n = 2 + t / 2 % (p == 5 ? 4 : 5);  // p=5: n in [2,5]; p=3: n in [2,6]
    const PointSet a = greedy_free_set(p, n, checked_pow(p, n) / 5 + 2, 4000 + t);
    require(is_restricted_ap_free(a), "brute-force freeness check failed");
    const DenseFunction f = a.to_function();
    const Cplx lam = triple_correlation(f, f, f, TripleCorrelationMethod::Fourier);
    const double dev = std::abs(lam - Cplx(std::pow(3.0, -n) * f.mean_real(), 0.0));
    require(dev <= 1e-12, "identity deviation " + std::to_string(dev));
    ++done;
  }
}

void criterion2() {  // dual-path counting on 100 random complex triples
  CounterRng rng(10, 0);
  for (int t = 0; t < 100; ++t) {
    const int p = t % 2 == 0 ? 3 : 5;
    const int n = 1 + t / 2 % 4;
    const Index size = checked_pow(p, n);
    const DenseFunction f(p, n, Kind::Complex, random_one_bounded(size, rng));
    const DenseFunction g(p, n, Kind::Complex, random_one_bounded(size, rng));
    const DenseFunction h(p, n, Kind::Complex, random_one_bounded(size, rng));
    const Cplx d = triple_correlation(f, g, h, TripleCorrelationMethod::Direct);
    const Cplx r = triple_correlation(f, g, h, TripleCorrelationMethod::Fourier);
    require(std::abs(d - r) <= 1e-8, "route deviation " + std::to_string(std::abs(d - r)));
  }
}

void criterion3() {  // decomposition suite, 100 functions per (p, n)
  CounterRng rng(11, 0);
  for (const int p : {3, 5}) {
    for (int n = 1; n <= (p == 3 ? 6 : 5); ++n) {
      const Index size = checked_pow(p, n);
      for (int t = 0; t < 100; ++t) {
        const DenseFunction f(p, n, Kind::Complex, random_one_bounded(size, rng));
        const Eigen::VectorXcd coeffs = fourier_transform(f);
        require(std::abs(coeffs.squaredNorm() - f.norm_sq()) <= 1e-9, "Parseval");

        Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(size);
        for (Subset s = 0; s < (Subset(1) << n); ++s)
          sum += efron_stein_part_fourier(f, s).values();
        require((sum - f.values()).cwiseAbs().maxCoeff() <= 1e-9, "reconstruction");

        const Subset s1 = rng.next_below(Subset(1) << n);
        const Subset s2 = rng.next_below(Subset(1) << n);
        const DenseFunction p1 = efron_stein_part(f, s1).part;
        require((p1.values() - efron_stein_part_fourier(f, s1).values()).cwiseAbs().maxCoeff() <=
                    1e-9,
                "inclusion-exclusion vs Fourier grouping");
        if (s1 != s2)
          require(std::abs(inner_product(p1, efron_stein_part(f, s2).part)) <= 1e-9,
                  "part orthogonality");
      }
    }
  }
}

void criterion4() {  // lambda2 and the majorant inequality chain
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0 / 3.0;
  require(std::abs(second_eigenvalue(ap_difference_chain(5)) - golden) <= 1e-8,
          "lambda2(5) vs circulant oracle");
  CounterRng rng(12, 0);
  const int p = 5, n = 4;
  const MarkovChain chain = ap_difference_chain(p);
  for (int t = 0; t < 50; ++t) {
    std::vector<Index> af, ag;
    for (Index x = 0; x < checked_pow(p, n); ++x) {
      if (rng.next_bernoulli(0.35)) af.push_back(x);
      if (rng.next_bernoulli(0.35)) ag.push_back(x);
    }
    const DenseFunction f = DenseFunction::indicator(p, n, af);
    const DenseFunction g = DenseFunction::indicator(p, n, ag);
    const CorrelationBoundReport rep = correlation_lower_bound_check(f, g, chain, 2);
    require(std::abs(rep.inner - rep.alpha * rep.beta) <= rep.full_majorant + 1e-9,
            "majorant violated");
  }
}

void criterion5() {  // embedding detector
  for (int p : {5, 7})
    require(!z_embedding(ap_support(p, {0, 1, 2})).certificate.has_value(),
            "unexpected Z-certificate for AP support");

  const Support ap5 = ap_support(5, {0, 1, 2});
  const UniversalEmbeddingResult u5 = universal_finite_embedding(ap5);
  require(u5.invariant_factors.size() == 1 && u5.invariant_factors[0] == 5,
          "universal group is not Z_5");
  for (int m = 2; m <= 10; ++m) {
    std::uint64_t expected = 1;
    for (int i = 0; i < u5.free_rank; ++i) expected *= std::uint64_t(m);
    for (const BigInt& d : u5.invariant_factors)
      expected *= std::uint64_t(std::gcd(d.convert_to<long long>(), (long long)m));
    require(count_zm_solutions(ap5, m) == expected, "Z_m enumeration mismatch at m=" +
                                                        std::to_string(m));
  }
  for (const EmbeddingCertificate& cert : u5.generators)
    require(verify_certificate(cert, ap5), "generator certificate failed verification");

  const Support half = ap_support(5, {0, 1});
  const ZEmbeddingResult zr = z_embedding(half);
  require(zr.certificate.has_value() && !zr.certificate->is_trivial() &&
              verify_certificate(*zr.certificate, half),
          "{0,1}-difference certificate missing or invalid");
}

void criterion6() {  // connectivity
  for (int p : {5, 7, 11, 13}) {
    const auto conn = pairwise_connected(restricted_ap_distribution(p));
    require(conn[0] && conn[1] && conn[2], "AP support not pairwise connected at p=" +
                                               std::to_string(p));
  }
}

void criterion7() {  // structure preservation
  CounterRng rng(13, 0);
  for (int t = 0; t < 1000; ++t) {
    const int p = 5, n = 3 + t % 2;
    const int n_prime = 1 + int(rng.next_below(std::uint64_t(n - 1)));
    const PointSet a = greedy_free_set(p, n, checked_pow(p, n) / 6 + 1, 7000 + t);
    const SpecialBasis b = sample_special_basis(p, n, n_prime, rng);
    std::vector<int> z(b.z_dim());
    for (int& c : z) c = int(rng.next_below(p));
    const DenseFunction fz = restrict_z(a.to_function(), b, z);
    require(is_restricted_ap_free(PointSet::from_function(fz)), "restriction not free");
  }
  CounterRng rng2(14, 0);
  for (int t = 0; t < 200; ++t) {
    const int p = 5, n = 4;
    const int n_prime = 1 + int(rng2.next_below(3));
    const FiniteAbelianGroup group({t % 2 == 0 ? 5 : 15});
    const int r = int(group.order());
    std::vector<std::vector<Cplx>> factors(n, std::vector<Cplx>(p));
    for (auto& table : factors)
      for (int s = 0; s < p; ++s) table[s] = unit_root(int(rng2.next_below(r)), r);
    const ProductFunction prod(p, group, unit_root(int(rng2.next_below(r)), r), factors);
    const SpecialBasis b = sample_special_basis(p, n, n_prime, rng2);
    std::vector<int> z(b.z_dim());
    for (int& c : z) c = int(rng2.next_below(p));
    const ProductFunction closed = product_closure_under_basis_change(prod, b, z);
    const DenseFunction direct = restrict_z(prod.materialize(), b, z);
    require((closed.materialize().values() - direct.values()).cwiseAbs().maxCoeff() <= 1e-10,
            "closure materialization deviation");
  }
}

void criterion8() {  // restriction lemmas
  // Mean-square lower bound at keep probability 1/(2d): for n <= d every level
  // carries (1 - 1/(2d))^{|S|} >= 1/e, so E[Z^2] >= alpha^2 + xi/e with
  // xi the mean-zero mass. Verified by exhaustive enumeration, p=3, n=4.
  CounterRng rng(15, 0);
  const int p = 3, n = 4, d = 8;
  const double q = 0.5 / d;
  for (int t = 0; t < 10; ++t) {
    const DenseFunction f(p, n, Kind::Complex, random_one_bounded(checked_pow(p, n), rng));
    const double enumerated = restriction_mean_square_enumerated(f, q);
    const double exact = restriction_mean_square_exact(f, q);
    require(std::abs(enumerated - exact) <= 1e-9, "enumerated vs closed form");
    const double alpha_sq = std::norm(f.mean());
    const double xi = f.norm_sq() - alpha_sq;
    require(enumerated >= alpha_sq + xi / std::exp(1.0) - 1e-9, "mean-square lower bound violated");
  }
  // Correlation event probability on character inputs over 10^4 samples.
  for (const std::vector<int> alpha : {std::vector<int>{1, 0, 0, 0}, {1, 2, 0, 0}}) {
    const DenseFunction g = DenseFunction::character(p, n, alpha);
    const CorrelationEventResult res = restriction_correlation_event(g, d, 1.0, 10000, 16);
    require(res.empirical_probability >= 1.0 / (2.0 * std::exp(1.0)) - 3.0 * res.stderr_estimate,
            "event probability too small");
  }
}

void criterion9() {  // increment engine regression corpus
  const std::string dir = APFREE_DATA_DIR;
  std::ifstream mf(dir + "/corpus.json");
  require(bool(mf), "corpus manifest missing; run make-corpus");
  json manifest;
  mf >> manifest;
  const auto& instances = manifest.at("instances");
  require(instances.size() == 10, "corpus must hold 10 instances");
  for (const auto& inst : instances) {
    const std::string name = inst.at("name").get<std::string>();
    const DenseFunction f = load_function(dir + "/" + inst.at("input").get<std::string>());
    json cj;
    std::ifstream(dir + "/" + inst.at("config").get<std::string>()) >> cj;
    const IncrementConfig cfg = config_from_json(cj);

    const StepResult step = increment_step(f, cfg);
    require(step.status == StepStatus::Improved, name + ": stuck");
    require(step.density_after >= step.density_before + 0.01, name + ": gain below 0.01");
    require(5 * step.n_after >= f.n(), name + ": dimension loss beyond n/5");
    require(is_restricted_ap_free(PointSet::from_function(*step.g)), name + ": output not free");

    // Bit-identical to the golden trace and golden output.
    json golden_trace;
    std::ifstream(dir + "/" + inst.at("trace").get<std::string>()) >> golden_trace;
    require(trace_to_json(step.trace).dump() == golden_trace.dump(),
            name + ": trace differs from golden");
    const DenseFunction golden = load_function(dir + "/" + inst.at("output").get<std::string>());
    require((golden.values() - step.g->values()).cwiseAbs().maxCoeff() == 0.0,
            name + ": output differs from golden");

    // Every intermediate restriction passes the freeness oracle.
    DenseFunction cur = f;
    std::optional<SpecialBasis> pending;
    for (const TraceStep& s : step.trace.steps) {
      bool changed = false;
      if (s.type == TraceStep::Type::BasisChange) {
        pending = s.basis;
      } else if (s.type == TraceStep::Type::ZRestriction) {
        cur = restrict_z(cur, *pending, s.z);
        pending.reset();
        changed = true;
      } else if (s.type == TraceStep::Type::RandomRestriction) {
        cur = restrict_function(cur, s.restriction);
        changed = true;
      }
      if (changed)
        require(is_restricted_ap_free(PointSet::from_function(cur)),
                name + ": intermediate not free");
    }
    require((cur.values() - step.g->values()).cwiseAbs().maxCoeff() == 0.0,
            name + ": replay differs from output");
  }
}

void criterion10() {  // extremal oracle agreement
  const struct {
    int p, n, size;
  } cases[] = {{3, 1, 2}, {3, 2, 4}, {5, 1, 2}};
  for (const auto& c : cases) {
    const ExtremalSearchResult ex = extremal_search(c.p, c.n, SearchMode::Exhaustive);
    require(ex.size == c.size && ex.optimal, "exhaustive value mismatch");
    const ExtremalSearchResult bb = extremal_search(c.p, c.n, SearchMode::BranchBound, 10'000'000);
    require(bb.size == ex.size, "branch-and-bound disagrees with exhaustive");
    require(!bb.optimal || bb.size == ex.size, "optimality flag inconsistent");
  }
}

}  // namespace

int main() {
  Gate gate;
  gate.run(1, "free-set count identity", criterion1);
  gate.run(2, "dual-path counting", criterion2);
  gate.run(3, "decomposition suite", criterion3);
  gate.run(4, "spectral bound", criterion4);
  gate.run(5, "embedding detector", criterion5);
  gate.run(6, "connectivity", criterion6);
  gate.run(7, "structure preservation", criterion7);
  gate.run(8, "restriction lemmas", criterion8);
  gate.run(9, "increment regression corpus", criterion9);
  gate.run(10, "extremal oracle agreement", criterion10);
  if (gate.failures == 0) {
    std::cout << "all 10 acceptance criteria PASS\n";
    return 0;
  }
  std::cout << gate.failures << " criteria FAILED\n";
  return 1;
}
