// apfree: command-line surface for the restricted-3-AP toolkit.
//
// Exit codes: 0 success / free, 1 semantic negative (not free, Stuck),
// 2 usage or file-format error, 3 internal consistency failure.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>

#include "apfree/chains.hpp"
#include "apfree/io.hpp"
#include "greedy.h"

namespace {

using namespace apfree;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

constexpr Index kMaxTableCells = Index(1) << 26;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("APFREE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

DenseFunction load_capped(const std::string& path) {
  DenseFunction f = load_function(path);
  if (f.size() > kMaxTableCells)
    throw FileFormatError("table exceeds the 2^26-cell CLI cap: " + path);
  return f;
}

json witness_json(const FreeWitness& w) { return {{"x", w.x}, {"a", w.a}}; }

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FileFormatError("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// check-free

int cmd_check_free(const std::string& input) {
  const DenseFunction f = load_capped(input);
  if (f.kind() != Kind::Boolean) throw FileFormatError("check-free: boolean-kind file required");
  const auto witness = find_restricted_ap(PointSet::from_function(f));
  if (!witness) {
    std::cout << "free\n";
    return kExitOk;
  }
  emit(witness_json(*witness));
  return kExitNegative;
}

// ---------------------------------------------------------------------------
// count

int cmd_count(const std::string& input, const std::string& method) {
  const DenseFunction f = load_capped(input);
  const double alpha = f.mean_real();
  const double trivial_floor = std::pow(3.0, -f.n()) * alpha;
  Cplx lambda;
  if (method == "direct") {
    lambda = triple_correlation(f, f, f, TripleCorrelationMethod::Direct);
  } else if (method == "fourier") {
    lambda = triple_correlation(f, f, f, TripleCorrelationMethod::Fourier);
  } else {
    const Cplx d = triple_correlation(f, f, f, TripleCorrelationMethod::Direct);
    const Cplx r = triple_correlation(f, f, f, TripleCorrelationMethod::Fourier);
    if (std::abs(d - r) > 1e-8) {
      emit({{"error", "direct and fourier routes disagree"},
            {"direct", {d.real(), d.imag()}},
            {"fourier", {r.real(), r.imag()}},
            {"deviation", std::abs(d - r)}});
      return kExitInternal;
    }
    lambda = d;
  }
  emit({{"lambda", {lambda.real(), lambda.imag()}},
        {"trivial_floor", trivial_floor},
        {"method", method}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// embed

int cmd_embed(const std::string& support_path, const std::string& target) {
  json sj;
  try {
    sj = json::parse(read_bytes(support_path));
  } catch (const json::exception& e) {
    throw FileFormatError(std::string("support: ") + e.what());
  }
  const Support support = support_from_json(sj);

  if (target == "z") {
    const ZEmbeddingResult res = z_embedding(support);
    json out = {{"target", "Z"},
                {"kernel_dimension", res.kernel_dimension},
                {"trivial_dimension", res.trivial_dimension}};
    if (res.certificate) {
      if (!verify_certificate(*res.certificate, support)) {
        emit({{"error", "emitted certificate failed verification"}});
        return kExitInternal;
      }
      out["certificate"] = certificate_to_json(*res.certificate);
    } else {
      out["certificate"] = "NoneNontrivial";
    }
    emit(out);
    return kExitOk;
  }

  const UniversalEmbeddingResult res = universal_finite_embedding(support);
  json factors = json::array();
  for (const BigInt& d : res.invariant_factors) factors.push_back(d.str());
  json gens = json::array();
  for (const EmbeddingCertificate& cert : res.generators) {
    if (!verify_certificate(cert, support)) {
      emit({{"error", "emitted certificate failed verification"}});
      return kExitInternal;
    }
    gens.push_back(certificate_to_json(cert));
  }
  emit({{"target", "finite"},
        {"invariant_factors", factors},
        {"free_rank", res.free_rank},
        {"generators", gens},
        {"universal_group_trivial", res.invariant_factors.empty()}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// increment

json step_result_json(const StepResult& s) {
  json j = {{"status", s.status == StepStatus::Improved ? "Improved" : "Stuck"},
            {"branch", s.branch},
            {"density_before", s.density_before},
            {"density_after", s.density_after},
            {"n_before", s.n_before},
            {"n_after", s.n_after},
            {"w", s.w.value},
            {"diagnostics", s.diagnostics}};
  return j;
}

int cmd_increment(const std::string& mode, const std::string& input, const std::string& cfg_path,
                  std::uint64_t seed, const std::string& out_dir, int max_iters, int threads) {
  Timer timer;
  json cj;
  try {
    cj = json::parse(read_bytes(cfg_path));
  } catch (const json::exception& e) {
    throw FileFormatError(std::string("config: ") + e.what());
  }
  IncrementConfig cfg = config_from_json(cj);
  cfg.seed = seed;

  const DenseFunction f = load_capped(input);
  if (f.kind() != Kind::Boolean) throw FileFormatError("increment: boolean-kind file required");
  if (const auto witness = find_restricted_ap(PointSet::from_function(f))) {
    emit({{"error", "input is not restricted-3-AP free"}, {"witness", witness_json(*witness)}});
    return kExitNegative;
  }

  json report = {{"schema_version", 1},
                 {"command", "increment " + mode},
                 {"config", config_to_json(cfg)},
                 {"seed", seed},
                 {"threads", threads},
                 {"input", input}};

  const std::string trace_path = out_dir + "/trace.json";
  const std::string output_path = out_dir + "/output.fpfn";
  int exit_code = kExitOk;

  if (mode == "step") {
    const StepResult step = increment_step(f, cfg);
    report["results"] = step_result_json(step);
    if (step.status == StepStatus::Improved) {
      save_function(output_path, *step.g);
      std::ofstream(trace_path) << trace_to_json(step.trace).dump(2) << "\n";
      report["trace_path"] = trace_path;
      report["output_path"] = output_path;
    } else {
      exit_code = kExitNegative;
    }
  } else {
    const RunResult run = increment_run(f, cfg, max_iters);
    json steps = json::array();
    IncrementTrace combined;
    for (const StepResult& s : run.steps) {
      steps.push_back(step_result_json(s));
      combined.steps.insert(combined.steps.end(), s.trace.steps.begin(), s.trace.steps.end());
    }
    const char* status = run.status == RunStatus::DensityTarget ? "DensityTarget"
                         : run.status == RunStatus::Stuck       ? "Stuck"
                         : run.status == RunStatus::DimensionFloor ? "DimensionFloor"
                                                                  : "MaxIters";
    report["results"] = {{"status", status},
                         {"steps", steps},
                         {"densities", run.densities},
                         {"final_lambda", run.final_lambda},
                         {"endgame_checked", run.endgame_checked},
                         {"diagnostics", run.diagnostics}};
    if (run.final_f) {
      save_function(output_path, *run.final_f);
      std::ofstream(trace_path) << trace_to_json(combined).dump(2) << "\n";
      report["trace_path"] = trace_path;
      report["output_path"] = output_path;
    }
    if (run.status == RunStatus::Stuck) exit_code = kExitNegative;
  }

  report["timings"] = {{"total_ms", timer.ms()}};
  std::ofstream(out_dir + "/report.json") << report.dump(2) << "\n";
  emit(report);
  return exit_code;
}

// ---------------------------------------------------------------------------
// replay

int cmd_replay(const std::string& input, const std::string& trace_path, const std::string& out,
               const std::string& expect) {
  json tj;
  try {
    tj = json::parse(read_bytes(trace_path));
  } catch (const json::exception& e) {
    throw FileFormatError(std::string("trace: ") + e.what());
  }
  const IncrementTrace trace = trace_from_json(tj);
  const DenseFunction f = load_capped(input);
  const DenseFunction g = replay_trace(f, trace);
  save_function(out, g);
  if (!expect.empty()) {
    if (read_bytes(out) != read_bytes(expect)) {
      emit({{"error", "replayed output differs from expected bytes"},
            {"out", out},
            {"expect", expect}});
      return kExitInternal;
    }
  }
  emit({{"n", g.n()}, {"density", g.mean_real()}, {"out", out},
        {"matched_expected", !expect.empty()}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct Property {
  std::string id;
  Index trials = 0;
  double worst = 0.0;
  double tol = 0.0;
  bool pass = true;
};

struct Harness {
  std::vector<Property> properties;
  std::uint64_t seed = 1;
  Index trials = 0;

  void record(const std::string& id, Index t, double worst, double tol) {
    properties.push_back({id, t, worst, tol, worst <= tol});
  }
};

Eigen::VectorXcd random_one_bounded(Index size, CounterRng& rng) {
  Eigen::VectorXcd v(size);
  for (Index i = 0; i < size; ++i) {
    const double r = std::sqrt(rng.next_double());
    const double t = 2.0 * std::acos(-1.0) * rng.next_double();
    v[i] = Cplx(r * std::cos(t), r * std::sin(t));
  }
  return v;
}

void suite_core(Harness& h) {
  CounterRng rng(h.seed, 1);
  double worst = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    const int p = t % 2 == 0 ? 3 : 5;
    const int n = 1 + int(rng.next_below(6));
    const Index idx = Index(rng.next_below(std::uint64_t(checked_pow(p, n))));
    const FpPoint x = decode_point(idx, p, n);
    if (encode_point(x) != idx) worst = 1.0;
  }
  h.record("core.encode_decode_roundtrip", h.trials, worst, 0.0);

  worst = 0.0;
  for (int r = 1; r <= 24; ++r)
    for (int k = 0; k < r; ++k)
      worst = std::max(worst, std::abs(std::pow(unit_root(k, r), r) - Cplx(1.0, 0.0)));
  h.record("core.unit_root_order", 24, worst, kTolAccum);

  worst = 0.0;
  const FiniteAbelianGroup g({4, 3, 5});
  for (Index i = 0; i < g.order(); ++i)
    if (g.element_index(g.element(i)) != i) worst = 1.0;
  h.record("core.group_element_roundtrip", g.order(), worst, 0.0);
}

void suite_funcspace(Harness& h) {
  CounterRng rng(h.seed, 2);
  const int p = 3, n = 4;
  const Index size = checked_pow(p, n);
  double worst_parseval = 0.0, worst_recon = 0.0, worst_orth = 0.0, worst_ie = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    const DenseFunction f(p, n, Kind::Complex, random_one_bounded(size, rng));
    const Eigen::VectorXcd coeffs = fourier_transform(f);
    worst_parseval = std::max(worst_parseval, std::abs(coeffs.squaredNorm() - f.norm_sq()));

    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(size);
    for (Subset s = 0; s < (Subset(1) << n); ++s)
      sum += efron_stein_part(f, s).part.values();
    worst_recon = std::max(worst_recon, (sum - f.values()).cwiseAbs().maxCoeff());

    const Subset s1 = rng.next_below(1 << n), s2 = rng.next_below(1 << n);
    if (s1 != s2) {
      const Cplx ip = inner_product(efron_stein_part(f, s1).part, efron_stein_part(f, s2).part);
      worst_orth = std::max(worst_orth, std::abs(ip));
    }
    const DenseFunction ie = efron_stein_part(f, s1).part;
    const DenseFunction fr = efron_stein_part_fourier(f, s1);
    worst_ie = std::max(worst_ie, (ie.values() - fr.values()).cwiseAbs().maxCoeff());
  }
  h.record("funcspace.parseval", h.trials, worst_parseval, kTolAccum);
  h.record("funcspace.efron_stein_reconstruction", h.trials, worst_recon, kTolAccum);
  h.record("funcspace.part_orthogonality", h.trials, worst_orth, kTolAccum);
  h.record("funcspace.inclusion_exclusion_vs_fourier", h.trials, worst_ie, kTolAccum);

  double worst_ms = 0.0;
  for (Index t = 0; t < std::min<Index>(h.trials, 5); ++t) {
    const DenseFunction f(3, 3, Kind::Complex, random_one_bounded(27, rng));
    worst_ms = std::max(worst_ms, std::abs(restriction_mean_square_exact(f, 0.25) -
                                           restriction_mean_square_enumerated(f, 0.25)));
  }
  h.record("funcspace.restriction_mean_square", std::min<Index>(h.trials, 5), worst_ms, kTolAccum);
}

void suite_chains(Harness& h) {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0 / 3.0;
  h.record("chains.lambda2_p5_circulant", 1,
           std::abs(second_eigenvalue(ap_difference_chain(5)) - golden), 1e-8);
  h.record("chains.lambda2_oracle_agreement", 1,
           std::abs(ap_chain_lambda2_circulant(5) - golden), 1e-8);

  double worst_rows = 0.0;
  for (int p : {3, 5, 7, 11}) {
    const MarkovChain c = ap_difference_chain(p);
    worst_rows = std::max(
        worst_rows,
        (c.transition().rowwise().sum() - Eigen::VectorXd::Ones(p)).cwiseAbs().maxCoeff());
  }
  h.record("chains.row_stochastic", 4, worst_rows, kTolAccum);

  CounterRng rng(h.seed, 3);
  const int p = 5, n = 3;
  const Index size = checked_pow(p, n);
  const MarkovChain chain = ap_difference_chain(p);
  double worst = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    std::vector<Index> af, ag;
    for (Index x = 0; x < size; ++x) {
      if (rng.next_bernoulli(0.3)) af.push_back(x);
      if (rng.next_bernoulli(0.3)) ag.push_back(x);
    }
    const DenseFunction f = DenseFunction::indicator(p, n, af);
    const DenseFunction g = DenseFunction::indicator(p, n, ag);
    const CorrelationBoundReport rep = correlation_lower_bound_check(f, g, chain, 2);
    const double excess = std::abs(rep.inner - rep.alpha * rep.beta) - rep.full_majorant;
    worst = std::max(worst, excess);
  }
  h.record("chains.correlation_majorant", h.trials, worst, kTolAccum);
}

void suite_aps(Harness& h) {
  CounterRng rng(h.seed, 4);
  double worst_id = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    const int p = t % 2 == 0 ? 3 : 5;
    const int n = 2 + int(rng.next_below(3));
    const PointSet a = greedy_free_set(p, n, checked_pow(p, n) / 4 + 1, h.seed + t);
    const DenseFunction f = a.to_function();
    const Cplx lam = triple_correlation(f, f, f, TripleCorrelationMethod::Fourier);
    worst_id = std::max(worst_id, std::abs(lam - Cplx(std::pow(3.0, -n) * f.mean_real(), 0.0)));
  }
  h.record("aps.free_set_identity", h.trials, worst_id, kTolPointwise * 100);

  double worst_dual = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    const int p = 3, n = 3;
    const Index size = checked_pow(p, n);
    const DenseFunction f(p, n, Kind::Complex, random_one_bounded(size, rng));
    const DenseFunction g(p, n, Kind::Complex, random_one_bounded(size, rng));
    const DenseFunction k(p, n, Kind::Complex, random_one_bounded(size, rng));
    worst_dual =
        std::max(worst_dual, std::abs(triple_correlation(f, g, k, TripleCorrelationMethod::Direct) -
                                      triple_correlation(f, g, k, TripleCorrelationMethod::Fourier)));
  }
  h.record("aps.dual_path_agreement", h.trials, worst_dual, 1e-8);

  double worst_wit = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    const int p = 5, n = 2;
    PointSet a(p, n);
    for (Index x = 0; x < a.universe(); ++x)
      if (rng.next_bernoulli(0.5)) a.insert(x);
    const auto w = find_restricted_ap(a);
    if (w) {
      std::vector<int> x1(n), x2(n);
      for (int i = 0; i < n; ++i) {
        x1[i] = (w->x[i] + w->a[i]) % p;
        x2[i] = (w->x[i] + 2 * w->a[i]) % p;
      }
      const bool valid = a.contains(encode_digits(w->x, p)) && a.contains(encode_digits(x1, p)) &&
                         a.contains(encode_digits(x2, p)) &&
                         std::any_of(w->a.begin(), w->a.end(), [](int c) { return c != 0; });
      if (!valid) worst_wit = 1.0;
    }
  }
  h.record("aps.witness_validity", h.trials, worst_wit, 0.0);

  h.record("aps.pairwise_connected_p5", 1,
           pairwise_connected(restricted_ap_distribution(5)) == std::array<bool, 3>{true, true, true}
               ? 0.0
               : 1.0,
           0.0);
}

Support ap_support(int p, const std::vector<int>& diffs) {
  Support s;
  s.alphabet_sizes = {p, p, p};
  for (int x = 0; x < p; ++x)
    for (int a : diffs) s.atoms.push_back({x, (x + a) % p, (x + 2 * a) % p});
  return s;
}

void suite_embeddings(Harness& h) {
  const Support ap5 = ap_support(5, {0, 1, 2});
  const ZEmbeddingResult z5 = z_embedding(ap5);
  h.record("embeddings.ap5_no_z_embedding", 1, z5.certificate ? 1.0 : 0.0, 0.0);

  const UniversalEmbeddingResult u5 = universal_finite_embedding(ap5);
  const bool is_z5 = u5.invariant_factors.size() == 1 && u5.invariant_factors[0] == 5;
  h.record("embeddings.ap5_universal_group_z5", 1, is_z5 ? 0.0 : 1.0, 0.0);

  const Support half5 = ap_support(5, {0, 1});
  const ZEmbeddingResult zh = z_embedding(half5);
  const bool good = zh.certificate && verify_certificate(*zh.certificate, half5) &&
                    !zh.certificate->is_trivial();
  h.record("embeddings.half_difference_z_certificate", 1, good ? 0.0 : 1.0, 0.0);

  CounterRng rng(h.seed, 5);
  double worst = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    Support s;
    s.alphabet_sizes = {3, 3, 3};
    const int atoms = 2 + int(rng.next_below(6));
    for (int i = 0; i < atoms; ++i)
      s.atoms.push_back({int(rng.next_below(3)), int(rng.next_below(3)), int(rng.next_below(3))});
    const ZEmbeddingResult zr = z_embedding(s);
    if (zr.certificate && !verify_certificate(*zr.certificate, s)) worst = 1.0;
    const UniversalEmbeddingResult ur = universal_finite_embedding(s);
    for (const EmbeddingCertificate& cert : ur.generators)
      if (!verify_certificate(cert, s)) worst = 1.0;
  }
  h.record("embeddings.random_certificates_verify", h.trials, worst, 0.0);
}

void suite_structure(Harness& h) {
  CounterRng rng(h.seed, 6);
  const int p = 5;
  double worst_closure = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    const int n = 4, n_prime = 2;
    const FiniteAbelianGroup group({p});
    std::vector<std::vector<Cplx>> factors(n);
    for (auto& table : factors) {
      table.resize(p);
      for (int s = 0; s < p; ++s) table[s] = unit_root(int(rng.next_below(p)), p);
    }
    const ProductFunction prod(p, group, unit_root(int(rng.next_below(p)), p), factors);
    const SpecialBasis basis = sample_special_basis(p, n, n_prime, rng);
    std::vector<int> z(basis.z_dim());
    for (int& c : z) c = int(rng.next_below(p));
    const ProductFunction closed = product_closure_under_basis_change(prod, basis, z);
    const DenseFunction direct = restrict_z(prod.materialize(), basis, z);
    worst_closure = std::max(
        worst_closure, (closed.materialize().values() - direct.values()).cwiseAbs().maxCoeff());
  }
  h.record("structure.closure_materialization", h.trials, worst_closure, 1e-10);

  double worst_free = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    const int n = 4, n_prime = 2;
    const PointSet a = greedy_free_set(p, n, checked_pow(p, n) / 5, h.seed + 1000 + t);
    const SpecialBasis basis = sample_special_basis(p, n, n_prime, rng);
    std::vector<int> z(basis.z_dim());
    for (int& c : z) c = int(rng.next_below(p));
    DenseFunction g = restrict_z(a.to_function(), basis, z);
    Eigen::VectorXcd rounded = g.values();
    for (Index i = 0; i < rounded.size(); ++i) rounded[i] = rounded[i].real() > 0.5 ? 1.0 : 0.0;
    const DenseFunction gb(p, n_prime, Kind::Boolean, rounded);
    if (!is_restricted_ap_free(PointSet::from_function(gb))) worst_free = 1.0;
  }
  h.record("structure.restriction_preserves_freeness", h.trials, worst_free, 0.0);

  CounterRng rng2(h.seed, 7);
  double worst_best = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    const DenseFunction f(3, 3, Kind::Complex, random_one_bounded(27, rng2));
    const CharacterCorrelation best = best_character_correlation(f);
    const Eigen::VectorXcd coeffs = fourier_transform(f);
    worst_best = std::max(worst_best, std::abs(coeffs.cwiseAbs().maxCoeff() - best.value));
  }
  h.record("structure.best_character_is_max", h.trials, worst_best, kTolAccum);
}

void suite_increment(Harness& h) {
  CounterRng rng(h.seed, 8);
  const int p = 5, n = 3;
  const Index size = checked_pow(p, n);
  double worst_w = 0.0;
  for (Index t = 0; t < h.trials; ++t) {
    std::vector<Index> pts;
    for (Index x = 0; x < size; ++x)
      if (rng.next_bernoulli(0.3)) pts.push_back(x);
    const WReport rep = pair_correlation_W_report(DenseFunction::indicator(p, n, pts));
    worst_w = std::max(worst_w, std::abs(rep.operator_route - rep.fourier_route));
  }
  h.record("increment.pair_correlation_dual_route", h.trials, worst_w, kTolAccum);

  // One full step on a planted instance, then bit-exact trace replay.
  double worst_replay = 1.0;
  const PointSet a = greedy_free_set(5, 5, 200, h.seed + 9, true);
  const DenseFunction f = a.to_function();
  IncrementConfig cfg;
  cfg.epsilon = 0.01;
  cfg.seed = h.seed;
  const StepResult step = increment_step(f, cfg);
  if (step.status == StepStatus::Improved) {
    const DenseFunction replayed = replay_trace(f, step.trace);
    worst_replay = (replayed.values() - step.g->values()).cwiseAbs().maxCoeff() == 0.0 ? 0.0 : 1.0;
  }
  h.record("increment.step_trace_replays_bit_exact", 1, worst_replay, 0.0);
}

int cmd_verify(const std::string& suite, Index trials, std::uint64_t seed) {
  if (trials <= 0) {
    std::cerr << "verify: --trials must be positive\n";
    return kExitUsage;
  }
  Harness h;
  h.seed = seed;
  h.trials = trials;
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "core") suite_core(h), known = true;
  if (all || suite == "funcspace") suite_funcspace(h), known = true;
  if (all || suite == "chains") suite_chains(h), known = true;
  if (all || suite == "aps") suite_aps(h), known = true;
  if (all || suite == "embeddings") suite_embeddings(h), known = true;
  if (all || suite == "structure") suite_structure(h), known = true;
  if (all || suite == "increment") suite_increment(h), known = true;
  if (!known) {
    std::cerr << "verify: unknown suite '" << suite << "'\n";
    return kExitUsage;
  }
  json props = json::array();
  bool all_pass = true;
  for (const Property& prop : h.properties) {
    props.push_back({{"id", prop.id},
                     {"trials", prop.trials},
                     {"worst", prop.worst},
                     {"tolerance", prop.tol},
                     {"pass", prop.pass}});
    all_pass = all_pass && prop.pass;
  }
  emit({{"suite", suite}, {"trials", trials}, {"seed", seed}, {"properties", props},
        {"all_pass", all_pass}});
  return all_pass ? kExitOk : kExitNegative;
}

// ---------------------------------------------------------------------------
// search

int cmd_search(int p, int n, const std::string& mode, std::uint64_t budget) {
  if (checked_pow(p, n) > kMaxTableCells) throw std::invalid_argument("search: p^n above CLI cap");
  const SearchMode m = mode == "exhaustive" ? SearchMode::Exhaustive : SearchMode::BranchBound;
  const ExtremalSearchResult res = extremal_search(p, n, m, budget);
  emit({{"p", p},
        {"n", n},
        {"mode", mode},
        {"budget", budget},
        {"size", res.size},
        {"optimal", res.optimal},
        {"nodes_explored", res.nodes_explored},
        {"set", res.set}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"restricted-3-AP toolkit over F_p^n"};
  app.require_subcommand(1);
  int threads_flag = 0;
  app.add_option("--threads", threads_flag, "worker cap (env APFREE_THREADS as fallback)");

  std::string input, cfg_path, support_path, trace_path, out_path, expect_path, out_dir = ".";
  std::string method = "both", target = "z", suite = "all", mode = "exhaustive";
  std::uint64_t seed = 0, budget = 10'000'000;
  Index trials = 100;
  int p = 5, n = 2, max_iters = 32;

  CLI::App* check = app.add_subcommand("check-free", "freeness of a boolean table");
  check->add_option("--input", input)->required();

  CLI::App* count = app.add_subcommand("count", "triple correlation Lambda(f,f,f)");
  count->add_option("--input", input)->required();
  count->add_option("--method", method)->check(CLI::IsMember({"direct", "fourier", "both"}));

  CLI::App* embed = app.add_subcommand("embed", "Abelian embedding detection");
  embed->add_option("--support", support_path)->required();
  embed->add_option("--target", target)->check(CLI::IsMember({"z", "finite"}));

  CLI::App* increment = app.add_subcommand("increment", "density increment engine");
  std::string inc_mode;
  increment->add_option("mode", inc_mode)->check(CLI::IsMember({"step", "run"}))->required();
  increment->add_option("--input", input)->required();
  increment->add_option("--config", cfg_path)->required();
  increment->add_option("--seed", seed)->required();
  increment->add_option("--out", out_dir);
  increment->add_option("--max-iters", max_iters);

  CLI::App* replay = app.add_subcommand("replay", "re-run a recorded trace");
  replay->add_option("--input", input)->required();
  replay->add_option("--trace", trace_path)->required();
  replay->add_option("--out", out_path)->required();
  replay->add_option("--expect", expect_path);

  CLI::App* verify = app.add_subcommand("verify", "property suites");
  verify->add_option("--suite", suite)
      ->check(CLI::IsMember(
          {"core", "funcspace", "chains", "aps", "embeddings", "structure", "increment", "all"}));
  verify->add_option("--trials", trials);
  verify->add_option("--seed", seed)->required();

  CLI::App* search = app.add_subcommand("search", "extremal free-set search");
  search->add_option("--p", p)->required();
  search->add_option("--n", n)->required();
  search->add_option("--mode", mode)->check(CLI::IsMember({"exhaustive", "bb"}));
  search->add_option("--budget", budget);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const int threads = resolve_threads(threads_flag);
  try {
    if (check->parsed()) return cmd_check_free(input);
    if (count->parsed()) return cmd_count(input, method);
    if (embed->parsed()) return cmd_embed(support_path, target);
    if (increment->parsed())
      return cmd_increment(inc_mode, input, cfg_path, seed, out_dir, max_iters, threads);
    if (replay->parsed()) return cmd_replay(input, trace_path, out_path, expect_path);
    if (verify->parsed()) return cmd_verify(suite, trials, seed);
    if (search->parsed()) return cmd_search(p, n, mode, budget);
  } catch (const FileFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::logic_error& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
