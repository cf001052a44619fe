#pragma once

#include <string>

#include "apfree/aps.hpp"
#include "apfree/chains.hpp"
#include "apfree/structure.hpp"

namespace apfree {

// Desk-scale stand-ins for the galactic thresholds; every report echoes the
// config it ran under.
struct IncrementConfig {
  int d = 8;               // degree cap for level weights and bump search
  double epsilon = 0.05;   // correlation floor
  double beta = 0.01;      // density bump target
  double delta = 0.1;      // robustify collapse fraction
  int robustify_iters = 8;     // N
  int robustify_samples = 2;   // bases per robustify iteration
  int robustify_z_dim = 1;     // completion coordinates per sampled basis
  int restriction_samples = 64;  // random restrictions tried in the correlation branch
  Index bump_budget = 20000;     // samples inside restriction_bump_search
  int r = 0;               // block size |H|; 0 means p
  double keep_prob = 0.0;  // restriction keep probability; 0 means 1/(2d)
  double eta = 0.05;       // density slack allowed in the correlation branch
  double good_block_fraction = 1.0;  // blocks that must have all shifts zero
  double max_dimension_loss = 0.8;   // n'' >= ceil(n * (1 - loss))
  std::uint64_t seed = 1;

  void validate() const;
  int block_size(int p) const { return r > 0 ? r : p; }
  double restriction_keep(int) const { return keep_prob > 0.0 ? keep_prob : 0.5 / d; }
  int min_dimension(int n) const;
};

struct TraceStep {
  enum class Type { RandomRestriction, BasisChange, ZRestriction, CoordinateDrop };
  Type type = Type::CoordinateDrop;
  Restriction restriction;             // RandomRestriction
  std::optional<SpecialBasis> basis;   // BasisChange
  std::vector<int> z;                  // ZRestriction
  std::vector<int> dropped;            // CoordinateDrop (informational)
  int n_before = 0, n_after = 0;
  double density_before = 0.0, density_after = 0.0;
  double correlation_before = 0.0, correlation_after = 0.0;
};

struct IncrementTrace {
  std::vector<TraceStep> steps;
};

// Applies the recorded steps to the input; a BasisChange must be followed by
// the ZRestriction that consumes it. Reproduces the recorded output
// bit-exactly (same calls, same order).
DenseFunction replay_trace(const DenseFunction& input, const IncrementTrace& trace);

struct WReport {
  double operator_route = 0.0;  // <f, T tensor f>
  double fourier_route = 0.0;   // sum over alpha of |hat f|^2 prod lambda
  double value = 0.0;
};

// W = E_{x,a}[f(x+a) f(x+2a)]; both routes must agree within 1e-9.
WReport pair_correlation_W_report(const DenseFunction& f);
double pair_correlation_W(const DenseFunction& f);

struct LowWeightOutcome {
  bool activated = false;  // W <= alpha^2 / 100
  double w = 0.0, alpha = 0.0;
  double w_low = 0.0;  // W_{<=d}[f - alpha], the operative surrogate
  BumpSearchResult bump;
};

LowWeightOutcome low_weight_branch(const DenseFunction& f, const IncrementConfig& cfg);

struct CorrelationBranchResult {
  bool success = false;
  std::optional<ProductFunction> product;
  std::optional<DenseFunction> f_prime;
  std::optional<Restriction> restriction;  // set when a random restriction was needed
  double lambda_value = 0.0;               // |3^{-n} alpha - alpha W|
  double lambda_floor = 0.0;               // alpha^3 / 200
  bool size_floor_ok = false;              // 3^{-n} <= alpha^2 / 200
  double correlation = 0.0;
  std::string diagnostics;
};

// Requires W > alpha^2/100. Finds a correlated product function (exact
// Fourier search over H = Z_p), falling back to random restrictions with
// keep probability 1/(2d) when the correlation sits below the floor.
CorrelationBranchResult correlation_branch(const DenseFunction& f, const IncrementConfig& cfg);

struct PigeonholeResult {
  DenseFunction g;
  IncrementTrace trace;  // CoordinateDrop, BasisChange, ZRestriction, x-part fix
  int n_out = 0;
  int good_blocks = 0, total_blocks = 0;
  int block_size = 0;
  std::vector<int> dropped;
  double density = 0.0;
  double product_constancy = 0.0;  // sup |restricted P - mean|, must be <= 1e-9
};

struct NoGoodZ : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Groups coordinates by identical factor tables, partitions the largest
// class into blocks whose size makes the block product collapse to a
// constant (|H| for a full-order table, 1 for a constant table), then picks
// the sampled good z / z' with the densest restriction. min_dim is the
// dimension floor the caller will enforce.
PigeonholeResult pigeonhole_block_step(const DenseFunction& f_prime,
                                       const ProductFunction& product,
                                       const IncrementConfig& cfg, int min_dim,
                                       std::uint64_t seed_stream);

enum class StepStatus { Improved, Stuck };

struct StepResult {
  StepStatus status = StepStatus::Stuck;
  std::optional<DenseFunction> g;
  IncrementTrace trace;
  std::string branch;  // "low_weight" | "robustify_bump" | "pigeonhole"
  double density_before = 0.0, density_after = 0.0;
  int n_before = 0, n_after = 0;
  std::string diagnostics;
  WReport w;
};

// One step of the density increment: low-weight bump, else correlation ->
// robustify -> pigeonhole; the best candidate with n'' above the dimension
// floor wins. Output freeness is checked, never assumed.
StepResult increment_step(const DenseFunction& f, const IncrementConfig& cfg);

enum class RunStatus { DensityTarget, Stuck, DimensionFloor, MaxIters };

struct RunResult {
  RunStatus status = RunStatus::Stuck;
  std::optional<DenseFunction> final_f;
  std::vector<StepResult> steps;
  std::vector<double> densities;  // strictly increasing across accepted steps
  double final_lambda = 0.0;      // endgame triple correlation when computed
  bool endgame_checked = false;
  std::string diagnostics;
};

RunResult increment_run(const DenseFunction& f, const IncrementConfig& cfg, int max_iters);

}  // namespace apfree
