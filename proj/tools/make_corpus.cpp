// Builds the pinned increment-engine regression corpus: 10 planted free
// instances (p = 5, n in [8, 10]) with per-instance configs, golden traces,
// and golden outputs, plus a manifest the regression tests read.
//
// Usage: make-corpus [OUT_DIR]   (default tests/data)

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "apfree/io.hpp"
#include "greedy.h"

namespace {

using namespace apfree;
using nlohmann::json;

struct Instance {
  std::string name;
  PointSet set;
  IncrementConfig cfg;
};

// ~2000 greedy points inside the hyperplane {sum x_i = 0}, pinning the best
// character at (1,...,1), plus three planted block-constant points so the
// z = 0 pigeonhole fiber is dense. The planted patterns are free in F_5^2.
Instance hyperplane_instance(int index, std::uint64_t seed) {
  const int p = 5, n = 10;
  PointSet set(p, n);
  const std::array<std::array<int, 2>, 3> patterns = {{{0, 0}, {0, 1}, {1, 0}}};
  for (const auto& s : patterns) {
    std::vector<int> x(n);
    for (int i = 0; i < n; ++i) x[i] = i < 5 ? s[0] : s[1];
    set.insert(encode_digits(x, p));
  }
  greedy_extend_free(set, 2000, seed, [&](const std::vector<int>& xd) {
    return std::accumulate(xd.begin(), xd.end(), 0) % p == 0;
  });

  IncrementConfig cfg;
  cfg.epsilon = 1e-6;
  cfg.robustify_iters = 2;
  cfg.robustify_samples = 2;
  cfg.robustify_z_dim = 1;
  cfg.seed = seed;
  return {"hyperplane" + std::to_string(index), std::move(set), cfg};
}

// A greedy free pattern set S in F_5^3 lifted to {(s, y0)}: coordinates 0..2
// range over S, the rest sit at a fixed random point. Freeness lifts, and
// every nonempty n' = 2 robustify fiber is an immediate density bump.
Instance subcube_instance(int index, int n, std::uint64_t seed) {
  const int p = 5;
  const PointSet pattern = greedy_free_set(p, 3, 25, seed);
  CounterRng rng(seed, 5);
  std::vector<int> y0(n - 3);
  for (int& c : y0) c = static_cast<int>(rng.next_below(p));

  PointSet set(p, n);
  std::vector<int> x(n);
  for (Index s : pattern.members()) {
    decode_digits(s, p, 3, std::span<int>(x.data(), 3));
    std::copy(y0.begin(), y0.end(), x.begin() + 3);
    set.insert(encode_digits(x, p));
  }

  IncrementConfig cfg;
  cfg.epsilon = 1e-6;
  cfg.robustify_iters = 1;
  cfg.robustify_samples = 1;
  cfg.robustify_z_dim = n - 2;
  cfg.seed = seed;
  return {"subcube" + std::to_string(index), std::move(set), cfg};
}

// Replays the trace prefix by prefix and checks every intermediate function
// against the freeness oracle.
void check_intermediates_free(const DenseFunction& input, const IncrementTrace& trace) {
  DenseFunction f = input;
  std::optional<SpecialBasis> pending;
  for (const TraceStep& step : trace.steps) {
    bool changed = false;
    switch (step.type) {
      case TraceStep::Type::CoordinateDrop:
        break;
      case TraceStep::Type::BasisChange:
        pending = step.basis;
        break;
      case TraceStep::Type::ZRestriction:
        f = restrict_z(f, *pending, step.z);
        pending.reset();
        changed = true;
        break;
      case TraceStep::Type::RandomRestriction:
        f = restrict_function(f, step.restriction);
        changed = true;
        break;
    }
    if (changed && !is_restricted_ap_free(PointSet::from_function(f)))
      throw std::logic_error("corpus: intermediate restriction is not free");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "tests/data";
  std::filesystem::create_directories(out_dir);

  std::vector<Instance> instances;
  for (int i = 0; i < 4; ++i) instances.push_back(hyperplane_instance(i, 101 + i));
  for (int i = 0; i < 3; ++i) instances.push_back(subcube_instance(i, 9, 201 + i));
  for (int i = 0; i < 3; ++i) instances.push_back(subcube_instance(3 + i, 8, 301 + i));

  json manifest = json::array();
  for (const Instance& inst : instances) {
    const DenseFunction f = inst.set.to_function();
    if (!is_restricted_ap_free(inst.set)) {
      std::cerr << inst.name << ": planted set is not free\n";
      return 3;
    }
    const std::string base = out_dir + "/" + inst.name;
    save_function(base + ".fpfn", f);
    std::ofstream(base + ".config.json") << config_to_json(inst.cfg).dump(2) << "\n";

    const StepResult step = increment_step(f, inst.cfg);
    if (step.status != StepStatus::Improved) {
      std::cerr << inst.name << ": step stuck: " << step.diagnostics << "\n";
      return 3;
    }
    const double gain = step.density_after - step.density_before;
    const bool dim_ok = 5 * step.n_after >= f.n();
    if (gain < 0.01 || !dim_ok) {
      std::cerr << inst.name << ": gain " << gain << " n_out " << step.n_after << " (n " << f.n()
                << ")\n";
      return 3;
    }
    const DenseFunction replayed = replay_trace(f, step.trace);
    if ((replayed.values() - step.g->values()).cwiseAbs().maxCoeff() != 0.0) {
      std::cerr << inst.name << ": trace replay is not bit-exact\n";
      return 3;
    }
    check_intermediates_free(f, step.trace);

    std::ofstream(base + ".trace.json") << trace_to_json(step.trace).dump(2) << "\n";
    save_function(base + ".golden.fpfn", *step.g);
    manifest.push_back({{"name", inst.name},
                        {"p", f.p()},
                        {"n", f.n()},
                        {"members", inst.set.size()},
                        {"branch", step.branch},
                        {"density_before", step.density_before},
                        {"density_after", step.density_after},
                        {"n_after", step.n_after},
                        {"input", inst.name + ".fpfn"},
                        {"config", inst.name + ".config.json"},
                        {"trace", inst.name + ".trace.json"},
                        {"output", inst.name + ".golden.fpfn"}});
    std::cout << inst.name << ": branch " << step.branch << ", density "
              << step.density_before << " -> " << step.density_after << ", n " << f.n() << " -> "
              << step.n_after << "\n";
  }
  std::ofstream(out_dir + "/corpus.json") << json{{"instances", manifest}}.dump(2) << "\n";
  std::cout << "wrote " << instances.size() << " instances to " << out_dir << "\n";
  return 0;
}
