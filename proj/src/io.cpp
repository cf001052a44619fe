#include "apfree/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace apfree {

namespace {

static_assert(std::endian::native == std::endian::little,
              "FPFN writer assumes a little-endian host");

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8));
}

std::uint16_t get_u16(const std::string& in, size_t off) {
  return std::uint16_t(std::uint8_t(in[off])) | std::uint16_t(std::uint8_t(in[off + 1])) << 8;
}

void put_f64(std::string& out, double v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

double get_f64(const std::string& in, size_t off) {
  double v;
  std::memcpy(&v, in.data() + off, 8);
  return v;
}

}  // namespace

void save_function(const std::string& path, const DenseFunction& f) {
  if (!f.uniform_measure())
    throw std::invalid_argument("save_function: only uniform-measure tables are stored");
  std::string out;
  out += "FPFN";
  put_u16(out, 1);
  put_u16(out, std::uint16_t(f.p()));
  put_u16(out, std::uint16_t(f.n()));
  const int kind = f.kind() == Kind::Boolean ? 0 : f.kind() == Kind::Real ? 1 : 2;
  out.push_back(char(kind));
  out.append(3, '\0');
  if (kind == 0) {
    std::uint8_t acc = 0;
    int bits = 0;
    for (Index x = 0; x < f.size(); ++x) {
      if (f.values()[x].real() > 0.5) acc |= std::uint8_t(1) << bits;
      if (++bits == 8) {
        out.push_back(char(acc));
        acc = 0;
        bits = 0;
      }
    }
    if (bits) out.push_back(char(acc));
  } else if (kind == 1) {
    for (Index x = 0; x < f.size(); ++x) put_f64(out, f.values()[x].real());
  } else {
    for (Index x = 0; x < f.size(); ++x) {
      put_f64(out, f.values()[x].real());
      put_f64(out, f.values()[x].imag());
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_function: cannot open " + path);
  os.write(out.data(), std::streamsize(out.size()));
  if (!os) throw std::runtime_error("save_function: write failed for " + path);
}

DenseFunction load_function(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FileFormatError("load_function: cannot open " + path);
  std::string in((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (in.size() < 14 || in.compare(0, 4, "FPFN") != 0)
    throw FileFormatError("load_function: bad magic");
  if (get_u16(in, 4) != 1) throw FileFormatError("load_function: unsupported version");
  const int p = get_u16(in, 6);
  const int n = get_u16(in, 8);
  const int kind = std::uint8_t(in[10]);
  if (in[11] != 0 || in[12] != 0 || in[13] != 0)
    throw FileFormatError("load_function: reserved bytes must be zero");
  if (p < 2 || n < 0 || kind > 2) throw FileFormatError("load_function: bad header fields");
  Index sz;
  try {
    sz = checked_pow(p, n);
  } catch (const std::exception&) {
    throw FileFormatError("load_function: p^n overflows");
  }
  const size_t expected = kind == 0 ? size_t((sz + 7) / 8) : size_t(sz) * 8 * (kind == 2 ? 2 : 1);
  if (in.size() != 14 + expected) throw FileFormatError("load_function: payload length mismatch");

  Eigen::VectorXcd v(sz);
  if (kind == 0) {
    for (Index x = 0; x < sz; ++x) {
      const std::uint8_t byte = std::uint8_t(in[14 + size_t(x >> 3)]);
      v[x] = Cplx(double(byte >> (x & 7) & 1), 0.0);
    }
  } else if (kind == 1) {
    for (Index x = 0; x < sz; ++x) v[x] = Cplx(get_f64(in, 14 + size_t(x) * 8), 0.0);
  } else {
    for (Index x = 0; x < sz; ++x)
      v[x] = Cplx(get_f64(in, 14 + size_t(x) * 16), get_f64(in, 14 + size_t(x) * 16 + 8));
  }
  const Kind k = kind == 0 ? Kind::Boolean : kind == 1 ? Kind::Real : Kind::Complex;
  try {
    return DenseFunction(p, n, k, std::move(v));
  } catch (const std::invalid_argument& e) {
    throw FileFormatError(std::string("load_function: ") + e.what());
  }
}

nlohmann::json support_to_json(const Support& support) {
  return {{"alphabets", support.alphabet_sizes}, {"atoms", support.atoms}};
}

Support support_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("alphabets") || !j.contains("atoms"))
    throw FileFormatError("support: need {alphabets, atoms}");
  Support s;
  try {
    s.alphabet_sizes = j.at("alphabets").get<std::vector<int>>();
    s.atoms = j.at("atoms").get<std::vector<std::vector<int>>>();
    s.validate();
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("support: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FileFormatError(std::string("support: ") + e.what());
  }
  return s;
}

nlohmann::json certificate_to_json(const EmbeddingCertificate& cert) {
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& table : cert.maps) {
    nlohmann::json letters = nlohmann::json::array();
    for (const auto& v : table) {
      nlohmann::json comps = nlohmann::json::array();
      for (const BigInt& c : v) comps.push_back(c.str());
      letters.push_back(comps);
    }
    maps.push_back(letters);
  }
  return {{"target", cert.target_orders.empty() ? nlohmann::json("Z")
                                                : nlohmann::json(cert.target_orders)},
          {"maps", maps},
          {"trivial", cert.is_trivial()}};
}

nlohmann::json product_to_json(const ProductFunction& p) {
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& table : p.factors()) {
    nlohmann::json t = nlohmann::json::array();
    for (Cplx v : table) t.push_back({v.real(), v.imag()});
    factors.push_back(t);
  }
  return {{"group", p.group().cyclic_orders()},
          {"scalar", {p.scalar().real(), p.scalar().imag()}},
          {"factors", factors}};
}

ProductFunction product_from_json(const nlohmann::json& j, int p) {
  try {
    FiniteAbelianGroup group(j.at("group").get<std::vector<int>>());
    const auto sc = j.at("scalar").get<std::vector<double>>();
    std::vector<std::vector<Cplx>> factors;
    for (const auto& t : j.at("factors")) {
      std::vector<Cplx> table;
      for (const auto& v : t) table.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      factors.push_back(std::move(table));
    }
    return ProductFunction(p, std::move(group), Cplx(sc.at(0), sc.at(1)), std::move(factors));
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("product: ") + e.what());
  }
}

nlohmann::json config_to_json(const IncrementConfig& cfg) {
  return {{"d", cfg.d},
          {"epsilon", cfg.epsilon},
          {"beta", cfg.beta},
          {"delta", cfg.delta},
          {"robustify_iters", cfg.robustify_iters},
          {"robustify_samples", cfg.robustify_samples},
          {"robustify_z_dim", cfg.robustify_z_dim},
          {"restriction_samples", cfg.restriction_samples},
          {"bump_budget", cfg.bump_budget},
          {"r", cfg.r},
          {"keep_prob", cfg.keep_prob},
          {"eta", cfg.eta},
          {"good_block_fraction", cfg.good_block_fraction},
          {"max_dimension_loss", cfg.max_dimension_loss},
          {"seed", cfg.seed}};
}

IncrementConfig config_from_json(const nlohmann::json& j) {
  IncrementConfig cfg;
  try {
    // Every field is required; a missing knob is a config error, named.
    for (const char* field :
         {"d", "epsilon", "beta", "delta", "robustify_iters", "robustify_samples",
          "robustify_z_dim", "restriction_samples", "bump_budget", "r", "keep_prob", "eta",
          "good_block_fraction", "max_dimension_loss", "seed"})
      if (!j.contains(field))
        throw FileFormatError(std::string("config: missing field '") + field + "'");
    cfg.d = j.at("d").get<int>();
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.beta = j.at("beta").get<double>();
    cfg.delta = j.at("delta").get<double>();
    cfg.robustify_iters = j.at("robustify_iters").get<int>();
    cfg.robustify_samples = j.at("robustify_samples").get<int>();
    cfg.robustify_z_dim = j.at("robustify_z_dim").get<int>();
    cfg.restriction_samples = j.at("restriction_samples").get<int>();
    cfg.bump_budget = j.at("bump_budget").get<Index>();
    cfg.r = j.at("r").get<int>();
    cfg.keep_prob = j.at("keep_prob").get<double>();
    cfg.eta = j.at("eta").get<double>();
    cfg.good_block_fraction = j.at("good_block_fraction").get<double>();
    cfg.max_dimension_loss = j.at("max_dimension_loss").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FileFormatError(std::string("config: ") + e.what());
  }
  return cfg;
}

nlohmann::json restriction_to_json(const Restriction& r) {
  return {{"alive", r.alive}, {"fixed_coords", r.fixed_coords}, {"fixed_values", r.fixed_values}};
}

Restriction restriction_from_json(const nlohmann::json& j) {
  Restriction r;
  r.alive = j.at("alive").get<std::vector<int>>();
  r.fixed_coords = j.at("fixed_coords").get<std::vector<int>>();
  r.fixed_values = j.at("fixed_values").get<std::vector<int>>();
  return r;
}

nlohmann::json basis_to_json(const SpecialBasis& b) {
  return {{"p", b.p()}, {"n", b.n()}, {"v", b.v()}, {"u", b.u()}};
}

SpecialBasis basis_from_json(const nlohmann::json& j) {
  return SpecialBasis(j.at("p").get<int>(), j.at("n").get<int>(),
                      j.at("v").get<std::vector<std::vector<int>>>(),
                      j.at("u").get<std::vector<std::vector<int>>>());
}

nlohmann::json trace_step_to_json(const TraceStep& s) {
  nlohmann::json j = {{"n_before", s.n_before},
                      {"n_after", s.n_after},
                      {"density_before", s.density_before},
                      {"density_after", s.density_after},
                      {"correlation_before", s.correlation_before},
                      {"correlation_after", s.correlation_after}};
  switch (s.type) {
    case TraceStep::Type::RandomRestriction:
      j["type"] = "random_restriction";
      j["restriction"] = restriction_to_json(s.restriction);
      break;
    case TraceStep::Type::BasisChange:
      j["type"] = "basis_change";
      j["basis"] = basis_to_json(*s.basis);
      break;
    case TraceStep::Type::ZRestriction:
      j["type"] = "z_restriction";
      j["z"] = s.z;
      break;
    case TraceStep::Type::CoordinateDrop:
      j["type"] = "coordinate_drop";
      j["dropped"] = s.dropped;
      break;
  }
  return j;
}

TraceStep trace_step_from_json(const nlohmann::json& j) {
  TraceStep s;
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "random_restriction") {
      s.type = TraceStep::Type::RandomRestriction;
      s.restriction = restriction_from_json(j.at("restriction"));
    } else if (type == "basis_change") {
      s.type = TraceStep::Type::BasisChange;
      s.basis = basis_from_json(j.at("basis"));
    } else if (type == "z_restriction") {
      s.type = TraceStep::Type::ZRestriction;
      s.z = j.at("z").get<std::vector<int>>();
    } else if (type == "coordinate_drop") {
      s.type = TraceStep::Type::CoordinateDrop;
      s.dropped = j.at("dropped").get<std::vector<int>>();
    } else {
      throw FileFormatError("trace: unknown step type " + type);
    }
    s.n_before = j.at("n_before").get<int>();
    s.n_after = j.at("n_after").get<int>();
    s.density_before = j.at("density_before").get<double>();
    s.density_after = j.at("density_after").get<double>();
    s.correlation_before = j.value("correlation_before", 0.0);
    s.correlation_after = j.value("correlation_after", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("trace: ") + e.what());
  }
  return s;
}

nlohmann::json trace_to_json(const IncrementTrace& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (const TraceStep& s : t.steps) steps.push_back(trace_step_to_json(s));
  return {{"steps", steps}};
}

IncrementTrace trace_from_json(const nlohmann::json& j) {
  IncrementTrace t;
  for (const auto& s : j.at("steps")) t.steps.push_back(trace_step_from_json(s));
  return t;
}

}  // namespace apfree
