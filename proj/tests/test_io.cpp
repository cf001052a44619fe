#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "apfree/io.hpp"

using namespace apfree;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const char* name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("FPFN round trip is byte identical for every kind") {
  CounterRng rng(91, 0);
  TempFile tmp("apfree_io_roundtrip.fpfn");
  for (const Kind kind : {Kind::Boolean, Kind::Real, Kind::Complex}) {
    const int p = 5, n = 3;
    const Index size = checked_pow(p, n);
    Eigen::VectorXcd v(size);
    for (Index i = 0; i < size; ++i) {
      if (kind == Kind::Boolean)
        v[i] = Cplx(rng.next_bernoulli(0.4) ? 1.0 : 0.0, 0.0);
      else if (kind == Kind::Real)
        v[i] = Cplx(2.0 * rng.next_double() - 1.0, 0.0);
      else
        v[i] = std::polar(rng.next_double(), 6.28 * rng.next_double());
    }
    const DenseFunction f(p, n, kind, v);
    save_function(tmp.path, f);
    const std::string first = slurp(tmp.path);
    const DenseFunction g = load_function(tmp.path);
    CHECK(g.p() == p);
    CHECK(g.n() == n);
    CHECK(g.kind() == kind);
    CHECK((g.values() - f.values()).cwiseAbs().maxCoeff() == 0.0);
    save_function(tmp.path, g);
    CHECK(slurp(tmp.path) == first);  // store(load(F)) byte identical
  }
}

TEST_CASE("FPFN header layout is frozen") {
  TempFile tmp("apfree_io_header.fpfn");
  const DenseFunction f = DenseFunction::indicator(5, 2, {0, 24});
  save_function(tmp.path, f);
  const std::string bytes = slurp(tmp.path);
  REQUIRE(bytes.size() == 14 + 4);  // 25 booleans -> 4 payload bytes
  CHECK(bytes.compare(0, 4, "FPFN") == 0);
  CHECK(std::uint8_t(bytes[4]) == 1);  // version LE
  CHECK(std::uint8_t(bytes[5]) == 0);
  CHECK(std::uint8_t(bytes[6]) == 5);  // p
  CHECK(std::uint8_t(bytes[8]) == 2);  // n
  CHECK(std::uint8_t(bytes[10]) == 0); // boolean kind
  CHECK(std::uint8_t(bytes[14]) == 1); // LSB-first: point 0 is a member
  CHECK(std::uint8_t(bytes[17]) == 1); // bit 24 of the payload
}

TEST_CASE("malformed FPFN files are rejected with FileFormatError") {
  TempFile tmp("apfree_io_malformed.fpfn");
  const DenseFunction f = DenseFunction::indicator(3, 2, {1});
  save_function(tmp.path, f);
  const std::string good = slurp(tmp.path);

  auto write_bytes = [&](std::string bytes) {
    std::ofstream(tmp.path, std::ios::binary | std::ios::trunc)
        .write(bytes.data(), std::streamsize(bytes.size()));
  };

  std::string bad = good;
  bad[0] = 'X';
  write_bytes(bad);
  CHECK_THROWS_AS(load_function(tmp.path), FileFormatError);

  bad = good;
  bad[4] = 2;  // unsupported version
  write_bytes(bad);
  CHECK_THROWS_AS(load_function(tmp.path), FileFormatError);

  bad = good;
  bad[11] = 1;  // reserved byte
  write_bytes(bad);
  CHECK_THROWS_AS(load_function(tmp.path), FileFormatError);

  write_bytes(good.substr(0, good.size() - 1));  // truncated payload
  CHECK_THROWS_AS(load_function(tmp.path), FileFormatError);

  write_bytes(good + std::string(1, '\0'));  // trailing garbage
  CHECK_THROWS_AS(load_function(tmp.path), FileFormatError);

  CHECK_THROWS_AS(load_function(tmp.path + ".does-not-exist"), FileFormatError);
}

TEST_CASE("support and certificate JSON round trips") {
  Support s;
  s.alphabet_sizes = {5, 5, 5};
  for (int x = 0; x < 5; ++x)
    for (int a : {0, 1, 2}) s.atoms.push_back({x, (x + a) % 5, (x + 2 * a) % 5});
  const nlohmann::json j = support_to_json(s);
  const Support back = support_from_json(j);
  CHECK(back.alphabet_sizes == s.alphabet_sizes);
  CHECK(back.atoms == s.atoms);
  CHECK_THROWS_AS(support_from_json(nlohmann::json{{"alphabets", {2, 2}}}), FileFormatError);

  const UniversalEmbeddingResult u = universal_finite_embedding(s);
  REQUIRE(!u.generators.empty());
  const nlohmann::json cj = certificate_to_json(u.generators[0]);
  CHECK(cj.at("target").is_array());
  CHECK(!cj.at("trivial").get<bool>());
}

TEST_CASE("config JSON: full round trip and named missing fields") {
  IncrementConfig cfg;
  cfg.epsilon = 0.025;
  cfg.seed = 99;
  const nlohmann::json j = config_to_json(cfg);
  const IncrementConfig back = config_from_json(j);
  CHECK(back.epsilon == cfg.epsilon);
  CHECK(back.seed == cfg.seed);
  CHECK(back.d == cfg.d);

  nlohmann::json missing = j;
  missing.erase("beta");
  try {
    config_from_json(missing);
    FAIL("expected FileFormatError");
  } catch (const FileFormatError& e) {
    CHECK(std::string(e.what()).find("beta") != std::string::npos);
  }
}

TEST_CASE("product, basis, and trace JSON round trips preserve replay") {
  const ProductFunction prod = ProductFunction::from_character(5, {1, 0, 2});
  const ProductFunction back = product_from_json(product_to_json(prod), 5);
  CHECK((back.materialize().values() - prod.materialize().values()).cwiseAbs().maxCoeff() == 0.0);

  const SpecialBasis basis = SpecialBasis::complete(5, 3, {{1, 1, 0}});
  const SpecialBasis basis_back = basis_from_json(basis_to_json(basis));
  CHECK(basis_back.v() == basis.v());
  CHECK(basis_back.u() == basis.u());

  IncrementTrace trace;
  TraceStep bstep;
  bstep.type = TraceStep::Type::BasisChange;
  bstep.basis = basis;
  bstep.n_before = bstep.n_after = 3;
  trace.steps.push_back(bstep);
  TraceStep zstep;
  zstep.type = TraceStep::Type::ZRestriction;
  zstep.z = {2, 4};
  zstep.n_before = 3;
  zstep.n_after = 1;
  trace.steps.push_back(zstep);

  const IncrementTrace trace_back = trace_from_json(trace_to_json(trace));
  const DenseFunction f = DenseFunction::indicator(5, 3, {0, 31, 62, 93, 124});
  const DenseFunction a = replay_trace(f, trace);
  const DenseFunction b = replay_trace(f, trace_back);
  CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() == 0.0);
}
