#pragma once

#include <string>

#include <json.hpp>

#include "apfree/embeddings.hpp"
#include "apfree/increment.hpp"
#include "apfree/structure.hpp"

namespace apfree {

// Raised on malformed inputs (bad magic, truncated payload, schema
// violations); the CLI maps it to its format exit code.
struct FileFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FPFN function tables: "FPFN", u16 version (= 1), u16 p, u16 n, kind byte
// (0 boolean bitset LSB-first, 1 real float64, 2 complex float64 pairs),
// 3 reserved zero bytes, payload in encode_point order, little-endian.
void save_function(const std::string& path, const DenseFunction& f);
DenseFunction load_function(const std::string& path);

nlohmann::json support_to_json(const Support& support);
Support support_from_json(const nlohmann::json& j);

nlohmann::json certificate_to_json(const EmbeddingCertificate& cert);

nlohmann::json product_to_json(const ProductFunction& p);
ProductFunction product_from_json(const nlohmann::json& j, int p);

nlohmann::json config_to_json(const IncrementConfig& cfg);
IncrementConfig config_from_json(const nlohmann::json& j);

nlohmann::json restriction_to_json(const Restriction& r);
Restriction restriction_from_json(const nlohmann::json& j);

nlohmann::json basis_to_json(const SpecialBasis& b);
SpecialBasis basis_from_json(const nlohmann::json& j);

nlohmann::json trace_step_to_json(const TraceStep& s);
TraceStep trace_step_from_json(const nlohmann::json& j);

nlohmann::json trace_to_json(const IncrementTrace& t);
IncrementTrace trace_from_json(const nlohmann::json& j);

}  // namespace apfree
