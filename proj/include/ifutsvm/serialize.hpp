#ifndef IFUTSVM_SERIALIZE_HPP
#define IFUTSVM_SERIALIZE_HPP

#include "ifutsvm/models.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace ifutsvm {

// Binary layout, little-endian throughout:
//   "IFUTSVM\x01"
//   u32 kind (0 utsvm, 1 ifutsvm-id), u32 mode (0 linear, 1 kernel)
//   u64 n (features), u64 m (rows of D, 0 in linear mode), u64 coefficient length
//   f64 c1 c2 c3 c4 cu epsilon width(0 if linear) delta eta rho tol   (NaN = unset)
//   u64 max_iter, u32 flags (1 rkhs norm, 2 uniform weighting), u64 seed
//   f64 w1[len] b1 w2[len] b2, then D row-major (m x n)
void write_model(std::ostream& out, const TwinModel& model);
TwinModel read_model(std::istream& in);

nlohmann::json model_to_json(const TwinModel& model);
TwinModel model_from_json(const nlohmann::json& j);

/// ".json" paths use the JSON variant, anything else the binary one.
void save_model(const std::string& path, const TwinModel& model);
/// Detects the format from the leading bytes.
TwinModel load_model(const std::string& path);

nlohmann::json hyperparams_to_json(const Hyperparams& hp);

}  // namespace ifutsvm

#endif  // IFUTSVM_SERIALIZE_HPP
