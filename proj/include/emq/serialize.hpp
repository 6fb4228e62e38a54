// serialize.hpp - JSON encoding of layouts, operators and states
//
// Matrices are stored row-major as [re, im] pairs under "data"; every
// document carries its SpaceLayout so tensor ordering is unambiguous.
// Field names are documented in docs/formats.md.

#pragma once

#include "emq/fockspace.hpp"

#include <json.hpp>

namespace emq {

inline constexpr const char* kStateSchema = "emq.state/1";

nlohmann::json to_json(const SpaceLayout& layout);
SpaceLayout layout_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FockOperator& op);
nlohmann::json to_json(const DensityMatrix& rho);
nlohmann::json to_json(const StateVector& psi);

FockOperator operator_from_json(const nlohmann::json& j);
DensityMatrix density_from_json(const nlohmann::json& j);
StateVector state_from_json(const nlohmann::json& j);

}  // namespace emq
