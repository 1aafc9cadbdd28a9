#pragma once

#include "lapewc/consolidate.hpp"
#include "lapewc/net.hpp"
#include "lapewc/types.hpp"

#include <json.hpp>

#include <string>
#include <utility>

namespace lapewc {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const ParamVector& v);
Json to_json(const DiagPrecision& q);
Json to_json(const Architecture& arch);
Json to_json(const QuadraticPenalty& p);
Json to_json(const ConsolidatedPosterior& state);
Json to_json(const PenaltyBank& bank);

ParamVector param_vector_from_json(const Json& j);
DiagPrecision diag_precision_from_json(const Json& j);
Architecture architecture_from_json(const Json& j);
QuadraticPenalty penalty_from_json(const Json& j);
ConsolidatedPosterior consolidated_from_json(const Json& j);
PenaltyBank bank_from_json(const Json& j);

/// {"schema_version", "kind": "checkpoint", "architecture", "params"}.
Json checkpoint_to_json(const Architecture& arch, const ParamVector& params);
std::pair<Architecture, ParamVector> checkpoint_from_json(const Json& j);

/// Canonical byte form of the numerical consolidation state: every double is
/// written as its 16-hex-digit IEEE-754 bit pattern and bookkeeping (the task
/// log) is left out, so the length depends only on what is stored per parameter.
std::string normalized_state(const ConsolidatedPosterior& state);
std::string normalized_state(const PenaltyBank& bank);

std::string hex_bits(double x);
double from_hex_bits(const std::string& s);

}  // namespace lapewc
