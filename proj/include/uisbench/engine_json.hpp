#pragma once

// JSON documents for engine configurations and belief reports. Systems
// carry a "kind" discriminator plus variant-specific blocks; numbers are
// written with round-trip precision so save/load is lossless.

#include <nlohmann/json.hpp>

#include "uisbench/engines.hpp"

namespace uisbench {

nlohmann::json system_to_json(const UisSystem& sys);
/// Structural problems (missing keys, wrong types, unknown tags) throw
/// Error("validation_error") naming the JSON path. Range checks are left
/// to validate().
UisSystem system_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const BeliefReport& r);
BeliefReport report_from_json(const nlohmann::json& j);

/// Parameter schema per engine kind (names, legal ranges, rule forms).
nlohmann::json engine_schema();

}  // namespace uisbench
