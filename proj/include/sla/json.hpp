#pragma once

#include "sla/typecheck.hpp"

#include <json.hpp>

namespace sla {

// Stable JSON shapes: keys are emitted in sorted order by nlohmann::json.
nlohmann::json to_json(const SubtypeStep &s);
nlohmann::json to_json(const Derivation &d);
nlohmann::json to_json(const Env &env);

} // namespace sla
