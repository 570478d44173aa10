#pragma once

#include <memory>

#include <json.hpp>

#include "metric.hpp"

namespace wlm {

/// Same as chart_from_json but operating on an already-parsed JSON object
/// (used by the run-config parser).
std::shared_ptr<Chart> chart_from_json_object(const nlohmann::json& j);

}  // namespace wlm
