#pragma once

#include "hmmar/model.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace hmmar {

/// Model document: {"k", "p", "coeffs", "sigmas", "transition", "rho"}.
/// Unknown fields are rejected. Throws InvalidModel on schema errors; the
/// parsed model is not validated here.
HmMarModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const HmMarModel& model);

HmMarModel parse_model(const std::string& text);
HmMarModel load_model(const std::string& path);

/// Serializes a JSON tree with every floating-point number written with 17
/// significant digits. Non-finite numbers become null.
std::string dump_json(const nlohmann::json& doc, int indent = 2);

}  // namespace hmmar
