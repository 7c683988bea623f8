#pragma once

#include <string>

#include "bzeta/model.hpp"

namespace bzeta {

constexpr int kSchemaVersion = 1;

// JSON model documents, see docs/model-format.md. Errors are InputError with line/column or a JSON path.
ModelSpec parse_model(const std::string& text);
ModelSpec load_model(const std::string& path);

// Canonical explicit form: every variable and factor, parameters keyed by statistic name, sorted keys.
std::string serialize_model(const ModelSpec& model);
void save_model(const ModelSpec& model, const std::string& path);

}  // namespace bzeta
