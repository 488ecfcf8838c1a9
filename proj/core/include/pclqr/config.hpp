#pragma once

#include <optional>
#include <string>

#include "pclqr/model.hpp"
#include "pclqr/types.hpp"

namespace pclqr {

/// A validated system description parsed from a JSON configuration document.
struct LoadedSystem {
  UncertainLTI system;
  CostWeights weights;
  std::optional<Vector> x0;
  std::optional<ParamScale> scale;
};

/// Parses and validates a configuration document. Grid-point documents are
/// fitted to PC coefficients via fit_from_grid; direct-coefficient documents
/// are taken as-is. Every violation throws InputError naming the field.
LoadedSystem load_system(const std::string& json_text);

/// load_system applied to the contents of a file.
LoadedSystem load_system_file(const std::string& path);

}  // namespace pclqr
