#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "quadrant/error.hpp"
#include "quadrant/model.hpp"

namespace quadrant {

/// Validation failure carrying the full report.
class ModelValidationError : public ValidationError {
 public:
  explicit ModelValidationError(ModelReport report)
      : ValidationError("model validation failed:\n" + report.to_text()), report_(std::move(report)) {}
  const ModelReport& report() const noexcept { return report_; }

 private:
  ModelReport report_;
};

/// Parse a model document. Masses are [di, dj, p] triples; p is a number or an exact
/// rational string such as "3/8". Layout:
///
///   k0: 1
///   interior: [[1, 0, "1/6"], [0, -1, "3/8"], ...]
///   horizontal: [ <law for j = 0>, ... ]       # k0 laws
///   vertical:   [ <law for i = 0>, ... ]       # k0 laws
///   corner:     [ [<law (0,0)>, <law (0,1)>, ...], ... ]   # k0 x k0, row i
QuadrantModel parse_model(std::string_view text, std::string name = {});

/// Parse without validating. `source` is a file path or a "builtin:<name>" catalog entry.
QuadrantModel read_model(const std::string& source);

/// Parse and validate; throws ModelValidationError when any check fails.
QuadrantModel load_model(const std::string& source);

std::string serialize_model(const QuadrantModel& model);

/// Bundled reference models: "reference", "nonsym", "symmetric".
std::string_view builtin_model_text(std::string_view name);

}  // namespace quadrant
