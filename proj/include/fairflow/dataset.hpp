#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairflow/error.hpp"
#include "fairflow/linalg.hpp"

namespace fairflow {

// z-score parameters per feature column. Columns left unscaled (binary ones)
// carry mean 0 and sd 1 so applying the transform is uniform.
struct Standardization {
  std::vector<std::string> columns;
  Vector mean;
  Vector sd;

  friend bool operator==(const Standardization&, const Standardization&) = default;
};

struct Dataset {
  std::vector<std::string> feature_names;
  Matrix features;  // n x d
  std::vector<int> labels;
  std::map<std::string, std::vector<int>> protected_attributes;
  std::optional<Standardization> standardization;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t dim() const noexcept { return features.cols(); }
  ConstVecView sample(std::size_t i) const { return features.row(i); }

  void validate() const {
    if (feature_names.size() != features.cols()) {
      throw DataError("dataset: " + std::to_string(feature_names.size()) +
                      " feature names for " + std::to_string(features.cols()) + " columns");
    }
    if (labels.size() != features.rows()) throw DataError("dataset: label count != row count");
    for (int y : labels)
      if (y != 0 && y != 1) throw DataError("dataset: labels must be 0 or 1");
    for (const auto& [name, col] : protected_attributes) {
      if (col.size() != features.rows()) {
        throw DataError("dataset: protected column '" + name + "' has wrong length");
      }
      for (const auto& f : feature_names)
        if (f == name) throw DataError("dataset: protected column '" + name + "' is also a feature");
      for (int g : col)
        if (g != 0 && g != 1) throw DataError("dataset: protected column '" + name + "' is not binary");
    }
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

inline void require_label(int y) {
  if (y != 0 && y != 1) throw InvalidArgument("label must be 0 or 1, got " + std::to_string(y));
}

}  // namespace fairflow
