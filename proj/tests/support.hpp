#pragma once

#include <cmath>
#include <string>

#include "helm/bms.hpp"
#include "helm/compiler.hpp"
#include "helm/network.hpp"
#include "helm/serialize.hpp"

namespace testing {

inline std::string source_path(const std::string& relative) {
  return std::string(HELM_SOURCE_DIR) + "/" + relative;
}

inline helm::FeatureModel stern_model() {
  return helm::load_feature_model(helm::read_file(source_path("models/stern-plan-view.json")));
}

// A(0.6/0.4) -> B with P(b1|a1) = 0.9, P(b1|a2) = 0.2.
inline helm::VariableNetwork chain_ab() {
  return helm::VariableNetwork({
      {"A", "A", {"a1", "a2"}, {}, {0.6, 0.4}, {}},
      {"B", "B", {"b1", "b2"}, {"A"}, {}, {{0.9, 0.1}, {0.2, 0.8}}},
  });
}

// A -> B -> C, binary.
inline helm::VariableNetwork chain_abc() {
  return helm::VariableNetwork({
      {"A", "A", {"a1", "a2"}, {}, {0.3, 0.7}, {}},
      {"B", "B", {"b1", "b2"}, {"A"}, {}, {{0.8, 0.2}, {0.1, 0.9}}},
      {"C", "C", {"c1", "c2"}, {"B"}, {}, {{0.6, 0.4}, {0.25, 0.75}}},
  });
}

inline double max_abs_diff(const helm::Distribution& a, const helm::Distribution& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? out : INFINITY;
}

}  // namespace testing
