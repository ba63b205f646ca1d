#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "helm/network.hpp"

namespace helm {

using Posterior = std::map<std::string, Distribution>;

// Largest joint configuration count `exact_posterior` will enumerate.
inline constexpr std::uint64_t kEnumerationCap = std::uint64_t{1} << 24;

// P(node | evidence) for every node by enumerating the full joint.
// Throws kTooLarge above kEnumerationCap, kInconsistentEvidence when the
// evidence has zero probability.
Posterior exact_posterior(const VariableNetwork& network,
                          const std::vector<Evidence>& evidence);

// Same quantity by sum-product variable elimination. Works on any DAG and
// scales to networks the enumerator refuses; it shares no code with the
// message-passing engine.
Posterior eliminate_posterior(const VariableNetwork& network,
                              const std::vector<Evidence>& evidence);

// Enumeration when it fits under the cap, elimination otherwise.
Posterior reference_posterior(const VariableNetwork& network,
                              const std::vector<Evidence>& evidence);

}  // namespace helm
