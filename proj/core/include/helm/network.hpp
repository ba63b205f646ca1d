#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace helm {

// Absolute tolerance for every probability comparison in the data model.
inline constexpr double kProbabilityTolerance = 1e-9;

// Rankings compare values on a 1e-12 grid so that exact ties perturbed by
// rounding still break by id.
inline double rank_key(double value) { return std::round(value * 1e12); }

using Distribution = std::vector<double>;

// A multi-valued variable. Roots carry `prior`; every other node carries one
// CPT row per parent configuration, first parent varying slowest.
struct VariableNode {
  std::string id;
  std::string label;
  std::vector<std::string> states;
  std::vector<std::string> parents;
  Distribution prior;
  std::vector<Distribution> cpt;

  bool is_root() const { return parents.empty(); }
  std::optional<std::size_t> state_index(const std::string& name) const;
};

// Directed graph of variables with derived adjacency. Construction never
// throws on structural defects; run `validate` to find them. Parent ids that
// do not resolve are left out of the derived adjacency.
class VariableNetwork {
 public:
  VariableNetwork() = default;
  explicit VariableNetwork(std::vector<VariableNode> nodes);

  const std::vector<VariableNode>& nodes() const { return nodes_; }
  const VariableNode& node(std::size_t index) const { return nodes_[index]; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t link_count() const;

  std::optional<std::size_t> index_of(const std::string& id) const;
  // Throws Error(kUnknownNode).
  std::size_t require(const std::string& id) const;

  const std::vector<std::size_t>& parent_indices(std::size_t index) const {
    return parents_[index];
  }
  const std::vector<std::size_t>& children(std::size_t index) const {
    return children_[index];
  }

  // Parents before children; empty if the graph is cyclic.
  std::vector<std::size_t> topological_order() const;

 private:
  std::vector<VariableNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
};

struct PropositionNode {
  std::string id;
  std::string label;
  double prior = 0.5;
  bool askable = false;
  double cost = 1.0;
  // Names of the two answers an operator may give, "yes" first.
  std::vector<std::string> answers{"true", "false"};
};

struct EvidentialLink {
  std::string from;
  std::string to;
  double lambda1 = 0.5;  // P(to | from)
  double lambda2 = 0.5;  // P(to | not from)
};

class PropositionNetwork {
 public:
  PropositionNetwork() = default;
  PropositionNetwork(std::vector<PropositionNode> nodes,
                     std::vector<EvidentialLink> links,
                     std::vector<std::string> top);

  const std::vector<PropositionNode>& nodes() const { return nodes_; }
  const PropositionNode& node(std::size_t index) const { return nodes_[index]; }
  const std::vector<EvidentialLink>& links() const { return links_; }
  const std::vector<std::string>& top() const { return top_; }
  std::size_t size() const { return nodes_.size(); }

  std::optional<std::size_t> index_of(const std::string& id) const;
  std::size_t require(const std::string& id) const;

  // Link indices by consequent / antecedent. Dangling links are omitted.
  const std::vector<std::size_t>& incoming(std::size_t index) const {
    return incoming_[index];
  }
  const std::vector<std::size_t>& outgoing(std::size_t index) const {
    return outgoing_[index];
  }
  std::size_t link_from(std::size_t link) const { return link_ends_[link].first; }
  std::size_t link_to(std::size_t link) const { return link_ends_[link].second; }

  std::vector<std::size_t> topological_order() const;

 private:
  std::vector<PropositionNode> nodes_;
  std::vector<EvidentialLink> links_;
  std::vector<std::string> top_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> incoming_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::pair<std::size_t, std::size_t>> link_ends_;
};

struct HardEvidence {
  std::string state;
};
struct VirtualEvidence {
  std::vector<double> likelihood;
};
// Probability that a binary attribute holds, given the observation.
struct GradedEvidence {
  double probability = 0.5;
};

struct Evidence {
  std::string node;
  std::variant<HardEvidence, VirtualEvidence, GradedEvidence> form;

  static Evidence hard(std::string node, std::string state);
  static Evidence likelihood(std::string node, std::vector<double> values);
  static Evidence graded(std::string node, double probability);

  // "hard", "virtual" or "graded".
  std::string form_name() const;
};

// Likelihood vector over (present, absent) that moves a binary node whose
// no-evidence marginal is `marginal_present` to `probability`, when it is the
// only evidence. Throws Error(kInconsistentEvidence) when no likelihood can.
std::vector<double> graded_likelihood(double probability, double marginal_present);

// Per-node likelihood vectors (ones where unobserved) induced by an evidence
// list. Graded evidence needs each node's no-evidence marginal. Throws
// kUnknownNode, kUnknownState, kInvalidEvidence, kInconsistentEvidence.
std::vector<std::vector<double>> evidence_likelihoods(
    const VariableNetwork& network, const std::vector<Evidence>& evidence,
    const std::vector<Distribution>& prior_marginals);

}  // namespace helm
