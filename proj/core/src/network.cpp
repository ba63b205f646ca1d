#include "helm/network.hpp"

#include <algorithm>
#include <deque>

#include "helm/error.hpp"

namespace helm {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kValidation: return "invalid-network";
    case ErrorCode::kUnknownNode: return "unknown-node";
    case ErrorCode::kUnknownState: return "unknown-state";
    case ErrorCode::kInvalidEvidence: return "invalid-evidence";
    case ErrorCode::kInconsistentEvidence: return "inconsistent-evidence";
    case ErrorCode::kInvalidLink: return "invalid-link";
    case ErrorCode::kStaleRead: return "stale-read";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kTooLarge: return "too-large";
    case ErrorCode::kNotAskable: return "not-askable";
    case ErrorCode::kAlreadyAnswered: return "already-answered";
    case ErrorCode::kSessionStopped: return "session-stopped";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

std::optional<std::size_t> VariableNode::state_index(const std::string& name) const {
  auto it = std::find(states.begin(), states.end(), name);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

namespace {

// Kahn's algorithm over index adjacency; empty result on a cycle.
std::vector<std::size_t> kahn(const std::vector<std::vector<std::size_t>>& preds,
                              const std::vector<std::vector<std::size_t>>& succs) {
  const std::size_t n = preds.size();
  std::vector<std::size_t> indegree(n);
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    indegree[i] = preds[i].size();
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t i = ready.front();
    ready.pop_front();
    order.push_back(i);
    for (std::size_t j : succs[i]) {
      if (--indegree[j] == 0) ready.push_back(j);
    }
  }
  if (order.size() != n) order.clear();
  return order;
}

}  // namespace

VariableNetwork::VariableNetwork(std::vector<VariableNode> nodes)
    : nodes_(std::move(nodes)),
      parents_(nodes_.size()),
      children_(nodes_.size()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (const auto& parent : nodes_[i].parents) {
      auto it = index_.find(parent);
      if (it == index_.end()) continue;
      parents_[i].push_back(it->second);
      children_[it->second].push_back(i);
    }
  }
}

std::size_t VariableNetwork::link_count() const {
  std::size_t links = 0;
  for (const auto& p : parents_) links += p.size();
  return links;
}

std::optional<std::size_t> VariableNetwork::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t VariableNetwork::require(const std::string& id) const {
  auto index = index_of(id);
  if (!index) throw Error(ErrorCode::kUnknownNode, "unknown node '" + id + "'");
  return *index;
}

std::vector<std::size_t> VariableNetwork::topological_order() const {
  return kahn(parents_, children_);
}

PropositionNetwork::PropositionNetwork(std::vector<PropositionNode> nodes,
                                       std::vector<EvidentialLink> links,
                                       std::vector<std::string> top)
    : nodes_(std::move(nodes)),
      links_(std::move(links)),
      top_(std::move(top)),
      incoming_(nodes_.size()),
      outgoing_(nodes_.size()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);
  constexpr auto kMissing = static_cast<std::size_t>(-1);
  link_ends_.assign(links_.size(), {kMissing, kMissing});
  for (std::size_t l = 0; l < links_.size(); ++l) {
    auto from = index_.find(links_[l].from);
    auto to = index_.find(links_[l].to);
    if (from == index_.end() || to == index_.end()) continue;
    link_ends_[l] = {from->second, to->second};
    outgoing_[from->second].push_back(l);
    incoming_[to->second].push_back(l);
  }
}

std::optional<std::size_t> PropositionNetwork::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t PropositionNetwork::require(const std::string& id) const {
  auto index = index_of(id);
  if (!index) throw Error(ErrorCode::kUnknownNode, "unknown node '" + id + "'");
  return *index;
}

std::vector<std::size_t> PropositionNetwork::topological_order() const {
  std::vector<std::vector<std::size_t>> preds(nodes_.size()), succs(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (std::size_t l : incoming_[i]) preds[i].push_back(link_ends_[l].first);
    for (std::size_t l : outgoing_[i]) succs[i].push_back(link_ends_[l].second);
  }
  return kahn(preds, succs);
}

Evidence Evidence::hard(std::string node, std::string state) {
  return Evidence{std::move(node), HardEvidence{std::move(state)}};
}

Evidence Evidence::likelihood(std::string node, std::vector<double> values) {
  return Evidence{std::move(node), VirtualEvidence{std::move(values)}};
}

Evidence Evidence::graded(std::string node, double probability) {
  return Evidence{std::move(node), GradedEvidence{probability}};
}

std::string Evidence::form_name() const {
  switch (form.index()) {
    case 0: return "hard";
    case 1: return "virtual";
    default: return "graded";
  }
}

std::vector<double> graded_likelihood(double probability, double marginal_present) {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw Error(ErrorCode::kInvalidEvidence, "graded probability outside [0,1]");
  }
  auto ratio = [](double target, double marginal) {
    if (marginal > 0.0) return target / marginal;
    if (target > 0.0) {
      throw Error(ErrorCode::kInconsistentEvidence,
                  "graded evidence asserts a state with zero prior probability");
    }
    return 0.0;
  };
  return {ratio(probability, marginal_present),
          ratio(1.0 - probability, 1.0 - marginal_present)};
}

std::vector<std::vector<double>> evidence_likelihoods(
    const VariableNetwork& network, const std::vector<Evidence>& evidence,
    const std::vector<Distribution>& prior_marginals) {
  std::vector<std::vector<double>> result(network.size());
  for (std::size_t i = 0; i < network.size(); ++i) {
    result[i].assign(network.node(i).states.size(), 1.0);
  }
  for (const auto& item : evidence) {
    const std::size_t index = network.require(item.node);
    const VariableNode& node = network.node(index);
    std::vector<double> factor(node.states.size(), 0.0);
    if (const auto* hard = std::get_if<HardEvidence>(&item.form)) {
      auto state = node.state_index(hard->state);
      if (!state) {
        throw Error(ErrorCode::kUnknownState,
                    "node '" + node.id + "' has no state '" + hard->state + "'");
      }
      factor[*state] = 1.0;
    } else if (const auto* soft = std::get_if<VirtualEvidence>(&item.form)) {
      if (soft->likelihood.size() != factor.size()) {
        throw Error(ErrorCode::kInvalidEvidence,
                    "likelihood for '" + node.id + "' has wrong length");
      }
      bool any = false;
      for (double v : soft->likelihood) {
        if (!(v >= 0.0)) {
          throw Error(ErrorCode::kInvalidEvidence, "negative likelihood for '" + node.id + "'");
        }
        any = any || v > 0.0;
      }
      if (!any) {
        throw Error(ErrorCode::kInvalidEvidence, "all-zero likelihood for '" + node.id + "'");
      }
      factor = soft->likelihood;
    } else {
      const auto& graded = std::get<GradedEvidence>(item.form);
      if (factor.size() != 2) {
        throw Error(ErrorCode::kInvalidEvidence,
                    "graded evidence needs a binary node, '" + node.id + "' is not");
      }
      factor = graded_likelihood(graded.probability, prior_marginals.at(index)[0]);
    }
    bool any = false;
    for (std::size_t s = 0; s < factor.size(); ++s) {
      result[index][s] *= factor[s];
      any = any || result[index][s] > 0.0;
    }
    if (!any) {
      throw Error(ErrorCode::kInconsistentEvidence,
                  "evidence on '" + node.id + "' contradicts earlier evidence");
    }
  }
  return result;
}

}  // namespace helm
