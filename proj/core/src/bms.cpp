#include "helm/bms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "helm/error.hpp"
#include "helm/validate.hpp"

namespace helm::bms {

std::string_view policy_name(SchedulerPolicy policy) {
  switch (policy) {
    case SchedulerPolicy::kLifo: return "lifo";
    case SchedulerPolicy::kFifo: return "fifo";
    case SchedulerPolicy::kFifoDedup: return "fifo-dedup";
  }
  return "unknown";
}

SchedulerPolicy parse_policy(std::string_view name) {
  for (SchedulerPolicy policy : kAllPolicies) {
    if (policy_name(policy) == name) return policy;
  }
  if (name == "stack") return SchedulerPolicy::kLifo;
  throw Error(ErrorCode::kInvalidArgument, "unknown scheduler policy '" + std::string(name) + "'");
}

void Agenda::push(std::size_t node) {
  if (policy_ == SchedulerPolicy::kFifoDedup) {
    auto it = std::find(items_.begin(), items_.end(), node);
    if (it != items_.end()) items_.erase(it);
  }
  items_.push_back(node);
}

std::size_t Agenda::pop() {
  std::size_t node;
  if (policy_ == SchedulerPolicy::kLifo) {
    node = items_.back();
    items_.pop_back();
  } else {
    node = items_.front();
    items_.pop_front();
  }
  return node;
}

Model::Model(VariableNetwork network)
    : network_(std::move(network)),
      parent_edges_(network_.size()),
      child_edges_(network_.size()) {
  require_valid(network_);
  for (std::size_t child = 0; child < network_.size(); ++child) {
    for (std::size_t parent : network_.parent_indices(child)) {
      parent_edges_[child].push_back(edges_.size());
      child_edges_[parent].push_back(edges_.size());
      edges_.push_back({parent, child});
    }
  }
  order_ = network_.topological_order();
}

namespace {

void normalize(Distribution& values, const std::string& node, const char* what) {
  double total = 0.0;
  for (double v : values) total += v;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kInconsistentEvidence,
                std::string("evidence has zero probability (") + what + " at '" + node + "')");
  }
  for (double& v : values) v /= total;
}

double max_difference(const Distribution& a, const Distribution& b) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  return diff;
}

Distribution uniform(std::size_t n) { return Distribution(n, 1.0 / static_cast<double>(n)); }

// Calls fn(row, digits) for every parent configuration, first parent slowest.
template <typename Fn>
void for_each_configuration(const std::vector<std::size_t>& cards, Fn&& fn) {
  std::vector<std::size_t> digits(cards.size(), 0);
  std::size_t rows = 1;
  for (std::size_t c : cards) rows *= c;
  for (std::size_t row = 0; row < rows; ++row) {
    fn(row, digits);
    for (std::size_t k = cards.size(); k-- > 0;) {
      if (++digits[k] < cards[k]) break;
      digits[k] = 0;
    }
  }
}

}  // namespace

BeliefState::BeliefState(std::shared_ptr<const Model> model) : model_(std::move(model)) {
  const auto& net = model_->network();
  for (const auto& edge : model_->edges()) {
    pi_messages_.push_back(uniform(model_->states(edge.parent)));
    lambda_messages_.push_back(uniform(model_->states(edge.parent)));
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    evidence_.emplace_back(model_->states(i), 1.0);
  }
  observed_.assign(net.size(), false);
}

BeliefState BeliefState::init_equilibrium(std::shared_ptr<const Model> model) {
  BeliefState state(std::move(model));
  state.prior_marginals_.resize(state.network().size());
  // Top-down sweep: with uniform λ everywhere every π-message is the
  // normalized causal support of its parent.
  for (std::size_t node : state.model_->order()) {
    Distribution pi = state.pi(node);
    normalize(pi, state.network().node(node).id, "causal support");
    for (std::size_t e : state.model_->child_edges(node)) state.pi_messages_[e] = pi;
    state.prior_marginals_[node] = std::move(pi);
  }
  return state;
}

BeliefState BeliefState::init_equilibrium(VariableNetwork network) {
  return init_equilibrium(std::make_shared<const Model>(std::move(network)));
}

Distribution BeliefState::pi(std::size_t node) const {
  const VariableNode& var = network().node(node);
  if (var.is_root()) return var.prior;
  const auto& parents = model_->parent_edges(node);
  std::vector<std::size_t> cards;
  for (std::size_t e : parents) cards.push_back(model_->states(model_->edges()[e].parent));
  Distribution out(var.states.size(), 0.0);
  for_each_configuration(cards, [&](std::size_t row, const std::vector<std::size_t>& u) {
    double weight = 1.0;
    for (std::size_t k = 0; k < parents.size(); ++k) weight *= pi_messages_[parents[k]][u[k]];
    if (weight == 0.0) return;
    const auto& probs = var.cpt[row];
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += probs[s] * weight;
  });
  return out;
}

Distribution BeliefState::lambda(std::size_t node) const {
  Distribution out = evidence_[node];
  for (std::size_t e : model_->child_edges(node)) {
    const auto& msg = lambda_messages_[e];
    for (std::size_t s = 0; s < out.size(); ++s) out[s] *= msg[s];
  }
  return out;
}

void BeliefState::post_evidence(const Evidence& evidence) {
  const std::size_t node = network().require(evidence.node);
  const auto factors = evidence_likelihoods(network(), {evidence}, prior_marginals_);
  std::vector<double> combined = evidence_[node];
  bool any = false;
  for (std::size_t s = 0; s < combined.size(); ++s) {
    combined[s] *= factors[node][s];
    any = any || combined[s] > 0.0;
  }
  if (!any) {
    throw Error(ErrorCode::kInconsistentEvidence,
                "evidence on '" + evidence.node + "' contradicts earlier evidence");
  }
  evidence_[node] = std::move(combined);
  observed_[node] = true;
  pending_.push_back(node);
}

std::vector<std::size_t> BeliefState::activate(std::size_t node, double tolerance) {
  const VariableNode& var = network().node(node);
  const std::size_t n = var.states.size();
  const Distribution support_pi = pi(node);
  const Distribution support_lambda = lambda(node);
  std::vector<std::size_t> changed;

  // λ-messages to parents: marginalize the CPT against λ(x) and the other
  // parents' π-messages.
  const auto& parents = model_->parent_edges(node);
  if (!parents.empty()) {
    std::vector<std::size_t> cards;
    for (std::size_t e : parents) cards.push_back(model_->states(model_->edges()[e].parent));
    std::vector<Distribution> outgoing;
    for (std::size_t c : cards) outgoing.emplace_back(c, 0.0);
    for_each_configuration(cards, [&](std::size_t row, const std::vector<std::size_t>& u) {
      double inner = 0.0;
      const auto& probs = var.cpt[row];
      for (std::size_t s = 0; s < n; ++s) inner += probs[s] * support_lambda[s];
      if (inner == 0.0) return;
      for (std::size_t k = 0; k < parents.size(); ++k) {
        double others = 1.0;
        for (std::size_t j = 0; j < parents.size(); ++j) {
          if (j != k) others *= pi_messages_[parents[j]][u[j]];
        }
        outgoing[k][u[k]] += inner * others;
      }
    });
    for (std::size_t k = 0; k < parents.size(); ++k) {
      normalize(outgoing[k], var.id, "diagnostic message");
      const std::size_t e = parents[k];
      if (max_difference(outgoing[k], lambda_messages_[e]) > tolerance) {
        changed.push_back(model_->edges()[e].parent);
      }
      lambda_messages_[e] = std::move(outgoing[k]);
    }
  }

  // π-messages to children: causal support times everything except the
  // receiving child's own λ-message (computed directly, never by division).
  const auto& children = model_->child_edges(node);
  for (std::size_t j = 0; j < children.size(); ++j) {
    Distribution msg(n);
    for (std::size_t s = 0; s < n; ++s) msg[s] = support_pi[s] * evidence_[node][s];
    for (std::size_t k = 0; k < children.size(); ++k) {
      if (k == j) continue;
      const auto& other = lambda_messages_[children[k]];
      for (std::size_t s = 0; s < n; ++s) msg[s] *= other[s];
    }
    normalize(msg, var.id, "causal message");
    const std::size_t e = children[j];
    if (max_difference(msg, pi_messages_[e]) > tolerance) {
      changed.push_back(model_->edges()[e].child);
    }
    pi_messages_[e] = std::move(msg);
  }
  ++updates_;
  return changed;
}

std::size_t BeliefState::propagate_to_equilibrium(SchedulerPolicy policy, double tolerance,
                                                  std::size_t activation_cap) {
  if (!(tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tolerance must be positive");
  }
  Agenda agenda(policy);
  for (std::size_t node : pending_) agenda.push(node);
  pending_.clear();
  std::size_t activations = 0;
  try {
    while (!agenda.empty()) {
      if (activations >= activation_cap) {
        throw Error(ErrorCode::kNonConvergence,
                    "no equilibrium after " + std::to_string(activations) + " activations");
      }
      const std::size_t node = agenda.pop();
      ++activations;
      try {
        for (std::size_t neighbour : activate(node, tolerance)) agenda.push(neighbour);
      } catch (...) {
        agenda.push(node);
        throw;
      }
    }
  } catch (...) {
    pending_.assign(agenda.items().begin(), agenda.items().end());
    throw;
  }
  return activations;
}

Distribution BeliefState::belief(std::size_t node, bool allow_stale) const {
  if (!allow_stale && !pending_.empty()) {
    throw Error(ErrorCode::kStaleRead, "belief read while activations are pending");
  }
  Distribution out = pi(node);
  const Distribution support_lambda = lambda(node);
  for (std::size_t s = 0; s < out.size(); ++s) out[s] *= support_lambda[s];
  normalize(out, network().node(node).id, "belief");
  return out;
}

Distribution BeliefState::belief(const std::string& node, bool allow_stale) const {
  return belief(network().require(node), allow_stale);
}

std::vector<RankedState> BeliefState::rank_states(const std::string& node) const {
  const std::size_t index = network().require(node);
  const Distribution bel = belief(index);
  const auto& states = network().node(index).states;
  std::vector<RankedState> out;
  for (std::size_t s = 0; s < states.size(); ++s) out.push_back({states[s], bel[s]});
  std::sort(out.begin(), out.end(), [](const RankedState& a, const RankedState& b) {
    if (rank_key(a.probability) != rank_key(b.probability)) return a.probability > b.probability;
    return a.state < b.state;
  });
  return out;
}

std::string to_csv_row(const RunRecord& record) {
  std::ostringstream out;
  out << policy_name(record.policy) << ',' << record.nodes << ',' << record.links << ','
      << record.evidence << ',' << record.activations << ',' << record.micros;
  return out.str();
}

}  // namespace helm::bms
