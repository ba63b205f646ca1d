#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "helm/network.hpp"

namespace helm::bms {

inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr std::size_t kDefaultActivationCap = 1'000'000;

enum class SchedulerPolicy { kLifo, kFifo, kFifoDedup };

// "lifo", "fifo", "fifo-dedup".
std::string_view policy_name(SchedulerPolicy policy);
// Throws Error(kInvalidArgument) on an unknown name.
SchedulerPolicy parse_policy(std::string_view name);
inline constexpr SchedulerPolicy kAllPolicies[] = {
    SchedulerPolicy::kLifo, SchedulerPolicy::kFifo, SchedulerPolicy::kFifoDedup};

// Work list of activated nodes. LIFO pops the newest entry, FIFO the oldest.
// The dedup variant keeps one entry per node and moves a re-activated node to
// the back of the queue.
class Agenda {
 public:
  explicit Agenda(SchedulerPolicy policy) : policy_(policy) {}

  void push(std::size_t node);
  std::size_t pop();
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  const std::deque<std::size_t>& items() const { return items_; }

 private:
  SchedulerPolicy policy_;
  std::deque<std::size_t> items_;
};

// Per-family tables precomputed from a validated singly-connected network.
class Model {
 public:
  // Throws kValidation for invalid or loopy networks.
  explicit Model(VariableNetwork network);

  struct Edge {
    std::size_t parent;
    std::size_t child;
  };

  const VariableNetwork& network() const { return network_; }
  const std::vector<Edge>& edges() const { return edges_; }
  // Edge ids into / out of a node, in declaration order.
  const std::vector<std::size_t>& parent_edges(std::size_t node) const {
    return parent_edges_[node];
  }
  const std::vector<std::size_t>& child_edges(std::size_t node) const {
    return child_edges_[node];
  }
  const std::vector<std::size_t>& order() const { return order_; }
  std::size_t states(std::size_t node) const { return network_.node(node).states.size(); }

 private:
  VariableNetwork network_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> parent_edges_;
  std::vector<std::vector<std::size_t>> child_edges_;
  std::vector<std::size_t> order_;
};

struct RankedState {
  std::string state;
  double probability = 0.0;
};

// π/λ messages and supports of one consultation. Copies are independent
// what-if clones sharing the immutable model.
class BeliefState {
 public:
  // Equilibrium with no evidence: BEL equals each node's prior marginal.
  static BeliefState init_equilibrium(std::shared_ptr<const Model> model);
  static BeliefState init_equilibrium(VariableNetwork network);

  const Model& model() const { return *model_; }
  const VariableNetwork& network() const { return model_->network(); }

  // Multiplies the evidence into the node's local likelihood and activates
  // it. Beliefs change only when propagating. Throws kUnknownNode,
  // kUnknownState, kInvalidEvidence, kInconsistentEvidence.
  void post_evidence(const Evidence& evidence);

  // Recomputes the node's supports and outgoing messages; returns the
  // neighbours whose inbound message moved by more than `tolerance`.
  std::vector<std::size_t> activate(std::size_t node, double tolerance = kDefaultTolerance);

  // Runs the agenda to empty; returns the number of activations.
  std::size_t propagate_to_equilibrium(SchedulerPolicy policy = SchedulerPolicy::kFifoDedup,
                                       double tolerance = kDefaultTolerance,
                                       std::size_t activation_cap = kDefaultActivationCap);

  // normalize(λ ⊙ π). Throws kStaleRead while activations are pending.
  Distribution belief(const std::string& node, bool allow_stale = false) const;
  Distribution belief(std::size_t node, bool allow_stale = false) const;
  Distribution lambda(std::size_t node) const;
  Distribution pi(std::size_t node) const;
  const Distribution& pi_message(std::size_t edge) const { return pi_messages_[edge]; }
  const Distribution& lambda_message(std::size_t edge) const { return lambda_messages_[edge]; }
  const std::vector<double>& evidence_likelihood(std::size_t node) const {
    return evidence_[node];
  }

  // Marginal before any evidence was posted.
  const Distribution& prior_marginal(std::size_t node) const { return prior_marginals_[node]; }
  bool has_evidence(std::size_t node) const { return observed_[node]; }

  const std::vector<std::size_t>& pending() const { return pending_; }
  bool at_equilibrium() const { return pending_.empty(); }
  std::size_t update_count() const { return updates_; }

  // Class-style ranking of one variable's states.
  std::vector<RankedState> rank_states(const std::string& node) const;

 private:
  explicit BeliefState(std::shared_ptr<const Model> model);

  std::shared_ptr<const Model> model_;
  std::vector<Distribution> pi_messages_;      // parent -> child, over parent states
  std::vector<Distribution> lambda_messages_;  // child -> parent, over parent states
  std::vector<std::vector<double>> evidence_;
  std::vector<bool> observed_;
  std::vector<Distribution> prior_marginals_;
  std::vector<std::size_t> pending_;
  std::size_t updates_ = 0;
};

// CSV instrumentation row: policy,nodes,links,evidence,activations,micros.
struct RunRecord {
  SchedulerPolicy policy = SchedulerPolicy::kFifo;
  std::size_t nodes = 0;
  std::size_t links = 0;
  std::size_t evidence = 0;
  std::size_t activations = 0;
  long long micros = 0;
};

inline constexpr std::string_view kRunRecordHeader =
    "policy,nodes,links,evidence,activations,micros";
std::string to_csv_row(const RunRecord& record);

}  // namespace helm::bms
