#include "helm/validate.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "helm/error.hpp"

namespace helm {

bool ValidationReport::ok() const { return errors().empty(); }

std::vector<Issue> ValidationReport::errors() const {
  std::vector<Issue> out;
  for (const auto& issue : issues) {
    if (issue.severity == Severity::kError) out.push_back(issue);
  }
  return out;
}

std::vector<Issue> ValidationReport::warnings() const {
  std::vector<Issue> out;
  for (const auto& issue : issues) {
    if (issue.severity == Severity::kWarning) out.push_back(issue);
  }
  return out;
}

bool ValidationReport::has(const std::string& code) const {
  for (const auto& issue : issues) {
    if (issue.code == code) return true;
  }
  return false;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& issue : issues) {
    out << (issue.severity == Severity::kError ? "error" : "warning") << " ["
        << issue.code << "]";
    if (!issue.node.empty()) out << " " << issue.node;
    out << ": " << issue.message << "\n";
  }
  return out.str();
}

namespace {

std::string number(double value) {
  std::ostringstream out;
  out.precision(12);
  out << value;
  return out.str();
}

class Collector {
 public:
  explicit Collector(ValidationReport& report) : report_(report) {}

  void error(std::string code, std::string node, std::string message) {
    report_.issues.push_back(
        {Severity::kError, std::move(code), std::move(node), std::move(message)});
  }
  void warning(std::string code, std::string node, std::string message) {
    report_.issues.push_back(
        {Severity::kWarning, std::move(code), std::move(node), std::move(message)});
  }

  void check_distribution(const Distribution& dist, std::size_t expected,
                          const std::string& node, const std::string& what) {
    if (dist.size() != expected) {
      error("distribution-size", node,
            what + " has " + std::to_string(dist.size()) + " entries, expected " +
                std::to_string(expected));
      return;
    }
    double sum = 0.0;
    for (double p : dist) {
      if (!(p >= 0.0 && p <= 1.0)) {
        error("probability-range", node, what + " entry " + number(p) + " outside [0,1]");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      error("row-sum", node, what + ": row sum " + number(sum) + " ≠ 1");
    }
  }

 private:
  ValidationReport& report_;
};

// Union-find used to detect undirected cycles.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

ValidationReport validate(const VariableNetwork& network) {
  ValidationReport report;
  Collector issues(report);
  std::set<std::string> seen;
  bool parents_resolve = true;

  for (const auto& node : network.nodes()) {
    if (node.id.empty()) issues.error("empty-id", "", "node with empty id");
    if (!seen.insert(node.id).second) {
      issues.error("duplicate-id", node.id, "id declared more than once");
    }
    if (node.states.size() < 2) {
      issues.error("too-few-states", node.id, "needs at least 2 states");
    }
    std::set<std::string> states;
    for (const auto& s : node.states) {
      if (s.empty()) issues.error("empty-state", node.id, "empty state name");
      if (!states.insert(s).second) {
        issues.error("duplicate-state", node.id, "state '" + s + "' repeated");
      }
    }
    std::set<std::string> parents;
    for (const auto& p : node.parents) {
      if (p == node.id) issues.error("self-loop", node.id, "node is its own parent");
      if (!parents.insert(p).second) {
        issues.error("duplicate-parent", node.id, "parent '" + p + "' repeated");
      }
      if (!network.index_of(p)) {
        parents_resolve = false;
        issues.error("dangling-parent", node.id, "parent '" + p + "' does not exist");
      }
    }

    if (node.is_root()) {
      if (!node.cpt.empty()) issues.error("unexpected-cpt", node.id, "root carries a cpt");
      issues.check_distribution(node.prior, node.states.size(), node.id, "prior");
      continue;
    }
    if (!node.prior.empty()) {
      issues.error("unexpected-prior", node.id, "non-root carries a prior");
    }
    std::size_t rows = 1;
    bool known = true;
    for (const auto& p : node.parents) {
      auto index = network.index_of(p);
      if (!index) {
        known = false;
        break;
      }
      rows *= network.node(*index).states.size();
    }
    if (known && node.cpt.size() != rows) {
      issues.error("cpt-rows", node.id,
                   "cpt has " + std::to_string(node.cpt.size()) + " rows, expected " +
                       std::to_string(rows));
    }
    for (std::size_t r = 0; r < node.cpt.size(); ++r) {
      issues.check_distribution(node.cpt[r], node.states.size(), node.id,
                                "cpt row " + std::to_string(r));
    }
  }

  if (!report.has("duplicate-id")) {
    if (network.topological_order().empty() && network.size() > 0) {
      issues.error("cycle", "", "directed cycle");
    }
    if (parents_resolve) {
      DisjointSets sets(network.size());
      for (std::size_t i = 0; i < network.size(); ++i) {
        for (std::size_t p : network.parent_indices(i)) {
          if (p == i) continue;
          if (!sets.unite(p, i)) {
            issues.error("not-singly-connected", network.node(i).id,
                         "undirected cycle: not singly connected");
          }
        }
      }
    }
  }
  return report;
}

ValidationReport validate(const PropositionNetwork& network) {
  ValidationReport report;
  Collector issues(report);
  std::set<std::string> seen;
  for (const auto& node : network.nodes()) {
    if (node.id.empty()) issues.error("empty-id", "", "node with empty id");
    if (!seen.insert(node.id).second) {
      issues.error("duplicate-id", node.id, "id declared more than once");
    }
    if (!(node.prior > 0.0 && node.prior < 1.0)) {
      issues.error("prior-range", node.id, "prior " + number(node.prior) + " not in (0,1)");
    } else if (node.prior < 1e-6 || node.prior > 1.0 - 1e-6) {
      issues.warning("degenerate-prior", node.id,
                     "prior " + number(node.prior) + " is clamped near certainty");
    }
    if (!(node.cost > 0.0)) issues.error("cost-range", node.id, "cost must be positive");
    if (node.answers.size() != 2 || node.answers[0] == node.answers[1] ||
        node.answers[0].empty() || node.answers[1].empty()) {
      issues.error("answers", node.id, "needs two distinct answer names");
    }
  }

  bool links_resolve = true;
  for (const auto& link : network.links()) {
    const std::string name = link.from + "->" + link.to;
    if (link.from == link.to) issues.error("self-loop", link.from, "link to itself");
    auto from = network.index_of(link.from);
    auto to = network.index_of(link.to);
    if (!from || !to) {
      links_resolve = false;
      issues.error("dangling-link", name, "link endpoint does not exist");
    }
    for (double lambda : {link.lambda1, link.lambda2}) {
      if (!(lambda >= 0.0 && lambda <= 1.0)) {
        issues.error("lambda-range", name, "lambda " + number(lambda) + " outside [0,1]");
      }
    }
    if (from && to) {
      const double pe = network.node(*from).prior;
      const double ph = network.node(*to).prior;
      const double implied = link.lambda1 * pe + link.lambda2 * (1.0 - pe);
      if (std::abs(implied - ph) > 1e-6) {
        issues.warning("inconsistent-link", name,
                       "lambdas imply consequent prior " + number(implied) + " but it is " +
                           number(ph));
      }
    }
  }
  for (const auto& id : network.top()) {
    if (!network.index_of(id)) {
      issues.error("dangling-top", id, "top-level id does not exist");
    }
  }
  if (links_resolve && !report.has("duplicate-id") && network.size() > 0 &&
      network.topological_order().empty()) {
    issues.error("cycle", "", "directed cycle");
  }
  return report;
}

namespace {

template <typename Network>
void require_valid_impl(const Network& network) {
  auto report = validate(network);
  if (report.ok()) return;
  const Issue first = report.errors().front();
  std::string message = "[" + first.code + "]";
  if (!first.node.empty()) message += " " + first.node;
  throw Error(ErrorCode::kValidation, message + ": " + first.message);
}

}  // namespace

void require_valid(const VariableNetwork& network) { require_valid_impl(network); }
void require_valid(const PropositionNetwork& network) { require_valid_impl(network); }

}  // namespace helm
