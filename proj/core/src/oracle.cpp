#include "helm/oracle.hpp"

#include <algorithm>
#include <limits>

#include "helm/error.hpp"
#include "helm/validate.hpp"

namespace helm {

namespace {

// Row of node `index`'s CPT selected by the current parent assignment.
std::size_t cpt_row(const VariableNetwork& network, std::size_t index,
                    const std::vector<std::size_t>& assignment) {
  std::size_t row = 0;
  for (std::size_t p : network.parent_indices(index)) {
    row = row * network.node(p).states.size() + assignment[p];
  }
  return row;
}

double local_probability(const VariableNetwork& network, std::size_t index,
                         const std::vector<std::size_t>& assignment) {
  const VariableNode& node = network.node(index);
  if (node.is_root()) return node.prior[assignment[index]];
  return node.cpt[cpt_row(network, index, assignment)][assignment[index]];
}

Posterior to_posterior(const VariableNetwork& network,
                       std::vector<Distribution> mass, double total) {
  Posterior out;
  for (std::size_t i = 0; i < network.size(); ++i) {
    for (double& p : mass[i]) p /= total;
    out.emplace(network.node(i).id, std::move(mass[i]));
  }
  return out;
}

class Enumerator {
 public:
  Enumerator(const VariableNetwork& network, const std::vector<std::vector<double>>& likelihood)
      : network_(network),
        likelihood_(likelihood),
        order_(network.topological_order()),
        assignment_(network.size(), 0),
        mass_(network.size()) {
    for (std::size_t i = 0; i < network.size(); ++i) {
      mass_[i].assign(network.node(i).states.size(), 0.0);
    }
  }

  // Returns total mass; per-node unnormalized marginals in `mass()`.
  double run() {
    visit(0, 1.0);
    return total_;
  }
  std::vector<Distribution>& mass() { return mass_; }

 private:
  void visit(std::size_t depth, double weight) {
    if (depth == order_.size()) {
      total_ += weight;
      for (std::size_t i = 0; i < assignment_.size(); ++i) mass_[i][assignment_[i]] += weight;
      return;
    }
    const std::size_t index = order_[depth];
    const std::size_t states = network_.node(index).states.size();
    for (std::size_t s = 0; s < states; ++s) {
      assignment_[index] = s;
      const double w = weight * likelihood_[index][s] *
                       local_probability(network_, index, assignment_);
      if (w == 0.0) continue;
      visit(depth + 1, w);
    }
  }

  const VariableNetwork& network_;
  const std::vector<std::vector<double>>& likelihood_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> assignment_;
  std::vector<Distribution> mass_;
  double total_ = 0.0;
};

std::vector<std::vector<double>> unit_likelihoods(const VariableNetwork& network) {
  std::vector<std::vector<double>> out(network.size());
  for (std::size_t i = 0; i < network.size(); ++i) {
    out[i].assign(network.node(i).states.size(), 1.0);
  }
  return out;
}

bool has_graded(const std::vector<Evidence>& evidence) {
  return std::any_of(evidence.begin(), evidence.end(), [](const Evidence& e) {
    return std::holds_alternative<GradedEvidence>(e.form);
  });
}

std::vector<Distribution> marginals_in_order(const VariableNetwork& network,
                                             const Posterior& posterior) {
  std::vector<Distribution> out;
  out.reserve(network.size());
  for (const auto& node : network.nodes()) out.push_back(posterior.at(node.id));
  return out;
}

// Dense factor over sorted variable indices; the last variable varies fastest.
struct Factor {
  std::vector<std::size_t> vars;
  std::vector<std::size_t> cards;
  std::vector<double> table;
};

constexpr std::size_t kMaxFactorEntries = std::size_t{1} << 24;

Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                 std::back_inserter(out.vars));
  std::size_t size = 1;
  for (std::size_t v : out.vars) {
    auto pos = std::lower_bound(a.vars.begin(), a.vars.end(), v);
    std::size_t card = (pos != a.vars.end() && *pos == v)
                           ? a.cards[pos - a.vars.begin()]
                           : b.cards[std::lower_bound(b.vars.begin(), b.vars.end(), v) -
                                     b.vars.begin()];
    out.cards.push_back(card);
    size *= card;
    if (size > kMaxFactorEntries) {
      throw Error(ErrorCode::kTooLarge, "elimination factor exceeds size limit");
    }
  }
  // Strides of a and b expressed over out's variables.
  auto strides_for = [&](const Factor& f) {
    std::vector<std::size_t> strides(out.vars.size(), 0);
    std::size_t stride = 1;
    for (std::size_t k = f.vars.size(); k-- > 0;) {
      auto pos = std::lower_bound(out.vars.begin(), out.vars.end(), f.vars[k]);
      strides[pos - out.vars.begin()] = stride;
      stride *= f.cards[k];
    }
    return strides;
  };
  const auto sa = strides_for(a);
  const auto sb = strides_for(b);
  out.table.assign(size, 0.0);
  std::vector<std::size_t> digits(out.vars.size(), 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t i = 0; i < size; ++i) {
    out.table[i] = a.table[ia] * b.table[ib];
    for (std::size_t k = out.vars.size(); k-- > 0;) {
      if (++digits[k] < out.cards[k]) {
        ia += sa[k];
        ib += sb[k];
        break;
      }
      ia -= sa[k] * (out.cards[k] - 1);
      ib -= sb[k] * (out.cards[k] - 1);
      digits[k] = 0;
    }
  }
  return out;
}

Factor sum_out(const Factor& f, std::size_t var) {
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(f.vars.begin(), f.vars.end(), var) - f.vars.begin());
  Factor out;
  for (std::size_t k = 0; k < f.vars.size(); ++k) {
    if (k == pos) continue;
    out.vars.push_back(f.vars[k]);
    out.cards.push_back(f.cards[k]);
  }
  std::size_t inner = 1;
  for (std::size_t k = pos + 1; k < f.vars.size(); ++k) inner *= f.cards[k];
  const std::size_t card = f.cards[pos];
  const std::size_t outer = f.table.size() / (inner * card);
  out.table.assign(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t c = 0; c < card; ++c) {
      for (std::size_t i = 0; i < inner; ++i) {
        out.table[o * inner + i] += f.table[(o * card + c) * inner + i];
      }
    }
  }
  return out;
}

std::vector<Factor> family_factors(const VariableNetwork& network,
                                   const std::vector<std::vector<double>>& likelihood) {
  std::vector<Factor> factors;
  for (std::size_t i = 0; i < network.size(); ++i) {
    const VariableNode& node = network.node(i);
    // Declared scope: parents in declaration order, then the node itself.
    std::vector<std::size_t> scope = network.parent_indices(i);
    scope.push_back(i);
    std::vector<std::size_t> cards;
    for (std::size_t v : scope) cards.push_back(network.node(v).states.size());
    std::vector<double> declared;
    if (node.is_root()) {
      declared = node.prior;
    } else {
      for (const auto& row : node.cpt) declared.insert(declared.end(), row.begin(), row.end());
    }
    for (std::size_t k = 0; k < declared.size(); ++k) {
      declared[k] *= likelihood[i][k % node.states.size()];
    }
    // Re-lay the table over sorted variables.
    Factor f;
    f.vars = scope;
    std::sort(f.vars.begin(), f.vars.end());
    for (std::size_t v : f.vars) f.cards.push_back(network.node(v).states.size());
    f.table.assign(declared.size(), 0.0);
    std::vector<std::size_t> digits(scope.size(), 0);
    for (std::size_t k = 0; k < declared.size(); ++k) {
      std::size_t target = 0;
      for (std::size_t j = 0; j < f.vars.size(); ++j) {
        auto at = std::find(scope.begin(), scope.end(), f.vars[j]) - scope.begin();
        target = target * f.cards[j] + digits[at];
      }
      f.table[target] = declared[k];
      for (std::size_t d = scope.size(); d-- > 0;) {
        if (++digits[d] < cards[d]) break;
        digits[d] = 0;
      }
    }
    factors.push_back(std::move(f));
  }
  return factors;
}

Distribution eliminate_all_but(std::vector<Factor> factors, std::size_t query,
                               std::size_t variables) {
  std::vector<bool> done(variables, false);
  done[query] = true;
  for (std::size_t round = 1; round < variables; ++round) {
    // Greedy min-size elimination order.
    std::size_t best = variables;
    std::size_t best_size = std::numeric_limits<std::size_t>::max();
    for (std::size_t v = 0; v < variables; ++v) {
      if (done[v]) continue;
      std::vector<std::size_t> scope;
      std::vector<std::size_t> cards;
      for (const auto& f : factors) {
        if (!std::binary_search(f.vars.begin(), f.vars.end(), v)) continue;
        for (std::size_t k = 0; k < f.vars.size(); ++k) {
          if (std::find(scope.begin(), scope.end(), f.vars[k]) == scope.end()) {
            scope.push_back(f.vars[k]);
            cards.push_back(f.cards[k]);
          }
        }
      }
      std::size_t size = 1;
      for (std::size_t c : cards) size = std::min(size * c, kMaxFactorEntries + 1);
      if (size < best_size) {
        best_size = size;
        best = v;
      }
    }
    done[best] = true;
    Factor product{{}, {}, {1.0}};
    std::vector<Factor> rest;
    for (auto& f : factors) {
      if (std::binary_search(f.vars.begin(), f.vars.end(), best)) {
        product = multiply(product, f);
      } else {
        rest.push_back(std::move(f));
      }
    }
    if (!product.vars.empty()) rest.push_back(sum_out(product, best));
    factors = std::move(rest);
  }
  Factor result{{}, {}, {1.0}};
  for (const auto& f : factors) result = multiply(result, f);
  return result.table;
}

}  // namespace

Posterior exact_posterior(const VariableNetwork& network,
                          const std::vector<Evidence>& evidence) {
  require_valid(network);
  std::uint64_t configurations = 1;
  for (const auto& node : network.nodes()) {
    configurations *= node.states.size();
    if (configurations > kEnumerationCap) {
      throw Error(ErrorCode::kTooLarge,
                  "joint has more than 2^24 configurations; enumeration refused");
    }
  }
  std::vector<Distribution> marginals;
  if (has_graded(evidence)) marginals = marginals_in_order(network, exact_posterior(network, {}));
  const auto likelihood = evidence_likelihoods(network, evidence, marginals);
  Enumerator enumerator(network, likelihood);
  const double total = enumerator.run();
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kInconsistentEvidence, "evidence has zero probability");
  }
  return to_posterior(network, std::move(enumerator.mass()), total);
}

Posterior eliminate_posterior(const VariableNetwork& network,
                              const std::vector<Evidence>& evidence) {
  require_valid(network);
  std::vector<Distribution> marginals;
  if (has_graded(evidence)) {
    marginals = marginals_in_order(network, eliminate_posterior(network, {}));
  }
  const auto likelihood = evidence.empty() ? unit_likelihoods(network)
                                           : evidence_likelihoods(network, evidence, marginals);
  const auto factors = family_factors(network, likelihood);
  Posterior out;
  for (std::size_t q = 0; q < network.size(); ++q) {
    Distribution dist = eliminate_all_but(factors, q, network.size());
    double total = 0.0;
    for (double p : dist) total += p;
    if (!(total > 0.0)) {
      throw Error(ErrorCode::kInconsistentEvidence, "evidence has zero probability");
    }
    for (double& p : dist) p /= total;
    out.emplace(network.node(q).id, std::move(dist));
  }
  return out;
}

Posterior reference_posterior(const VariableNetwork& network,
                              const std::vector<Evidence>& evidence) {
  std::uint64_t configurations = 1;
  for (const auto& node : network.nodes()) {
    configurations *= node.states.size();
    if (configurations > kEnumerationCap) return eliminate_posterior(network, evidence);
  }
  return exact_posterior(network, evidence);
}

}  // namespace helm
