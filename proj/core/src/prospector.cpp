#include "helm/prospector.hpp"

#include <algorithm>
#include <cmath>

#include "helm/error.hpp"
#include "helm/validate.hpp"

namespace helm::prospector {

double clamp_probability(double p) { return std::clamp(p, kEpsilon, 1.0 - kEpsilon); }

double interpolate_posterior(double prior, double pE, double lambda1, double lambda2,
                             double pObs) {
  if (!(pE > 0.0 && pE < 1.0)) {
    throw Error(ErrorCode::kInvalidLink, "antecedent prior must lie strictly inside (0,1)");
  }
  double posterior;
  if (pObs <= pE) {
    posterior = lambda2 + (prior - lambda2) * (pObs / pE);
  } else {
    posterior = prior + (lambda1 - prior) * ((pObs - pE) / (1.0 - pE));
  }
  return clamp_probability(posterior);
}

double combine_evidence(double prior, const std::vector<double>& contributions) {
  if (contributions.empty()) return prior;
  auto odds = [](double p) { return p / (1.0 - p); };
  const double prior_odds = odds(prior);
  // Summing log ratios keeps the result independent of contribution order.
  double log_odds = std::log(prior_odds);
  for (double c : contributions) log_odds += std::log(odds(c)) - std::log(prior_odds);
  const double o = std::exp(log_odds);
  return clamp_probability(std::isinf(o) ? 1.0 : o / (1.0 + o));
}

std::vector<RankedClass> rank(std::vector<RankedClass> classes) {
  std::sort(classes.begin(), classes.end(), [](const RankedClass& a, const RankedClass& b) {
    if (rank_key(a.probability) != rank_key(b.probability)) return a.probability > b.probability;
    return a.id < b.id;
  });
  return classes;
}

Model::Model(PropositionNetwork network) : network_(std::move(network)) {
  require_valid(network_);
  order_ = network_.topological_order();
  for (const auto& link : network_.links()) {
    lambda1_.push_back(clamp_probability(link.lambda1));
    lambda2_.push_back(clamp_probability(link.lambda2));
  }
}

State::State(std::shared_ptr<const Model> model)
    : model_(std::move(model)),
      observed_(model_->network().size(), false),
      dirty_(model_->network().size(), false),
      node_visits_(model_->network().size(), 0) {
  const auto& net = model_->network();
  for (const auto& node : net.nodes()) probability_.push_back(clamp_probability(node.prior));
  for (std::size_t l = 0; l < net.links().size(); ++l) {
    contribution_.push_back(probability_[net.link_to(l)]);
  }
}

std::size_t State::askable_index(const std::string& node) const {
  const std::size_t index = network().require(node);
  if (!network().node(index).askable) {
    throw Error(ErrorCode::kNotAskable,
                "'" + node + "' is not askable; it only changes through propagation");
  }
  return index;
}

void State::post_graded_evidence(const std::string& node, double pObs) {
  const std::size_t index = askable_index(node);
  if (!(pObs >= 0.0 && pObs <= 1.0)) {
    throw Error(ErrorCode::kInvalidEvidence, "observation probability outside [0,1]");
  }
  probability_[index] = clamp_probability(pObs);
  observed_[index] = true;
  dirty_[index] = true;
}

void State::post_answer(const std::string& node, const std::string& answer) {
  const std::size_t index = askable_index(node);
  const auto& answers = network().node(index).answers;
  if (answer == answers[0]) return post_graded_evidence(node, 1.0);
  if (answer == answers[1]) return post_graded_evidence(node, 0.0);
  throw Error(ErrorCode::kUnknownState, "'" + node + "' has no answer '" + answer + "'");
}

void State::post_likelihood(const std::string& node, const std::vector<double>& likelihood) {
  const std::size_t index = askable_index(node);
  if (likelihood.size() != 2 || !(likelihood[0] >= 0.0) || !(likelihood[1] >= 0.0) ||
      likelihood[0] + likelihood[1] <= 0.0) {
    throw Error(ErrorCode::kInvalidEvidence, "likelihood for '" + node + "' must be 2 nonnegative values, not both zero");
  }
  const double prior = network().node(index).prior;
  const double yes = likelihood[0] * prior;
  post_graded_evidence(node, yes / (yes + likelihood[1] * (1.0 - prior)));
}

void State::post(const Evidence& evidence) {
  if (const auto* hard = std::get_if<HardEvidence>(&evidence.form)) {
    post_answer(evidence.node, hard->state);
  } else if (const auto* soft = std::get_if<VirtualEvidence>(&evidence.form)) {
    post_likelihood(evidence.node, soft->likelihood);
  } else {
    post_graded_evidence(evidence.node, std::get<GradedEvidence>(evidence.form).probability);
  }
}

void State::propagate() {
  const auto& net = network();
  std::vector<bool> stale(net.size(), false);
  for (std::size_t index : model_->order()) {
    if (stale[index] && !observed_[index]) {
      const double prior = clamp_probability(net.node(index).prior);
      std::vector<double> contributions;
      for (std::size_t l : net.incoming(index)) {
        const std::size_t from = net.link_from(l);
        contribution_[l] =
            interpolate_posterior(prior, clamp_probability(net.node(from).prior),
                                  model_->lambda1(l), model_->lambda2(l), probability_[from]);
        contributions.push_back(contribution_[l]);
      }
      const double updated = combine_evidence(prior, contributions);
      ++visits_;
      ++node_visits_[index];
      if (std::abs(updated - probability_[index]) > kChangeThreshold) dirty_[index] = true;
      probability_[index] = updated;
    }
    if (dirty_[index]) {
      for (std::size_t l : net.outgoing(index)) stale[net.link_to(l)] = true;
      dirty_[index] = false;
    }
  }
}

double State::probability(const std::string& node) const {
  return probability_[network().require(node)];
}

bool State::observed(const std::string& node) const {
  return observed_[network().require(node)];
}

bool State::has_pending() const {
  return std::find(dirty_.begin(), dirty_.end(), true) != dirty_.end();
}

std::vector<RankedClass> State::rank_classes() const {
  std::vector<RankedClass> classes;
  for (const auto& id : network().top()) classes.push_back({id, probability(id)});
  return rank(std::move(classes));
}

std::map<std::string, double> State::snapshot() const {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < network().size(); ++i) {
    out.emplace(network().node(i).id, probability_[i]);
  }
  return out;
}

}  // namespace helm::prospector
