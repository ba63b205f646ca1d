#include "doctest.h"
#include "support.hpp"

#include "helm/error.hpp"
#include "helm/oracle.hpp"
#include "helm/prospector.hpp"

using namespace helm;
using namespace helm::compiler;

namespace {

FeatureModel two_class(int w_a, int w_b, int count_a = 1, int count_b = 1) {
  FeatureModel m;
  m.classes = {{"A", count_a}, {"B", count_b}};
  ComponentSpec c;
  c.name = "hull";
  c.types = {"ta", "tb"};
  c.membership = {{"A", "ta"}, {"B", "tb"}};
  c.attributes = {"long"};
  c.weights = {{"ta", {{"long", w_a}}}, {"tb", {{"long", w_b}}}};
  m.components = {c};
  return m;
}

const EvidentialLink& link(const PropositionNetwork& net, const std::string& from, const std::string& to) {
  for (const auto& l : net.links()) {
    if (l.from == from && l.to == to) return l;
  }
  FAIL("no link " << from << " -> " << to);
  return net.links().front();
}

// Stern weights read straight from the model file, by class.
double weight(const FeatureModel& m, const std::string& cls, const std::string& attr) {
  const auto& comp = m.components.front();
  return comp.weights.at(comp.membership.at(cls)).at(attr);
}

}  // namespace

TEST_SUITE("compiler") {

TEST_CASE("class priors by counting") {
  for (const auto& [id, p] : class_priors(testing::stern_model())) CHECK(p == doctest::Approx(0.1));
  const auto priors = class_priors(two_class(5, 5, 3, 1));
  CHECK(priors.at("A") == 0.75);
  CHECK(priors.at("B") == 0.25);
}

TEST_CASE("stern variable network shape and anchored entries") {
  const auto net = compile_bms(testing::stern_model());
  CHECK(net.size() == 5);
  CHECK(net.link_count() == 4);
  CHECK(net.node(net.require("class")).states.size() == 10);
  CHECK(net.node(net.require("stern")).states.size() == 5);
  const auto& stern_states = net.node(net.require("stern")).states;
  const std::size_t sverdlov = std::find(stern_states.begin(), stern_states.end(), "sverdlov") - stern_states.begin();
  const std::size_t virginia = std::find(stern_states.begin(), stern_states.end(), "virginia") - stern_states.begin();
  const auto& tapered = net.node(net.require("stern.tapered"));
  const auto& square = net.node(net.require("stern.square"));
  const auto& round = net.node(net.require("stern.round"));
  CHECK(tapered.states == std::vector<std::string>{"detected", "not-detected"});
  CHECK(tapered.cpt[sverdlov][0] == 1.0);
  CHECK(square.cpt[sverdlov][0] == 0.1);
  CHECK(round.cpt[virginia][0] == 0.0);
  CHECK(validate(net).ok());
}

TEST_CASE("weight 5 gives an even row") {
  const auto net = compile_bms(two_class(5, 0));
  CHECK(net.node(net.require("hull.long")).cpt[0] == std::vector<double>{0.5, 0.5});
}

TEST_CASE("observation priors by counting") {
  const auto m = testing::stern_model();
  for (const std::string attr : {"square", "round", "tapered"}) {
    double expected = 0.0;
    for (const auto& c : m.classes) expected += 0.1 * weight(m, c.id, attr) / 10.0;
    CHECK(observation_prior(m, "stern", attr) == doctest::Approx(expected).epsilon(1e-15));
  }
  CHECK(observation_prior(m, "stern", "tapered") == doctest::Approx(0.1));
  CHECK(observation_prior(m, "stern", "round") == doctest::Approx(0.47));
  CHECK(observation_prior(m, "stern", "square") == doctest::Approx(0.12));
}

TEST_CASE("proposition network lambdas") {
  const auto net = compile_prospector(testing::stern_model());
  CHECK(net.top().size() == 10);
  CHECK(net.node(net.require("stern.tapered")).prior == doctest::Approx(0.1));
  CHECK(net.node(net.require("stern.tapered")).askable);

  const auto& tapered = link(net, "stern.tapered", "fit:stern:Sverdlov");
  CHECK(tapered.lambda1 == 1.0 - prospector::kEpsilon);
  CHECK(tapered.lambda2 == prospector::kEpsilon);
  const auto& round = link(net, "stern.round", "fit:stern:Belknap");
  // P(belknap-leahy type | round) = 0.2 * 1.0 / 0.47.
  CHECK(round.lambda1 == doctest::Approx(0.2 / 0.47).epsilon(1e-12));
  const auto& fit = link(net, "fit:stern:Belknap", "Belknap");
  CHECK(fit.lambda1 == doctest::Approx(0.5));
  CHECK(fit.lambda2 == prospector::kEpsilon);
  CHECK(validate(net).ok());
}

TEST_CASE("round evidence gives Belknap 0.1/0.47 end to end") {
  const auto m = testing::stern_model();
  prospector::State state(std::make_shared<const prospector::Model>(compile_prospector(m)));
  state.post_answer("stern.round", "detected");
  state.propagate();
  CHECK(state.probability("Belknap") == doctest::Approx(0.1 / 0.47).epsilon(1e-6));
  CHECK(state.probability("Belknap") == doctest::Approx(0.2128).epsilon(1e-4));
  CHECK(class_posterior(m, "stern", "round", true).at("Belknap") == doctest::Approx(0.1 / 0.47).epsilon(1e-15));
}

TEST_CASE("both networks describe one joint") {
  const auto m = testing::stern_model();
  const auto net = compile_bms(m);
  const auto& states = net.node(net.require("class")).states;
  for (const auto& obs : observations(m)) {
    for (bool detected : {true, false}) {
      const auto exact = exact_posterior(
          net, {Evidence::hard(obs.id, std::string(detected ? kDetected : kNotDetected))});
      const auto counted = class_posterior(m, obs.component, obs.attribute, detected);
      for (std::size_t i = 0; i < states.size(); ++i) {
        CHECK(exact.at("class")[i] == doctest::Approx(counted.at(states[i])).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("detection probability is w/10") {
  const auto m = testing::stern_model();
  CHECK(detection_probability(m, "ForrestSherman", "stern", "round") == 0.2);
  CHECK(detection_probability(m, "Truxtun", "stern", "round") == 0.5);
}

TEST_CASE("compiled output is deterministic and matches the goldens") {
  const auto m = testing::stern_model();
  const std::string bms = save_network(compile_bms(m));
  const std::string pro = save_network(compile_prospector(m));
  CHECK(save_network(compile_bms(m)) == bms);
  CHECK(bms == read_file(testing::source_path("models/golden/stern-plan-view.bms.json")));
  CHECK(pro == read_file(testing::source_path("models/golden/stern-plan-view.prospector.json")));
}

TEST_CASE("feature model validation") {
  auto bad = two_class(12, 3);
  bad.components[0].membership.erase("B");
  const auto report = validate(bad);
  CHECK(report.has("membership"));
  CHECK(report.has("weight-range"));
  try {
    load_feature_model(read_file(testing::source_path("tests/data/invalid-model.json")));
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kValidation);
  }
}

TEST_CASE("never-detected attribute is flagged and clamped") {
  const auto result = compile_prospector_report(two_class(0, 0));
  CHECK(result.report.has("degenerate-observation"));
  CHECK(result.report.ok());
  CHECK(result.network.node(result.network.require("hull.long")).prior == prospector::kEpsilon);
}

TEST_CASE("feature model round trip") {
  const auto m = testing::stern_model();
  CHECK(save_feature_model(load_feature_model(save_feature_model(m))) == save_feature_model(m));
}

}  // TEST_SUITE
