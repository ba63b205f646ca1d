#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "helm/network.hpp"
#include "helm/validate.hpp"

namespace helm {

// Weighted feature description of a set of ship classes. A weight w in
// 0..10 means the attribute is detected with probability w/10 on a component
// of that type.
struct ComponentSpec {
  std::string name;
  std::vector<std::string> types;
  std::map<std::string, std::string> membership;  // class id -> type
  std::vector<std::string> attributes;
  std::map<std::string, std::map<std::string, int>> weights;  // type -> attr -> w
  std::map<std::string, double> costs;                        // attr -> question cost
};

struct ClassSpec {
  std::string id;
  int count = 1;
};

struct FeatureModel {
  std::vector<ClassSpec> classes;
  std::vector<ComponentSpec> components;
};

// Throws Error(kParse) on schema violations; Error(kValidation) when the model
// breaks an invariant.
FeatureModel load_feature_model(std::string_view text);
std::string save_feature_model(const FeatureModel& model);
ValidationReport validate(const FeatureModel& model);

namespace compiler {

// Names of generated nodes, shared by both compiled networks so that one
// evidence journal drives either engine.
inline constexpr std::string_view kClassNode = "class";
inline constexpr std::string_view kDetected = "detected";
inline constexpr std::string_view kNotDetected = "not-detected";
std::string observation_id(const std::string& component, const std::string& attribute);
std::string fit_id(const std::string& component, const std::string& class_id);

struct Observation {
  std::string id;
  std::string component;
  std::string attribute;
  double cost = 1.0;
};

// Every attribute observation, component by component, in declaration order.
std::vector<Observation> observations(const FeatureModel& model);

// P(class) = count / total. Throws kValidation on an empty class list.
std::map<std::string, double> class_priors(const FeatureModel& model);

// P(attribute detected | class) = w(type(class), attribute) / 10.
double detection_probability(const FeatureModel& model, const std::string& class_id,
                             const std::string& component, const std::string& attribute);

// Counting over the implied joint (class prior times detection
// probabilities, attributes independent given class).
double observation_prior(const FeatureModel& model, const std::string& component,
                         const std::string& attribute);
// P(class | one attribute observation), for every class.
std::map<std::string, double> class_posterior(const FeatureModel& model,
                                              const std::string& component,
                                              const std::string& attribute, bool detected);

// Tree: class -> component type -> attribute observations.
VariableNetwork compile_bms(const FeatureModel& model);

struct ProspectorCompilation {
  PropositionNetwork network;
  ValidationReport report;
};

// Class propositions, per-(class, component) fit propositions and one shared
// askable leaf per observation, with lambdas from counting.
ProspectorCompilation compile_prospector_report(const FeatureModel& model);
PropositionNetwork compile_prospector(const FeatureModel& model);

}  // namespace compiler
}  // namespace helm
