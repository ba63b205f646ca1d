#include "helm/compiler.hpp"

#include <algorithm>
#include <set>

#include "helm/error.hpp"
#include "helm/prospector.hpp"
#include "json_util.hpp"

namespace helm {

using detail::Json;

FeatureModel load_feature_model(std::string_view text) {
  const Json doc = detail::parse(text);
  if (!doc.is_object()) detail::schema_error("document", "must be a JSON object");
  FeatureModel model;
  const Json& classes = detail::field(doc, "classes", "document");
  if (!classes.is_array()) detail::schema_error("classes", "must be an array");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string where = "classes[" + std::to_string(i) + "]";
    const Json& item = classes[i];
    if (!item.is_object()) detail::schema_error(where, "must be an object");
    ClassSpec spec;
    spec.id = detail::get<std::string>(detail::field(item, "id", where), where + ".id");
    if (const Json* count = detail::optional_field(item, "count")) {
      spec.count = detail::get<int>(*count, where + ".count");
    }
    model.classes.push_back(std::move(spec));
  }
  const Json& components = detail::field(doc, "components", "document");
  if (!components.is_array()) detail::schema_error("components", "must be an array");
  for (std::size_t i = 0; i < components.size(); ++i) {
    std::string where = "components[" + std::to_string(i) + "]";
    const Json& item = components[i];
    if (!item.is_object()) detail::schema_error(where, "must be an object");
    ComponentSpec spec;
    spec.name = detail::get<std::string>(detail::field(item, "name", where), where + ".name");
    where += " (name '" + spec.name + "')";
    spec.types = detail::get<std::vector<std::string>>(detail::field(item, "types", where),
                                                       where + ".types");
    spec.membership = detail::get<std::map<std::string, std::string>>(
        detail::field(item, "membership", where), where + ".membership");
    spec.attributes = detail::get<std::vector<std::string>>(
        detail::field(item, "attributes", where), where + ".attributes");
    spec.weights = detail::get<std::map<std::string, std::map<std::string, int>>>(
        detail::field(item, "weights", where), where + ".weights");
    if (const Json* costs = detail::optional_field(item, "costs")) {
      spec.costs = detail::get<std::map<std::string, double>>(*costs, where + ".costs");
    }
    model.components.push_back(std::move(spec));
  }
  auto report = validate(model);
  if (!report.ok()) {
    const Issue first = report.errors().front();
    throw Error(ErrorCode::kValidation,
                "[" + first.code + "] " + (first.node.empty() ? "" : first.node + ": ") +
                    first.message);
  }
  return model;
}

std::string save_feature_model(const FeatureModel& model) {
  Json doc = Json::object();
  Json classes = Json::array();
  for (const auto& c : model.classes) classes.push_back(Json{{"id", c.id}, {"count", c.count}});
  doc["classes"] = std::move(classes);
  Json components = Json::array();
  for (const auto& comp : model.components) {
    Json item = Json::object();
    item["name"] = comp.name;
    item["types"] = comp.types;
    item["membership"] = comp.membership;
    item["attributes"] = comp.attributes;
    item["weights"] = comp.weights;
    if (!comp.costs.empty()) item["costs"] = comp.costs;
    components.push_back(std::move(item));
  }
  doc["components"] = std::move(components);
  return doc.dump(2) + "\n";
}

ValidationReport validate(const FeatureModel& model) {
  ValidationReport report;
  auto error = [&](std::string code, std::string where, std::string message) {
    report.issues.push_back({Severity::kError, std::move(code), std::move(where), std::move(message)});
  };
  if (model.classes.size() < 2) error("too-few-classes", "", "needs at least 2 classes");
  std::set<std::string> class_ids;
  for (const auto& c : model.classes) {
    if (c.id.empty()) error("empty-id", "", "class with empty id");
    if (!class_ids.insert(c.id).second) error("duplicate-id", c.id, "class declared twice");
    if (c.count < 1) error("count-range", c.id, "ship count must be at least 1");
  }
  std::set<std::string> names;
  for (const auto& comp : model.components) {
    const std::string& where = comp.name;
    if (comp.name.empty() || comp.name == compiler::kClassNode) {
      error("component-name", comp.name, "component name is empty or reserved");
    }
    if (!names.insert(comp.name).second) error("duplicate-id", where, "component declared twice");
    if (comp.types.size() < 2) error("too-few-types", where, "needs at least 2 component types");
    std::set<std::string> types(comp.types.begin(), comp.types.end());
    if (types.size() != comp.types.size()) error("duplicate-type", where, "type listed twice");
    for (const auto& c : model.classes) {
      auto it = comp.membership.find(c.id);
      if (it == comp.membership.end()) {
        error("membership", where, "class '" + c.id + "' has no type");
      } else if (!types.count(it->second)) {
        error("membership", where, "class '" + c.id + "' maps to unknown type '" + it->second + "'");
      }
    }
    for (const auto& [cls, type] : comp.membership) {
      if (!class_ids.count(cls)) error("membership", where, "unknown class '" + cls + "'");
    }
    std::set<std::string> attrs(comp.attributes.begin(), comp.attributes.end());
    if (attrs.size() != comp.attributes.size()) {
      error("duplicate-attribute", where, "attribute listed twice");
    }
    for (const auto& type : comp.types) {
      auto row = comp.weights.find(type);
      for (const auto& attr : comp.attributes) {
        if (row == comp.weights.end() || !row->second.count(attr)) {
          error("missing-weight", where, "no weight for (" + type + ", " + attr + ")");
          continue;
        }
        const int w = row->second.at(attr);
        if (w < 0 || w > 10) {
          error("weight-range", where,
                "weight " + std::to_string(w) + " for (" + type + ", " + attr + ") outside 0..10");
        }
      }
    }
    for (const auto& [type, row] : comp.weights) {
      if (!types.count(type)) error("weights", where, "weights for unknown type '" + type + "'");
      for (const auto& [attr, w] : row) {
        if (!attrs.count(attr)) error("weights", where, "weight for unknown attribute '" + attr + "'");
      }
    }
    for (const auto& [attr, cost] : comp.costs) {
      if (!attrs.count(attr)) error("costs", where, "cost for unknown attribute '" + attr + "'");
      if (!(cost > 0.0)) error("cost-range", where, "cost for '" + attr + "' must be positive");
    }
  }
  return report;
}

namespace compiler {

namespace {

const ComponentSpec& component_named(const FeatureModel& model, const std::string& name) {
  for (const auto& comp : model.components) {
    if (comp.name == name) return comp;
  }
  throw Error(ErrorCode::kUnknownNode, "unknown component '" + name + "'");
}

void require_valid_model(const FeatureModel& model) {
  auto report = validate(model);
  if (report.ok()) return;
  const Issue first = report.errors().front();
  throw Error(ErrorCode::kValidation, "[" + first.code + "] " +
                                          (first.node.empty() ? "" : first.node + ": ") +
                                          first.message);
}

double weight_probability(const ComponentSpec& comp, const std::string& type,
                          const std::string& attribute) {
  return comp.weights.at(type).at(attribute) / 10.0;
}

}  // namespace

std::string observation_id(const std::string& component, const std::string& attribute) {
  return component + "." + attribute;
}

std::string fit_id(const std::string& component, const std::string& class_id) {
  return "fit:" + component + ":" + class_id;
}

std::vector<Observation> observations(const FeatureModel& model) {
  std::vector<Observation> out;
  for (const auto& comp : model.components) {
    for (const auto& attr : comp.attributes) {
      auto cost = comp.costs.find(attr);
      out.push_back({observation_id(comp.name, attr), comp.name, attr,
                     cost == comp.costs.end() ? 1.0 : cost->second});
    }
  }
  return out;
}

std::map<std::string, double> class_priors(const FeatureModel& model) {
  if (model.classes.empty()) throw Error(ErrorCode::kValidation, "model has no classes");
  double total = 0.0;
  for (const auto& c : model.classes) total += c.count;
  std::map<std::string, double> out;
  for (const auto& c : model.classes) out[c.id] = c.count / total;
  return out;
}

double detection_probability(const FeatureModel& model, const std::string& class_id,
                             const std::string& component, const std::string& attribute) {
  const ComponentSpec& comp = component_named(model, component);
  auto type = comp.membership.find(class_id);
  if (type == comp.membership.end()) {
    throw Error(ErrorCode::kUnknownNode, "unknown class '" + class_id + "'");
  }
  return weight_probability(comp, type->second, attribute);
}

double observation_prior(const FeatureModel& model, const std::string& component,
                         const std::string& attribute) {
  const auto priors = class_priors(model);
  double p = 0.0;
  for (const auto& c : model.classes) {
    p += priors.at(c.id) * detection_probability(model, c.id, component, attribute);
  }
  return p;
}

std::map<std::string, double> class_posterior(const FeatureModel& model,
                                              const std::string& component,
                                              const std::string& attribute, bool detected) {
  const auto priors = class_priors(model);
  std::map<std::string, double> joint;
  double total = 0.0;
  for (const auto& c : model.classes) {
    const double d = detection_probability(model, c.id, component, attribute);
    const double p = priors.at(c.id) * (detected ? d : 1.0 - d);
    joint[c.id] = p;
    total += p;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kInconsistentEvidence,
                "observation '" + observation_id(component, attribute) + "' is impossible");
  }
  for (auto& [id, p] : joint) p /= total;
  return joint;
}

VariableNetwork compile_bms(const FeatureModel& model) {
  require_valid_model(model);
  const auto priors = class_priors(model);
  std::vector<VariableNode> nodes;

  VariableNode root;
  root.id = std::string(kClassNode);
  root.label = "naval class";
  for (const auto& c : model.classes) {
    root.states.push_back(c.id);
    root.prior.push_back(priors.at(c.id));
  }
  nodes.push_back(root);

  for (const auto& comp : model.components) {
    VariableNode type;
    type.id = comp.name;
    type.label = comp.name + " type";
    type.states = comp.types;
    type.parents = {std::string(kClassNode)};
    for (const auto& c : model.classes) {
      Distribution row(comp.types.size(), 0.0);
      const auto at = std::find(comp.types.begin(), comp.types.end(), comp.membership.at(c.id));
      row[static_cast<std::size_t>(at - comp.types.begin())] = 1.0;
      type.cpt.push_back(std::move(row));
    }
    nodes.push_back(std::move(type));

    for (const auto& attr : comp.attributes) {
      VariableNode obs;
      obs.id = observation_id(comp.name, attr);
      obs.label = comp.name + " appears " + attr;
      obs.states = {std::string(kDetected), std::string(kNotDetected)};
      obs.parents = {comp.name};
      for (const auto& t : comp.types) {
        const double d = weight_probability(comp, t, attr);
        obs.cpt.push_back({d, 1.0 - d});
      }
      nodes.push_back(std::move(obs));
    }
  }
  VariableNetwork network(std::move(nodes));
  require_valid(network);
  return network;
}

ProspectorCompilation compile_prospector_report(const FeatureModel& model) {
  require_valid_model(model);
  using prospector::clamp_probability;
  const auto priors = class_priors(model);
  std::vector<PropositionNode> nodes;
  std::vector<EvidentialLink> links;
  std::vector<std::string> top;
  std::vector<Issue> flags;

  for (const auto& c : model.classes) {
    nodes.push_back({c.id, "image shows class " + c.id, clamp_probability(priors.at(c.id)),
                     false, 1.0, PropositionNode{}.answers});
    top.push_back(c.id);
  }

  for (const auto& comp : model.components) {
    // P(component has type t), summed over its member classes.
    std::map<std::string, double> type_prior;
    for (const auto& c : model.classes) type_prior[comp.membership.at(c.id)] += priors.at(c.id);

    for (const auto& c : model.classes) {
      const std::string& type = comp.membership.at(c.id);
      const double p_fit = type_prior.at(type);
      const std::string fit = fit_id(comp.name, c.id);
      nodes.push_back({fit, comp.name + " fits " + c.id, clamp_probability(p_fit), false, 1.0,
                       PropositionNode{}.answers});
      links.push_back({fit, c.id, clamp_probability(priors.at(c.id) / p_fit), clamp_probability(0.0)});

      for (const auto& attr : comp.attributes) {
        double p_e = 0.0;
        double fit_and_e = 0.0;
        double fit_and_not_e = 0.0;
        for (const auto& other : model.classes) {
          const double d = weight_probability(comp, comp.membership.at(other.id), attr);
          const double p = priors.at(other.id);
          p_e += p * d;
          if (comp.membership.at(other.id) == type) {
            fit_and_e += p * d;
            fit_and_not_e += p * (1.0 - d);
          }
        }
        const double lambda1 = p_e > 0.0 ? fit_and_e / p_e : p_fit;
        const double lambda2 = p_e < 1.0 ? fit_and_not_e / (1.0 - p_e) : p_fit;
        links.push_back({observation_id(comp.name, attr), fit, clamp_probability(lambda1),
                         clamp_probability(lambda2)});
      }
    }

    for (const auto& attr : comp.attributes) {
      const double p_e = observation_prior(model, comp.name, attr);
      const std::string id = observation_id(comp.name, attr);
      auto cost = comp.costs.find(attr);
      nodes.push_back({id, comp.name + " appears " + attr, clamp_probability(p_e), true,
                       cost == comp.costs.end() ? 1.0 : cost->second,
                       {std::string(kDetected), std::string(kNotDetected)}});
      if (p_e <= 0.0 || p_e >= 1.0) {
        flags.push_back({Severity::kWarning, "degenerate-observation", id,
                         "observation is " + std::string(p_e <= 0.0 ? "never" : "always") +
                             " detected across the fleet; prior clamped"});
      }
    }
  }

  ProspectorCompilation out{PropositionNetwork(std::move(nodes), std::move(links), std::move(top)), {}};
  out.report = helm::validate(out.network);
  out.report.issues.insert(out.report.issues.end(), flags.begin(), flags.end());
  if (!out.report.ok()) {
    throw Error(ErrorCode::kValidation, "compiled network invalid:\n" + out.report.summary());
  }
  return out;
}

PropositionNetwork compile_prospector(const FeatureModel& model) {
  return compile_prospector_report(model).network;
}

}  // namespace compiler
}  // namespace helm
