#include "helm/serialize.hpp"

#include <fstream>
#include <sstream>

#include "helm/error.hpp"
#include "helm/validate.hpp"
#include "json_util.hpp"

namespace helm {

namespace {

using detail::Json;
using detail::field;
using detail::optional_field;

VariableNetwork variable_from_json(const Json& doc) {
  const Json& nodes = field(doc, "nodes", "document");
  if (!nodes.is_array()) detail::schema_error("document", "'nodes' must be an array");
  std::vector<VariableNode> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Json& item = nodes[i];
    std::string where = "nodes[" + std::to_string(i) + "]";
    if (!item.is_object()) detail::schema_error(where, "must be an object");
    VariableNode node;
    node.id = detail::get<std::string>(field(item, "id", where), where + ".id");
    where += " (id '" + node.id + "')";
    if (const Json* label = optional_field(item, "label")) {
      node.label = detail::get<std::string>(*label, where + ".label");
    }
    node.states = detail::get<std::vector<std::string>>(field(item, "states", where),
                                                         where + ".states");
    if (const Json* parents = optional_field(item, "parents")) {
      node.parents = detail::get<std::vector<std::string>>(*parents, where + ".parents");
    }
    if (node.parents.empty()) {
      node.prior = detail::get<Distribution>(field(item, "prior", where), where + ".prior");
    } else {
      node.cpt = detail::get<std::vector<Distribution>>(field(item, "cpt", where),
                                                        where + ".cpt");
    }
    out.push_back(std::move(node));
  }
  return VariableNetwork(std::move(out));
}

PropositionNetwork proposition_from_json(const Json& doc) {
  const Json& nodes = field(doc, "nodes", "document");
  if (!nodes.is_array()) detail::schema_error("document", "'nodes' must be an array");
  std::vector<PropositionNode> props;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Json& item = nodes[i];
    std::string where = "nodes[" + std::to_string(i) + "]";
    if (!item.is_object()) detail::schema_error(where, "must be an object");
    PropositionNode node;
    node.id = detail::get<std::string>(field(item, "id", where), where + ".id");
    where += " (id '" + node.id + "')";
    if (const Json* label = optional_field(item, "label")) {
      node.label = detail::get<std::string>(*label, where + ".label");
    }
    node.prior = detail::get<double>(field(item, "prior", where), where + ".prior");
    if (const Json* askable = optional_field(item, "askable")) {
      node.askable = detail::get<bool>(*askable, where + ".askable");
    }
    if (const Json* cost = optional_field(item, "cost")) {
      node.cost = detail::get<double>(*cost, where + ".cost");
    }
    if (const Json* answers = optional_field(item, "answers")) {
      node.answers = detail::get<std::vector<std::string>>(*answers, where + ".answers");
    }
    props.push_back(std::move(node));
  }
  std::vector<EvidentialLink> links;
  if (const Json* items = optional_field(doc, "links")) {
    if (!items->is_array()) detail::schema_error("document", "'links' must be an array");
    for (std::size_t i = 0; i < items->size(); ++i) {
      const Json& item = (*items)[i];
      const std::string where = "links[" + std::to_string(i) + "]";
      if (!item.is_object()) detail::schema_error(where, "must be an object");
      EvidentialLink link;
      link.from = detail::get<std::string>(field(item, "from", where), where + ".from");
      link.to = detail::get<std::string>(field(item, "to", where), where + ".to");
      link.lambda1 = detail::get<double>(field(item, "lambda1", where), where + ".lambda1");
      link.lambda2 = detail::get<double>(field(item, "lambda2", where), where + ".lambda2");
      links.push_back(std::move(link));
    }
  }
  std::vector<std::string> top;
  if (const Json* ids = optional_field(doc, "top")) {
    top = detail::get<std::vector<std::string>>(*ids, "top");
  }
  return PropositionNetwork(std::move(props), std::move(links), std::move(top));
}

std::string kind_of(const Json& doc) {
  if (!doc.is_object()) detail::schema_error("document", "must be a JSON object");
  return detail::get<std::string>(field(doc, "kind", "document"), "kind");
}

}  // namespace

AnyNetwork load_network(std::string_view text) {
  Json doc = detail::parse(text);
  const std::string kind = kind_of(doc);
  if (kind == "variable") {
    auto network = variable_from_json(doc);
    require_valid(network);
    return network;
  }
  if (kind == "proposition") {
    auto network = proposition_from_json(doc);
    require_valid(network);
    return network;
  }
  detail::schema_error("kind", "unknown network kind '" + kind + "'");
}

VariableNetwork load_variable_network(std::string_view text) {
  auto any = load_network(text);
  if (auto* network = std::get_if<VariableNetwork>(&any)) return std::move(*network);
  throw Error(ErrorCode::kParse, "kind: expected a variable network");
}

PropositionNetwork load_proposition_network(std::string_view text) {
  auto any = load_network(text);
  if (auto* network = std::get_if<PropositionNetwork>(&any)) return std::move(*network);
  throw Error(ErrorCode::kParse, "kind: expected a proposition network");
}

std::string save_network(const VariableNetwork& network) {
  Json doc = Json::object();
  doc["kind"] = "variable";
  Json nodes = Json::array();
  for (const auto& node : network.nodes()) {
    Json item = Json::object();
    item["id"] = node.id;
    item["label"] = node.label;
    item["states"] = node.states;
    if (node.is_root()) {
      item["prior"] = node.prior;
    } else {
      item["parents"] = node.parents;
      item["cpt"] = node.cpt;
    }
    nodes.push_back(std::move(item));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(2) + "\n";
}

std::string save_network(const PropositionNetwork& network) {
  static const std::vector<std::string> kDefaultAnswers = PropositionNode{}.answers;
  Json doc = Json::object();
  doc["kind"] = "proposition";
  Json nodes = Json::array();
  for (const auto& node : network.nodes()) {
    Json item = Json::object();
    item["id"] = node.id;
    item["label"] = node.label;
    item["prior"] = node.prior;
    item["askable"] = node.askable;
    item["cost"] = node.cost;
    if (node.answers != kDefaultAnswers) item["answers"] = node.answers;
    nodes.push_back(std::move(item));
  }
  doc["nodes"] = std::move(nodes);
  Json links = Json::array();
  for (const auto& link : network.links()) {
    Json item = Json::object();
    item["from"] = link.from;
    item["to"] = link.to;
    item["lambda1"] = link.lambda1;
    item["lambda2"] = link.lambda2;
    links.push_back(std::move(item));
  }
  doc["links"] = std::move(links);
  doc["top"] = network.top();
  return doc.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kNotFound, "cannot write '" + path + "'");
  out << contents;
}

}  // namespace helm
