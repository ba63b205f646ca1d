#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "helm/network.hpp"

namespace helm {

using AnyNetwork = std::variant<VariableNetwork, PropositionNetwork>;

// JSON network documents. Loading checks the schema (Error kParse with a
// line/column or field path) and then validates (Error kValidation).
AnyNetwork load_network(std::string_view text);
VariableNetwork load_variable_network(std::string_view text);
PropositionNetwork load_proposition_network(std::string_view text);

// Pretty-printed, declaration-ordered, shortest round-trip doubles. Output is
// deterministic for a given network.
std::string save_network(const VariableNetwork& network);
std::string save_network(const PropositionNetwork& network);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace helm
