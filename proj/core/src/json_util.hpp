#pragma once

// Private JSON helpers shared by the document readers.

#include <string>
#include <string_view>

#include <json.hpp>

#include "helm/error.hpp"

namespace helm::detail {

using Json = nlohmann::ordered_json;

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParse, where + ": " + what);
}

// Parses text, reporting syntax errors as "line L, column C: ...".
inline Json parse(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string message = e.what();
    if (auto pos = message.find("; last read"); pos != std::string::npos) {
      message = message.substr(pos + 2);
    }
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ", column " +
                                       std::to_string(column) + ": " + message);
  }
}

inline const Json& field(const Json& object, const char* name, const std::string& where) {
  auto it = object.find(name);
  if (it == object.end()) schema_error(where, std::string("missing field '") + name + "'");
  return *it;
}

inline const Json* optional_field(const Json& object, const char* name) {
  auto it = object.find(name);
  return it == object.end() ? nullptr : &*it;
}

template <typename T>
T get(const Json& value, const std::string& where) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    schema_error(where, "wrong type (" + std::string(value.type_name()) + ")");
  }
}

}  // namespace helm::detail
