#pragma once

// Path-tracking accessors over nlohmann::json. Every failure raises
// ParseError carrying the JSON-pointer path of the offending value.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ave/error.hpp"

namespace ave::jsonio {

using nlohmann::json;

inline std::string child(const std::string& path, std::string_view key) {
  return path + "/" + std::string(key);
}
inline std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

inline json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON (byte ") + std::to_string(e.byte) + ")");
  }
}

inline const json& object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path.empty() ? "/" : path, "expected an object");
  return j;
}

inline const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path.empty() ? "/" : path, "expected an array");
  return j;
}

inline const json* find(const json& j, std::string_view key) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline const json& member(const json& j, std::string_view key, const std::string& path) {
  object(j, path);
  const json* v = find(j, key);
  if (!v) throw ParseError(child(path, key), "missing required field");
  return *v;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  return j.get<double>();
}

inline std::int64_t integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  return j.get<std::int64_t>();
}

inline std::uint64_t unsigned_integer(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw ParseError(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

inline std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a string");
  return j.get<std::string>();
}

inline bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ParseError(path, "expected true or false");
  return j.get<bool>();
}

inline double number_at(const json& j, std::string_view key, const std::string& path) {
  return number(member(j, key, path), child(path, key));
}
inline std::int64_t integer_at(const json& j, std::string_view key, const std::string& path) {
  return integer(member(j, key, path), child(path, key));
}
inline std::uint64_t unsigned_at(const json& j, std::string_view key, const std::string& path) {
  return unsigned_integer(member(j, key, path), child(path, key));
}
inline std::string string_at(const json& j, std::string_view key, const std::string& path) {
  return string(member(j, key, path), child(path, key));
}

inline std::optional<double> opt_number(const json& j, std::string_view key, const std::string& path) {
  const json* v = find(object(j, path), key);
  if (!v) return std::nullopt;
  return number(*v, child(path, key));
}
inline std::optional<std::string> opt_string(const json& j, std::string_view key, const std::string& path) {
  const json* v = find(object(j, path), key);
  if (!v) return std::nullopt;
  return string(*v, child(path, key));
}

}  // namespace ave::jsonio
