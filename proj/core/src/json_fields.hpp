#pragma once

// Private helpers for reading JSON documents with errors that name the
// offending field path.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tnd/error.hpp"

namespace tnd::detail {

inline std::string join_path(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

inline const nlohmann::json& child(const nlohmann::json& j, const std::string& key,
                                   const std::string& where) {
  if (!j.is_object()) throw ParseError(where.empty() ? "root must be an object" : where + ": expected object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing field '" + join_path(where, key) + "'");
  return *it;
}

inline const nlohmann::json& array_child(const nlohmann::json& j, const std::string& key,
                                         const std::string& where) {
  const auto& c = child(j, key, where);
  if (!c.is_array()) throw ParseError("field '" + join_path(where, key) + "' must be an array");
  return c;
}

template <typename T>
T field(const nlohmann::json& j, const std::string& key, const std::string& where) {
  const auto& c = child(j, key, where);
  try {
    return c.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError("field '" + join_path(where, key) + "' has the wrong type");
  }
}

template <typename T>
T optional_field(const nlohmann::json& j, const std::string& key, const std::string& where,
                 T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return field<T>(j, key, where);
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace tnd::detail
