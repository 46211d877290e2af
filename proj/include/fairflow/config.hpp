#pragma once

// Strict reader for JSON run configs. Every key read is echoed, with its
// default filled in, into resolved(); finish() rejects keys nobody read.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <utility>

#include <json.hpp>

#include "fairflow/error.hpp"

namespace fairflow {

class ConfigReader {
 public:
  using json = nlohmann::json;

  ConfigReader(json source, std::string where) : src_(std::move(source)), where_(std::move(where)) {
    if (src_.is_null()) src_ = json::object();
    if (!src_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  bool has(const std::string& key) const { return src_.contains(key) && !src_.at(key).is_null(); }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    T v = has(key) ? convert<T>(key) : std::move(fallback);
    resolved_[key] = v;
    return v;
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    T v = convert<T>(key);
    resolved_[key] = v;
    return v;
  }

  template <class T>
  std::optional<T> optional(const std::string& key) {
    used_.insert(key);
    if (!has(key)) {
      resolved_[key] = nullptr;
      return std::nullopt;
    }
    T v = convert<T>(key);
    resolved_[key] = v;
    return v;
  }

  /// Sub-object reader; absent keys read as an empty object.
  ConfigReader child(const std::string& key) {
    used_.insert(key);
    return ConfigReader(src_.contains(key) ? src_.at(key) : json::object(), where_ + "." + key);
  }

  /// Stores a finished child's resolved values.
  void put(const std::string& key, json value) {
    used_.insert(key);
    resolved_[key] = std::move(value);
  }

  /// Marks a key as consumed without recording it.
  void ignore(const std::string& key) { used_.insert(key); }

  const std::string& where() const noexcept { return where_; }

  json finish() const {
    for (const auto& [key, value] : src_.items()) {
      if (!used_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
    return resolved_.is_null() ? json::object() : resolved_;
  }

 private:
  template <class T>
  T convert(const std::string& key) const {
    const json& v = src_.at(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer()) throw ConfigError(where_ + "." + key + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return v.get<T>();
        if (v.get<std::int64_t>() < 0) throw ConfigError(where_ + "." + key + ": must be >= 0");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where_ + "." + key + ": expected a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where_ + "." + key + ": expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where_ + "." + key + ": expected a string");
    }
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  json src_;
  std::string where_;
  std::set<std::string> used_;
  json resolved_ = json::object();
};

}  // namespace fairflow
