//------------------------------------------------------------------------------
//
//   Copyright 2026 The renyi-vi Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
#pragma once

#include "renyi/numerics.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace renyi::config {

/// A rejected configuration value; `key` names the offending entry.
class ConfigError : public Error
{
public:
  ConfigError(std::string key, std::string const &what)
    : Error(what)
    , key_(std::move(key))
  {}
  std::string const &key() const { return key_; }

private:
  std::string key_;
};

/// Typed reads from a JSON object that remember which keys were consumed.
class Reader
{
public:
  Reader(nlohmann::json const &object, std::string context);

  bool has(std::string const &key) const;
  nlohmann::json const &raw(std::string const &key);

  double number(std::string const &key, std::optional<double> fallback = std::nullopt);
  std::optional<double> optional_number(std::string const &key);
  std::uint64_t count(std::string const &key, std::optional<std::uint64_t> fallback = std::nullopt);
  std::string text(std::string const &key, std::optional<std::string> fallback = std::nullopt);
  bool flag(std::string const &key, bool fallback);
  std::vector<double> numbers(std::string const &key, std::vector<double> fallback);
  std::vector<std::size_t> counts(std::string const &key, std::vector<std::size_t> fallback);

  /// Throws ConfigError naming the first key that was never read.
  void finish() const;

  [[noreturn]] void fail(std::string const &key, std::string const &message) const;

private:
  nlohmann::json const &object_;
  std::string context_;
  std::set<std::string> used_;
};

/// 1-based line of the first occurrence of `"key"` in `text`; 0 when absent.
std::size_t locate_key(std::string const &text, std::string const &key);

/// Line and column of a byte offset.
std::pair<std::size_t, std::size_t> line_column(std::string const &text, std::size_t offset);

}  // namespace renyi::config
