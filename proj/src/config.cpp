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

#include "renyi/config.hpp"

#include <cmath>

namespace renyi::config {

Reader::Reader(nlohmann::json const &object, std::string context)
  : object_(object)
  , context_(std::move(context))
{
  if (!object_.is_object())
  {
    throw ConfigError("", context_ + ": expected a JSON object");
  }
}

bool Reader::has(std::string const &key) const { return object_.contains(key); }

nlohmann::json const &Reader::raw(std::string const &key)
{
  if (!object_.contains(key))
  {
    fail(key, "missing required key '" + key + "'");
  }
  used_.insert(key);
  return object_.at(key);
}

void Reader::fail(std::string const &key, std::string const &message) const
{
  throw ConfigError(key, context_ + ": " + message);
}

double Reader::number(std::string const &key, std::optional<double> fallback)
{
  if (!has(key) && fallback)
  {
    return *fallback;
  }
  auto const &v = raw(key);
  if (!v.is_number())
  {
    fail(key, "'" + key + "' must be a number");
  }
  return v.get<double>();
}

std::optional<double> Reader::optional_number(std::string const &key)
{
  if (!has(key) || object_.at(key).is_null())
  {
    used_.insert(key);
    return std::nullopt;
  }
  return number(key);
}

std::uint64_t Reader::count(std::string const &key, std::optional<std::uint64_t> fallback)
{
  if (!has(key) && fallback)
  {
    return *fallback;
  }
  auto const &v = raw(key);
  if (v.is_number_unsigned())
  {
    return v.get<std::uint64_t>();
  }
  if (v.is_number())
  {
    double const d = v.get<double>();
    if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d)
    {
      return static_cast<std::uint64_t>(d);
    }
  }
  fail(key, "'" + key + "' must be a non-negative integer");
}

std::string Reader::text(std::string const &key, std::optional<std::string> fallback)
{
  if (!has(key) && fallback)
  {
    return *fallback;
  }
  auto const &v = raw(key);
  if (!v.is_string())
  {
    fail(key, "'" + key + "' must be a string");
  }
  return v.get<std::string>();
}

bool Reader::flag(std::string const &key, bool fallback)
{
  if (!has(key))
  {
    return fallback;
  }
  auto const &v = raw(key);
  if (!v.is_boolean())
  {
    fail(key, "'" + key + "' must be true or false");
  }
  return v.get<bool>();
}

std::vector<double> Reader::numbers(std::string const &key, std::vector<double> fallback)
{
  if (!has(key))
  {
    return fallback;
  }
  auto const &v = raw(key);
  if (!v.is_array() || v.empty())
  {
    fail(key, "'" + key + "' must be a non-empty array of numbers");
  }
  std::vector<double> out;
  for (auto const &e : v)
  {
    if (!e.is_number())
    {
      fail(key, "'" + key + "' must contain numbers only");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::size_t> Reader::counts(std::string const &key, std::vector<std::size_t> fallback)
{
  if (!has(key))
  {
    return fallback;
  }
  std::vector<std::size_t> out;
  for (double d : numbers(key, {}))
  {
    if (!(d >= 1.0) || std::floor(d) != d || d > 1e12)
    {
      fail(key, "'" + key + "' must contain positive integers");
    }
    out.push_back(static_cast<std::size_t>(d));
  }
  return out;
}

void Reader::finish() const
{
  for (auto const &[key, value] : object_.items())
  {
    if (!used_.contains(key))
    {
      fail(key, "unknown key '" + key + "'");
    }
  }
}

std::size_t locate_key(std::string const &text, std::string const &key)
{
  auto const pos = text.find("\"" + key + "\"");
  if (key.empty() || pos == std::string::npos)
  {
    return 0;
  }
  return line_column(text, pos).first;
}

std::pair<std::size_t, std::size_t> line_column(std::string const &text, std::size_t offset)
{
  std::size_t line = 1;
  std::size_t col  = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
  {
    if (text[i] == '\n')
    {
      ++line;
      col = 1;
    }
    else
    {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace renyi::config
