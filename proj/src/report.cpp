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

#include "renyi/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace renyi::experiments {

namespace {

nlohmann::json number_json(double v)
{
  if (std::isfinite(v))
  {
    return v;
  }
  if (std::isnan(v))
  {
    return "nan";
  }
  return v > 0 ? "inf" : "-inf";
}

std::string number_text(double v)
{
  if (std::isnan(v))
  {
    return "nan";
  }
  if (std::isinf(v))
  {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(std::filesystem::path const &path, std::string const &content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("cannot write " + path.string());
  }
  out << content;
  if (!out)
  {
    throw Error("write failed for " + path.string());
  }
}

}  // namespace

nlohmann::json Verdict::to_json() const
{
  return {{"criterion", criterion},
          {"pass", pass},
          {"measured", number_json(measured)},
          {"expected", expected}};
}

void Record::set(std::string const &name, double value)
{
  for (auto &[k, v] : values)
  {
    if (k == name)
    {
      v = value;
      return;
    }
  }
  values.emplace_back(name, value);
}

double Record::get(std::string const &name) const
{
  for (auto const &[k, v] : values)
  {
    if (k == name)
    {
      return v;
    }
  }
  throw Error("record has no value '" + name + "'");
}

bool ExperimentReport::passed() const
{
  return std::all_of(verdicts.begin(), verdicts.end(), [](Verdict const &v) { return v.pass; });
}

Verdict const *ExperimentReport::verdict(std::string const &criterion) const
{
  for (auto const &v : verdicts)
  {
    if (v.criterion == criterion)
    {
      return &v;
    }
  }
  return nullptr;
}

void ExperimentReport::sort_records()
{
  std::stable_sort(records.begin(), records.end(), [](Record const &a, Record const &b) {
    if (a.n != b.n)
    {
      return a.n < b.n;
    }
    if (a.label != b.label)
    {
      return a.label < b.label;
    }
    return a.seed.value_or(0) < b.seed.value_or(0);
  });
}

nlohmann::json ExperimentReport::to_json() const
{
  nlohmann::json j;
  j["experiment"] = experiment;
  j["config"]     = config;
  j["records"]    = nlohmann::json::array();
  for (auto const &r : records)
  {
    nlohmann::json row;
    row["label"] = r.label;
    row["n"]     = r.n;
    row["seed"]  = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
    for (auto const &[k, v] : r.values)
    {
      row[k] = number_json(v);
    }
    j["records"].push_back(row);
  }
  j["summary"]  = summary;
  j["verdicts"] = nlohmann::json::array();
  for (auto const &v : verdicts)
  {
    j["verdicts"].push_back(v.to_json());
  }
  j["passed"]          = passed();
  j["runtime_seconds"] = runtime_seconds;
  return j;
}

std::string ExperimentReport::to_csv() const
{
  std::vector<std::string> columns;
  std::set<std::string> seen;
  for (auto const &r : records)
  {
    for (auto const &[k, v] : r.values)
    {
      if (seen.insert(k).second)
      {
        columns.push_back(k);
      }
    }
  }
  std::string out = "# schema=1\nlabel,n,seed";
  for (auto const &c : columns)
  {
    out += "," + c;
  }
  out += "\n";
  for (auto const &r : records)
  {
    out += r.label + "," + std::to_string(r.n) + ",";
    if (r.seed)
    {
      out += std::to_string(*r.seed);
    }
    for (auto const &c : columns)
    {
      out += ",";
      auto it = std::find_if(r.values.begin(), r.values.end(),
                             [&](auto const &kv) { return kv.first == c; });
      if (it != r.values.end())
      {
        out += number_text(it->second);
      }
    }
    out += "\n";
  }
  return out;
}

std::string ExperimentReport::grid_csv() const
{
  std::string out = "# schema=1\n";
  for (std::size_t i = 0; i < grid_columns.size(); ++i)
  {
    out += (i ? "," : "") + grid_columns[i];
  }
  out += "\n";
  for (auto const &row : grid)
  {
    for (std::size_t i = 0; i < row.size(); ++i)
    {
      out += (i ? "," : "") + number_text(row[i]);
    }
    out += "\n";
  }
  return out;
}

std::filesystem::path write_report(ExperimentReport const &report, std::filesystem::path const &root,
                                   std::string const &timestamp, std::uint64_t seed)
{
  auto const dir = root / (report.experiment + "_" + timestamp + "_" + std::to_string(seed));
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", report.to_json().dump(2) + "\n");
  write_file(dir / "report.csv", report.to_csv());
  if (!report.grid.empty())
  {
    write_file(dir / "grid.csv", report.grid_csv());
  }
  return dir;
}

}  // namespace renyi::experiments
