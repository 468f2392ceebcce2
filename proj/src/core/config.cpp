// Copyright 2026 The Crowdmimic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crowdmimic/core/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "crowdmimic/core/error.hpp"

namespace crowdmimic {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& name) {
  Config cfg;
  cfg.name_ = name;
  std::istringstream in(text);
  std::string line;
  std::string prefix;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(name, lineno, "unterminated section header");
      prefix = trim(line.substr(1, line.size() - 2));
      if (!prefix.empty()) prefix += '.';
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(name, lineno, "expected `key = value`");
    std::string key = prefix + trim(line.substr(0, eq));
    std::string raw = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(name, lineno, "empty key");
    if (cfg.values_.count(key))
      throw ParseError(name, lineno, "duplicate key: " + key);

    Value v;
    v.line = lineno;
    if (!raw.empty() && raw.front() == '[') {
      if (raw.back() != ']')
        throw ParseError(name, lineno, "unterminated list value");
      v.kind = Value::Kind::List;
      std::string body = raw.substr(1, raw.size() - 2);
      std::istringstream items(body);
      std::string item;
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ParseError(name, lineno, "empty list element");
        double d;
        if (!parse_number(item, d))
          throw ParseError(name, lineno, "non-numeric list element: " + item);
        v.list.push_back(d);
      }
    } else if (raw == "true" || raw == "false") {
      v.kind = Value::Kind::Num;
      v.num = raw == "true" ? 1.0 : 0.0;
    } else if (double d; parse_number(raw, d)) {
      v.kind = Value::Kind::Num;
      v.num = d;
    } else {
      v.kind = Value::Kind::Str;
      if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
        raw = raw.substr(1, raw.size() - 2);
      v.str = raw;
    }
    cfg.values_.emplace(std::move(key), std::move(v));
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const Config::Value& Config::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(name_ + ": missing required key: " + key);
  it->second.consumed = true;
  return it->second;
}

double Config::num(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind != Value::Kind::Num)
    throw ConfigError(name_ + ": key is not a number: " + key);
  return v.num;
}

double Config::num_or(const std::string& key, double def) const {
  return has(key) ? num(key) : def;
}

int Config::int_or(const std::string& key, int def) const {
  double v = num_or(key, def);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError(name_ + ": key is not an integer: " + key);
  return i;
}

bool Config::flag_or(const std::string& key, bool def) const {
  return num_or(key, def ? 1.0 : 0.0) != 0.0;
}

std::string Config::str(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind != Value::Kind::Str)
    throw ConfigError(name_ + ": key is not a string: " + key);
  return v.str;
}

std::string Config::str_or(const std::string& key, const std::string& def) const {
  return has(key) ? str(key) : def;
}

std::vector<double> Config::list(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind != Value::Kind::List)
    throw ConfigError(name_ + ": key is not a list: " + key);
  return v.list;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

void Config::set_num(const std::string& key, double v) {
  Value val;
  val.kind = Value::Kind::Num;
  val.num = v;
  values_[key] = val;
}

void Config::set_str(const std::string& key, const std::string& v) {
  Value val;
  val.kind = Value::Kind::Str;
  val.str = v;
  values_[key] = val;
}

void Config::set_list(const std::string& key, const std::vector<double>& v) {
  Value val;
  val.kind = Value::Kind::List;
  val.list = v;
  values_[key] = val;
}

void Config::require_all_consumed() const {
  std::string unknown;
  for (const auto& [k, v] : values_) {
    if (!v.consumed) {
      if (!unknown.empty()) unknown += ", ";
      unknown += k;
    }
  }
  if (!unknown.empty())
    throw ConfigError(name_ + ": unknown keys: " + unknown);
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += " = ";
    switch (v.kind) {
      case Value::Kind::Num:
        out += format_number(v.num);
        break;
      case Value::Kind::Str:
        out += '"' + v.str + '"';
        break;
      case Value::Kind::List: {
        out += '[';
        for (std::size_t i = 0; i < v.list.size(); ++i) {
          if (i) out += ", ";
          out += format_number(v.list[i]);
        }
        out += ']';
        break;
      }
    }
    out += '\n';
  }
  return out;
}

void Config::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file: " + path);
  out << serialize();
  if (!out) throw IoError("failed writing config file: " + path);
}

}  // namespace crowdmimic
