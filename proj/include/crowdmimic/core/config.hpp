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

#pragma once

#include <map>
#include <string>
#include <vector>

namespace crowdmimic {

/// Key-value config file: `key = value` lines with dotted keys, optional
/// `[section]` headers acting as key prefixes, `#` comments. Values are
/// numbers, `true`/`false`, quoted or bare strings, or numeric lists
/// `[a, b, c]`. Accessors mark keys as consumed so callers can reject
/// unknown keys after reading everything they understand.
class Config {
 public:
  struct Value {
    enum class Kind { Num, Str, List };
    Kind kind = Kind::Num;
    double num = 0.0;
    std::string str;
    std::vector<double> list;
    int line = 0;
    mutable bool consumed = false;
  };

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& name);

  bool has(const std::string& key) const;

  double num(const std::string& key) const;
  double num_or(const std::string& key, double def) const;
  int int_or(const std::string& key, int def) const;
  bool flag_or(const std::string& key, bool def) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& def) const;
  std::vector<double> list(const std::string& key) const;

  /// Keys starting with `prefix`, in sorted order (not marked consumed).
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  void set_num(const std::string& key, double v);
  void set_str(const std::string& key, const std::string& v);
  void set_list(const std::string& key, const std::vector<double>& v);

  /// Throws ConfigError naming every key that was never consumed.
  void require_all_consumed() const;

  /// Deterministic text form (sorted keys); reparses to an equal config.
  std::string serialize() const;
  void save(const std::string& path) const;

  const std::string& name() const { return name_; }

 private:
  const Value& at(const std::string& key) const;

  std::string name_ = "<config>";
  std::map<std::string, Value> values_;
};

}  // namespace crowdmimic
