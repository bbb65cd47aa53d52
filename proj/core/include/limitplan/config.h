// Copyright 2026 The limitplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LIMITPLAN_CONFIG_H_
#define LIMITPLAN_CONFIG_H_

#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace limitplan {

// Line-oriented `key = value` configuration. `#` starts a comment. Keys may
// repeat; repeated entries keep their file order (track segments and
// obstacles rely on this).
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static absl::StatusOr<KeyValueConfig> Parse(absl::string_view text);
  static absl::StatusOr<KeyValueConfig> ReadFile(const std::string& path);

  // Directory of the file this config was read from, or empty. Relative file
  // references inside the config resolve against it.
  const std::string& base_dir() const { return base_dir_; }

  bool Has(absl::string_view key) const;

  // Last value for `key`.
  absl::StatusOr<std::string> GetString(absl::string_view key) const;
  absl::StatusOr<double> GetDouble(absl::string_view key) const;
  absl::StatusOr<int> GetInt(absl::string_view key) const;
  // Whitespace- or comma-separated list of numbers.
  absl::StatusOr<std::vector<double>> GetDoubles(absl::string_view key) const;

  std::string GetStringOr(absl::string_view key, std::string fallback) const;

  // Optional keys: leave `value` untouched when `key` is absent, fail when
  // it is present but malformed.
  absl::Status Read(absl::string_view key, double* value) const;
  absl::Status Read(absl::string_view key, int* value) const;
  absl::Status Read(absl::string_view key, bool* value) const;

  // Every value for `key`, in file order.
  std::vector<std::string> GetAll(absl::string_view key) const;

  void Add(std::string key, std::string value);
  // Replaces every existing value of `key`.
  void Set(std::string key, std::string value);

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  std::string Serialize() const;
  absl::Status WriteFile(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string base_dir_;
};

// Splits on whitespace and commas and parses every token as a double.
absl::StatusOr<std::vector<double>> ParseNumberList(absl::string_view text);

// Shortest round-trip decimal representation.
std::string FormatDouble(double value);

}  // namespace limitplan

#endif  // LIMITPLAN_CONFIG_H_
