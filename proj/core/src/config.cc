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

#include "limitplan/config.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"

namespace limitplan {

absl::StatusOr<KeyValueConfig> KeyValueConfig::Parse(absl::string_view text) {
  KeyValueConfig config;
  int line_number = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_number;
    if (const auto hash = line.find('#'); hash != absl::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": expected `key = value`"));
    }
    std::string key(absl::StripAsciiWhitespace(line.substr(0, eq)));
    std::string value(absl::StripAsciiWhitespace(line.substr(eq + 1)));
    if (key.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": empty key"));
    }
    config.entries_.emplace_back(std::move(key), std::move(value));
  }
  return config;
}

absl::StatusOr<KeyValueConfig> KeyValueConfig::ReadFile(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open config ", path));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto config = Parse(buffer.str());
  if (!config.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", config.status().message()));
  }
  config->base_dir_ = std::filesystem::path(path).parent_path().string();
  return config;
}

bool KeyValueConfig::Has(absl::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

absl::StatusOr<std::string> KeyValueConfig::GetString(
    absl::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == key) return it->second;
  }
  return absl::NotFoundError(absl::StrCat("missing key `", key, "`"));
}

absl::StatusOr<double> KeyValueConfig::GetDouble(absl::string_view key) const {
  auto text = GetString(key);
  if (!text.ok()) return text.status();
  double value = 0.0;
  if (!absl::SimpleAtod(*text, &value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("key `", key, "`: not a number: ", *text));
  }
  return value;
}

absl::StatusOr<int> KeyValueConfig::GetInt(absl::string_view key) const {
  auto text = GetString(key);
  if (!text.ok()) return text.status();
  int value = 0;
  if (!absl::SimpleAtoi(*text, &value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("key `", key, "`: not an integer: ", *text));
  }
  return value;
}

absl::StatusOr<std::vector<double>> KeyValueConfig::GetDoubles(
    absl::string_view key) const {
  auto text = GetString(key);
  if (!text.ok()) return text.status();
  auto values = ParseNumberList(*text);
  if (!values.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("key `", key, "`: ", values.status().message()));
  }
  return values;
}

std::string KeyValueConfig::GetStringOr(absl::string_view key,
                                        std::string fallback) const {
  auto value = GetString(key);
  return value.ok() ? *value : fallback;
}

absl::Status KeyValueConfig::Read(absl::string_view key, double* value) const {
  if (!Has(key)) return absl::OkStatus();
  auto v = GetDouble(key);
  if (!v.ok()) return v.status();
  *value = *v;
  return absl::OkStatus();
}

absl::Status KeyValueConfig::Read(absl::string_view key, int* value) const {
  if (!Has(key)) return absl::OkStatus();
  auto v = GetInt(key);
  if (!v.ok()) return v.status();
  *value = *v;
  return absl::OkStatus();
}

absl::Status KeyValueConfig::Read(absl::string_view key, bool* value) const {
  if (!Has(key)) return absl::OkStatus();
  const std::string text = *GetString(key);
  if (!absl::SimpleAtob(text, value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("key `", key, "`: not a boolean: ", text));
  }
  return absl::OkStatus();
}

std::vector<std::string> KeyValueConfig::GetAll(absl::string_view key) const {
  std::vector<std::string> values;
  for (const auto& [k, v] : entries_) {
    if (k == key) values.push_back(v);
  }
  return values;
}

void KeyValueConfig::Add(std::string key, std::string value) {
  entries_.emplace_back(std::move(key), std::move(value));
}

void KeyValueConfig::Set(std::string key, std::string value) {
  std::erase_if(entries_, [&](const auto& e) { return e.first == key; });
  entries_.emplace_back(std::move(key), std::move(value));
}

std::string KeyValueConfig::Serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) absl::StrAppend(&out, k, " = ", v, "\n");
  return out;
}

absl::Status KeyValueConfig::WriteFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << Serialize();
  return out.good() ? absl::OkStatus()
                    : absl::DataLossError(absl::StrCat("short write ", path));
}

absl::StatusOr<std::vector<double>> ParseNumberList(absl::string_view text) {
  std::vector<double> values;
  for (absl::string_view token :
       absl::StrSplit(text, absl::ByAnyChar(" \t,"), absl::SkipEmpty())) {
    double value = 0.0;
    if (!absl::SimpleAtod(token, &value)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad number `", token, "`"));
    }
    values.push_back(value);
  }
  return values;
}

std::string FormatDouble(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

}  // namespace limitplan
