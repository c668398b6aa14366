// Copyright 2026 The instreg Authors
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

#include <set>
#include <string>

#include <json.hpp>

#include "instreg/error.hpp"

namespace instreg::detail {

using nlohmann::json;

/// Reads known keys out of a JSON object and rejects the rest.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw Error(ErrorCode::ConfigError, path_ + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& field) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      field = it->template get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::ConfigError, path_ + "." + key + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw Error(ErrorCode::ConfigError, "unknown key " + path_ + "." + key);
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_section(Section& parent, const char* key, const std::string& path, Fn fn) {
  if (const json* j = parent.child(key)) {
    Section s(*j, path + "." + key);
    fn(s);
    s.finish();
  }
}

}  // namespace instreg::detail
