// Copyright 2026 The protodisc Authors
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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace protodisc {

struct AblationFlags {
  bool no_ce = false;
  bool no_ema = false;
  bool no_decouple = false;
  bool no_soft_assignment = false;
  bool no_semantic_weights = false;

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

enum class Activation { identity, tanh };
enum class CeHead { prototype, linear };

// How the category count K is obtained for training and evaluation.
struct KSetting {
  enum class Mode { from_data, fixed, estimate };
  Mode mode = Mode::from_data;
  int value = 0;  // meaningful when mode == fixed

  friend bool operator==(const KSetting&, const KSetting&) = default;
};

// Every tunable of a run. Defaults are the documented built-in values; a
// config file overrides them and CLI flags override the file.
struct Config {
  double tau = 0.07;
  double gamma = 10.0;
  double alpha = 0.9;
  double learning_rate = 1e-2;
  double momentum = 0.0;
  int epochs = 30;
  std::uint64_t seed = 1;
  KSetting k;
  AblationFlags ablation;

  Activation activation = Activation::identity;
  CeHead ce_head = CeHead::prototype;
  bool detach_weights = false;
  // Re-cluster, re-match and re-decouple every N epochs; 0 keeps the
  // initial decoupling for the whole run.
  int recluster_period = 0;

  int kmeans_max_iter = 300;
  double kmeans_tol = 1e-6;
  int kmeans_restarts = 4;

  int k_max = 0;  // 0: max(8, 4 * known category count), capped at the unlabeled count
  double threshold_factor = 0.5;
  double merge_factor = 4.0;

  bool per_subset_mapping = false;

  // Throws ConfigError on any out-of-range value.
  void validate() const;

  // Assigns one key from its textual form. Keys use snake_case field names
  // (`learning_rate`, `no_ce`, `k` = integer or "estimate" / "auto").
  void set(std::string_view key, std::string_view value);

  // Flat key=value listing of every field, stable order.
  std::map<std::string, std::string> to_map() const;

  friend bool operator==(const Config&, const Config&) = default;
};

// Reads `key = value` lines; blank lines and `#` comments are ignored.
Config load_config_file(const std::filesystem::path& path, Config base = {});

std::string to_string(Activation a);
std::string to_string(CeHead h);

}  // namespace protodisc
