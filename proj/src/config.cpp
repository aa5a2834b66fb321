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

#include "protodisc/config.hpp"

#include <fstream>

#include "protodisc/errors.hpp"
#include "protodisc/text.hpp"

namespace protodisc {

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "identity"; }

std::string to_string(CeHead h) { return h == CeHead::linear ? "linear" : "prototype"; }

void Config::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(tau > 0.0)) fail("tau must be > 0");
  if (!(gamma >= 0.0)) fail("gamma must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must lie in [0, 1]");
  if (!(learning_rate >= 0.0)) fail("learning_rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0, 1)");
  if (epochs < 0) fail("epochs must be >= 0");
  if (k.mode == KSetting::Mode::fixed && k.value < 1) fail("k must be >= 1");
  if (recluster_period < 0) fail("recluster_period must be >= 0");
  if (kmeans_max_iter < 1) fail("kmeans_max_iter must be >= 1");
  if (!(kmeans_tol >= 0.0)) fail("kmeans_tol must be >= 0");
  if (kmeans_restarts < 1) fail("kmeans_restarts must be >= 1");
  if (k_max < 0 || k_max == 1) fail("k_max must be 0 (auto) or >= 2");
  if (!(threshold_factor > 0.0 && threshold_factor < 1.0)) {
    fail("threshold_factor must lie in (0, 1)");
  }
  if (!(merge_factor >= 0.0)) fail("merge_factor must be >= 0");
}

void Config::set(std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  const std::string what(key);
  try {
    if (key == "tau")
      tau = parse_double(v, what);
    else if (key == "gamma")
      gamma = parse_double(v, what);
    else if (key == "alpha")
      alpha = parse_double(v, what);
    else if (key == "learning_rate" || key == "lr")
      learning_rate = parse_double(v, what);
    else if (key == "momentum")
      momentum = parse_double(v, what);
    else if (key == "epochs")
      epochs = static_cast<int>(parse_int(v, what));
    else if (key == "seed")
      seed = parse_u64(v, what);
    else if (key == "k") {
      if (v == "estimate")
        k = {KSetting::Mode::estimate, 0};
      else if (v == "auto" || v == "data")
        k = {KSetting::Mode::from_data, 0};
      else
        k = {KSetting::Mode::fixed, static_cast<int>(parse_int(v, what))};
    } else if (key == "no_ce")
      ablation.no_ce = parse_bool(v, what);
    else if (key == "no_ema")
      ablation.no_ema = parse_bool(v, what);
    else if (key == "no_decouple")
      ablation.no_decouple = parse_bool(v, what);
    else if (key == "no_soft_assignment")
      ablation.no_soft_assignment = parse_bool(v, what);
    else if (key == "no_semantic_weights")
      ablation.no_semantic_weights = parse_bool(v, what);
    else if (key == "activation") {
      if (v == "identity")
        activation = Activation::identity;
      else if (v == "tanh")
        activation = Activation::tanh;
      else
        throw ConfigError("activation must be identity or tanh");
    } else if (key == "ce_head") {
      if (v == "prototype")
        ce_head = CeHead::prototype;
      else if (v == "linear")
        ce_head = CeHead::linear;
      else
        throw ConfigError("ce_head must be prototype or linear");
    } else if (key == "detach_weights")
      detach_weights = parse_bool(v, what);
    else if (key == "recluster_period")
      recluster_period = static_cast<int>(parse_int(v, what));
    else if (key == "kmeans_max_iter")
      kmeans_max_iter = static_cast<int>(parse_int(v, what));
    else if (key == "kmeans_tol")
      kmeans_tol = parse_double(v, what);
    else if (key == "kmeans_restarts")
      kmeans_restarts = static_cast<int>(parse_int(v, what));
    else if (key == "k_max")
      k_max = static_cast<int>(parse_int(v, what));
    else if (key == "threshold_factor")
      threshold_factor = parse_double(v, what);
    else if (key == "merge_factor")
      merge_factor = parse_double(v, what);
    else if (key == "per_subset_mapping")
      per_subset_mapping = parse_bool(v, what);
    else
      throw ConfigError("unknown config key '" + what + "'");
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
}

std::map<std::string, std::string> Config::to_map() const {
  std::map<std::string, std::string> m;
  m["tau"] = format_double(tau);
  m["gamma"] = format_double(gamma);
  m["alpha"] = format_double(alpha);
  m["learning_rate"] = format_double(learning_rate);
  m["momentum"] = format_double(momentum);
  m["epochs"] = std::to_string(epochs);
  m["seed"] = std::to_string(seed);
  switch (k.mode) {
    case KSetting::Mode::from_data:
      m["k"] = "auto";
      break;
    case KSetting::Mode::estimate:
      m["k"] = "estimate";
      break;
    case KSetting::Mode::fixed:
      m["k"] = std::to_string(k.value);
      break;
  }
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  m["no_ce"] = b(ablation.no_ce);
  m["no_ema"] = b(ablation.no_ema);
  m["no_decouple"] = b(ablation.no_decouple);
  m["no_soft_assignment"] = b(ablation.no_soft_assignment);
  m["no_semantic_weights"] = b(ablation.no_semantic_weights);
  m["activation"] = to_string(activation);
  m["ce_head"] = to_string(ce_head);
  m["detach_weights"] = b(detach_weights);
  m["recluster_period"] = std::to_string(recluster_period);
  m["kmeans_max_iter"] = std::to_string(kmeans_max_iter);
  m["kmeans_tol"] = format_double(kmeans_tol);
  m["kmeans_restarts"] = std::to_string(kmeans_restarts);
  m["k_max"] = std::to_string(k_max);
  m["threshold_factor"] = format_double(threshold_factor);
  m["merge_factor"] = format_double(merge_factor);
  m["per_subset_mapping"] = b(per_subset_mapping);
  return m;
}

Config load_config_file(const std::filesystem::path& path, Config base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    base.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return base;
}

}  // namespace protodisc
