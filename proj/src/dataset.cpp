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

#include "protodisc/dataset.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "protodisc/errors.hpp"

namespace protodisc {

bool LabelSpace::is_known(const std::string& label) const { return known_index(label).has_value(); }

std::optional<std::size_t> LabelSpace::known_index(const std::string& label) const {
  const auto it = std::find(known_ids.begin(), known_ids.end(), label);
  if (it == known_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - known_ids.begin());
}

void LabelSpace::validate() const {
  if (known_ids.empty()) throw SchemaError("label space has no known categories");
  const std::set<std::string> known(known_ids.begin(), known_ids.end());
  if (known.size() != known_ids.size()) throw SchemaError("duplicate known category id");
  const std::set<std::string> novel(novel_ids.begin(), novel_ids.end());
  if (novel.size() != novel_ids.size()) throw SchemaError("duplicate novel category id");
  for (const auto& n : novel_ids) {
    if (known.contains(n)) {
      throw SchemaError("category '" + n + "' is both known and novel");
    }
  }
}

std::size_t Dataset::dim() const {
  if (!labeled.empty()) return labeled.front().x.dim();
  if (!unlabeled.empty()) return unlabeled.front().x.dim();
  if (!test.empty()) return test.front().x.dim();
  return 0;
}

void Dataset::validate() const {
  label_space.validate();
  const std::size_t d = dim();
  std::unordered_set<std::string> ids;
  auto check = [&](const std::string& id, const Vector& x, const char* split) {
    if (x.dim() != d) {
      throw SchemaError(std::string(split) + " row '" + id + "' has dim " +
                        std::to_string(x.dim()) + ", expected " + std::to_string(d));
    }
    if (!ids.insert(id).second) throw DuplicateIdError("duplicate instance id '" + id + "'");
  };
  for (const auto& r : labeled) {
    check(r.id, r.x, "labeled");
    if (r.label.empty() || r.label == "?") {
      throw MissingLabelError("labeled row '" + r.id + "' has no label");
    }
    if (!label_space.is_known(r.label)) {
      throw SchemaError("labeled row '" + r.id + "' has label '" + r.label +
                        "' outside the known categories");
    }
  }
  for (const auto& r : unlabeled) check(r.id, r.x, "unlabeled");
  for (const auto& r : test) check(r.id, r.x, "test");
  if (!unlabeled_truth.empty() && unlabeled_truth.size() != unlabeled.size()) {
    throw SchemaError("unlabeled truth sidecar is not aligned with unlabeled rows");
  }
}

std::vector<std::string> Dataset::warnings() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  bool any_truth = false;
  for (const auto& t : unlabeled_truth) {
    if (t) {
      any_truth = true;
      seen.insert(*t);
    }
  }
  if (!any_truth) return out;
  for (const auto& k : label_space.known_ids) {
    if (!seen.contains(k)) {
      out.push_back("known category '" + k + "' does not appear in the unlabeled ground truth");
    }
  }
  return out;
}

TrainingView Dataset::training_view() const {
  return TrainingView{labeled, unlabeled, label_space};
}

}  // namespace protodisc
