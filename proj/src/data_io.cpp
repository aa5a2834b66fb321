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

#include "protodisc/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "protodisc/errors.hpp"
#include "protodisc/rng.hpp"
#include "protodisc/text.hpp"

namespace fs = std::filesystem;

namespace protodisc {

namespace {

constexpr std::string_view kUnknownLabel = "?";
constexpr int kMaxCenterAttempts = 10'000;

std::string where(const fs::path& p, std::size_t line) {
  return p.string() + ":" + std::to_string(line);
}

void check_stream(const std::ofstream& out, const fs::path& path) {
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

EmbeddingFile EmbeddingFile::read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": missing header");
  std::optional<std::size_t> dim, count;
  for (auto tok : split(trim(line), ' ')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) throw SchemaError(where(path, 1) + ": bad header token");
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    if (key == "dim")
      dim = static_cast<std::size_t>(parse_int(val, "dim"));
    else if (key == "count")
      count = static_cast<std::size_t>(parse_int(val, "count"));
    else
      throw SchemaError(where(path, 1) + ": unknown header key");
  }
  if (!dim || !count || *dim == 0) {
    throw SchemaError(where(path, 1) + ": header must be 'dim=<d> count=<n>'");
  }

  EmbeddingFile file;
  file.dim = *dim;
  file.rows.reserve(*count);
  std::unordered_set<std::string> ids;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != file.dim + 2) {
      throw SchemaError(where(path, lineno) + ": expected " + std::to_string(file.dim) +
                        " components, got " +
                        std::to_string(fields.size() < 2 ? 0 : fields.size() - 2));
    }
    EmbeddingRow row;
    row.id = std::string(fields[0]);
    if (row.id.empty()) throw SchemaError(where(path, lineno) + ": empty id");
    if (fields[1] != kUnknownLabel) row.label = std::string(fields[1]);
    std::vector<double> values(file.dim);
    for (std::size_t i = 0; i < file.dim; ++i) {
      values[i] = parse_double(fields[i + 2], where(path, lineno) + " component");
    }
    row.x = Vector(std::move(values));
    if (!ids.insert(row.id).second) {
      throw DuplicateIdError(where(path, lineno) + ": duplicate id '" + row.id + "'");
    }
    file.rows.push_back(std::move(row));
  }
  if (file.rows.size() != *count) {
    throw SchemaError(path.string() + ": header count " + std::to_string(*count) + " but " +
                      std::to_string(file.rows.size()) + " rows");
  }
  return file;
}

void EmbeddingFile::write(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out << "dim=" << dim << " count=" << rows.size() << '\n';
  for (const auto& r : rows) {
    out << r.id << '\t' << (r.label ? *r.label : std::string(kUnknownLabel));
    for (double v : r.x) out << '\t' << format_double(v);
    out << '\n';
  }
  out.flush();
  check_stream(out, path);
}

Dataset load_dataset(const fs::path& labeled_file, const fs::path& unlabeled_file,
                     const fs::path& test_file) {
  const auto lab = EmbeddingFile::read(labeled_file);
  const auto unl = EmbeddingFile::read(unlabeled_file);
  const auto tst = EmbeddingFile::read(test_file);
  if (lab.dim != unl.dim || lab.dim != tst.dim) {
    throw SchemaError("embedding files disagree on dim: " + std::to_string(lab.dim) + ", " +
                      std::to_string(unl.dim) + ", " + std::to_string(tst.dim));
  }

  Dataset d;
  std::set<std::string> known;
  for (const auto& r : lab.rows) {
    if (!r.label) {
      throw MissingLabelError(labeled_file.string() + ": row '" + r.id + "' has the '?' label");
    }
    known.insert(*r.label);
    d.labeled.push_back({r.id, r.x, *r.label});
  }
  std::set<std::string> novel;
  for (const auto& r : unl.rows) {
    d.unlabeled.push_back({r.id, r.x});
    d.unlabeled_truth.push_back(r.label);
    if (r.label && !known.contains(*r.label)) novel.insert(*r.label);
  }
  for (const auto& r : tst.rows) {
    d.test.push_back({r.id, r.x, r.label});
    if (r.label && !known.contains(*r.label)) novel.insert(*r.label);
  }
  d.label_space.known_ids.assign(known.begin(), known.end());
  d.label_space.novel_ids.assign(novel.begin(), novel.end());
  d.validate();
  return d;
}

DatasetManifest DatasetManifest::read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw SchemaError(path.string() + ": expected key=value");
    kv[std::string(trim(s.substr(0, eq)))] = std::string(trim(s.substr(eq + 1)));
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw SchemaError(path.string() + ": missing key '" + key + "'");
    return it->second;
  };
  DatasetManifest m;
  const auto base = path.parent_path();
  m.labeled = base / need("labeled");
  m.unlabeled = base / need("unlabeled");
  m.test = base / need("test");
  m.dim = static_cast<std::size_t>(parse_int(need("dim"), "dim"));
  m.M = static_cast<std::size_t>(parse_int(need("M"), "M"));
  if (auto it = kv.find("K"); it != kv.end() && it->second != "?") {
    m.K = static_cast<std::size_t>(parse_int(it->second, "K"));
  }
  m.labeled_count = static_cast<std::size_t>(parse_int(need("labeled_count"), "count"));
  m.unlabeled_count = static_cast<std::size_t>(parse_int(need("unlabeled_count"), "count"));
  m.test_count = static_cast<std::size_t>(parse_int(need("test_count"), "count"));
  return m;
}

void DatasetManifest::write(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out << "# protodisc dataset manifest\n"
      << "labeled=" << labeled.filename().string() << '\n'
      << "unlabeled=" << unlabeled.filename().string() << '\n'
      << "test=" << test.filename().string() << '\n'
      << "dim=" << dim << '\n'
      << "M=" << M << '\n'
      << "K=" << (K ? std::to_string(*K) : std::string("?")) << '\n'
      << "labeled_count=" << labeled_count << '\n'
      << "unlabeled_count=" << unlabeled_count << '\n'
      << "test_count=" << test_count << '\n';
  out.flush();
  check_stream(out, path);
}

Dataset load_dataset_dir(const fs::path& directory) {
  const auto manifest_path = directory / kManifestName;
  const auto m = DatasetManifest::read(manifest_path);
  Dataset d = load_dataset(m.labeled, m.unlabeled, m.test);
  auto mismatch = [&](const std::string& what, std::size_t recorded, std::size_t actual) {
    if (recorded != actual) {
      throw SchemaError(manifest_path.string() + ": " + what + " recorded as " +
                        std::to_string(recorded) + " but files give " + std::to_string(actual));
    }
  };
  mismatch("labeled_count", m.labeled_count, d.labeled.size());
  mismatch("unlabeled_count", m.unlabeled_count, d.unlabeled.size());
  mismatch("test_count", m.test_count, d.test.size());
  mismatch("dim", m.dim, d.dim());
  mismatch("M", m.M, d.label_space.M());
  return d;
}

fs::path save_dataset(const Dataset& d, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError("cannot create directory " + directory.string() + ": " + ec.message());

  EmbeddingFile lab{d.dim(), {}}, unl{d.dim(), {}}, tst{d.dim(), {}};
  for (const auto& r : d.labeled) lab.rows.push_back({r.id, r.label, r.x});
  for (std::size_t i = 0; i < d.unlabeled.size(); ++i) {
    std::optional<std::string> truth;
    if (i < d.unlabeled_truth.size()) truth = d.unlabeled_truth[i];
    unl.rows.push_back({d.unlabeled[i].id, truth, d.unlabeled[i].x});
  }
  for (const auto& r : d.test) tst.rows.push_back({r.id, r.label, r.x});

  DatasetManifest m;
  m.labeled = directory / "labeled.tsv";
  m.unlabeled = directory / "unlabeled.tsv";
  m.test = directory / "test.tsv";
  m.dim = d.dim();
  m.M = d.label_space.M();
  m.K = d.label_space.K();
  m.labeled_count = d.labeled.size();
  m.unlabeled_count = d.unlabeled.size();
  m.test_count = d.test.size();

  lab.write(m.labeled);
  unl.write(m.unlabeled);
  tst.write(m.test);
  const auto manifest_path = directory / kManifestName;
  m.write(manifest_path);
  return manifest_path;
}

void SynthSpec::validate() const {
  if (K_true < 1) throw ConfigError("K_true must be >= 1");
  if (M < 1 || M > K_true) throw ConfigError("known count M must satisfy 1 <= M <= K_true");
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (per_class_count < 2) throw ConfigError("per_class_count must be >= 2");
  if (test_per_class < 0) throw ConfigError("test_per_class must be >= 0");
  if (!(cluster_std > 0.0)) throw ConfigError("cluster_std must be > 0");
  if (!(center_separation > 0.0)) throw ConfigError("center_separation must be > 0");
  if (!(labeled_ratio > 0.0 && labeled_ratio < 1.0)) {
    throw ConfigError("labeled_ratio must lie in (0, 1)");
  }
}

namespace {

std::vector<Vector> draw_centers(const SynthSpec& spec, Rng& rng) {
  // Box wide enough that sequential rejection rarely fails.
  const double half_width =
      spec.center_separation * std::max(1.0, std::pow(spec.K_true, 1.0 / spec.dim));
  const double min_sq = spec.center_separation * spec.center_separation;
  if (!std::isfinite(2.0 * half_width) || !std::isfinite(min_sq)) {
    throw SeparationError("center separation " + format_double(spec.center_separation) +
                          " is too large to place centers");
  }
  std::vector<Vector> centers;
  int attempts = 0;
  while (static_cast<int>(centers.size()) < spec.K_true) {
    if (++attempts > kMaxCenterAttempts) {
      throw SeparationError("could not place " + std::to_string(spec.K_true) +
                            " centers with separation " + format_double(spec.center_separation) +
                            " in " + std::to_string(kMaxCenterAttempts) + " attempts");
    }
    std::vector<double> c(spec.dim);
    for (double& v : c) v = rng.uniform(-half_width, half_width);
    Vector candidate(std::move(c));
    const bool ok = std::all_of(centers.begin(), centers.end(), [&](const Vector& o) {
      return squared_distance(o, candidate) >= min_sq;
    });
    if (ok) centers.push_back(std::move(candidate));
  }
  return centers;
}

Vector sample_point(const Vector& center, double std_dev, Rng& rng) {
  std::vector<double> p(center.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = center[i] + std_dev * rng.normal();
  return Vector(std::move(p));
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

std::string padded(const char* prefix, std::size_t i, std::size_t upper) {
  const auto width = std::to_string(upper == 0 ? 0 : upper - 1).size();
  std::string n = std::to_string(i);
  return prefix + std::string(width - std::min(width, n.size()), '0') + n;
}

}  // namespace

Dataset generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  auto center_rng = Rng::stream(spec.seed, "synth/centers");
  auto point_rng = Rng::stream(spec.seed, "synth/points");
  auto known_rng = Rng::stream(spec.seed, "synth/known");
  auto order_rng = Rng::stream(spec.seed, "synth/order");

  const auto K = static_cast<std::size_t>(spec.K_true);
  const auto centers = draw_centers(spec, center_rng);

  std::vector<std::string> names(K);
  for (std::size_t c = 0; c < K; ++c) names[c] = padded("cat", c, K);

  std::vector<std::size_t> order(K);
  for (std::size_t c = 0; c < K; ++c) order[c] = c;
  if (spec.random_known) shuffle(order, known_rng);
  std::vector<bool> is_known(K, false);
  for (int i = 0; i < spec.M; ++i) is_known[order[i]] = true;

  const int n_test = spec.test_per_class > 0 ? spec.test_per_class : spec.per_class_count;
  const int n_labeled =
      std::clamp(static_cast<int>(std::lround(spec.labeled_ratio * spec.per_class_count)), 1,
                 spec.per_class_count - 1);

  struct Pending {
    Vector x;
    std::size_t category;
  };
  std::vector<Pending> labeled, unlabeled, test;
  for (std::size_t c = 0; c < K; ++c) {
    for (int i = 0; i < spec.per_class_count; ++i) {
      Pending p{sample_point(centers[c], spec.cluster_std, point_rng), c};
      if (is_known[c] && i < n_labeled)
        labeled.push_back(std::move(p));
      else
        unlabeled.push_back(std::move(p));
    }
    for (int i = 0; i < n_test; ++i) {
      test.push_back({sample_point(centers[c], spec.cluster_std, point_rng), c});
    }
  }
  shuffle(unlabeled, order_rng);
  shuffle(test, order_rng);

  Dataset d;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    d.labeled.push_back({padded("l", i, labeled.size()), labeled[i].x, names[labeled[i].category]});
  }
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    d.unlabeled.push_back({padded("u", i, unlabeled.size()), unlabeled[i].x});
    d.unlabeled_truth.emplace_back(names[unlabeled[i].category]);
  }
  for (std::size_t i = 0; i < test.size(); ++i) {
    d.test.push_back({padded("t", i, test.size()), test[i].x, names[test[i].category]});
  }
  for (std::size_t c = 0; c < K; ++c) {
    (is_known[c] ? d.label_space.known_ids : d.label_space.novel_ids).push_back(names[c]);
  }
  d.validate();
  return d;
}

}  // namespace protodisc
