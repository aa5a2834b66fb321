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

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "protodisc/errors.hpp"
#include "test_util.hpp"

namespace protodisc {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(EmbeddingFileTest, ParsesRowsAndSentinel) {
  testing::TempDir dir("embed");
  write_text(dir.path() / "e.tsv", "dim=2 count=2\nx1\ta\t0.5\t-1\nx2\t?\t1e-3\t2\n");
  const auto f = EmbeddingFile::read(dir.path() / "e.tsv");
  EXPECT_EQ(f.dim, 2u);
  ASSERT_EQ(f.rows.size(), 2u);
  EXPECT_EQ(f.rows[0].label, "a");
  EXPECT_FALSE(f.rows[1].label.has_value());
  EXPECT_EQ(f.rows[1].x, Vector({1e-3, 2.0}));
}

TEST(EmbeddingFileTest, SchemaErrors) {
  testing::TempDir dir("embed_bad");
  auto expect = [&](const std::string& text, auto error_tag) {
    write_text(dir.path() / "e.tsv", text);
    EXPECT_THROW(EmbeddingFile::read(dir.path() / "e.tsv"), decltype(error_tag)) << text;
  };
  expect("", SchemaError(""));
  expect("dim=2\nx\ta\t1\t2\n", SchemaError(""));
  expect("dim=2 count=1\nx\ta\t1\n", SchemaError(""));
  expect("dim=2 count=1\nx\ta\t1\tnan\n", SchemaError(""));
  expect("dim=2 count=2\nx\ta\t1\t2\n", SchemaError(""));
  expect("dim=1 count=2\nx\ta\t1\nx\tb\t2\n", DuplicateIdError(""));
  EXPECT_THROW(EmbeddingFile::read(dir.path() / "absent.tsv"), IoError);
}

TEST(EmbeddingFileTest, ComponentSurvivesRoundTripBitExactly) {
  testing::TempDir dir("embed_rt");
  EmbeddingFile f;
  f.dim = 3;
  f.rows.push_back({"r0", "a", Vector{0.1, 1.0 / 3.0, -2.5e-300}});
  f.write(dir.path() / "e.tsv");
  const auto back = EmbeddingFile::read(dir.path() / "e.tsv");
  EXPECT_EQ(back.rows[0].x, f.rows[0].x);
  EXPECT_NE(read_text(dir.path() / "e.tsv").find("\t0.1\t"), std::string::npos);
}

struct SmallFiles {
  testing::TempDir dir{"small"};
  fs::path l = dir.path() / "l.tsv", u = dir.path() / "u.tsv", t = dir.path() / "t.tsv";
};

TEST(LoadDatasetTest, BuildsLabelSpace) {
  SmallFiles f;
  write_text(f.l, "dim=2 count=2\nl0\ta\t1\t0\nl1\tb\t0\t1\n");
  write_text(f.u, "dim=2 count=2\nu0\ta\t1\t0.1\nu1\tb\t0.1\t1\n");
  write_text(f.t, "dim=2 count=3\nt0\ta\t1\t0\nt1\tb\t0\t1\nt2\tc\t-1\t-1\n");
  const auto d = load_dataset(f.l, f.u, f.t);
  EXPECT_EQ(d.label_space.M(), 2u);
  EXPECT_EQ(d.label_space.K(), 3u);
  EXPECT_EQ(d.label_space.novel_ids, std::vector<std::string>{"c"});
  EXPECT_TRUE(d.warnings().empty());
}

TEST(LoadDatasetTest, WarnsOnKnownCategoryAbsentFromUnlabeled) {
  SmallFiles f;
  write_text(f.l, "dim=1 count=2\nl0\ta\t1\nl1\tb\t2\n");
  write_text(f.u, "dim=1 count=1\nu0\ta\t1\n");
  write_text(f.t, "dim=1 count=1\nt0\ta\t1\n");
  const auto w = load_dataset(f.l, f.u, f.t).warnings();
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("'b'"), std::string::npos);
}

TEST(LoadDatasetTest, Errors) {
  SmallFiles f;
  write_text(f.u, "dim=1 count=1\nu0\t?\t1\n");
  write_text(f.t, "dim=1 count=1\nt0\ta\t1\n");

  write_text(f.l, "dim=2 count=1\nl0\ta\t1\t2\n");
  EXPECT_THROW(load_dataset(f.l, f.u, f.t), SchemaError);

  write_text(f.l, "dim=1 count=1\nu0\ta\t1\n");
  EXPECT_THROW(load_dataset(f.l, f.u, f.t), DuplicateIdError);

  write_text(f.l, "dim=1 count=1\nl0\t?\t1\n");
  EXPECT_THROW(load_dataset(f.l, f.u, f.t), MissingLabelError);
}

TEST(TrainingViewTest, CarriesNoGroundTruth) {
  SynthSpec spec;
  spec.K_true = 3;
  spec.M = 2;
  spec.dim = 2;
  spec.per_class_count = 6;
  const auto d = generate_synthetic(spec);
  const TrainingView v = d.training_view();
  EXPECT_EQ(v.unlabeled.size(), d.unlabeled.size());
  EXPECT_EQ(v.label_space, d.label_space);
  // UnlabeledRow has only id and x; truth stays in the sidecar.
  EXPECT_EQ(d.unlabeled_truth.size(), d.unlabeled.size());
}

TEST(GenerateSyntheticTest, SplitCounts) {
  SynthSpec spec;
  spec.K_true = 4;
  spec.M = 2;
  spec.labeled_ratio = 0.5;
  spec.per_class_count = 10;
  const auto d = generate_synthetic(spec);
  EXPECT_EQ(d.labeled.size(), 10u);
  EXPECT_EQ(d.unlabeled.size(), 30u);
  EXPECT_EQ(d.test.size(), 40u);
  std::map<std::string, int> per_class;
  for (const auto& r : d.labeled) ++per_class[r.label];
  for (const auto& [label, n] : per_class) EXPECT_EQ(n, 5) << label;
}

TEST(GenerateSyntheticTest, KnownOnlyWhenMEqualsK) {
  SynthSpec spec;
  spec.K_true = 3;
  spec.M = 3;
  spec.per_class_count = 8;
  const auto d = generate_synthetic(spec);
  EXPECT_TRUE(d.label_space.novel_ids.empty());
  for (const auto& t : d.unlabeled_truth) EXPECT_TRUE(d.label_space.is_known(*t));
}

TEST(GenerateSyntheticTest, DeterministicAndSeedSensitive) {
  SynthSpec spec;
  spec.seed = 17;
  EXPECT_EQ(generate_synthetic(spec), generate_synthetic(spec));
  SynthSpec other = spec;
  other.seed = 18;
  EXPECT_FALSE(generate_synthetic(spec) == generate_synthetic(other));
}

TEST(GenerateSyntheticTest, PartitionAndCoverage) {
  for (bool random_known : {false, true}) {
    SynthSpec spec;
    spec.random_known = random_known;
    spec.seed = 4;
    const auto d = generate_synthetic(spec);
    std::set<std::string> ids;
    for (const auto& r : d.labeled) EXPECT_TRUE(ids.insert(r.id).second);
    for (const auto& r : d.unlabeled) EXPECT_TRUE(ids.insert(r.id).second);
    for (const auto& r : d.test) EXPECT_TRUE(ids.insert(r.id).second);
    std::set<std::string> unlabeled_known;
    for (const auto& t : d.unlabeled_truth) {
      if (d.label_space.is_known(*t)) unlabeled_known.insert(*t);
    }
    EXPECT_EQ(unlabeled_known.size(), d.label_space.M());
    EXPECT_TRUE(d.warnings().empty());
  }
}

TEST(GenerateSyntheticTest, CentersRespectSeparation) {
  SynthSpec spec;
  spec.cluster_std = 1e-3;
  spec.center_separation = 5.0;
  const auto d = generate_synthetic(spec);
  std::map<std::string, std::vector<Vector>> by_label;
  for (const auto& r : d.test) by_label[*r.label].push_back(r.x);
  std::vector<Vector> centers;
  for (const auto& [l, xs] : by_label) centers.push_back(mean(xs));
  for (std::size_t a = 0; a < centers.size(); ++a) {
    for (std::size_t b = a + 1; b < centers.size(); ++b) {
      EXPECT_GE(euclidean_distance(centers[a], centers[b]), 5.0 - 0.01);
    }
  }
}

TEST(GenerateSyntheticTest, ImpossibleSeparation) {
  SynthSpec spec;
  spec.dim = 1;
  spec.K_true = 8;
  spec.center_separation = 1e308;
  EXPECT_THROW(generate_synthetic(spec), SeparationError);
}

TEST(GenerateSyntheticTest, InvalidSpec) {
  SynthSpec spec;
  spec.M = 7;
  spec.K_true = 6;
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
  spec = {};
  spec.labeled_ratio = 1.0;
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
}

TEST(SaveDatasetTest, RoundTripAndManifest) {
  testing::TempDir dir("save");
  SynthSpec spec;
  spec.dim = 5;
  spec.seed = 2;
  const auto d = generate_synthetic(spec);
  const auto manifest_path = save_dataset(d, dir.path());
  EXPECT_EQ(manifest_path, dir.path() / kManifestName);
  EXPECT_EQ(load_dataset_dir(dir.path()), d);

  const auto m = DatasetManifest::read(manifest_path);
  EXPECT_EQ(m.labeled_count, d.labeled.size());
  EXPECT_EQ(m.unlabeled_count, d.unlabeled.size());
  EXPECT_EQ(m.test_count, d.test.size());
  EXPECT_EQ(m.dim, 5u);
  EXPECT_EQ(m.M, d.label_space.M());
}

TEST(SaveDatasetTest, ManifestCountMismatchIsDetected) {
  testing::TempDir dir("save_bad");
  SynthSpec spec;
  spec.per_class_count = 4;
  save_dataset(generate_synthetic(spec), dir.path());
  auto m = DatasetManifest::read(dir.path() / kManifestName);
  m.test_count += 1;
  m.write(dir.path() / kManifestName);
  EXPECT_THROW(load_dataset_dir(dir.path()), SchemaError);
}

TEST(SaveDatasetTest, SameSeedWritesIdenticalBytes) {
  testing::TempDir a("bytes_a"), b("bytes_b");
  SynthSpec spec;
  save_dataset(generate_synthetic(spec), a.path());
  save_dataset(generate_synthetic(spec), b.path());
  for (const char* name : {"labeled.tsv", "unlabeled.tsv", "test.tsv"}) {
    EXPECT_EQ(read_text(a.path() / name), read_text(b.path() / name)) << name;
  }
}

}  // namespace
}  // namespace protodisc
