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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "protodisc/cli.hpp"
#include "test_util.hpp"

namespace protodisc {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "protodisc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> small_gen(const fs::path& out) {
  return {"generate",    "--k", "4",      "--known", "2",     "--dim",     "4",
          "--per-class", "15",  "--seed", "3",       "--out", out.string()};
}

TEST(CliTest, GenerateTrainEval) {
  testing::TempDir tmp("cli");
  const auto data = tmp.path() / "data";
  auto g = run(small_gen(data));
  ASSERT_EQ(g.code, kExitOk) << g.err;
  for (const char* f :
       {"labeled.tsv", "unlabeled.tsv", "test.tsv", "manifest.txt", kRunManifestName}) {
    EXPECT_TRUE(fs::exists(data / f)) << f;
  }
  EXPECT_FALSE(fs::exists(data / ".lock"));

  const auto model = tmp.path() / "model";
  auto t = run({"train", "--data", data.string(), "--epochs", "3", "--out", model.string()});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  EXPECT_TRUE(fs::exists(model / "checkpoint.txt"));
  EXPECT_TRUE(fs::exists(model / "config.txt"));
  EXPECT_NE(slurp(model / "config.txt").find("epochs = 3"), std::string::npos);
  const auto trace = slurp(model / "loss_trace.tsv");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 4);
  EXPECT_NE(slurp(model / kRunManifestName).find("finished_at"), std::string::npos);

  const auto ev = tmp.path() / "eval";
  auto e = run({"eval", "--data", data.string(), "--checkpoint",
                (model / "checkpoint.txt").string(), "--estimate-k", "--out", ev.string()});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  for (const char* f : {"metrics.tsv", "report.txt", "confusion.tsv", "prototype_distances.tsv"}) {
    EXPECT_TRUE(fs::exists(ev / f)) << f;
  }
  EXPECT_NE(slurp(ev / "metrics.tsv").find("estimated_K"), std::string::npos);
  EXPECT_NE(e.out.find("Evaluation report"), std::string::npos);

  auto k = run({"estimate-k", "--data", data.string(), "--k-max", "8", "--out",
                (tmp.path() / "est").string()});
  ASSERT_EQ(k.code, kExitOk) << k.err;
  EXPECT_EQ(k.out, "4\n");
}

TEST(CliTest, RegenerationIsByteIdentical) {
  testing::TempDir tmp("cli");
  ASSERT_EQ(run(small_gen(tmp.path() / "a")).code, kExitOk);
  ASSERT_EQ(run(small_gen(tmp.path() / "b")).code, kExitOk);
  for (const char* f : {"labeled.tsv", "unlabeled.tsv", "test.tsv", "manifest.txt"}) {
    EXPECT_EQ(slurp(tmp.path() / "a" / f), slurp(tmp.path() / "b" / f)) << f;
  }
}

TEST(CliTest, ConfigFileAndFlagPrecedence) {
  testing::TempDir tmp("cli");
  const auto data = tmp.path() / "data";
  ASSERT_EQ(run(small_gen(data)).code, kExitOk);
  const auto cfg = tmp.path() / "run.cfg";
  std::ofstream(cfg) << "# test\nepochs = 2\ntau = 0.2\n";
  auto t = run({"train", "--data", data.string(), "--config", cfg.string(), "--tau", "0.3", "--out",
                (tmp.path() / "m").string()});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  const auto text = slurp(tmp.path() / "m" / "config.txt");
  EXPECT_NE(text.find("epochs = 2\n"), std::string::npos);
  EXPECT_NE(text.find("tau = 0.3\n"), std::string::npos);
}

TEST(CliTest, UsageErrors) {
  testing::TempDir tmp("cli");
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, kExitUsage);
  EXPECT_EQ(
      run({"generate", "--k", "6", "--known", "7", "--out", (tmp.path() / "x").string()}).code,
      kExitUsage);
  const auto data = tmp.path() / "data";
  ASSERT_EQ(run(small_gen(data)).code, kExitOk);
  EXPECT_EQ(run({"estimate-k", "--data", data.string(), "--k-max", "1", "--out",
                 (tmp.path() / "e").string()})
                .code,
            kExitUsage);
  EXPECT_EQ(
      run({"train", "--data", data.string(), "--tau", "-1", "--out", (tmp.path() / "t").string()})
          .code,
      kExitUsage);
  EXPECT_EQ(run({"eval", "--data", data.string(), "--checkpoint", (tmp.path() / "none").string(),
                 "--out", (tmp.path() / "v").string()})
                .code,
            kExitUsage);
}

TEST(CliTest, HelpExitsZero) {
  const auto r = run({"train", "--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("--learning-rate"), std::string::npos);
}

TEST(CliTest, LockedOutputFails) {
  testing::TempDir tmp("cli");
  const auto data = tmp.path() / "data";
  fs::create_directories(data);
  std::ofstream(data / ".lock") << "held";
  EXPECT_EQ(run(small_gen(data)).code, kExitFailure);
}

TEST(CliTest, BadDatasetFails) {
  testing::TempDir tmp("cli");
  const auto data = tmp.path() / "data";
  fs::create_directories(data);
  std::ofstream(data / "manifest.txt") << "garbage\n";
  EXPECT_EQ(run({"train", "--data", data.string(), "--out", (tmp.path() / "m").string()}).code,
            kExitFailure);
}

}  // namespace
}  // namespace protodisc
