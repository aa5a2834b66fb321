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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace protodisc {

inline constexpr const char* kEngineVersion = "0.1.0";

// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "PROTODISC_OUT";

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Provenance record written to `run_manifest.txt` in every output directory
// before any result file.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;
  std::filesystem::path output_dir;
  std::string started_at;
  std::string finished_at;  // empty while the run is in progress
  std::string engine_version = kEngineVersion;

  void write(const std::filesystem::path& path) const;
};

inline constexpr const char* kRunManifestName = "run_manifest.txt";

// Entry point for `protodisc <generate|train|eval|estimate-k> [flags]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace protodisc
