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

#include "protodisc/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <vector>

#include "protodisc/config.hpp"
#include "protodisc/data_io.hpp"
#include "protodisc/errors.hpp"
#include "protodisc/evaluation.hpp"
#include "protodisc/text.hpp"
#include "protodisc/trainer.hpp"

namespace protodisc {

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path default_output(const std::string& command) {
  const char* root = std::getenv(kOutputRootEnv);
  return fs::path(root && *root ? root : "runs") / command;
}

std::string default_output_help(const std::string& command) {
  return std::string("$") + kOutputRootEnv + "/" + command + ", or runs/" + command;
}

// Holds `<dir>/.lock` for the lifetime of the object so two processes never
// write into one output directory.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw IoError("output directory " + dir.string() +
                    " is locked by another run (remove .lock if stale)");
    }
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  fn(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

struct ConfigFlag {
  const char* key;
  const char* help;
};

// Every Config key, exposed as `--key-with-dashes`.
constexpr ConfigFlag kConfigFlags[] = {
    {"tau", "softmax temperature for semantic weights and prototype logits"},
    {"gamma", "weight of the labeled-prototype regulariser"},
    {"alpha", "EMA factor for labeled prototypes (weight on the old value)"},
    {"learning_rate", "gradient step size"},
    {"momentum", "heavy-ball momentum"},
    {"epochs", "full-batch training epochs"},
    {"seed", "master seed for every random stream"},
    {"k", "category count: integer, 'auto' (from data) or 'estimate'"},
    {"no_ce", "drop the labeled cross-entropy term"},
    {"no_ema", "overwrite labeled prototypes instead of EMA"},
    {"no_decouple", "one soft-assignment loss over all unlabeled data"},
    {"no_soft_assignment", "hard pseudo-label prototype loss instead of soft assignment"},
    {"no_semantic_weights", "uniform weights in the soft-assignment loss"},
    {"activation", "projection head activation: identity or tanh"},
    {"ce_head", "cross-entropy head: prototype or linear"},
    {"detach_weights", "stop gradients through the semantic weights"},
    {"recluster_period", "re-cluster and re-match every N epochs (0: never)"},
    {"kmeans_max_iter", "Lloyd iteration cap"},
    {"kmeans_tol", "center-shift convergence tolerance"},
    {"kmeans_restarts", "k-means restarts (lowest inertia wins)"},
    {"k_max", "upper bound for K estimation (0: max(8, 4 * known count))"},
    {"threshold_factor", "K estimation: drop clusters below this fraction of n / k_max"},
    {"merge_factor", "K estimation: merge clusters closer than this separation (0: off)"},
    {"per_subset_mapping", "score known/novel subsets with their own mappings"},
};

bool is_bool_key(const std::string& default_value) {
  return default_value == "true" || default_value == "false";
}

// Registers config flags on `app`; values are applied only when given.
class ConfigFlags {
 public:
  ConfigFlags() { slots_.reserve(std::size(kConfigFlags)); }

  void add_to(CLI::App& app) {
    const auto defaults = Config{}.to_map();
    app.add_option("--config", config_file_,
                   "key = value file; flags override it, it overrides built-in defaults")
        ->check(CLI::ExistingFile);
    for (const auto& f : kConfigFlags) {
      std::string name = std::string("--") + f.key;
      std::replace(name.begin(), name.end(), '_', '-');
      const auto& def = defaults.at(f.key);
      auto& slot = slots_.emplace_back(Slot{f.key, {}, false, is_bool_key(def), nullptr});
      if (slot.is_flag) {
        slot.option = app.add_flag(name, slot.flag, f.help)->default_str(def);
      } else {
        slot.option = app.add_option(name, slot.value, f.help)->default_str(def);
      }
    }
  }

  Config resolve() const {
    Config c = config_file_.empty() ? Config{} : load_config_file(config_file_);
    for (const auto& s : slots_) {
      if (s.option->count() == 0) continue;
      c.set(s.key, s.is_flag ? (s.flag ? "true" : "false") : s.value);
    }
    c.validate();
    return c;
  }

  const std::string& config_file() const { return config_file_; }

 private:
  struct Slot {
    std::string key;
    std::string value;
    bool flag;
    bool is_flag;
    CLI::Option* option;
  };
  std::string config_file_;
  std::vector<Slot> slots_;  // reserved up front; options keep pointers into it
};

KMeansOptions kmeans_options(const Config& c) {
  return {c.kmeans_max_iter, c.kmeans_tol, c.kmeans_restarts};
}

std::map<std::string, std::string> spec_map(const SynthSpec& s) {
  return {{"k", std::to_string(s.K_true)},
          {"known", std::to_string(s.M)},
          {"dim", std::to_string(s.dim)},
          {"per_class", std::to_string(s.per_class_count)},
          {"test_per_class", std::to_string(s.test_per_class)},
          {"std", format_double(s.cluster_std)},
          {"sep", format_double(s.center_separation)},
          {"labeled_ratio", format_double(s.labeled_ratio)},
          {"random_known", s.random_known ? "true" : "false"},
          {"seed", std::to_string(s.seed)}};
}

// Writes the manifest, runs `body`, then rewrites the manifest with the
// finish time.
template <typename Fn>
void with_manifest(RunManifest manifest, Fn&& body) {
  OutputLock lock(manifest.output_dir);
  const auto path = manifest.output_dir / kRunManifestName;
  manifest.started_at = utc_timestamp();
  manifest.write(path);
  body(manifest);
  manifest.finished_at = utc_timestamp();
  manifest.write(path);
}

RunManifest make_manifest(std::string command, std::map<std::string, std::string> config,
                          std::map<std::string, std::string> inputs, fs::path output_dir) {
  RunManifest m;
  m.command = std::move(command);
  m.config = std::move(config);
  m.inputs = std::move(inputs);
  m.output_dir = std::move(output_dir);
  return m;
}

std::size_t auto_k_max(const Config& c, std::size_t M, std::size_t n) {
  const std::size_t k =
      c.k_max > 0 ? static_cast<std::size_t>(c.k_max) : std::max<std::size_t>(8, 4 * M);
  return std::min(k, n);
}

}  // namespace

void RunManifest::write(const fs::path& path) const {
  write_file(path, [&](std::ostream& out) {
    out << "command = " << command << '\n';
    out << "engine_version = " << engine_version << '\n';
    out << "output_dir = " << output_dir.string() << '\n';
    out << "started_at = " << started_at << '\n';
    out << "finished_at = " << finished_at << '\n';
    for (const auto& [k, v] : inputs) out << "input." << k << " = " << v << '\n';
    for (const auto& [k, v] : config) out << "config." << k << " = " << v << '\n';
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prototype-based category discovery on embedding datasets", "protodisc"};
  app.set_version_flag("--version", kEngineVersion);
  app.require_subcommand(1);

  // generate
  SynthSpec spec;
  fs::path gen_out = default_output("data");
  auto* gen = app.add_subcommand("generate", "write a synthetic Gaussian-mixture dataset");
  gen->add_option("--k", spec.K_true, "total category count")->capture_default_str();
  gen->add_option("--known", spec.M, "known (labeled) category count")->capture_default_str();
  gen->add_option("--dim", spec.dim, "embedding dimension")->capture_default_str();
  gen->add_option("--per-class", spec.per_class_count, "training instances per category")
      ->capture_default_str();
  gen->add_option("--test-per-class", spec.test_per_class,
                  "test instances per category (0: same as --per-class)")
      ->capture_default_str();
  gen->add_option("--std", spec.cluster_std, "per-coordinate cluster standard deviation")
      ->capture_default_str();
  gen->add_option("--sep", spec.center_separation, "minimum distance between centers")
      ->capture_default_str();
  gen->add_option("--labeled-ratio", spec.labeled_ratio,
                  "fraction of each known category that is labeled")
      ->capture_default_str();
  gen->add_flag("--random-known", spec.random_known,
                "pick known categories at random instead of the first ones")
      ->default_str("false");
  gen->add_option("--seed", spec.seed, "generator seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output directory")->default_str(default_output_help("data"));

  // train
  ConfigFlags train_flags;
  fs::path train_data, train_out = default_output("train");
  auto* train_cmd = app.add_subcommand("train", "fit the projection head on a dataset directory");
  train_cmd->add_option("--data", train_data, "dataset directory (with manifest.txt)")
      ->required()
      ->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", train_out, "output directory")
      ->default_str(default_output_help("train"));
  train_flags.add_to(*train_cmd);

  // eval
  ConfigFlags eval_flags;
  fs::path eval_data, eval_ckpt, eval_out = default_output("eval");
  bool eval_estimate = false;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint on the test split");
  eval_cmd->add_option("--data", eval_data, "dataset directory (with manifest.txt)")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint written by train")->required();
  eval_cmd->add_option("--out", eval_out, "output directory")
      ->default_str(default_output_help("eval"));
  eval_cmd
      ->add_flag("--estimate-k", eval_estimate,
                 "also estimate K from the unlabeled split and report it")
      ->default_str("false");
  eval_flags.add_to(*eval_cmd);

  // estimate-k
  ConfigFlags est_flags;
  fs::path est_data, est_out = default_output("estimate-k");
  auto* est_cmd =
      app.add_subcommand("estimate-k", "estimate the category count of the unlabeled split");
  est_cmd->add_option("--data", est_data, "dataset directory (with manifest.txt)")
      ->required()
      ->check(CLI::ExistingDirectory);
  est_cmd->add_option("--out", est_out, "output directory for the run manifest")
      ->default_str(default_output_help("estimate-k"));
  est_flags.add_to(*est_cmd);
  est_cmd->get_option("--k-max")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::vector<std::string> argv_copy(argv, argv + argc);
  std::string command_line;
  for (const auto& a : argv_copy) command_line += (command_line.empty() ? "" : " ") + a;

  try {
    if (*gen) {
      try {
        spec.validate();
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      auto m = make_manifest(command_line, {}, spec_map(spec), gen_out);
      with_manifest(m, [&](RunManifest&) {
        const auto ds = generate_synthetic(spec);
        save_dataset(ds, gen_out);
        out << "wrote " << ds.labeled.size() << " labeled, " << ds.unlabeled.size()
            << " unlabeled, " << ds.test.size() << " test rows to " << gen_out.string() << '\n';
      });
    } else if (*train_cmd) {
      Config config;
      try {
        config = train_flags.resolve();
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      auto m =
          make_manifest(command_line, config.to_map(), {{"data", train_data.string()}}, train_out);
      if (!train_flags.config_file().empty()) m.inputs["config_file"] = train_flags.config_file();
      with_manifest(m, [&](RunManifest&) {
        const auto ds = load_dataset_dir(train_data);
        for (const auto& w : ds.warnings()) err << "warning: " << w << '\n';
        const auto state = train(ds, config);
        for (const auto& w : state.warnings) err << "warning: " << w << '\n';
        write_file(train_out / "config.txt", [&](std::ostream& o) {
          for (const auto& [k, v] : config.to_map()) o << k << " = " << v << '\n';
        });
        write_checkpoint(train_out / "checkpoint.txt", state);
        write_file(train_out / "loss_trace.tsv",
                   [&](std::ostream& o) { write_loss_trace_tsv(o, state.loss_trace); });
        out << "trained " << state.epoch << " epochs with K=" << state.P_u.size();
        if (!state.loss_trace.empty()) {
          out << ", loss " << format_double(state.loss_trace.front().total) << " -> "
              << format_double(state.loss_trace.back().total);
        }
        out << "; outputs in " << train_out.string() << '\n';
      });
    } else if (*eval_cmd) {
      if (!fs::is_regular_file(eval_ckpt)) {
        throw UsageError("checkpoint not found: " + eval_ckpt.string());
      }
      Config config;
      try {
        config = eval_flags.resolve();
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      auto m = make_manifest(command_line, config.to_map(),
                             {{"data", eval_data.string()}, {"checkpoint", eval_ckpt.string()}},
                             eval_out);
      with_manifest(m, [&](RunManifest&) {
        const auto ds = load_dataset_dir(eval_data);
        const auto state = read_checkpoint(eval_ckpt);
        EvalOptions opts;
        opts.kmeans = kmeans_options(config);
        opts.seed = config.seed;
        opts.per_subset_mapping = config.per_subset_mapping;
        if (eval_estimate) {
          std::vector<Vector> xs;
          for (const auto& r : ds.unlabeled) xs.push_back(r.x);
          opts.estimated_k = estimate_k(xs, auto_k_max(config, ds.label_space.M(), xs.size()),
                                        config.threshold_factor, config.seed,
                                        {kmeans_options(config), config.merge_factor});
        }
        const auto report = evaluate(state, ds.test, ds.label_space, opts);
        write_file(eval_out / "metrics.tsv",
                   [&](std::ostream& o) { write_metrics_tsv(o, report); });
        write_file(eval_out / "report.txt", [&](std::ostream& o) { write_report_text(o, report); });
        write_file(eval_out / "confusion.tsv",
                   [&](std::ostream& o) { write_confusion_tsv(o, report); });
        write_file(eval_out / "prototype_distances.tsv",
                   [&](std::ostream& o) { write_prototype_distances_tsv(o, report); });
        write_report_text(out, report);
      });
    } else if (*est_cmd) {
      Config config;
      try {
        config = est_flags.resolve();
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      auto m = make_manifest(command_line, config.to_map(), {{"data", est_data.string()}}, est_out);
      with_manifest(m, [&](RunManifest&) {
        const auto ds = load_dataset_dir(est_data);
        std::vector<Vector> xs;
        for (const auto& r : ds.unlabeled) xs.push_back(r.x);
        std::size_t k = 0;
        try {
          k = estimate_k(xs, static_cast<std::size_t>(config.k_max), config.threshold_factor,
                         config.seed, {kmeans_options(config), config.merge_factor});
        } catch (const ConfigError& e) {
          throw UsageError(e.what());
        } catch (const InfeasibleKError& e) {
          throw UsageError(e.what());
        }
        out << k << '\n';
      });
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace protodisc
