// Command-line front end. Talks to the library only through the C API.
#include <wsground/wsground.h>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int exit_code(wsg_status s) {
  switch (s) {
    case WSG_OK: return kExitOk;
    case WSG_ERR_CONFIG:
    case WSG_ERR_INVALID_ARGUMENT: return kExitUsage;
    default: return kExitRuntime;
  }
}

int report(wsg_status s, const char* what) {
  if (s != WSG_OK) std::fprintf(stderr, "%s: %s: %s\n", what, wsg_status_name(s), wsg_last_error());
  return exit_code(s);
}

using ConfigPtr = std::unique_ptr<wsg_config, decltype(&wsg_config_destroy)>;

struct Overrides {
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flags;  // dotted key -> value, from dedicated flags
};

// Config file first, then --set pairs, then dedicated flags.
int build_config(const Overrides& o, ConfigPtr& out) {
  wsg_config* raw = nullptr;
  const wsg_status s = o.config_path.empty() ? wsg_config_create(&raw) : wsg_config_load(o.config_path.c_str(), &raw);
  if (s != WSG_OK) return report(s, "config");
  out.reset(raw);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "config: --set expects key=value, got '%s'\n", kv.c_str());
      return kExitUsage;
    }
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (const auto r = wsg_config_set(out.get(), key.c_str(), value.c_str()); r != WSG_OK) return report(r, "config");
  }
  for (const auto& [key, value] : o.flags)
    if (const auto r = wsg_config_set(out.get(), key.c_str(), value.c_str()); r != WSG_OK) return report(r, "config");
  if (const char* cache = std::getenv("WSGROUND_CACHE_DIR")) wsg_config_set_cache_dir(out.get(), cache);
  return kExitOk;
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string metrics_json(const std::string& csv) {
  std::stringstream in(csv);
  std::string item, out = "[";
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    if (out.size() > 1) out += ",";
    out += json_string(item);
  }
  return out + "]";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly-supervised 3D visual grounding: synth, preprocess, train, infer, eval"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(wsg_version()));

  Overrides o;
  bool quiet = false;
  app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--set", o.sets, "Override a config value, e.g. --set train.max_epochs=30 (repeatable)");
  app.add_flag("--quiet", quiet, "Suppress warnings");

  std::optional<std::uint64_t> seed;
  std::optional<std::string> extension_mode;

  auto* synth = app.add_subcommand("synth", "Generate synthetic scene bundles");
  std::string scenes_out;
  std::optional<int> count;
  synth->add_option("--seed", seed, "Run seed");
  synth->add_option("--scenes-out", scenes_out, "Output directory for bundles")->required();
  synth->add_option("--count", count, "Number of scenes");

  auto* preprocess = app.add_subcommand("preprocess", "Cache best-frame regions and frozen embeddings");
  std::string scenes_dir;
  preprocess->add_option("--scenes", scenes_dir, "Directory of scene bundles")->required()->check(CLI::ExistingDirectory);
  preprocess->add_option("--extension-mode", extension_mode, "none | boundary_extended");

  auto* train = app.add_subcommand("train", "Train the 3D encoder, adapters and query classifier");
  std::string out_dir;
  std::optional<int> epochs;
  train->add_option("--scenes", scenes_dir, "Directory of scene bundles")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", out_dir, "Output directory for checkpoints and the training log")->required();
  train->add_option("--seed", seed, "Run seed");
  train->add_option("--epochs", epochs, "Number of epochs (train.max_epochs)");
  train->add_option("--extension-mode", extension_mode, "none | boundary_extended");

  auto* infer = app.add_subcommand("infer", "Ground every query of every scene");
  std::string checkpoint, out_file;
  std::optional<int> topk;
  infer->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  infer->add_option("--scenes", scenes_dir, "Directory of scene bundles")->required()->check(CLI::ExistingDirectory);
  infer->add_option("--topk", topk, "Query categories kept by the filter (default 3)");
  infer->add_option("--out", out_file, "Predictions file")->required();

  auto* eval = app.add_subcommand("eval", "Score predictions");
  std::vector<std::string> predictions;
  std::string metrics, report_path;
  eval->add_option("--predictions", predictions, "Predictions file(s); one report row per file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--scenes", scenes_dir, "Directory of scene bundles")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--metrics", metrics, "Comma list of acc_iou, selection, recall");
  eval->add_option("--report", report_path, "Report JSON path (a .txt table is written beside it)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  wsg_set_quiet(quiet ? 1 : 0);

  if (seed) o.flags.emplace_back("seed", std::to_string(*seed));
  if (extension_mode) o.flags.emplace_back("projection.extension_mode", json_string(*extension_mode));
  if (count) o.flags.emplace_back("synth.count", std::to_string(*count));
  if (epochs) o.flags.emplace_back("train.max_epochs", std::to_string(*epochs));
  if (topk) o.flags.emplace_back("inference.topk", std::to_string(*topk));
  if (!metrics.empty()) o.flags.emplace_back("eval.metrics", metrics_json(metrics));

  ConfigPtr config(nullptr, &wsg_config_destroy);
  if (const int rc = build_config(o, config); rc != kExitOk) return rc;

  if (*synth) {
    size_t written = 0;
    const auto s = wsg_synth(config.get(), scenes_out.c_str(), &written);
    if (s == WSG_OK) std::printf("wrote %zu scene bundles to %s\n", written, scenes_out.c_str());
    return report(s, "synth");
  }
  if (*preprocess) {
    size_t ok = 0, failed = 0;
    const auto s = wsg_preprocess(config.get(), scenes_dir.c_str(), &ok, &failed);
    std::printf("preprocessed %zu scene(s), %zu failed\n", ok, failed);
    return report(s, "preprocess");
  }
  if (*train) {
    double loss = 0.0;
    const auto s = wsg_train(config.get(), scenes_dir.c_str(), out_dir.c_str(), &loss);
    if (s == WSG_OK) std::printf("training done; last epoch mean loss %.6f; checkpoints in %s\n", loss, out_dir.c_str());
    return report(s, "train");
  }
  if (*infer) {
    size_t predicted = 0, failed = 0;
    const auto s = wsg_infer(config.get(), checkpoint.c_str(), scenes_dir.c_str(), out_file.c_str(), &predicted, &failed);
    std::printf("%zu prediction(s), %zu failure(s) -> %s\n", predicted, failed, out_file.c_str());
    return report(s, "infer");
  }
  if (*eval) {
    std::vector<const char*> paths;
    for (const auto& p : predictions) paths.push_back(p.c_str());
    std::string table(1 << 16, '\0');
    size_t needed = 0;
    auto s = wsg_eval(config.get(), paths.data(), paths.size(), scenes_dir.c_str(), report_path.c_str(), table.data(),
                      table.size(), &needed);
    if (s == WSG_OK && needed > table.size()) {
      table.assign(needed, '\0');
      s = wsg_eval(config.get(), paths.data(), paths.size(), scenes_dir.c_str(), report_path.c_str(), table.data(),
                   table.size(), &needed);
    }
    if (s == WSG_OK) std::fputs(table.c_str(), stdout);
    return report(s, "eval");
  }
  return kExitUsage;
}
