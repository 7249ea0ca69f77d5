#include <wsground/wsground.h>

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/version.hpp"
#include "pipeline/commands.hpp"

struct wsg_config {
  nlohmann::json raw = nlohmann::json::object();
  std::string cache_dir;
};

struct wsg_scene {
  wsground::Scene scene;
};

namespace {

thread_local std::string g_last_error;

wsg_status fail(wsg_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
wsg_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const wsground::ConfigError& e) {
    return fail(WSG_ERR_CONFIG, e.what());
  } catch (const wsground::LoadError& e) {
    return fail(WSG_ERR_LOAD, e.what());
  } catch (const wsground::ValidationError& e) {
    return fail(WSG_ERR_VALIDATION, e.what());
  } catch (const wsground::ContractError& e) {
    return fail(WSG_ERR_CONTRACT, e.what());
  } catch (const wsground::BackendError& e) {
    return fail(WSG_ERR_BACKEND, e.what());
  } catch (const wsground::NumericError& e) {
    return fail(WSG_ERR_NUMERIC, e.what());
  } catch (const wsground::FrozenViolation& e) {
    return fail(WSG_ERR_FROZEN, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(WSG_ERR_LOAD, e.what());
  } catch (const std::bad_alloc&) {
    return fail(WSG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WSG_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(WSG_ERR_INTERNAL, "unknown failure");
  }
}

wsground::RunConfig resolve(const wsg_config* config) {
  auto c = wsground::parse_run_config(config->raw);
  c.cache_dir = config->cache_dir;
  return c;
}

wsg_status copy_out(const std::string& text, char* buf, size_t capacity, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (buf && capacity > 0) {
    const size_t n = std::min(capacity - 1, text.size());
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
  }
  return WSG_OK;
}

#define WSG_REQUIRE(cond, what) \
  if (!(cond)) return fail(WSG_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* wsg_version(void) { return wsground::kVersion; }

const char* wsg_last_error(void) { return g_last_error.c_str(); }

const char* wsg_status_name(wsg_status status) {
  switch (status) {
    case WSG_OK: return "ok";
    case WSG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case WSG_ERR_CONFIG: return "config error";
    case WSG_ERR_LOAD: return "load error";
    case WSG_ERR_VALIDATION: return "validation error";
    case WSG_ERR_CONTRACT: return "contract error";
    case WSG_ERR_BACKEND: return "backend error";
    case WSG_ERR_NUMERIC: return "numeric error";
    case WSG_ERR_FROZEN: return "frozen parameters modified";
    case WSG_ERR_PARTIAL: return "partial failure";
    case WSG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void wsg_set_quiet(int quiet) { wsground::log::set_quiet(quiet != 0); }

wsg_status wsg_config_create(wsg_config** out) {
  WSG_REQUIRE(out, "wsg_config_create: out is null");
  return guarded([&] {
    *out = new wsg_config();
    return WSG_OK;
  });
}

wsg_status wsg_config_load(const char* path, wsg_config** out) {
  WSG_REQUIRE(path && out, "wsg_config_load: null argument");
  *out = nullptr;
  return guarded([&] {
    auto cfg = std::make_unique<wsg_config>();
    cfg->raw = wsground::read_config_json(path);
    wsground::parse_run_config(cfg->raw);
    *out = cfg.release();
    return WSG_OK;
  });
}

wsg_status wsg_config_set(wsg_config* config, const char* key, const char* value) {
  WSG_REQUIRE(config && key && value, "wsg_config_set: null argument");
  return guarded([&] {
    nlohmann::json next = config->raw;
    wsground::apply_override(next, key, value);
    wsground::parse_run_config(next);
    config->raw = std::move(next);
    return WSG_OK;
  });
}

wsg_status wsg_config_dump(const wsg_config* config, char* buf, size_t capacity, size_t* needed) {
  WSG_REQUIRE(config, "wsg_config_dump: config is null");
  return guarded([&] { return copy_out(wsground::to_json(resolve(config)).dump(2), buf, capacity, needed); });
}

wsg_status wsg_config_set_cache_dir(wsg_config* config, const char* dir) {
  WSG_REQUIRE(config, "wsg_config_set_cache_dir: config is null");
  config->cache_dir = dir ? dir : "";
  return WSG_OK;
}

void wsg_config_destroy(wsg_config* config) { delete config; }

wsg_status wsg_synth(const wsg_config* config, const char* out_dir, size_t* written) {
  WSG_REQUIRE(config && out_dir, "wsg_synth: null argument");
  return guarded([&] {
    const auto r = wsground::run_synth(resolve(config), out_dir);
    if (written) *written = r.succeeded;
    return WSG_OK;
  });
}

wsg_status wsg_preprocess(const wsg_config* config, const char* scenes_dir, size_t* ok, size_t* failed) {
  WSG_REQUIRE(config && scenes_dir, "wsg_preprocess: null argument");
  return guarded([&] {
    const auto r = wsground::run_preprocess(resolve(config), scenes_dir);
    if (ok) *ok = r.succeeded;
    if (failed) *failed = r.failed;
    if (r.failed > 0) return fail(WSG_ERR_PARTIAL, std::to_string(r.failed) + " scene(s) failed to preprocess");
    return WSG_OK;
  });
}

wsg_status wsg_train(const wsg_config* config, const char* scenes_dir, const char* out_dir,
                     double* final_epoch_loss) {
  WSG_REQUIRE(config && scenes_dir && out_dir, "wsg_train: null argument");
  return guarded([&] {
    const auto r = wsground::run_train(resolve(config), scenes_dir, out_dir);
    if (final_epoch_loss) *final_epoch_loss = r.epoch_mean_total.empty() ? 0.0 : r.epoch_mean_total.back();
    return WSG_OK;
  });
}

wsg_status wsg_infer(const wsg_config* config, const char* checkpoint, const char* scenes_dir, const char* out_path,
                     size_t* predicted, size_t* failed) {
  WSG_REQUIRE(config && checkpoint && scenes_dir && out_path, "wsg_infer: null argument");
  return guarded([&] {
    const auto r = wsground::run_infer(resolve(config), checkpoint, scenes_dir, out_path);
    if (predicted) *predicted = r.succeeded;
    if (failed) *failed = r.failed;
    if (r.failed > 0) return fail(WSG_ERR_PARTIAL, std::to_string(r.failed) + " query/scene failure(s) recorded");
    return WSG_OK;
  });
}

wsg_status wsg_eval(const wsg_config* config, const char* const* prediction_paths, size_t num_predictions,
                    const char* scenes_dir, const char* report_path, char* table_buf, size_t table_capacity,
                    size_t* table_needed) {
  WSG_REQUIRE(config && prediction_paths && scenes_dir && report_path, "wsg_eval: null argument");
  return guarded([&] {
    std::vector<std::filesystem::path> paths;
    for (size_t i = 0; i < num_predictions; ++i) {
      WSG_REQUIRE(prediction_paths[i], "wsg_eval: null predictions path");
      paths.emplace_back(prediction_paths[i]);
    }
    const auto reports = wsground::run_eval(resolve(config), paths, scenes_dir, report_path);
    return copy_out(wsground::format_report_table(reports), table_buf, table_capacity, table_needed);
  });
}

wsg_status wsg_scene_load(const char* dir, int inference_mode, wsg_scene** out) {
  WSG_REQUIRE(dir && out, "wsg_scene_load: null argument");
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<wsg_scene>();
    s->scene = wsground::load_scene_bundle(dir, inference_mode ? wsground::SceneUse::inference
                                                               : wsground::SceneUse::training);
    *out = s.release();
    return WSG_OK;
  });
}

size_t wsg_scene_num_proposals(const wsg_scene* scene) { return scene ? scene->scene.proposals.size() : 0; }
size_t wsg_scene_num_queries(const wsg_scene* scene) { return scene ? scene->scene.queries.size() : 0; }
size_t wsg_scene_num_frames(const wsg_scene* scene) { return scene ? scene->scene.frames.size() : 0; }
void wsg_scene_destroy(wsg_scene* scene) { delete scene; }

wsg_status wsg_iou_3d(const double a[6], const double b[6], double* out) {
  WSG_REQUIRE(a && b && out, "wsg_iou_3d: null argument");
  return guarded([&] {
    const wsground::AxisAlignedBox3D ba{{a[0], a[1], a[2]}, {a[3], a[4], a[5]}};
    const wsground::AxisAlignedBox3D bb{{b[0], b[1], b[2]}, {b[3], b[4], b[5]}};
    *out = wsground::iou_3d(ba, bb);
    return WSG_OK;
  });
}

}  // extern "C"
