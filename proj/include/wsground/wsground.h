#ifndef WSGROUND_H
#define WSGROUND_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define WSG_API __declspec(dllexport)
#else
#define WSG_API __attribute__((visibility("default")))
#endif

/* Every call returns a status; on failure wsg_last_error() describes it. */
typedef enum wsg_status {
  WSG_OK = 0,
  WSG_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad enum, ... */
  WSG_ERR_CONFIG = 2,           /* unknown field, wrong type, out-of-range value */
  WSG_ERR_LOAD = 3,             /* missing or malformed file */
  WSG_ERR_VALIDATION = 4,       /* data violates a domain invariant */
  WSG_ERR_CONTRACT = 5,         /* precondition broken */
  WSG_ERR_BACKEND = 6,          /* embedding backend unavailable */
  WSG_ERR_NUMERIC = 7,          /* NaN/Inf in loss or gradient */
  WSG_ERR_FROZEN = 8,           /* frozen provider changed during training */
  WSG_ERR_PARTIAL = 9,          /* batch finished but some items failed */
  WSG_ERR_INTERNAL = 10
} wsg_status;

typedef struct wsg_config wsg_config;
typedef struct wsg_scene wsg_scene;

WSG_API const char* wsg_version(void);
/* Message of the last failed call on this thread; never null. */
WSG_API const char* wsg_last_error(void);
WSG_API const char* wsg_status_name(wsg_status status);
/* Silences warnings on stderr. */
WSG_API void wsg_set_quiet(int quiet);

/* Configuration: defaults, a JSON file, and dotted-key overrides such as
 * ("train.max_epochs", "30"). Values are JSON text; bare words are strings. */
WSG_API wsg_status wsg_config_create(wsg_config** out);
WSG_API wsg_status wsg_config_load(const char* path, wsg_config** out);
WSG_API wsg_status wsg_config_set(wsg_config* config, const char* key, const char* value);
/* Copies the resolved configuration as JSON into buf (NUL-terminated);
 * *needed receives the full length including the terminator. */
WSG_API wsg_status wsg_config_dump(const wsg_config* config, char* buf, size_t capacity, size_t* needed);
/* Directory for preprocess caches (one subdirectory per bundle); null or "" keeps them in the bundles. */
WSG_API wsg_status wsg_config_set_cache_dir(wsg_config* config, const char* dir);
WSG_API void wsg_config_destroy(wsg_config* config);

/* Commands. Counts may be null. */
WSG_API wsg_status wsg_synth(const wsg_config* config, const char* out_dir, size_t* written);
WSG_API wsg_status wsg_preprocess(const wsg_config* config, const char* scenes_dir, size_t* ok, size_t* failed);
WSG_API wsg_status wsg_train(const wsg_config* config, const char* scenes_dir, const char* out_dir,
                             double* final_epoch_loss);
WSG_API wsg_status wsg_infer(const wsg_config* config, const char* checkpoint, const char* scenes_dir,
                             const char* out_path, size_t* predicted, size_t* failed);
/* Writes report_path (JSON) and a .txt table beside it; the table is also
 * copied into table_buf when it is non-null. */
WSG_API wsg_status wsg_eval(const wsg_config* config, const char* const* prediction_paths, size_t num_predictions,
                            const char* scenes_dir, const char* report_path, char* table_buf,
                            size_t table_capacity, size_t* table_needed);

/* Scene bundles. */
WSG_API wsg_status wsg_scene_load(const char* dir, int inference_mode, wsg_scene** out);
WSG_API size_t wsg_scene_num_proposals(const wsg_scene* scene);
WSG_API size_t wsg_scene_num_queries(const wsg_scene* scene);
WSG_API size_t wsg_scene_num_frames(const wsg_scene* scene);
WSG_API void wsg_scene_destroy(wsg_scene* scene);

/* Axis-aligned boxes as {min_x, min_y, min_z, max_x, max_y, max_z}. */
WSG_API wsg_status wsg_iou_3d(const double a[6], const double b[6], double* out);

#ifdef __cplusplus
}
#endif

#endif
