/* Exercises the C interface from plain C. Takes a scratch directory. */
#include <wsground/wsground.h>

#include <math.h>
#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      fprintf(stderr, "  last error: %s\n", wsg_last_error());   \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static void join(char* out, size_t cap, const char* dir, const char* name) {
  if (snprintf(out, cap, "%s/%s", dir, name) >= (int)cap) out[0] = '\0';
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: capi_test <scratch-dir>\n");
    return 2;
  }
  const char* root = argv[1];
  char scenes[1024], run[1024], ckpt[1024], preds[1024], report[1024];
  join(scenes, sizeof scenes, root, "scenes");
  join(run, sizeof run, root, "run");
  join(ckpt, sizeof ckpt, run, "final.ckpt");
  join(preds, sizeof preds, root, "predictions.json");
  join(report, sizeof report, root, "report.json");

  wsg_set_quiet(1);
  EXPECT(strlen(wsg_version()) > 0);
  EXPECT(strcmp(wsg_status_name(WSG_ERR_CONFIG), "config error") == 0);

  /* argument and config errors */
  EXPECT(wsg_config_create(NULL) == WSG_ERR_INVALID_ARGUMENT);
  wsg_config* cfg = NULL;
  EXPECT(wsg_config_create(&cfg) == WSG_OK);
  EXPECT(wsg_config_set(cfg, "train.max_epochs", "\"many\"") == WSG_ERR_CONFIG);
  EXPECT(strstr(wsg_last_error(), "train.max_epochs") != NULL);
  EXPECT(wsg_config_set(cfg, "no_such_section.x", "1") == WSG_ERR_CONFIG);
  wsg_config* missing = cfg;
  EXPECT(wsg_config_load("/nonexistent/config.json", &missing) == WSG_ERR_CONFIG);
  EXPECT(missing == NULL);

  /* a small configuration */
  const char* sets[][2] = {{"seed", "5"},
                           {"synth.count", "3"},
                           {"synth.points_min", "60"},
                           {"synth.points_max", "120"},
                           {"model.encoder.d", "16"},
                           {"model.encoder.point_sample_count", "32"},
                           {"model.encoder.transformer_layers", "1"},
                           {"model.encoder.transformer_heads", "2"},
                           {"model.encoder.backbone", "shared_mlp"},
                           {"model.adapter_hidden", "16"},
                           {"train.max_epochs", "2"},
                           {"train.batch_size_scenes", "2"}};
  for (size_t i = 0; i < sizeof sets / sizeof sets[0]; ++i) EXPECT(wsg_config_set(cfg, sets[i][0], sets[i][1]) == WSG_OK);

  size_t needed = 0;
  EXPECT(wsg_config_dump(cfg, NULL, 0, &needed) == WSG_OK);
  EXPECT(needed > 1);
  char small[8];
  EXPECT(wsg_config_dump(cfg, small, sizeof small, &needed) == WSG_OK);
  EXPECT(small[sizeof small - 1] == '\0');

  size_t written = 0, ok = 0, failed = 0, predicted = 0;
  EXPECT(wsg_synth(cfg, scenes, &written) == WSG_OK);
  EXPECT(written == 3);
  EXPECT(wsg_preprocess(cfg, scenes, &ok, &failed) == WSG_OK);
  EXPECT(ok == 3 && failed == 0);

  double loss = -1.0;
  EXPECT(wsg_train(cfg, scenes, run, &loss) == WSG_OK);
  EXPECT(loss > 0.0 && isfinite(loss));
  EXPECT(wsg_infer(cfg, ckpt, scenes, preds, &predicted, &failed) == WSG_OK);
  EXPECT(predicted > 0 && failed == 0);

  const char* paths[] = {preds};
  char table[8192];
  EXPECT(wsg_eval(cfg, paths, 1, scenes, report, table, sizeof table, &needed) == WSG_OK);
  EXPECT(strstr(table, "Overall") != NULL);
  EXPECT(wsg_infer(cfg, "/nonexistent.ckpt", scenes, preds, NULL, NULL) == WSG_ERR_LOAD);

  /* scenes */
  char bundle[1100];
  join(bundle, sizeof bundle, scenes, "scene_0000");
  wsg_scene* scene = NULL;
  EXPECT(wsg_scene_load(bundle, 0, &scene) == WSG_OK);
  EXPECT(wsg_scene_num_proposals(scene) >= 4);
  EXPECT(wsg_scene_num_queries(scene) == wsg_scene_num_proposals(scene));
  EXPECT(wsg_scene_num_frames(scene) == 3);
  wsg_scene_destroy(scene);
  EXPECT(wsg_scene_load(root, 0, &scene) == WSG_ERR_LOAD);
  EXPECT(scene == NULL);

  const double a[6] = {0, 0, 0, 1, 1, 1}, b[6] = {0.5, 0, 0, 1.5, 1, 1};
  double iou = 0;
  EXPECT(wsg_iou_3d(a, b, &iou) == WSG_OK);
  EXPECT(fabs(iou - 1.0 / 3.0) < 1e-12);

  wsg_config_destroy(cfg);
  if (failures == 0) printf("capi_test: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
