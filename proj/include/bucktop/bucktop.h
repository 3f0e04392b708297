#ifndef BUCKTOP_BUCKTOP_H
#define BUCKTOP_BUCKTOP_H

/* C interface of the bucktop topology optimization library.
 *
 * Objects are opaque handles. Every fallible call returns a bt_status; on
 * failure bt_last_error() describes the problem (per thread, valid until the
 * next failing call on that thread). */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(BUCKTOP_BUILDING_LIBRARY)
#    define BT_API __declspec(dllexport)
#  else
#    define BT_API __declspec(dllimport)
#  endif
#else
#  define BT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bt_status {
  BT_OK = 0,
  BT_ERR_INVALID_ARGUMENT = 1,
  BT_ERR_CONFIG = 2,
  BT_ERR_SOLVER = 3,
  BT_ERR_IO = 4,
  BT_ERR_INTERNAL = 5
} bt_status;

typedef enum bt_field {
  BT_FIELD_X = 0,       /* design variables */
  BT_FIELD_X_TILDE = 1, /* filtered densities */
  BT_FIELD_X_PHYS = 2,  /* physical densities */
  BT_FIELD_U = 3        /* last displacement field, 2 entries per node */
} bt_field;

typedef struct bt_config bt_config;
typedef struct bt_run bt_run;

/* One iteration of the convergence history. Load factors beyond the first
 * four are available through bt_run_lambda. Missing values are NaN. */
typedef struct bt_record {
  int loop;
  double f;
  double c;
  double lambda[4];
  int n_lambda;
  double jks;
  double g0;
  double g1;
  double kappa;
  double change;
  double t_iter;
} bt_record;

typedef void (*bt_log_fn)(int level, const char* message, void* user);

BT_API const char* bt_version(void);
BT_API const char* bt_last_error(void);
BT_API const char* bt_status_name(bt_status status);

/* Routes library messages (level 0 info, 1 warning); stderr by default.
 * NULL silences the library. */
BT_API void bt_set_log_callback(bt_log_fn fn, void* user);

BT_API bt_status bt_config_create(bt_config** out);
BT_API void bt_config_destroy(bt_config* config);
BT_API bt_status bt_config_load_file(bt_config* config, const char* path);
BT_API bt_status bt_config_set(bt_config* config, const char* key, const char* value);
/* Copies the value with its terminator; *needed receives the required size. */
BT_API bt_status bt_config_get(const bt_config* config, const char* key, char* buf, size_t cap,
                               size_t* needed);
BT_API bt_status bt_config_validate(const bt_config* config);

BT_API bt_status bt_run_create(const bt_config* config, bt_run** out);
BT_API void bt_run_destroy(bt_run* run);
BT_API int bt_run_finished(const bt_run* run);
BT_API bt_status bt_run_step(bt_run* run, bt_record* out);
/* Steps until finished and writes the final artifacts. */
BT_API bt_status bt_run_execute(bt_run* run);
BT_API bt_status bt_run_finalize(bt_run* run);
BT_API bt_status bt_run_dims(const bt_run* run, int* nelx, int* nely);
BT_API size_t bt_run_history_size(const bt_run* run);
BT_API bt_status bt_run_record(const bt_run* run, size_t index, bt_record* out);
/* Copies a field; *needed receives its length. */
BT_API bt_status bt_run_field(const bt_run* run, bt_field field, double* buf, size_t cap,
                              size_t* needed);
/* All load factors of the last iteration, descending mu order. */
BT_API bt_status bt_run_lambda(const bt_run* run, double* buf, size_t cap, size_t* needed);
BT_API bt_status bt_run_save_checkpoint(const bt_run* run, const char* path);

BT_API bt_status bt_benchmark(const int* sizes, size_t count, int reps, const char* csv_path);
BT_API bt_status bt_render_checkpoint(const char* checkpoint_path, const char* image_path);

#ifdef __cplusplus
}
#endif

#endif
