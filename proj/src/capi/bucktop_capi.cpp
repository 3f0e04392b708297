#include <bucktop/bucktop.h>

#include "benchmark.hpp"
#include "config.hpp"
#include "driver.hpp"
#include "errors.hpp"
#include "log.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>

struct bt_config {
  bucktop::ConfigMap map;
};

struct bt_run {
  std::unique_ptr<bucktop::Run> run;
};

namespace {

thread_local std::string g_last_error;

bt_status fail(bt_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Maps exceptions escaping the core to status codes.
template <class F>
bt_status guarded(F&& f) {
  try {
    f();
    return BT_OK;
  } catch (const bucktop::Error& e) {
    return fail(static_cast<bt_status>(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(BT_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BT_ERR_INTERNAL, "unknown error");
  }
}

bt_status copy_out(const double* src, std::size_t n, double* buf, size_t cap, size_t* needed) {
  if (needed) *needed = n;
  if (!buf) return BT_OK;
  if (cap < n) return fail(BT_ERR_INVALID_ARGUMENT, "buffer too small");
  std::copy(src, src + n, buf);
  return BT_OK;
}

void fill_record(const bucktop::IterationRecord& r, bt_record* out) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  out->loop = r.loop;
  out->f = r.f;
  out->c = r.c;
  out->n_lambda = static_cast<int>(r.lambda.size());
  for (int i = 0; i < 4; ++i) out->lambda[i] = i < out->n_lambda ? r.lambda[i] : nan;
  out->jks = r.jks;
  out->g0 = r.g0;
  out->g1 = r.g1;
  out->kappa = r.kappa;
  out->change = r.change;
  out->t_iter = r.t_iter;
}

#define BT_REQUIRE(cond, msg) \
  if (!(cond)) return fail(BT_ERR_INVALID_ARGUMENT, msg)

}  // namespace

extern "C" {

const char* bt_version(void) { return "1.0.0"; }

const char* bt_last_error(void) { return g_last_error.c_str(); }

const char* bt_status_name(bt_status status) {
  switch (status) {
    case BT_OK: return "ok";
    case BT_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BT_ERR_CONFIG: return "configuration error";
    case BT_ERR_SOLVER: return "solver failure";
    case BT_ERR_IO: return "i/o error";
    case BT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void bt_set_log_callback(bt_log_fn fn, void* user) {
  if (!fn) {
    bucktop::log::set_sink({});
    return;
  }
  bucktop::log::set_sink([fn, user](bucktop::log::Level level, const std::string& msg) {
    fn(level == bucktop::log::Level::Warning ? 1 : 0, msg.c_str(), user);
  });
}

bt_status bt_config_create(bt_config** out) {
  BT_REQUIRE(out, "out must not be null");
  *out = nullptr;
  return guarded([&] { *out = new bt_config; });
}

void bt_config_destroy(bt_config* config) { delete config; }

bt_status bt_config_load_file(bt_config* config, const char* path) {
  BT_REQUIRE(config && path, "config and path must not be null");
  return guarded([&] { config->map.load_file(path); });
}

bt_status bt_config_set(bt_config* config, const char* key, const char* value) {
  BT_REQUIRE(config && key && value, "config, key and value must not be null");
  return guarded([&] { config->map.set(key, value); });
}

bt_status bt_config_get(const bt_config* config, const char* key, char* buf, size_t cap,
                        size_t* needed) {
  BT_REQUIRE(config && key, "config and key must not be null");
  const auto v = config->map.get(key);
  if (!v) return fail(BT_ERR_CONFIG, std::string("unknown configuration key '") + key + "'");
  if (needed) *needed = v->size() + 1;
  if (!buf) return BT_OK;
  if (cap < v->size() + 1) return fail(BT_ERR_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buf, v->c_str(), v->size() + 1);
  return BT_OK;
}

bt_status bt_config_validate(const bt_config* config) {
  BT_REQUIRE(config, "config must not be null");
  return guarded([&] { (void)config->map.resolve(); });
}

bt_status bt_run_create(const bt_config* config, bt_run** out) {
  BT_REQUIRE(config && out, "config and out must not be null");
  *out = nullptr;
  return guarded([&] {
    auto run = std::make_unique<bucktop::Run>(config->map.resolve());
    *out = new bt_run{std::move(run)};
  });
}

void bt_run_destroy(bt_run* run) { delete run; }

int bt_run_finished(const bt_run* run) { return run ? static_cast<int>(run->run->finished()) : 1; }

bt_status bt_run_step(bt_run* run, bt_record* out) {
  BT_REQUIRE(run, "run must not be null");
  return guarded([&] {
    const bucktop::IterationRecord& r = run->run->step();
    if (out) fill_record(r, out);
  });
}

bt_status bt_run_execute(bt_run* run) {
  BT_REQUIRE(run, "run must not be null");
  return guarded([&] { run->run->execute(); });
}

bt_status bt_run_finalize(bt_run* run) {
  BT_REQUIRE(run, "run must not be null");
  return guarded([&] { run->run->finalize(); });
}

bt_status bt_run_dims(const bt_run* run, int* nelx, int* nely) {
  BT_REQUIRE(run, "run must not be null");
  if (nelx) *nelx = run->run->grid().nelx();
  if (nely) *nely = run->run->grid().nely();
  return BT_OK;
}

size_t bt_run_history_size(const bt_run* run) { return run ? run->run->history().size() : 0; }

bt_status bt_run_record(const bt_run* run, size_t index, bt_record* out) {
  BT_REQUIRE(run && out, "run and out must not be null");
  const auto& h = run->run->history();
  BT_REQUIRE(index < h.size(), "record index out of range");
  fill_record(h[index], out);
  return BT_OK;
}

bt_status bt_run_field(const bt_run* run, bt_field field, double* buf, size_t cap, size_t* needed) {
  BT_REQUIRE(run, "run must not be null");
  const auto& opt = run->run->optimizer();
  const std::vector<double>* v = nullptr;
  switch (field) {
    case BT_FIELD_X: v = &opt.design().x; break;
    case BT_FIELD_X_TILDE: v = &opt.design().x_tilde; break;
    case BT_FIELD_X_PHYS: v = &opt.design().x_phys; break;
    case BT_FIELD_U: v = &opt.displacement(); break;
  }
  BT_REQUIRE(v, "unknown field");
  return copy_out(v->data(), v->size(), buf, cap, needed);
}

bt_status bt_run_lambda(const bt_run* run, double* buf, size_t cap, size_t* needed) {
  BT_REQUIRE(run, "run must not be null");
  const auto& h = run->run->history();
  if (h.empty()) return copy_out(nullptr, 0, buf, cap, needed);
  return copy_out(h.back().lambda.data(), h.back().lambda.size(), buf, cap, needed);
}

bt_status bt_run_save_checkpoint(const bt_run* run, const char* path) {
  BT_REQUIRE(run && path, "run and path must not be null");
  return guarded([&] { bucktop::save_checkpoint(path, run->run->checkpoint()); });
}

bt_status bt_benchmark(const int* sizes, size_t count, int reps, const char* csv_path) {
  BT_REQUIRE(sizes && count > 0 && csv_path, "sizes and csv_path must be given");
  return guarded([&] {
    const auto rows = bucktop::run_benchmark(std::vector<int>(sizes, sizes + count), reps);
    bucktop::write_benchmark_csv(csv_path, rows);
  });
}

bt_status bt_render_checkpoint(const char* checkpoint_path, const char* image_path) {
  BT_REQUIRE(checkpoint_path && image_path, "paths must not be null");
  return guarded([&] { bucktop::render_checkpoint(checkpoint_path, image_path); });
}

}  // extern "C"
