#include "fourtop.h"

#include <cstring>
#include <string>

#include "core/config.hpp"
#include "core/runner.hpp"

struct ftop_config {
  fourtop::runner::RunConfig cfg;
};

struct ftop_result {
  fourtop::runner::ExperimentResult res;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

ftop_status copy_out(const std::string& s, char* buf, size_t cap) {
  if (!buf || cap == 0) {
    set_error("output buffer is null or empty");
    return FTOP_INVALID_ARGUMENT;
  }
  if (s.size() + 1 > cap) {
    set_error("output buffer too small (" + std::to_string(s.size() + 1) +
              " bytes needed)");
    return FTOP_INVALID_ARGUMENT;
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return FTOP_OK;
}

template <typename Fn>
ftop_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return FTOP_INVALID_ARGUMENT;
  } catch (const fourtop::SolverError& e) {
    set_error(e.what());
    return FTOP_SOLVER_FAILURE;
  } catch (const fourtop::NumericError& e) {
    set_error(e.what());
    return FTOP_NUMERIC_ERROR;
  } catch (const fourtop::IoError& e) {
    set_error(e.what());
    return FTOP_IO_ERROR;
  } catch (const std::exception& e) {
    set_error(e.what());
    return FTOP_ERROR;
  } catch (...) {
    set_error("unknown error");
    return FTOP_ERROR;
  }
}

}  // namespace

extern "C" {

const char* ftop_version(void) { return "0.1.0"; }

const char* ftop_last_error(void) { return g_last_error.c_str(); }

ftop_status ftop_config_create(ftop_config** out) {
  if (!out) {
    set_error("out must not be null");
    return FTOP_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = new ftop_config();
    return FTOP_OK;
  });
}

void ftop_config_destroy(ftop_config* cfg) { delete cfg; }

ftop_status ftop_config_load_file(ftop_config* cfg, const char* path) {
  if (!cfg || !path) {
    set_error("cfg and path must not be null");
    return FTOP_INVALID_ARGUMENT;
  }
  return guarded([&] {
    cfg->cfg = fourtop::runner::parse_config_file(path);
    return FTOP_OK;
  });
}

ftop_status ftop_config_set(ftop_config* cfg, const char* key,
                            const char* value) {
  if (!cfg || !key || !value) {
    set_error("cfg, key and value must not be null");
    return FTOP_INVALID_ARGUMENT;
  }
  return guarded([&] {
    cfg->cfg.set(key, value);
    return FTOP_OK;
  });
}

ftop_status ftop_config_get(const ftop_config* cfg, const char* key, char* buf,
                            size_t cap) {
  if (!cfg || !key) {
    set_error("cfg and key must not be null");
    return FTOP_INVALID_ARGUMENT;
  }
  return guarded([&] { return copy_out(cfg->cfg.get(key), buf, cap); });
}

ftop_status ftop_run(const ftop_config* cfg, ftop_result** out) {
  if (!cfg || !out) {
    set_error("cfg and out must not be null");
    return FTOP_INVALID_ARGUMENT;
  }
  return guarded([&] {
    auto result = new ftop_result{fourtop::runner::run_experiment(cfg->cfg)};
    *out = result;
    return FTOP_OK;
  });
}

void ftop_result_destroy(ftop_result* r) { delete r; }

int ftop_result_exit_code(const ftop_result* r) {
  return r ? r->res.exit_code : 1;
}

ftop_status ftop_result_scalars(const ftop_result* r, double* compliance,
                                double* vol_or_mass_fraction,
                                double* gray_fraction, int* epochs) {
  if (!r) {
    set_error("result must not be null");
    return FTOP_INVALID_ARGUMENT;
  }
  if (compliance) *compliance = r->res.final_compliance;
  if (vol_or_mass_fraction) *vol_or_mass_fraction = r->res.final_fraction;
  if (gray_fraction) *gray_fraction = r->res.final_gray;
  if (epochs) *epochs = r->res.epochs;
  return FTOP_OK;
}

ftop_status ftop_result_feature_sizes(const ftop_result* r, double* min_t,
                                      double* median_t, double* max_t) {
  if (!r) {
    set_error("result must not be null");
    return FTOP_INVALID_ARGUMENT;
  }
  if (min_t) *min_t = r->res.features.min_thickness;
  if (median_t) *median_t = r->res.features.median_thickness;
  if (max_t) *max_t = r->res.features.max_thickness;
  return FTOP_OK;
}

size_t ftop_result_history_rows(const ftop_result* r) {
  return r ? r->res.history.size() : 0;
}

ftop_status ftop_result_history_row(const ftop_result* r, size_t row,
                                    double cols[7]) {
  if (!r || !cols) {
    set_error("result and cols must not be null");
    return FTOP_INVALID_ARGUMENT;
  }
  if (row >= r->res.history.size()) {
    set_error("history row out of range");
    return FTOP_INVALID_ARGUMENT;
  }
  const auto& h = r->res.history[row];
  cols[0] = h.epoch;
  cols[1] = h.loss;
  cols[2] = h.compliance;
  cols[3] = h.vol_or_mass_fraction;
  cols[4] = h.gray_fraction;
  cols[5] = h.alpha;
  cols[6] = h.p;
  return FTOP_OK;
}

ftop_status ftop_result_out_dir(const ftop_result* r, char* buf, size_t cap) {
  if (!r) {
    set_error("result must not be null");
    return FTOP_INVALID_ARGUMENT;
  }
  return copy_out(r->res.dir.string(), buf, cap);
}

}  // extern "C"
