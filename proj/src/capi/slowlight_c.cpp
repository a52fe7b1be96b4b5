#include "slowlight/slowlight.h"

#include <cstring>
#include <iostream>
#include <new>
#include <string>

#include "analysis.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "error.hpp"

struct sl_config {
  slowlight::Config cfg;
};

struct sl_trace {
  slowlight::DetectorTrace trace;
};

namespace {

thread_local std::string g_error;
thread_local sl_parse_category g_category = SL_PARSE_NONE;
thread_local int g_line = 0;

sl_status fail(sl_status status, const char* what) {
  g_error = what;
  return status;
}

sl_parse_category category_of(slowlight::ParseError::Category c) {
  using C = slowlight::ParseError::Category;
  switch (c) {
    case C::syntax: return SL_PARSE_SYNTAX;
    case C::range: return SL_PARSE_RANGE;
    case C::missing_key: return SL_PARSE_MISSING_KEY;
    case C::unknown_key: return SL_PARSE_UNKNOWN_KEY;
    case C::usage: return SL_PARSE_USAGE;
  }
  return SL_PARSE_NONE;
}

template <class Fn>
sl_status guarded(Fn&& fn) {
  g_error.clear();
  g_category = SL_PARSE_NONE;
  g_line = 0;
  try {
    fn();
    return SL_OK;
  } catch (const slowlight::ParseError& e) {
    g_category = category_of(e.category());
    g_line = e.line();
    return fail(SL_ERR_PARSE, e.what());
  } catch (const slowlight::Error& e) {
    switch (e.kind()) {
      case slowlight::ErrorKind::invalid_argument: return fail(SL_ERR_ARGUMENT, e.what());
      case slowlight::ErrorKind::parse: return fail(SL_ERR_PARSE, e.what());
      case slowlight::ErrorKind::numeric: return fail(SL_ERR_NUMERIC, e.what());
      case slowlight::ErrorKind::io: return fail(SL_ERR_IO, e.what());
    }
    return fail(SL_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SL_ERR_INTERNAL, "unknown error");
  }
}

slowlight::CommandOptions to_options(const sl_options* o) {
  slowlight::CommandOptions out;
  out.log = &std::cerr;
  if (!o) return out;
  if (o->out_dir) out.out_dir = o->out_dir;
  out.threads = o->threads;
  out.seed = o->seed;
  if (o->input) out.input = o->input;
  if (o->model) out.model = slowlight::fit_model_from_string(o->model);
  if (o->quiet) out.log = nullptr;
  return out;
}

template <class Cmd>
sl_status run_command(const sl_config* config, const sl_options* options, Cmd cmd) {
  if (!config) return fail(SL_ERR_ARGUMENT, "config handle is NULL");
  return guarded([&] {
    slowlight::CommandOptions opt;
    try {
      opt = to_options(options);
    } catch (const slowlight::InvalidArgument& e) {
      throw slowlight::ParseError(slowlight::ParseError::Category::usage, 0, e.what());
    }
    cmd(config->cfg, opt);
  });
}

}  // namespace

extern "C" {

const char* sl_version(void) { return slowlight::version(); }

const char* sl_status_string(sl_status status) {
  switch (status) {
    case SL_OK: return "ok";
    case SL_ERR_INTERNAL: return "internal error";
    case SL_ERR_PARSE: return "parse error";
    case SL_ERR_NUMERIC: return "numeric error";
    case SL_ERR_IO: return "I/O error";
    case SL_ERR_ARGUMENT: return "invalid argument";
  }
  return "unknown status";
}

const char* sl_last_error(void) { return g_error.c_str(); }
sl_parse_category sl_last_parse_category(void) { return g_category; }
int sl_last_error_line(void) { return g_line; }

void sl_options_init(sl_options* options) {
  if (!options) return;
  std::memset(options, 0, sizeof *options);
  options->threads = 1;
}

sl_status sl_config_parse(const char* text, sl_config** out) {
  if (!text || !out) return fail(SL_ERR_ARGUMENT, "NULL argument");
  *out = nullptr;
  return guarded([&] { *out = new sl_config{slowlight::parse_config(text)}; });
}

sl_status sl_config_load(const char* path, sl_config** out) {
  if (!path || !out) return fail(SL_ERR_ARGUMENT, "NULL argument");
  *out = nullptr;
  return guarded([&] { *out = new sl_config{slowlight::load_config(path)}; });
}

void sl_config_free(sl_config* config) { delete config; }

sl_status sl_config_to_text(const sl_config* config, char** out) {
  if (!config || !out) return fail(SL_ERR_ARGUMENT, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    const std::string text = config->cfg.to_text();
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

sl_status sl_config_hash(const sl_config* config, uint64_t* out) {
  if (!config || !out) return fail(SL_ERR_ARGUMENT, "NULL argument");
  return guarded([&] { *out = config->cfg.hash(); });
}

void sl_string_free(char* s) { delete[] s; }

sl_status sl_cmd_spectrum(const sl_config* config, const sl_options* options) {
  return run_command(config, options, slowlight::cmd_spectrum);
}
sl_status sl_cmd_run(const sl_config* config, const sl_options* options) {
  return run_command(config, options, slowlight::cmd_run);
}
sl_status sl_cmd_sweep(const sl_config* config, const sl_options* options) {
  return run_command(config, options, slowlight::cmd_sweep);
}
sl_status sl_cmd_fit(const sl_config* config, const sl_options* options) {
  return run_command(config, options, slowlight::cmd_fit);
}

sl_status sl_run_trace(const sl_config* config, sl_trace** out) {
  if (!config || !out) return fail(SL_ERR_ARGUMENT, "NULL argument");
  *out = nullptr;
  return guarded([&] { *out = new sl_trace{slowlight::run_configured(config->cfg)}; });
}

size_t sl_trace_size(const sl_trace* trace) { return trace ? trace->trace.size() : 0; }

sl_status sl_trace_column_data(const sl_trace* trace, sl_trace_column column, const double** data,
                               size_t* size) {
  if (!trace || !data || !size) return fail(SL_ERR_ARGUMENT, "NULL argument");
  const auto& t = trace->trace;
  switch (column) {
    case SL_TRACE_T: *data = t.t.data(); break;
    case SL_TRACE_FWD: *data = t.fwd.data(); break;
    case SL_TRACE_BWD: *data = t.bwd.data(); break;
    case SL_TRACE_SPIN: *data = t.spin.data(); break;
    default: return fail(SL_ERR_ARGUMENT, "unknown trace column");
  }
  *size = t.size();
  g_error.clear();
  return SL_OK;
}

void sl_trace_free(sl_trace* trace) { delete trace; }

sl_status sl_dephasing_time(double delta_S_khz, double* out_us) {
  if (!out_us) return fail(SL_ERR_ARGUMENT, "NULL argument");
  return guarded([&] { *out_us = slowlight::dephasing_time(delta_S_khz); });
}

sl_status sl_balance_residual(double omega_C, double g_C, double omega_A, double g_A, double* out) {
  if (!out) return fail(SL_ERR_ARGUMENT, "NULL argument");
  return guarded([&] { *out = slowlight::balance_residual(omega_C, g_C, omega_A, g_A); });
}

sl_status sl_fit_decay(const double* t, const double* intensity, size_t n, const char* model,
                       sl_fit_result* out) {
  if (!t || !intensity || !out) return fail(SL_ERR_ARGUMENT, "NULL argument");
  return guarded([&] {
    std::vector<slowlight::DecayPoint> points(n);
    for (size_t i = 0; i < n; ++i) points[i] = {t[i], intensity[i]};
    const auto m = model ? slowlight::fit_model_from_string(model) : slowlight::FitModel::gaussian_sq;
    const auto r = slowlight::fit_decay(points, m);
    *out = {r.I0, r.tau, r.rms_residual, r.n_points, r.iterations, r.converged ? 1 : 0,
            r.decaying ? 1 : 0};
  });
}

}  // extern "C"
