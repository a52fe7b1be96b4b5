#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "slowlight/slowlight.h"

namespace {

const char* kFast =
    "[medium]\n"
    "optical_depth = 30\n"
    "transit_time_us = 0.1\n"
    "distribution = single\n"
    "n_classes = 1\n"
    "[grid]\n"
    "cells = 25\n"
    "t_end_us = 60\n"
    "[protocol]\n"
    "kind = slow_light\n"
    "omega_C = 2\n";

struct ConfigHandle {
  sl_config* p = nullptr;
  ~ConfigHandle() { sl_config_free(p); }
};

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("version and status strings") {
  CHECK(std::strlen(sl_version()) > 0);
  CHECK(std::string(sl_status_string(SL_OK)) != std::string(sl_status_string(SL_ERR_PARSE)));
  CHECK(std::strlen(sl_status_string(static_cast<sl_status>(99))) > 0);
}

TEST_CASE("config parse, text and hash") {
  ConfigHandle c;
  REQUIRE(sl_config_parse(kFast, &c.p) == SL_OK);
  CHECK(std::string(sl_last_error()).empty());
  char* text = nullptr;
  REQUIRE(sl_config_to_text(c.p, &text) == SL_OK);
  ConfigHandle back;
  REQUIRE(sl_config_parse(text, &back.p) == SL_OK);
  sl_string_free(text);
  std::uint64_t h1 = 0, h2 = 0;
  REQUIRE(sl_config_hash(c.p, &h1) == SL_OK);
  REQUIRE(sl_config_hash(back.p, &h2) == SL_OK);
  CHECK(h1 == h2);
  CHECK(h1 != 0);
}

TEST_CASE("parse failures report category and line") {
  sl_config* c = nullptr;
  CHECK(sl_config_parse("[protocol]\nkind = memory\n[medium]\nn_classes = -3\n", &c) == SL_ERR_PARSE);
  CHECK(c == nullptr);
  CHECK(sl_last_parse_category() == SL_PARSE_RANGE);
  CHECK(sl_last_error_line() == 4);
  CHECK(std::string(sl_last_error()).find("medium.n_classes") != std::string::npos);

  CHECK(sl_config_parse("[medium]\n", &c) == SL_ERR_PARSE);
  CHECK(sl_last_parse_category() == SL_PARSE_MISSING_KEY);
  CHECK(sl_config_parse("[protocol]\nkind = memory\nbogus = 1\n", &c) == SL_ERR_PARSE);
  CHECK(sl_last_parse_category() == SL_PARSE_UNKNOWN_KEY);
  CHECK(sl_config_load("/nonexistent/x.cfg", &c) == SL_ERR_IO);
  CHECK(sl_config_parse(nullptr, &c) == SL_ERR_ARGUMENT);
  CHECK(sl_config_parse(kFast, nullptr) == SL_ERR_ARGUMENT);
}

TEST_CASE("in-memory run returns consistent columns") {
  ConfigHandle c;
  REQUIRE(sl_config_parse(kFast, &c.p) == SL_OK);
  sl_trace* tr = nullptr;
  REQUIRE(sl_run_trace(c.p, &tr) == SL_OK);
  const std::size_t n = sl_trace_size(tr);
  CHECK(n > 100);
  for (sl_trace_column col : {SL_TRACE_T, SL_TRACE_FWD, SL_TRACE_BWD, SL_TRACE_SPIN}) {
    const double* data = nullptr;
    std::size_t size = 0;
    REQUIRE(sl_trace_column_data(tr, col, &data, &size) == SL_OK);
    CHECK(size == n);
    for (std::size_t i = 0; i < size; ++i) REQUIRE(std::isfinite(data[i]));
  }
  const double* data = nullptr;
  std::size_t size = 0;
  CHECK(sl_trace_column_data(tr, static_cast<sl_trace_column>(7), &data, &size) == SL_ERR_ARGUMENT);
  sl_trace_free(tr);
}

TEST_CASE("numeric helpers") {
  double t2 = 0.0;
  REQUIRE(sl_dephasing_time(30.0, &t2) == SL_OK);
  CHECK(t2 == doctest::Approx(1e3 / (M_PI * 30.0)).scale(0.0));
  CHECK(sl_dephasing_time(0.0, &t2) == SL_ERR_ARGUMENT);

  double r = 1.0;
  REQUIRE(sl_balance_residual(5.0, 1.0, 5.0, 1.0, &r) == SL_OK);
  CHECK(r == 0.0);

  const std::vector<double> t{0, 4, 8};
  std::vector<double> I;
  for (double x : t) I.push_back(std::exp(-(x / 8.0) * (x / 8.0)));
  sl_fit_result f{};
  REQUIRE(sl_fit_decay(t.data(), I.data(), t.size(), "gaussian_sq", &f) == SL_OK);
  CHECK(f.tau == doctest::Approx(8.0).scale(0.0).epsilon(1e-6));
  CHECK(f.n_points == 3);
  CHECK(sl_fit_decay(t.data(), I.data(), 2, "gaussian_sq", &f) == SL_ERR_ARGUMENT);
  CHECK(sl_fit_decay(t.data(), I.data(), 3, "cubic", &f) == SL_ERR_ARGUMENT);
  CHECK(std::string(sl_last_error()).find("cubic") != std::string::npos);
}

}  // TEST_SUITE
