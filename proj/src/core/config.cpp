#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "error.hpp"

namespace slowlight {

using Cat = ParseError::Category;

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::storage_T_us: return "storage_T_us";
    case SweepParameter::dark_interval_us: return "dark_interval_us";
    case SweepParameter::a_duration_us: return "a_duration_us";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Ctx {
  std::string key;   // section.key
  int line = 0;
};

[[noreturn]] void fail(Cat cat, const Ctx& c, const std::string& msg) {
  throw ParseError(cat, c.line, "line " + std::to_string(c.line) + ": " + c.key + ": " + msg);
}

double to_real(std::string_view v, const Ctx& c) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec == std::errc::result_out_of_range) fail(Cat::range, c, "value out of range");
  if (ec != std::errc() || ptr != end) fail(Cat::syntax, c, "expected a number, got '" + std::string(v) + "'");
  if (!std::isfinite(out)) fail(Cat::range, c, "value must be finite");
  return out;
}

int to_int(std::string_view v, const Ctx& c) {
  long long out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec == std::errc::result_out_of_range) fail(Cat::range, c, "value out of range");
  if (ec != std::errc() || ptr != end) fail(Cat::syntax, c, "expected an integer, got '" + std::string(v) + "'");
  if (out < -2147483647LL || out > 2147483647LL) fail(Cat::range, c, "value out of range");
  return static_cast<int>(out);
}

bool to_bool(std::string_view v, const Ctx& c) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(Cat::syntax, c, "expected true or false, got '" + std::string(v) + "'");
}

std::vector<double> to_list(std::string_view v, const Ctx& c) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = v.find(',', pos);
    const auto item = trim(v.substr(pos, comma == std::string_view::npos ? v.npos : comma - pos));
    if (item.empty()) fail(Cat::syntax, c, "empty list element");
    out.push_back(to_real(item, c));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

using Check = std::function<bool(double)>;

Check positive() { return [](double x) { return x > 0.0; }; }
Check non_negative() { return [](double x) { return x >= 0.0; }; }
Check any() { return [](double) { return true; }; }

struct Field {
  std::string section;
  std::string key;
  std::function<void(Config&, std::string_view, const Ctx&)> set;
  std::function<std::string(const Config&)> get;   // empty: not echoed
};

template <class T>
Field real_field(std::string section, std::string key, T Config::*member, Check ok,
                 const char* requirement) {
  return {std::move(section), std::move(key),
          [member, ok, requirement](Config& cfg, std::string_view v, const Ctx& c) {
            const double x = to_real(v, c);
            if (!ok(x)) fail(Cat::range, c, std::string("must be ") + requirement);
            cfg.*member = x;
          },
          [member](const Config& cfg) { return format_double(cfg.*member); }};
}

Field int_field(std::string section, std::string key, int Config::*member, int lo, int hi) {
  return {std::move(section), std::move(key),
          [member, lo, hi](Config& cfg, std::string_view v, const Ctx& c) {
            const int x = to_int(v, c);
            if (x < lo || x > hi) {
              fail(Cat::range, c, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            }
            cfg.*member = x;
          },
          [member](const Config& cfg) { return std::to_string(cfg.*member); }};
}

Field string_field(std::string section, std::string key, std::string Config::*member) {
  return {std::move(section), std::move(key),
          [member](Config& cfg, std::string_view v, const Ctx& c) {
            if (v.empty()) fail(Cat::range, c, "must not be empty");
            if (v.find('/') != v.npos || v.find('\\') != v.npos) {
              fail(Cat::range, c, "must be a bare file name");
            }
            cfg.*member = std::string(v);
          },
          [member](const Config& cfg) { return cfg.*member; }};
}

template <class E>
Field enum_field(std::string section, std::string key, E Config::*member,
                 std::vector<std::pair<std::string, E>> names) {
  return {std::move(section), std::move(key),
          [member, names](Config& cfg, std::string_view v, const Ctx& c) {
            for (const auto& [n, e] : names) {
              if (v == n) {
                cfg.*member = e;
                return;
              }
            }
            std::string choices;
            for (const auto& [n, e] : names) choices += (choices.empty() ? "" : ", ") + n;
            fail(Cat::range, c, "unknown value '" + std::string(v) + "' (expected " + choices + ")");
          },
          [member, names](const Config& cfg) {
            for (const auto& [n, e] : names) {
              if (cfg.*member == e) return n;
            }
            return std::string("?");
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    const std::string M = "medium", G = "grid", P = "protocol", S = "sweep", X = "spectrum",
                      F = "fit", O = "output";
    f.push_back(real_field(M, "gamma_opt", &Config::gamma_opt, positive(), "> 0"));
    f.push_back(real_field(M, "gamma_spin", &Config::gamma_spin, non_negative(), ">= 0"));
    f.push_back({M, "t2_spin_us",
                 [](Config& cfg, std::string_view v, const Ctx& c) {
                   const double t2 = to_real(v, c);
                   if (!(t2 > 0.0)) fail(Cat::range, c, "must be > 0");
                   cfg.gamma_spin = gamma_spin_from_t2(t2);
                 },
                 {}});
    f.push_back(real_field(M, "delta_S_khz", &Config::delta_S_khz, non_negative(), ">= 0"));
    f.push_back(real_field(M, "t1_opt_us", &Config::t1_opt_us, positive(), "> 0"));
    f.push_back(real_field(M, "t1_spin_us", &Config::t1_spin_us, positive(), "> 0"));
    f.push_back(enum_field<Distribution>(M, "distribution", &Config::distribution,
                                         {{"lorentzian", Distribution::lorentzian},
                                          {"gaussian", Distribution::gaussian},
                                          {"single", Distribution::single}}));
    f.push_back(int_field(M, "n_classes", &Config::n_classes, 1, 4096));
    f.push_back(real_field(M, "optical_depth", &Config::optical_depth, non_negative(), ">= 0"));
    f.push_back(real_field(M, "transit_time_us", &Config::transit_time_us, positive(), "> 0"));
    f.push_back(real_field(M, "g_C", &Config::g_C, positive(), "> 0"));
    f.push_back(real_field(M, "g_A", &Config::g_A, positive(), "> 0"));
    f.push_back(real_field(M, "optical_detuning", &Config::optical_detuning, any(), "finite"));

    f.push_back(int_field(G, "cells", &Config::cells, 1, 100000));
    f.push_back(real_field(G, "t_end_us", &Config::t_end_us, non_negative(), ">= 0"));
    f.push_back(real_field(G, "sample_rate", &Config::sample_rate, positive(), "> 0"));
    f.push_back(enum_field<Boundary>(G, "boundary", &Config::boundary,
                                     {{"open", Boundary::open}, {"reflecting", Boundary::reflecting}}));

    f.push_back(enum_field<ProtocolKind>(P, "kind", &Config::kind,
                                         {{"slow_light", ProtocolKind::slow_light},
                                          {"memory", ProtocolKind::memory},
                                          {"stationary", ProtocolKind::stationary}}));
    f.push_back(real_field(P, "probe_start_us", &Config::probe_start_us, non_negative(), ">= 0"));
    f.push_back(real_field(P, "probe_duration_us", &Config::probe_duration_us, positive(), "> 0"));
    f.push_back(real_field(P, "probe_fwhm_us", &Config::probe_fwhm_us, positive(), "> 0"));
    f.push_back(real_field(P, "probe_amplitude", &Config::probe_amplitude, any(), "finite"));
    f.push_back(enum_field<PulseShape>(P, "probe_shape", &Config::probe_shape,
                                       {{"gaussian", PulseShape::gaussian},
                                        {"rect", PulseShape::rect},
                                        {"raised_cosine", PulseShape::raised_cosine}}));
    f.push_back(real_field(P, "omega_C", &Config::omega_C, non_negative(), ">= 0"));
    f.push_back(real_field(P, "omega_A", &Config::omega_A, non_negative(), ">= 0"));
    // Power keys are resolved in parse_config once the calibration is known.
    f.push_back({P, "power_C_mW", {}, {}});
    f.push_back({P, "power_A_mW", {}, {}});
    f.push_back({P, "rabi_per_sqrt_mW", {}, {}});
    f.push_back(real_field(P, "retrieval_power_ratio", &Config::retrieval_power_ratio, positive(), "> 0"));
    f.push_back(real_field(P, "control_ramp_us", &Config::control_ramp_us, non_negative(), ">= 0"));
    f.push_back(real_field(P, "p_a_delay_us", &Config::p_a_delay_us, any(), "finite"));
    f.push_back(real_field(P, "storage_T_us", &Config::storage_T_us, non_negative(), ">= 0"));
    f.push_back(real_field(P, "a_duration_us", &Config::a_duration_us, positive(), "> 0"));
    f.push_back(real_field(P, "dark_interval_us", &Config::dark_interval_us, non_negative(), ">= 0"));
    f.push_back(real_field(P, "omega_Y", &Config::omega_Y, non_negative(), ">= 0"));
    f.push_back(real_field(P, "y_duration_us", &Config::y_duration_us, positive(), "> 0"));
    f.push_back(real_field(P, "y_delay_us", &Config::y_delay_us, non_negative(), ">= 0"));
    f.push_back(real_field(P, "y_detuning_mhz", &Config::y_detuning_mhz, any(), "finite"));
    f.push_back(real_field(P, "tail_us", &Config::tail_us, non_negative(), ">= 0"));

    f.push_back(enum_field<SweepParameter>(S, "parameter", &Config::sweep_parameter,
                                           {{"storage_T_us", SweepParameter::storage_T_us},
                                            {"dark_interval_us", SweepParameter::dark_interval_us},
                                            {"a_duration_us", SweepParameter::a_duration_us}}));
    f.push_back({S, "values",
                 [](Config& cfg, std::string_view v, const Ctx& c) { cfg.sweep_values = to_list(v, c); },
                 [](const Config& cfg) {
                   std::string s;
                   for (double x : cfg.sweep_values) s += (s.empty() ? "" : ", ") + format_double(x);
                   return s;
                 }});
    f.push_back(real_field(S, "max_residual", &Config::max_residual, non_negative(), ">= 0"));
    f.push_back({S, "keep_traces",
                 [](Config& cfg, std::string_view v, const Ctx& c) { cfg.keep_traces = to_bool(v, c); },
                 [](const Config& cfg) { return std::string(cfg.keep_traces ? "true" : "false"); }});

    f.push_back(real_field(X, "detuning_min", &Config::spectrum_min, any(), "finite"));
    f.push_back(real_field(X, "detuning_max", &Config::spectrum_max, any(), "finite"));
    f.push_back(int_field(X, "points", &Config::spectrum_points, 2, 1000000));

    f.push_back(enum_field<FitModel>(F, "model", &Config::fit_model,
                                     {{"gaussian_sq", FitModel::gaussian_sq},
                                      {"exponential", FitModel::exponential}}));

    f.push_back(string_field(O, "trace_csv", &Config::trace_csv));
    f.push_back(string_field(O, "summary_json", &Config::summary_json));
    f.push_back(string_field(O, "sweep_csv", &Config::sweep_csv));
    f.push_back(string_field(O, "spectrum_csv", &Config::spectrum_csv));
    f.push_back(string_field(O, "fit_json", &Config::fit_json));
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& f : fields()) {
    if (f.section == section && f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

Config parse_config(std::string_view text) {
  static const std::set<std::string, std::less<>> sections = {
      "medium", "grid", "protocol", "sweep", "spectrum", "fit", "output"};
  Config cfg;
  std::string section;
  std::map<std::string, int> seen;   // section.key -> line
  std::optional<double> power_C, power_A, calibration;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
    pos = nl == text.npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    Ctx ctx{"", line_no};
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError(Cat::syntax, line_no, "line " + std::to_string(line_no) + ": unterminated section header");
      }
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!sections.count(name)) {
        throw ParseError(Cat::unknown_key, line_no,
                         "line " + std::to_string(line_no) + ": unknown section [" + std::string(name) + "]");
      }
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == line.npos) {
      throw ParseError(Cat::syntax, line_no, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(Cat::syntax, line_no, "line " + std::to_string(line_no) + ": empty key");
    }
    if (section.empty()) {
      throw ParseError(Cat::syntax, line_no,
                       "line " + std::to_string(line_no) + ": key '" + std::string(key) + "' outside any section");
    }
    ctx.key = section + "." + std::string(key);
    const Field* field = find_field(section, key);
    if (!field) fail(Cat::unknown_key, ctx, "unknown key");
    if (auto [it, fresh] = seen.emplace(ctx.key, line_no); !fresh) {
      fail(Cat::syntax, ctx, "duplicate key (first set on line " + std::to_string(it->second) + ")");
    }
    if (key == "kind" && value.empty()) fail(Cat::missing_key, ctx, "value required");
    if (field->set) {
      field->set(cfg, value, ctx);
    } else {
      const double x = to_real(value, ctx);
      if (key == "rabi_per_sqrt_mW") {
        if (!(x > 0.0)) fail(Cat::range, ctx, "must be > 0");
        calibration = x;
      } else {
        if (!(x >= 0.0)) fail(Cat::range, ctx, "must be >= 0");
        (key == "power_C_mW" ? power_C : power_A) = x;
      }
    }
  }

  auto cross = [](Cat cat, const std::string& key, int line, const std::string& msg) {
    throw ParseError(cat, line, (line ? "line " + std::to_string(line) + ": " : std::string()) + key + ": " + msg);
  };
  auto line_of = [&](const std::string& key) {
    auto it = seen.find(key);
    return it == seen.end() ? 0 : it->second;
  };

  if (!seen.count("protocol.kind")) {
    throw ParseError(Cat::missing_key, 0, "protocol.kind: required key missing");
  }
  if (seen.count("medium.gamma_spin") && seen.count("medium.t2_spin_us")) {
    cross(Cat::syntax, "medium.t2_spin_us", line_of("medium.t2_spin_us"),
          "conflicts with medium.gamma_spin");
  }
  for (auto [power, omega, key] : {std::tuple{power_C, &cfg.omega_C, std::string("C")},
                                   std::tuple{power_A, &cfg.omega_A, std::string("A")}}) {
    if (!power) continue;
    const std::string pkey = "protocol.power_" + key + "_mW";
    if (seen.count("protocol.omega_" + key)) {
      cross(Cat::syntax, pkey, line_of(pkey), "conflicts with protocol.omega_" + key);
    }
    if (!calibration) cross(Cat::missing_key, "protocol.rabi_per_sqrt_mW", line_of(pkey),
                            "required when " + pkey + " is given");
    *omega = *calibration * std::sqrt(*power);
  }
  if (cfg.distribution == Distribution::single && cfg.n_classes != 1) {
    cross(Cat::range, "medium.n_classes", line_of("medium.n_classes"),
          "must be 1 for the single distribution");
  }
  if (!(cfg.spectrum_max > cfg.spectrum_min)) {
    cross(Cat::range, "spectrum.detuning_max", line_of("spectrum.detuning_max"),
          "must exceed spectrum.detuning_min");
  }
  if (cfg.kind != ProtocolKind::slow_light && cfg.probe_duration_us + cfg.p_a_delay_us < 0.0) {
    cross(Cat::range, "protocol.p_a_delay_us", line_of("protocol.p_a_delay_us"),
          "places the gate before the probe starts");
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file '" + path + "'");
  return parse_config(ss.str());
}

std::string Config::to_text() const {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (!f.get) continue;
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      out += "[" + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get(*this) + "\n";
  }
  return out;
}

std::uint64_t Config::hash() const { return fnv1a64(to_text()); }

MediumParams Config::medium() const {
  MediumParams m;
  m.gamma_opt = gamma_opt;
  m.gamma_spin = gamma_spin;
  m.delta_S_khz = delta_S_khz;
  m.t1_opt_us = t1_opt_us;
  m.t1_spin_us = t1_spin_us;
  m.g_C = g_C;
  m.g_A = g_A;
  m.length = 1.0;
  m.c = m.length / transit_time_us;
  m.optical_detuning = optical_detuning;
  m.set_optical_depth(optical_depth);
  return m;
}

Grid Config::grid() const { return Grid{cells, 1.0}; }

std::vector<SpectralClass> Config::classes() const {
  return make_spectral_classes(delta_S_khz, n_classes, distribution);
}

ExperimentSetup Config::setup() const { return {medium(), grid(), classes()}; }

ProtocolParams Config::protocol() const {
  ProtocolParams p;
  p.probe_start_us = probe_start_us;
  p.probe_duration_us = probe_duration_us;
  p.probe_fwhm_us = probe_fwhm_us;
  p.probe_amplitude = probe_amplitude;
  p.probe_shape = probe_shape;
  p.omega_C = omega_C;
  p.omega_A = omega_A;
  p.retrieval_power_ratio = retrieval_power_ratio;
  p.control_ramp_us = control_ramp_us;
  p.p_a_delay_us = p_a_delay_us;
  p.storage_T_us = storage_T_us;
  p.a_duration_us = a_duration_us;
  p.dark_interval_us = dark_interval_us;
  p.omega_Y = omega_Y;
  p.y_duration_us = y_duration_us;
  p.y_delay_us = y_delay_us;
  p.y_detuning = 2.0 * kPi * y_detuning_mhz;
  p.tail_us = tail_us;
  p.t_end_us = t_end_us;
  p.sample_rate = sample_rate;
  return p;
}

}  // namespace slowlight
