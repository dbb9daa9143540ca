#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pens/diagnostics.hpp"
#include "pens/error.hpp"
#include "pens/initial_data.hpp"
#include "pens/state.hpp"

namespace pens {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

/// Everything a config file can set.
struct RunConfig {
  SolverConfig solver;
  DiagnosticSettings diagnostics = DiagnosticSettings::defaults(2);
  std::vector<std::string> channels;  // empty: all
  std::string out_dir = ".";

  void validate() const {
    solver.validate();
    const double d = solver.d;
    if (!(diagnostics.m > 0.5 * d + 1.0)) {
      throw Error(ErrorKind::config, "m must exceed d/2 + 1");
    }
    if (!(diagnostics.s > diagnostics.m - 2.0 && diagnostics.s <= diagnostics.m - 1.0)) {
      throw Error(ErrorKind::config, "s must lie in (m-2, m-1]");
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw Error(ErrorKind::config, where + ": cannot parse '" + std::string(text) + "' as a number");
  }
  return value;
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace detail

/// Parses flat key=value text. Blank lines and lines starting with '#' are skipped.
inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  bool m_set = false, s_set = false;
  std::size_t line_no = 0;
  std::size_t last_line = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto line = detail::trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.empty() || line.front() == '#') continue;
    last_line = line_no;
    const std::string where = "line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::config, where + ": expected key=value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    auto num = [&] { return detail::parse_number<double>(value, where); };
    if (key == "d") {
      cfg.solver.d = detail::parse_number<int>(value, where);
    } else if (key == "N") {
      cfg.solver.n = detail::parse_number<std::size_t>(value, where);
    } else if (key == "L") {
      cfg.solver.length = num();
    } else if (key == "dt_max") {
      cfg.solver.dt_max = num();
    } else if (key == "cfl_safety") {
      cfg.solver.cfl_safety = num();
    } else if (key == "t_end") {
      cfg.solver.t_end = num();
    } else if (key == "sample_every") {
      cfg.solver.sample_every = num();
    } else if (key == "preset") {
      cfg.solver.preset = std::string(value);
    } else if (key == "epsilon") {
      cfg.solver.epsilon = num();
    } else if (key == "seed") {
      cfg.solver.seed = detail::parse_number<std::uint64_t>(value, where);
    } else if (key == "m") {
      cfg.diagnostics.m = num();
      m_set = true;
    } else if (key == "s") {
      cfg.diagnostics.s = num();
      s_set = true;
    } else if (key == "channels") {
      cfg.channels = detail::split_list(value);
    } else if (key == "out_dir") {
      cfg.out_dir = std::string(value);
    } else {
      throw Error(ErrorKind::config, where + ": unknown key '" + key + "'");
    }
    // Range checks are reported against the line that set the value.
    try {
      if (key == "d" && cfg.solver.d != 2 && cfg.solver.d != 3) throw Error(ErrorKind::config, "d must be 2 or 3");
      if (key == "N" || key == "d" || key == "L") {
        if (key == "N") (void)Grid(2, cfg.solver.n, 1.0);
        if (key == "L" && !(cfg.solver.length > 0.0)) throw Error(ErrorKind::config, "L must be positive");
      }
      if (key == "preset") {
        const auto& names = preset_names();
        if (std::find(names.begin(), names.end(), cfg.solver.preset) == names.end()) {
          throw Error(ErrorKind::config, "unknown preset '" + cfg.solver.preset + "'");
        }
      }
    } catch (const Error& e) {
      throw Error(ErrorKind::config, where + ": " + e.what());
    }
  }
  const DiagnosticSettings def = DiagnosticSettings::defaults(cfg.solver.d);
  if (!m_set) cfg.diagnostics.m = def.m;
  if (!s_set) cfg.diagnostics.s = m_set ? cfg.diagnostics.m - 1.25 : def.s;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::config, "line " + std::to_string(last_line) + ": " + e.what());
  }
  return cfg;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

inline std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  auto put = [&](const char* key, const std::string& value) { out += std::string(key) + "=" + value + "\n"; };
  put("d", std::to_string(cfg.solver.d));
  put("N", std::to_string(cfg.solver.n));
  put("L", format_double(cfg.solver.length));
  put("dt_max", format_double(cfg.solver.dt_max));
  put("cfl_safety", format_double(cfg.solver.cfl_safety));
  put("t_end", format_double(cfg.solver.t_end));
  put("sample_every", format_double(cfg.solver.sample_every));
  put("preset", cfg.solver.preset);
  put("epsilon", format_double(cfg.solver.epsilon));
  put("seed", std::to_string(cfg.solver.seed));
  put("m", format_double(cfg.diagnostics.m));
  put("s", format_double(cfg.diagnostics.s));
  std::string list;
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) list += (i ? "," : "") + cfg.channels[i];
  put("channels", list);
  put("out_dir", cfg.out_dir);
  return out;
}

// ---- snapshots ----

inline constexpr std::uint8_t snapshot_version = 1;

namespace detail {

template <typename T>
void put_raw(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <typename T>
T get_raw(std::string_view& buf) {
  if (buf.size() < sizeof(T)) throw Error(ErrorKind::format, "truncated payload");
  T value;
  std::memcpy(&value, buf.data(), sizeof(T));
  buf.remove_prefix(sizeof(T));
  return value;
}

}  // namespace detail

inline std::string encode_snapshot(const SimState& s) {
  const Grid& g = s.grid;
  std::string buf = "PENS";
  detail::put_raw<std::uint8_t>(buf, snapshot_version);
  detail::put_raw<std::uint8_t>(buf, static_cast<std::uint8_t>(g.dim()));
  detail::put_raw<std::uint16_t>(buf, 0);
  detail::put_raw<std::uint64_t>(buf, g.n());
  detail::put_raw<double>(buf, g.length());
  detail::put_raw<double>(buf, s.t);
  for (const RealField* f : {&s.rho, &s.u, &s.v}) {
    const auto v = f->values();
    buf.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  return buf;
}

/// `expected_dim` (0 = any) guards against loading a state of the wrong dimension.
inline SimState decode_snapshot(std::string_view buf, int expected_dim = 0) {
  if (buf.size() < 4 || buf.substr(0, 4) != "PENS") throw Error(ErrorKind::format, "bad magic, expected \"PENS\"");
  buf.remove_prefix(4);
  const auto version = detail::get_raw<std::uint8_t>(buf);
  if (version != snapshot_version) {
    throw Error(ErrorKind::format, "unsupported version " + std::to_string(version));
  }
  const int d = detail::get_raw<std::uint8_t>(buf);
  (void)detail::get_raw<std::uint16_t>(buf);
  const auto n = detail::get_raw<std::uint64_t>(buf);
  const double length = detail::get_raw<double>(buf);
  const double t = detail::get_raw<double>(buf);
  if (expected_dim != 0 && d != expected_dim) {
    throw Error(ErrorKind::format, "dimension mismatch: file has d=" + std::to_string(d) + ", expected d=" +
                                       std::to_string(expected_dim));
  }
  Grid g = [&] {
    try {
      return Grid(d, n, length);
    } catch (const Error& e) {
      throw Error(ErrorKind::format, std::string("invalid header: ") + e.what());
    }
  }();
  SimState s(g);
  s.t = t;
  const std::size_t need = (1 + 2 * static_cast<std::size_t>(d)) * g.real_size() * sizeof(double);
  if (buf.size() < need) throw Error(ErrorKind::format, "truncated payload");
  if (buf.size() > need) throw Error(ErrorKind::format, "trailing bytes after payload");
  for (RealField* f : {&s.rho, &s.u, &s.v}) {
    auto v = f->values();
    std::memcpy(v.data(), buf.data(), v.size() * sizeof(double));
    buf.remove_prefix(v.size() * sizeof(double));
  }
  return s;
}

inline void write_snapshot(const SimState& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  const std::string buf = encode_snapshot(s);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

inline SimState read_snapshot(const std::string& path, int expected_dim = 0) {
  return decode_snapshot(read_text_file(path), expected_dim);
}

// ---- time series CSV ----

inline std::string timeseries_csv(const TimeSeries& series) {
  if (series.empty()) throw Error(ErrorKind::invalid_argument, "cannot emit an empty time series");
  std::string out = "t";
  for (const auto& [name, values] : series.channels()) out += "," + name;
  out += "\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += format_double(series.times()[i]);
    for (const auto& [name, values] : series.channels()) out += "," + format_double(values[i]);
    out += "\n";
  }
  return out;
}

inline void emit_timeseries(const TimeSeries& series, const std::string& path) {
  const std::string text = timeseries_csv(series);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

inline TimeSeries parse_timeseries(std::string_view text) {
  std::vector<std::string> header;
  TimeSeries series;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto line = detail::trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.empty()) continue;
    const auto cells = detail::split_list(line);
    if (header.empty()) {
      if (cells.empty() || cells.front() != "t") throw Error(ErrorKind::format, "CSV header must start with 't'");
      header = cells;
      continue;
    }
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::format, "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                         " columns");
    }
    std::map<std::string, double> sample;
    const std::string where = "line " + std::to_string(line_no);
    double t = 0.0;
    try {
      t = detail::parse_number<double>(cells[0], where);
      for (std::size_t c = 1; c < cells.size(); ++c) sample[header[c]] = detail::parse_number<double>(cells[c], where);
    } catch (const Error& e) {
      throw Error(ErrorKind::format, e.what());
    }
    series.add_sample(t, sample);
  }
  if (header.empty()) throw Error(ErrorKind::format, "empty CSV");
  return series;
}

inline TimeSeries read_timeseries(const std::string& path) { return parse_timeseries(read_text_file(path)); }

}  // namespace pens
