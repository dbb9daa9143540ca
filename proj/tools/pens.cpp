// Command-line front end: run, diagnose, fit-decay, compare-mild, envelope.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pens/pens.hpp"

namespace {

using nlohmann::ordered_json;

pens::RunConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  std::string text = path.empty() ? std::string() : pens::read_text_file(path);
  if (!text.empty() && text.back() != '\n') text += '\n';
  for (const auto& kv : overrides) text += kv + "\n";
  return pens::parse_config(text);
}

void write_json(const ordered_json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw pens::Error(pens::ErrorKind::io, "cannot write '" + path + "'");
  out << text;
}

// JSON numbers go through the shortest round-trip form as well.
ordered_json num(double x) { return ordered_json::parse(pens::format_double(x)); }

int cmd_run(const std::string& config, const std::vector<std::string>& overrides, bool dry_run, bool snapshots) {
  const pens::RunConfig cfg = load(config, overrides);
  if (dry_run) {
    std::cout << pens::serialize_config(cfg);
    return 0;
  }
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  pens::RunOptions opts;
  opts.diagnostics = cfg.diagnostics;
  std::size_t index = 0;
  if (snapshots) {
    opts.on_sample = [&](const pens::SpectralState& s) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%05zu.pens", index++);
      pens::write_snapshot(pens::to_real(s), (dir / name).string());
    };
  }
  const pens::RunResult res = pens::run(cfg.solver, opts);
  pens::TimeSeries series = res.series;
  if (!cfg.channels.empty()) {
    pens::TimeSeries picked;
    for (std::size_t i = 0; i < series.size(); ++i) {
      std::map<std::string, double> sample;
      for (const auto& name : cfg.channels) sample[name] = series.channel(name)[i];
      picked.add_sample(series.times()[i], sample);
    }
    series = picked;
  }
  pens::emit_timeseries(series, (dir / "timeseries.csv").string());
  pens::write_snapshot(res.final_state, (dir / "final.pens").string());
  std::cout << "steps=" << res.steps << " samples=" << series.size() << " out_dir=" << cfg.out_dir << "\n";
  return 0;
}

int cmd_diagnose(const std::string& path, double m, double s) {
  const pens::SimState state = pens::read_snapshot(path);
  pens::DiagnosticSettings settings = pens::DiagnosticSettings::defaults(state.grid.dim());
  if (std::isfinite(m)) settings.m = m;
  if (std::isfinite(s)) settings.s = s;
  const auto values = pens::sample_channels(pens::to_spectral(state), settings);
  std::cout << "t " << pens::format_double(state.t) << "\n";
  for (const auto& [name, value] : values) std::cout << name << " " << pens::format_double(value) << "\n";
  return 0;
}

int cmd_fit_decay(const std::string& csv, int d, double length, double m, std::vector<double> window,
                  std::vector<std::string> channels, const std::string& out) {
  const pens::TimeSeries series = pens::read_timeseries(csv);
  if (!std::isfinite(m)) m = pens::DiagnosticSettings::defaults(d).m;
  const double t_sat = pens::saturation_time(length);
  if (window.empty()) window = {1.0, std::min(t_sat, series.times().back())};
  if (window.size() != 2) throw pens::Error(pens::ErrorKind::invalid_argument, "--window takes two values");
  if (channels.empty()) {
    for (const auto& name : pens::default_decay_channels()) {
      if (series.has(name)) channels.push_back(name);
    }
  }
  const pens::DecayReport report = pens::fit_decay(series, channels, window[0], window[1], d, m, t_sat);
  write_json(pens::to_json(report), out);
  return 0;
}

int cmd_compare_mild(const std::string& config, const std::vector<std::string>& overrides, double tol, int max_iter,
                     const std::string& out) {
  const pens::RunConfig cfg = load(config, overrides);
  const pens::SimState initial = pens::initial_data(cfg.solver);
  const pens::PicardResult oracle = pens::picard_solve(initial, cfg.solver.t_end, cfg.solver.sample_every, tol, max_iter);

  pens::RunOptions opts;
  opts.diagnostics = cfg.diagnostics;
  std::vector<pens::SpectralField> stepper_v;
  opts.on_sample = [&](const pens::SpectralState& s) { stepper_v.push_back(s.v); };
  (void)pens::run(cfg.solver, initial, opts);

  const auto& traj = oracle.trajectory;
  if (stepper_v.size() != traj.v.size()) {
    throw pens::Error(pens::ErrorKind::invalid_argument, "stepper and oracle sample grids differ");
  }
  double max_dev = 0.0;
  for (std::size_t i = 1; i < traj.v.size(); ++i) {
    const double ref = pens::sobolev_norm(traj.v[i], 0.0, false);
    const double diff = pens::sobolev_norm(stepper_v[i] - traj.v[i], 0.0, false);
    if (ref > 0.0) max_dev = std::max(max_dev, diff / ref);
  }
  ordered_json j;
  j["max_relative_deviation_v"] = num(max_dev);
  j["final_relative_deviation_v"] = num(pens::sobolev_norm(stepper_v.back() - traj.v.back(), 0.0, false) /
                                        pens::sobolev_norm(traj.v.back(), 0.0, false));
  j["iterations"] = oracle.distances.size();
  j["converged"] = oracle.converged;
  ordered_json d = ordered_json::array(), r = ordered_json::array();
  for (double x : oracle.distances) d.push_back(num(x));
  for (double x : oracle.ratios) r.push_back(num(x));
  j["distances"] = d;
  j["ratios"] = r;
  write_json(j, out);
  return 0;
}

int cmd_envelope(const std::string& profile, double k, int d, double t0, double t1, int points,
                 const std::string& out) {
  if (points < 2 || !(t0 > 0.0) || !(t1 > t0)) {
    throw pens::Error(pens::ErrorKind::invalid_argument, "envelope needs 0 < t0 < t1 and points >= 2");
  }
  const pens::RadialProfile p = pens::RadialProfile::parse(profile);
  std::vector<double> times, values;
  for (int i = 0; i < points; ++i) {
    const double t = t0 * std::pow(t1 / t0, static_cast<double>(i) / (points - 1));
    times.push_back(t);
    values.push_back(pens::heat_envelope(p, d, k, t));
  }
  ordered_json j;
  j["profile"] = profile;
  j["d"] = d;
  j["k"] = num(k);
  j["window"] = {num(t0), num(t1)};
  if (points >= 10) {
    const pens::PowerLawFit fit = pens::fit_power_law(times, values, t0, t1);
    j["exponent"] = num(fit.exponent);
    j["residual"] = num(fit.residual);
  } else {
    j["exponent"] = num(std::log(values.back() / values.front()) / std::log(t1 / t0));
  }
  j["expected"] = num(-(0.25 * d + 0.5 * k));
  ordered_json samples = ordered_json::array();
  for (std::size_t i = 0; i < times.size(); ++i) samples.push_back({num(times[i]), num(values[i])});
  j["samples"] = samples;
  write_json(j, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pens: coupled Euler/Navier-Stokes decay experiments"};
  app.require_subcommand(1);

  std::string config, out, csv, snapshot, profile = "gaussian";
  std::vector<std::string> overrides, channels;
  std::vector<double> window;
  bool dry_run = false, snapshots = false;
  double m = NAN, s = NAN, length = 64.0 * std::numbers::pi, tol = 1e-10, k = 0.0, t0 = 100.0, t1 = 1e4;
  int d = 2, max_iter = 30, points = 41;

  auto* run = app.add_subcommand("run", "integrate a config, write timeseries.csv and snapshots");
  run->add_option("-c,--config", config, "key=value config file (omit for defaults)");
  run->add_option("--set", overrides, "extra key=value lines, applied after the file");
  run->add_flag("--dry-run", dry_run, "print the validated config and exit");
  run->add_flag("--snapshots", snapshots, "write a snapshot at every sample");

  auto* diagnose = app.add_subcommand("diagnose", "norm table of a snapshot");
  diagnose->add_option("snapshot", snapshot)->required();
  diagnose->add_option("--m", m);
  diagnose->add_option("--s", s);

  auto* fit = app.add_subcommand("fit-decay", "fit power laws to a time-series CSV");
  fit->add_option("csv", csv)->required();
  fit->add_option("--d", d)->check(CLI::IsMember({2, 3}));
  fit->add_option("--L", length, "box length (sets the saturation time)");
  fit->add_option("--m", m);
  fit->add_option("--window", window)->expected(2);
  fit->add_option("--channels", channels)->delimiter(',');
  fit->add_option("-o,--out", out);

  auto* compare = app.add_subcommand("compare-mild", "stepper vs Picard oracle on one config");
  compare->add_option("-c,--config", config);
  compare->add_option("--set", overrides);
  compare->add_option("--tol", tol);
  compare->add_option("--max-iter", max_iter);
  compare->add_option("-o,--out", out);

  auto* envelope = app.add_subcommand("envelope", "continuous heat envelope and its decay exponent");
  envelope->add_option("--profile", profile);
  envelope->add_option("--k", k);
  envelope->add_option("--d", d);
  envelope->add_option("--t0", t0);
  envelope->add_option("--t1", t1);
  envelope->add_option("--points", points);
  envelope->add_option("-o,--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*run) return cmd_run(config, overrides, dry_run, snapshots);
    if (*diagnose) return cmd_diagnose(snapshot, m, s);
    if (*fit) return cmd_fit_decay(csv, d, length, m, window, channels, out);
    if (*compare) return cmd_compare_mild(config, overrides, tol, max_iter, out);
    if (*envelope) return cmd_envelope(profile, k, d, t0, t1, points, out);
  } catch (const pens::Error& e) {
    std::cerr << "error[" << pens::to_string(e.kind()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
