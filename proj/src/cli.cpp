#include "stopmc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stopmc/error.hpp"
#include "stopmc/reference.hpp"
#include "stopmc/stats.hpp"

namespace stopmc {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad level '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("bad level '" + s + "'");
  return v;
}

std::string sidecar_path(const std::string& path) { return path + ".meta.json"; }

void write_with_manifest(const std::string& path, const std::string& content, const RunManifest& m) {
  write_atomic(path, content);
  write_atomic(sidecar_path(path), manifest_json(m));
}

}  // namespace

PayoffKind parse_payoff(const std::string& name) {
  if (name == "exit-time") return PayoffKind::exit_time;
  if (name == "exit-time-running") return PayoffKind::exit_time_running;
  if (name == "constant") return PayoffKind::constant;
  throw ConfigError("unknown payoff '" + name + "'");
}

std::string to_string(PayoffKind kind) {
  switch (kind) {
    case PayoffKind::exit_time: return "exit-time";
    case PayoffKind::exit_time_running: return "exit-time-running";
    case PayoffKind::constant: return "constant";
  }
  return "?";
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const int lo = parse_int(trim(text.substr(0, colon)));
    const int hi = parse_int(trim(text.substr(colon + 1)));
    if (lo > hi) throw ConfigError("empty level range '" + text + "'");
    for (int l = lo; l <= hi; ++l) out.push_back(l);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(trim(item)));
  }
  if (out.empty()) throw ConfigError("no levels given");
  for (int l : out) {
    if (l < 0) throw ConfigError("negative level in '" + text + "'");
  }
  return out;
}

ProblemSpec manifest_problem(const RunManifest& m) {
  if (m.payoff == PayoffKind::constant) {
    StructureHints hints;
    hints.zero_running = true;
    hints.zero_potential = true;
    return make_preset(m.problem).with_payoff(constant_payoff(m.constant_value), m.problem + "-constant", hints);
  }
  const auto profile =
      m.payoff == PayoffKind::exit_time ? ExitTimeProfile::terminal_time : ExitTimeProfile::running_unit;
  return make_preset(m.problem, profile);
}

MlmcConfig manifest_config(const RunManifest& m, Estimator estimator, double eps) {
  MlmcConfig c;
  c.epsilon = eps;
  c.h0 = m.h0;
  c.refinement = m.refinement;
  c.estimator = estimator;
  c.m_rule = m.m_rule;
  c.L_min = m.L_min;
  c.L_max = m.L_max;
  c.initial_samples = m.initial_samples;
  c.seed = m.seed;
  c.threads = m.threads;
  return c;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["subcommand"] = m.subcommand;
  j["problem"] = m.problem;
  j["payoff"] = to_string(m.payoff);
  if (m.payoff == PayoffKind::constant) j["constant_value"] = m.constant_value;
  std::vector<std::string> est;
  for (auto e : m.estimators) est.push_back(to_string(e));
  j["estimators"] = est;
  if (m.subcommand == "run") {
    j["eps"] = m.eps;
    j["L_min"] = m.L_min;
    j["L_max"] = m.L_max;
    j["initial_samples"] = m.initial_samples;
  } else {
    j["levels"] = m.levels;
    j["samples"] = m.samples;
  }
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["out"] = m.out;
  j["truncation"] = m.truncation;
  j["refine_factor"] = m.refinement;
  j["h0"] = m.h0;
  j["m_rule"] = to_string(m.m_rule);
  return j.dump(2) + "\n";
}

double problem_reference(const RunManifest& m) {
  if (m.payoff == PayoffKind::constant) return m.constant_value;
  const SeriesTruncation trunc{m.truncation};
  const auto start = make_preset(m.problem).start();
  if (m.problem == "cube3d") return cube_exit_solution(start, 0.0, trunc);
  if (m.problem == "cube1d") return slab_exit_solution(start[0], 0.0, trunc);
  return std::numeric_limits<double>::quiet_NaN();
}

std::string levels_csv(const RunManifest& m) {
  const auto spec = manifest_problem(m);
  if (m.samples < 1) throw ConfigError("--samples must be positive");
  std::ostringstream csv;
  csv << kLevelsHeader << "\n";
  for (auto est : m.estimators) {
    const auto config = manifest_config(m, est, 1.0);
    config.validate(spec);
    for (int l : m.levels) {
      const auto params = level_params(config, l);
      const auto s = sample_level(spec, params, boundary_mode(est), m.seed, 0, m.samples, m.threads);
      double kurt = std::numeric_limits<double>::quiet_NaN();
      try {
        kurt = kurtosis(s);
      } catch (const UndefinedKurtosis&) {
      }
      csv << to_string(est) << ',' << l << ',' << num(params.h_fine()) << ',' << s.count << ',' << num(s.mean())
          << ',' << num(s.variance()) << ',' << num(s.fine_mean()) << ',' << num(s.fine_variance()) << ','
          << num(kurt) << ',' << num(s.mean_cost()) << ',' << num(normalized_cost(s, spec, params.h_fine())) << "\n";
    }
  }
  return csv.str();
}

RunTables run_csv(const RunManifest& m) {
  if (m.eps.empty()) throw ConfigError("--eps list is empty");
  const auto spec = manifest_problem(m);
  const double reference = problem_reference(m);
  RunTables t;
  std::ostringstream summary;
  std::ostringstream per_level;
  summary << kRunHeader << "\n";
  per_level << kRunLevelsHeader << "\n";
  for (auto est : m.estimators) {
    for (double eps : m.eps) {
      MlmcResult r;
      std::string status = "ok";
      try {
        r = run(spec, manifest_config(m, est, eps));
      } catch (const LevelCapError& e) {
        r = e.partial();
        status = "level_cap";
        t.level_cap = true;
      }
      const double err = std::fabs(r.estimate - reference);
      summary << to_string(est) << ',' << short_num(eps) << ',' << num(r.estimate) << ',' << num(reference) << ','
              << num(err) << ',' << r.chosen_L << ',' << r.total_cost << ','
              << num(eps * eps * static_cast<double>(r.total_cost)) << ',' << status << "\n";
      for (const auto& lv : r.levels) {
        per_level << to_string(est) << ',' << short_num(eps) << ',' << lv.level << ',' << num(lv.h) << ','
                  << lv.samples << ',' << num(lv.mean) << ',' << num(lv.variance) << ',' << num(lv.cost) << "\n";
      }
    }
  }
  t.summary = summary.str();
  t.per_level = per_level.str();
  return t;
}

double reference_value(const RunManifest& m) {
  const SeriesTruncation trunc{m.truncation};
  trunc.validate();
  if (m.problem == "cube3d") {
    const std::vector<double> x = m.point.empty() ? std::vector<double>(3, 0.0) : m.point;
    if (x.size() != 3) throw ConfigError("cube3d needs a 3-component --point");
    return cube_exit_solution(x, m.time, trunc);
  }
  if (m.problem == "cube1d") {
    if (m.point.size() > 1) throw ConfigError("cube1d needs a 1-component --point");
    return slab_exit_solution(m.point.empty() ? 0.0 : m.point[0], m.time, trunc);
  }
  throw ConfigError("no reference solution for problem '" + m.problem + "'");
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into '" + path + "'");
  }
}

std::string per_level_path(const std::string& path) {
  std::filesystem::path p(path);
  const auto stem = p.stem().string();
  return (p.parent_path() / (stem + "_levels.csv")).string();
}

int cmd_levels(const RunManifest& m, std::ostream& out) {
  if (m.out.empty()) throw ConfigError("--out is required");
  write_with_manifest(m.out, levels_csv(m), m);
  out << "wrote " << m.out << "\n";
  return kExitOk;
}

int cmd_run(const RunManifest& m, std::ostream& out) {
  if (m.out.empty()) throw ConfigError("--out is required");
  const auto t = run_csv(m);
  write_with_manifest(m.out, t.summary, m);
  const auto nl = per_level_path(m.out);
  write_with_manifest(nl, t.per_level, m);
  out << "wrote " << m.out << " and " << nl << "\n";
  if (t.level_cap) {
    out << "level cap reached for at least one eps (status column)\n";
    return kExitLevelCap;
  }
  return kExitOk;
}

int cmd_reference(const RunManifest& m, std::ostream& out) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10f", reference_value(m));
  out << buf << "\n";
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilevel Monte Carlo for stopped diffusions"};
  app.set_config("--config", "", "key = value config file; command-line flags take precedence");
  app.require_subcommand(1);

  RunManifest m;
  std::string payoff = "exit-time";
  std::vector<std::string> estimators{"new2"};
  std::string levels = "0:4";
  std::string m_rule = "2^l";

  app.add_option("--problem", m.problem, "cube3d, cube1d or ball3d")->check(CLI::IsMember(preset_names()));
  app.add_option("--payoff", payoff, "exit-time, exit-time-running or constant");
  app.add_option("--constant-value", m.constant_value, "g for the constant payoff");
  app.add_option("--estimator", estimators, "orig, new1, new2 (comma separated)")->delimiter(',');
  app.add_option("--eps", m.eps, "target accuracies (comma separated)")->delimiter(',');
  app.add_option("--levels", levels, "levels: 0:4 or 1,2,3");
  app.add_option("--samples", m.samples, "samples per level");
  app.add_option("--seed", m.seed, "random seed");
  app.add_option("--threads", m.threads, "sampling threads")->check(CLI::PositiveNumber);
  app.add_option("--out", m.out, "output CSV path");
  app.add_option("--h0", m.h0, "level-0 timestep");
  app.add_option("--refine-factor", m.refinement, "timestep refinement factor K");
  app.add_option("--m-rule", m_rule, "2^l, 2^l/sqrt(l) or const:<m>");
  app.add_option("--L-min", m.L_min, "initial finest level");
  app.add_option("--L-max", m.L_max, "level cap");
  app.add_option("--pilot", m.initial_samples, "pilot samples on levels 0..L-min");
  app.add_option("--truncation", m.truncation, "odd series cutoff");
  app.add_option("--point", m.point, "reference point (comma separated)")->delimiter(',');
  app.add_option("--time", m.time, "reference time");

  auto* levels_cmd = app.add_subcommand("levels", "per-level diagnostics CSV");
  auto* run_cmd = app.add_subcommand("run", "eps-targeted MLMC runs");
  auto* ref_cmd = app.add_subcommand("reference", "print the analytic reference value");
  for (auto* sub : {levels_cmd, run_cmd, ref_cmd}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    m.subcommand = app.get_subcommands().front()->get_name();
    m.payoff = parse_payoff(payoff);
    m.estimators.clear();
    for (const auto& e : estimators) m.estimators.push_back(parse_estimator(e));
    m.levels = parse_levels(levels);
    m.m_rule = parse_split_rule(m_rule);
    if (m.subcommand == "levels") return cmd_levels(m, out);
    if (m.subcommand == "run") return cmd_run(m, out);
    return cmd_reference(m, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SimulationFailure& e) {
    err << "simulation failure: " << e.what() << "\n";
    return kExitSimulation;
  } catch (const LevelCapError& e) {
    err << "level cap: " << e.what() << "\n";
    return kExitLevelCap;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace stopmc
