#pragma once

// Command-line front end. Everything lives here so tests can drive the
// subcommands in-process; tools/freepulse.cpp only forwards argv.

#include <algorithm>
#include <charconv>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "freepulse/chemistry.hpp"
#include "freepulse/device.hpp"
#include "freepulse/dynamics.hpp"
#include "freepulse/optimizer.hpp"
#include "freepulse/pulse.hpp"
#include "freepulse/qsl.hpp"
#include "freepulse/textfile.hpp"

namespace freepulse::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kConfigError = 1, kNotReached = 2 };

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

/// Writes via a temporary file in the same directory and renames it over
/// the destination.
inline void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  static std::atomic<unsigned> counter{0};
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(counter++) + "_" +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string default_out_dir() {
  if (const char* env = std::getenv("FREEPULSE_OUT"); env != nullptr && *env != '\0') return env;
  return "freepulse_out";
}

struct ExperimentConfig {
  std::string label = "run";
  std::string device = "preset:h2_1q";
  std::string problem = "h2_eq";
  std::string template_kind = "uniform";  // uniform | drives_only | lih_compact | explicit
  std::string blocks;                     // explicit template: "56:d0,d1 152:u0_1 ..."
  int n_bins = 1;
  int bin_width_dt = 1;
  bool bidirectional = true;
  int pad_to_dt = 0;
  std::string pad_mode = "right";
  std::string frame = "rwa";
  long shots = 0;              // 0 = exact expectation
  std::string noise = "none";  // none | device
  double readout_p10 = 0.0;    // P(read 1 | prepared 0)
  double readout_p01 = 0.0;    // P(read 0 | prepared 1)
  bool mitigate = false;
  double rhobeg = 0.05;
  double rhoend = 1e-4;
  int max_iters = 500;
  std::uint64_t seed = 0;
  std::optional<double> target_mha;
  std::string out_dir;
  std::vector<std::string> problems;  // sweep only
  int max_bins = 16;
  int threads = 0;  // 0 = all cores

  nlohmann::json to_json() const {
    nlohmann::json j{{"label", label},
                     {"device", device},
                     {"problem", problem},
                     {"template", template_kind},
                     {"n_bins", n_bins},
                     {"bin_width_dt", bin_width_dt},
                     {"bidirectional", bidirectional},
                     {"pad_to_dt", pad_to_dt},
                     {"pad_mode", pad_mode},
                     {"frame", frame},
                     {"shots", shots},
                     {"noise", noise},
                     {"readout_p10", readout_p10},
                     {"readout_p01", readout_p01},
                     {"mitigate", mitigate},
                     {"rhobeg", rhobeg},
                     {"rhoend", rhoend},
                     {"max_iters", max_iters},
                     {"seed", seed},
                     {"blocks", blocks},
                     {"problems", problems},
                     {"max_bins", max_bins}};
    j["target_mha"] = target_mha ? nlohmann::json(*target_mha) : nlohmann::json(nullptr);
    return j;
  }

  std::string hash() const { return hex64(fnv1a(to_json().dump())); }
};

namespace detail {

inline bool parse_bool(const text::Document& doc, const text::Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  doc.fail(e.line, "expected a boolean, got '" + e.value + "'");
}

inline int parse_int(const text::Document& doc, const text::Entry& e) {
  const double v = doc.to_number(e.value, e.line);
  if (v != std::floor(v) || std::abs(v) > 2e9) doc.fail(e.line, "expected an integer, got '" + e.value + "'");
  return static_cast<int>(v);
}

inline fs::path resolve(const fs::path& base, const std::string& ref) {
  if (ref.rfind("preset:", 0) == 0 || ref.rfind("builtin:", 0) == 0 || ref == "h2_eq" || ref == "lih_eq") {
    return ref;
  }
  const fs::path p(ref);
  return p.is_absolute() ? p : base / p;
}

}  // namespace detail

/// Reads `key = value` lines into a config; file paths are resolved
/// relative to the config file.
inline ExperimentConfig load_config(const std::string& path, ExperimentConfig cfg = {}) {
  const auto doc = text::Document::load(path);
  const fs::path base = fs::path(path).parent_path();
  for (const auto& sec : doc.sections()) {
    if (!sec.name.empty()) doc.fail(sec.line, "experiment configs have no sections");
  }
  for (const auto& [key, e] : doc.root().entries) {
    if (key == "label") cfg.label = e.value;
    else if (key == "device") cfg.device = detail::resolve(base, e.value).string();
    else if (key == "problem") cfg.problem = detail::resolve(base, e.value).string();
    else if (key == "template") cfg.template_kind = e.value;
    else if (key == "blocks") cfg.blocks = e.value;
    else if (key == "n_bins") cfg.n_bins = detail::parse_int(doc, e);
    else if (key == "bin_width_dt") cfg.bin_width_dt = detail::parse_int(doc, e);
    else if (key == "bidirectional") cfg.bidirectional = detail::parse_bool(doc, e);
    else if (key == "pad_to_dt") cfg.pad_to_dt = detail::parse_int(doc, e);
    else if (key == "pad_mode") cfg.pad_mode = e.value;
    else if (key == "frame") cfg.frame = e.value;
    else if (key == "shots") cfg.shots = detail::parse_int(doc, e);
    else if (key == "noise") cfg.noise = e.value;
    else if (key == "readout_p10") cfg.readout_p10 = doc.to_number(e.value, e.line);
    else if (key == "readout_p01") cfg.readout_p01 = doc.to_number(e.value, e.line);
    else if (key == "mitigate") cfg.mitigate = detail::parse_bool(doc, e);
    else if (key == "rhobeg") cfg.rhobeg = doc.to_number(e.value, e.line);
    else if (key == "rhoend") cfg.rhoend = doc.to_number(e.value, e.line);
    else if (key == "max_iters") cfg.max_iters = detail::parse_int(doc, e);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_int(doc, e));
    else if (key == "target_mha") cfg.target_mha = doc.to_number(e.value, e.line);
    else if (key == "out_dir") cfg.out_dir = detail::resolve(base, e.value).string();
    else if (key == "max_bins") cfg.max_bins = detail::parse_int(doc, e);
    else if (key == "threads") cfg.threads = detail::parse_int(doc, e);
    else if (key == "problems") {
      cfg.problems.clear();
      std::istringstream in(e.value);
      for (std::string tok; in >> tok;) {
        for (const auto& part : text::split(tok, ',')) {
          if (!part.empty()) cfg.problems.push_back(detail::resolve(base, part).string());
        }
      }
    }
    else doc.fail(e.line, "unknown config key '" + key + "'");
  }
  return cfg;
}

/// Everything an optimization run needs, validated up front.
struct PreparedRun {
  DeviceModel device;
  SCIProblem problem;
  ScheduleTemplate tpl;
  Frame frame = Frame::RWA;
  Evaluation eval;
  OptimizerConfig opt;
};

/// Explicit template: whitespace-separated blocks "duration:ch,ch,...";
/// a bare duration is an idle block.
inline ScheduleTemplate parse_explicit_template(const std::string& spec) {
  ScheduleTemplate tpl;
  std::istringstream in(spec);
  for (std::string tok; in >> tok;) {
    const auto colon = tok.find(':');
    TemplateBlock b;
    const std::string dur = tok.substr(0, colon);
    const auto [ptr, ec] = std::from_chars(dur.data(), dur.data() + dur.size(), b.duration_dt);
    if (ec != std::errc() || ptr != dur.data() + dur.size() || b.duration_dt < 1) {
      throw ValidationError("bad block duration in '" + tok + "'");
    }
    if (colon != std::string::npos) {
      for (const auto& name : text::split(tok.substr(colon + 1), ',')) {
        const auto ch = ChannelId::parse(name);
        if (std::find(b.active.begin(), b.active.end(), ch) != b.active.end()) {
          throw ValidationError("channel " + name + " repeated in block '" + tok + "'");
        }
        b.active.push_back(ch);
        if (std::find(tpl.channels.begin(), tpl.channels.end(), ch) == tpl.channels.end()) tpl.channels.push_back(ch);
      }
    }
    tpl.blocks.push_back(std::move(b));
  }
  if (tpl.blocks.empty()) throw ValidationError("explicit template needs at least one block");
  std::sort(tpl.channels.begin(), tpl.channels.end());
  return tpl;
}

inline ScheduleTemplate build_template(const ExperimentConfig& cfg, const DeviceModel& dev) {
  ScheduleTemplate tpl;
  if (cfg.template_kind == "uniform") {
    tpl = uniform_template(dev, cfg.n_bins, cfg.bin_width_dt, cfg.bidirectional);
  } else if (cfg.template_kind == "drives_only") {
    tpl = drives_only_template(dev, cfg.n_bins, cfg.bin_width_dt);
  } else if (cfg.template_kind == "lih_compact") {
    tpl = lih_compact_template(dev);
  } else if (cfg.template_kind == "explicit") {
    tpl = parse_explicit_template(cfg.blocks);
  } else {
    throw UnknownName("unknown template '" + cfg.template_kind + "' (uniform, drives_only, lih_compact, explicit)");
  }
  if (cfg.pad_to_dt > 0) tpl = padded_template(std::move(tpl), cfg.pad_to_dt, parse_pad_mode(cfg.pad_mode));
  return tpl;
}

inline PreparedRun prepare(const ExperimentConfig& cfg) {
  PreparedRun run;
  run.device = load_device(cfg.device);
  run.problem = load_problem(cfg.problem);
  run.tpl = build_template(cfg, run.device);
  run.frame = parse_frame(cfg.frame);
  if (cfg.shots < 0) throw ValidationError("shots must be >= 0");
  std::optional<NoiseModel> noise;
  if (cfg.noise == "device") {
    noise = NoiseModel::from_device(run.device);
  } else if (cfg.noise != "none") {
    throw UnknownName("unknown noise model '" + cfg.noise + "' (none, device)");
  }
  if (cfg.readout_p10 > 0.0 || cfg.readout_p01 > 0.0) {
    if (!noise) noise = NoiseModel::ideal(run.device.n_qubits());
    noise->with_readout(cfg.readout_p10, cfg.readout_p01);
  }
  run.eval.shots = cfg.shots > 0 ? std::optional<long>(cfg.shots) : std::nullopt;
  run.eval.noise = noise;
  run.eval.mitigate = cfg.mitigate;
  run.opt = {cfg.rhobeg, cfg.rhoend, cfg.max_iters, cfg.seed};
  run.opt.validate();
  // Builds the cost once so device/template/problem mismatches surface here.
  PulseCost(run.device, run.tpl, run.problem, run.frame, run.eval, cfg.seed);
  return run;
}

inline nlohmann::json result_json(const ExperimentConfig& cfg, const RunResult& r, double wall_s) {
  nlohmann::json j;
  j["label"] = cfg.label;
  j["best_total_ha"] = r.best_energy;
  j["reference_total_ha"] = r.reference_total;
  j["delta_fci_mha"] = r.delta_reference_mha();
  j["chem_acc_iter"] = r.chem_acc_iter ? nlohmann::json(*r.chem_acc_iter) : nlohmann::json(nullptr);
  j["evaluations"] = r.trace.size();
  j["converged"] = r.converged;
  j["wall_time_s"] = wall_s;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  j["config"] = cfg.to_json();
  return j;
}

inline int cmd_optimize(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  PreparedRun run;
  try {
    run = prepare(cfg);
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  const auto start = std::chrono::steady_clock::now();
  const RunResult r = optimize_pulse(run.device, run.tpl, run.problem, run.frame, run.eval, run.opt);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path dir = cfg.out_dir.empty() ? fs::path(default_out_dir()) : fs::path(cfg.out_dir);
  write_atomic(dir / "trace.csv", trace_csv(r));
  nlohmann::json pulse = schedule_to_json(from_params(run.tpl, r.best_theta));
  pulse["theta"] = r.best_theta;
  pulse["config_hash"] = cfg.hash();
  write_atomic(dir / "best_pulse.json", pulse.dump(2) + "\n");
  const auto res = result_json(cfg, r, wall);
  write_atomic(dir / "result.json", res.dump(2) + "\n");

  out << std::setprecision(8) << cfg.label << ": best total " << r.best_energy << " Ha, delta "
      << r.delta_reference_mha() << " mHa after " << r.trace.size() << " evaluations (" << wall << " s)\n";
  if (cfg.target_mha && r.delta_reference_mha() > *cfg.target_mha) {
    err << "target " << *cfg.target_mha << " mHa not reached\n";
    return kNotReached;
  }
  return kOk;
}

inline int cmd_qsl(const std::string& device, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  std::vector<QSLRow> rows;
  DeviceModel dev;
  try {
    dev = load_device(device);
    rows = qsl_table(dev);
    const auto max_rows = qsl_max_amplitude(dev);
    rows.insert(rows.end(), max_rows.begin(), max_rows.end());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  std::ostringstream csv;
  csv << std::setprecision(9)
      << "frame,target,epsilon,beta,alpha,ebar_2pi_mhz,debar_2pi_mhz,tau_energy_ns,tau_variance_ns,tau_ns,tau_dt\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    csv << row.frame << ',' << row.target << ',' << r.epsilon << ',' << r.beta << ',' << r.alpha << ','
        << to_2pi_mhz(r.e_bar) << ',' << to_2pi_mhz(r.de_bar) << ',' << r.tau_energy * 1e9 << ','
        << r.tau_variance * 1e9 << ',' << r.tau * 1e9 << ',' << r.tau_in_dt << '\n';
  }
  out << csv.str();
  if (!out_dir.empty()) write_atomic(fs::path(out_dir) / "qsl.csv", csv.str());
  return kOk;
}

inline int cmd_leakage(const std::string& device, int levels, cplx amplitude, int duration_dt, int substeps,
                       const std::string& out_path, std::ostream& out, std::ostream& err) {
  LeakageTrace trace;
  try {
    const auto dev = load_device(device);
    trace = leakage_trace(levels, amplitude, duration_dt, dev, substeps);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  std::ostringstream csv;
  csv << std::setprecision(10) << "time_ns";
  for (int n = 0; n < levels; ++n) csv << ",p" << n;
  csv << '\n';
  for (std::size_t i = 0; i < trace.time_s.size(); ++i) {
    csv << trace.time_s[i] * 1e9;
    for (double p : trace.populations[i]) csv << ',' << p;
    csv << '\n';
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    write_atomic(out_path, csv.str());
  }
  return kOk;
}

struct SweepRow {
  std::string label;
  int n_bins = -1;
  double duration_ns = 0.0;
  double delta_fci_mha = 0.0;
  bool reached = false;
};

inline int cmd_sweep(const ExperimentConfig& base, std::ostream& out, std::ostream& err) {
  const auto& problems = base.problems;
  const int max_bins = base.max_bins;
  const int threads = base.threads;
  if (problems.empty()) {
    err << "config error: sweep needs at least one problem\n";
    return kConfigError;
  }
  std::vector<PreparedRun> runs;
  try {
    if (max_bins < 1) throw PreconditionError("max_bins must be >= 1");
    for (const auto& p : problems) {
      ExperimentConfig c = base;
      c.problem = p;
      c.template_kind = "uniform";
      c.n_bins = 1;
      runs.push_back(prepare(c));
    }
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  std::vector<SweepRow> rows(runs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr failure;
  const auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      const auto& run = runs[i];
      SweepRow row;
      row.label = problems[i];
      try {
        const auto found =
            minimal_duration_search(run.device, run.problem, run.frame, run.eval, run.opt, max_bins, base.bin_width_dt);
        row.n_bins = found.n_bins;
        row.duration_ns = found.n_bins * base.bin_width_dt * run.device.dt_ns.value();
        row.delta_fci_mha = found.run.delta_reference_mha();
        row.reached = true;
      } catch (const NotReached&) {
        row.reached = false;
      } catch (...) {
        const std::lock_guard lock(err_mutex);
        if (!failure) failure = std::current_exception();
      }
      rows[i] = row;
    }
  };
  const int n_threads =
      std::max(1, std::min<int>(threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency()),
                                static_cast<int>(runs.size())));
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::ostringstream csv;
  csv << std::setprecision(10) << "label,n_bins,duration_ns,delta_fci_mha\n";
  bool all = true;
  for (const auto& r : rows) {
    all = all && r.reached;
    if (r.reached) {
      csv << r.label << ',' << r.n_bins << ',' << r.duration_ns << ',' << r.delta_fci_mha << '\n';
    } else {
      csv << r.label << ",,,\n";
    }
  }
  const fs::path dir = base.out_dir.empty() ? fs::path(default_out_dir()) : fs::path(base.out_dir);
  write_atomic(dir / "summary.csv", csv.str());
  out << csv.str();
  return all ? kOk : kNotReached;
}

inline int cmd_decompose(const std::string& problem, std::ostream& out, std::ostream& err) {
  try {
    const auto p = load_problem(problem);
    out << std::setprecision(10);
    out << "# " << p.pauli_terms.size() << " Pauli terms, " << p.q << " qubits\n";
    for (const auto& t : p.pauli_terms) out << t.label << ' ' << t.coefficient << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

/// Parses argv and dispatches; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Pulse-level VQ-SCI simulator and optimizer"};
  app.require_subcommand(1);

  ExperimentConfig flags;
  std::string config_path;
  auto add_experiment_flags = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config file");
    sub->add_option("--device", flags.device, "device file or preset:<name>");
    sub->add_option("--problem", flags.problem, "problem file or builtin name");
    sub->add_option("--template", flags.template_kind, "uniform | drives_only | lih_compact | explicit");
    sub->add_option("--bins", flags.n_bins, "number of time bins");
    sub->add_option("--bin-width", flags.bin_width_dt, "bin width in dt");
    sub->add_option("--bidirectional", flags.bidirectional, "both control directions per edge");
    sub->add_option("--pad-to", flags.pad_to_dt, "pad the schedule to this many dt");
    sub->add_option("--pad-mode", flags.pad_mode, "right | middle | left");
    sub->add_option("--frame", flags.frame, "lab | rwa | rotating");
    sub->add_option("--shots", flags.shots, "shots per basis group (0 = exact)");
    sub->add_option("--noise", flags.noise, "none | device");
    sub->add_option("--readout-p10", flags.readout_p10, "P(read 1 | prepared 0)");
    sub->add_option("--readout-p01", flags.readout_p01, "P(read 0 | prepared 1)");
    sub->add_option("--mitigate", flags.mitigate, "apply readout mitigation");
    sub->add_option("--rhobeg", flags.rhobeg, "initial trust radius");
    sub->add_option("--rhoend", flags.rhoend, "final trust radius");
    sub->add_option("--max-iters", flags.max_iters, "evaluation budget");
    sub->add_option("--seed", flags.seed, "sampling seed");
    sub->add_option("--target-mha", flags.target_mha, "exit 2 unless within this many mHa of the reference");
    sub->add_option("--out", flags.out_dir, "output directory (default $FREEPULSE_OUT)");
    sub->add_option("--label", flags.label, "run label");
    sub->add_option("--blocks", flags.blocks, "explicit template blocks");
  };

  // flag > file > default
  auto merged = [&](CLI::App* sub) {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    const auto set = [&](const char* name, auto& field, const auto& value) {
      if (sub->get_option(name)->count() > 0) field = value;
    };
    set("--device", cfg.device, flags.device);
    set("--problem", cfg.problem, flags.problem);
    set("--template", cfg.template_kind, flags.template_kind);
    set("--bins", cfg.n_bins, flags.n_bins);
    set("--bin-width", cfg.bin_width_dt, flags.bin_width_dt);
    set("--bidirectional", cfg.bidirectional, flags.bidirectional);
    set("--pad-to", cfg.pad_to_dt, flags.pad_to_dt);
    set("--pad-mode", cfg.pad_mode, flags.pad_mode);
    set("--frame", cfg.frame, flags.frame);
    set("--shots", cfg.shots, flags.shots);
    set("--noise", cfg.noise, flags.noise);
    set("--readout-p10", cfg.readout_p10, flags.readout_p10);
    set("--readout-p01", cfg.readout_p01, flags.readout_p01);
    set("--mitigate", cfg.mitigate, flags.mitigate);
    set("--rhobeg", cfg.rhobeg, flags.rhobeg);
    set("--rhoend", cfg.rhoend, flags.rhoend);
    set("--max-iters", cfg.max_iters, flags.max_iters);
    set("--seed", cfg.seed, flags.seed);
    set("--target-mha", cfg.target_mha, flags.target_mha);
    set("--out", cfg.out_dir, flags.out_dir);
    set("--label", cfg.label, flags.label);
    set("--blocks", cfg.blocks, flags.blocks);
    if (auto* o = sub->get_option_no_throw("--problems"); o != nullptr && o->count() > 0) cfg.problems = flags.problems;
    if (auto* o = sub->get_option_no_throw("--max-bins"); o != nullptr && o->count() > 0) cfg.max_bins = flags.max_bins;
    if (auto* o = sub->get_option_no_throw("--threads"); o != nullptr && o->count() > 0) cfg.threads = flags.threads;
    return cfg;
  };

  auto* optimize = app.add_subcommand("optimize", "optimize a pulse for a problem");
  add_experiment_flags(optimize);

  auto* sweep = app.add_subcommand("sweep", "minimal pulse duration per problem");
  add_experiment_flags(sweep);
  sweep->add_option("--problems", flags.problems, "problem files or builtin names")->expected(1, -1);
  sweep->add_option("--max-bins", flags.max_bins, "longest duration tried, in bins");
  sweep->add_option("--threads", flags.threads, "worker threads (default: cores)");

  std::string qsl_device = "preset:h2_1q";
  std::string qsl_out;
  auto* qsl = app.add_subcommand("qsl", "quantum speed limit table");
  qsl->add_option("--device", qsl_device, "1-qubit device file or preset");
  qsl->add_option("--out", qsl_out, "directory for qsl.csv");

  std::string leak_device = "preset:transmon_4l";
  int levels = 4;
  double amp_re = 1.0;
  double amp_im = 0.0;
  int duration = 6;
  int substeps = 200;
  std::string leak_out;
  auto* leak = app.add_subcommand("leakage", "level populations of a multi-level transmon");
  leak->add_option("--device", leak_device, "device file or preset");
  leak->add_option("--levels", levels, "transmon levels (>= 3)");
  leak->add_option("--re", amp_re, "amplitude real part");
  leak->add_option("--im", amp_im, "amplitude imaginary part");
  leak->add_option("--duration", duration, "pulse duration in dt");
  leak->add_option("--substeps", substeps, "samples per dt");
  leak->add_option("--out", leak_out, "CSV path (default stdout)");

  std::string decompose_problem;
  auto* decompose = app.add_subcommand("decompose", "print the Pauli terms of a problem");
  decompose->add_option("problem", decompose_problem, "problem file or builtin name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }

  try {
    if (*optimize) return cmd_optimize(merged(optimize), out, err);
    if (*sweep) return cmd_sweep(merged(sweep), out, err);
    if (*qsl) return cmd_qsl(qsl_device, qsl_out, out, err);
    if (*leak) {
      return cmd_leakage(leak_device, levels, cplx(amp_re, amp_im), duration, substeps, leak_out, out, err);
    }
    if (*decompose) return cmd_decompose(decompose_problem, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace freepulse::cli
