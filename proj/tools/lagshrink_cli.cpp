// Command-line front end over the lagshrink C API. Each run writes its outputs
// and a key = value manifest into --out (default ".").
#include "lagshrink/lagshrink.h"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCap = 4;

struct Failure {
  lsk_status status;
  std::string message;
  bool usage = false;  // bad configuration rather than bad data
};

void check(lsk_status s, const std::string& what) {
  if (s != LSK_OK) throw Failure{s, what + ": " + lsk_status_name(s) + ": " + lsk_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using MapPtr = std::unique_ptr<lsk_map, Deleter<lsk_map, lsk_map_free>>;
using ConfigPtr = std::unique_ptr<lsk_config, Deleter<lsk_config, lsk_config_free>>;
using FlowPtr = std::unique_ptr<lsk_flow, Deleter<lsk_flow, lsk_flow_free>>;
using PiecewisePtr = std::unique_ptr<lsk_piecewise, Deleter<lsk_piecewise, lsk_piecewise_free>>;
using CensusPtr = std::unique_ptr<lsk_census, Deleter<lsk_census, lsk_census_free>>;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string wall_time() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

MapPtr read_map(const std::string& path) {
  lsk_map* m = nullptr;
  check(lsk_map_read(path.c_str(), &m), "reading " + path);
  return MapPtr(m);
}

void write_map(const lsk_map* m, const fs::path& path) { check(lsk_map_write(m, path.string().c_str()), "writing " + path.string()); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{LSK_E_IO, "cannot write " + path.string()};
  out << text;
}

std::string series_csv(const std::vector<lsk_flow_sample>& s) {
  std::ostringstream os;
  os << "t,area,maxA2,entropy,lag_residual\n";
  for (const auto& x : s)
    os << num(x.t) << ',' << num(x.area) << ',' << num(x.maxA2) << ',' << num(x.entropy) << ','
       << num(x.lag_residual) << '\n';
  return os.str();
}

// Shared state of one invocation: config, output directory, manifest fields.
struct Run {
  std::string subcommand;
  std::vector<std::string> config_paths;
  std::vector<std::string> overrides;
  fs::path out = ".";
  ConfigPtr cfg;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<std::string> outputs;
  std::string started;

  void load_config() try {
    lsk_config* c = nullptr;
    if (config_paths.empty()) {
      check(lsk_config_new(&c), "config");
    } else {
      check(lsk_config_load(config_paths.front().c_str(), &c), "config " + config_paths.front());
      add_input(config_paths.front());
    }
    cfg.reset(c);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Failure{LSK_E_INVALID_ARGUMENT, "--set expects key=value, got '" + kv + "'"};
      check(lsk_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "--set " + kv);
    }
  } catch (Failure& f) {
    f.usage = true;
    throw;
  }

  std::string get(const char* key) const {
    char buf[256];
    check(lsk_config_get(cfg.get(), key, buf, sizeof buf), std::string("config ") + key);
    return buf;
  }
  int get_int(const char* key) const { return std::stoi(get(key)); }
  double get_double(const char* key) const { return std::stod(get(key)); }

  void add_input(const std::string& path) {
    char hex[65] = {0};
    std::string digest = "unreadable";
    if (lsk_sha256_file(path.c_str(), hex, sizeof hex) == LSK_OK) digest = hex;
    inputs.emplace_back(path, digest);
  }

  fs::path output(const std::string& name) {
    outputs.push_back(name);
    return out / name;
  }

  void note(const std::string& key, const std::string& value) { summary.emplace_back(key, value); }

  void write_manifest(int exit_code, const std::string& error) const {
    std::ostringstream os;
    os << "version = " << lsk_version() << "\n";
    os << "subcommand = " << subcommand << "\n";
    os << "start_time = " << started << "\n";
    os << "end_time = " << wall_time() << "\n";
    os << "exit_code = " << exit_code << "\n";
    if (!error.empty()) os << "error = " << error << "\n";
    for (const auto& [p, d] : inputs) os << "input." << p << " = sha256:" << d << "\n";
    for (const auto& o : outputs) {
      char hex[65] = {0};
      const std::string path = (out / o).string();
      os << "output." << o << " = ";
      if (lsk_sha256_file(path.c_str(), hex, sizeof hex) == LSK_OK) os << "sha256:" << hex << "\n";
      else os << "missing\n";
    }
    for (const auto& [k, v] : summary) os << "result." << k << " = " << v << "\n";
    if (cfg) {
      size_t need = 0;
      lsk_config_echo(cfg.get(), nullptr, 0, &need);
      std::string echo(need, '\0');
      lsk_config_echo(cfg.get(), echo.data(), need, nullptr);
      echo.resize(need ? need - 1 : 0);
      std::istringstream lines(echo);
      for (std::string line; std::getline(lines, line);) os << "config." << line << "\n";
    }
    std::error_code ec;
    fs::create_directories(out, ec);
    std::ofstream f(out / (subcommand.empty() ? std::string("usage.manifest") : subcommand + ".manifest"));
    f << os.str();
  }
};

int cmd_seed(Run& run, const std::vector<std::string>& args, const std::string& output) {
  MapPtr m;
  std::string name;
  lsk_map* raw = nullptr;
  if (args.size() == 2 && args[0] == "clifford") {
    const int n = std::stoi(args[1]);
    check(lsk_map_clifford(n, n, &raw), "clifford seed");
    name = "clifford_" + args[1] + ".snap";
  } else if (args.size() == 6 && args[0] == "product") {
    int v[5];
    for (int k = 0; k < 5; ++k) v[k] = std::stoi(args[k + 1]);
    check(lsk_map_product(v[0], v[1], v[2], v[3], v[4], v[4], &raw), "product seed");
    name = "product_" + args[1] + "_" + args[2] + "_" + args[3] + "_" + args[4] + "_" + args[5] + ".snap";
  } else {
    throw Failure{LSK_E_INVALID_ARGUMENT, "usage: seed clifford N | seed product p1 q1 p2 q2 N"};
  }
  m.reset(raw);
  const fs::path path = output.empty() ? run.output(name) : fs::path(output);
  if (!output.empty()) run.outputs.push_back(fs::absolute(output).string());
  write_map(m.get(), path);
  double tau1 = 0, tau2 = 0;
  check(lsk_map_info(m.get(), nullptr, nullptr, &tau1, &tau2, nullptr), "map info");
  run.note("tau", num(tau1) + " " + num(tau2));
  std::cout << path.string() << "\n";
  return kExitOk;
}

int cmd_entropy(Run& run, const std::string& snap) {
  run.add_input(snap);
  MapPtr m = read_map(snap);
  lsk_entropy_report r;
  check(lsk_entropy(m.get(), run.cfg.get(), &r), "entropy");
  auto vec = [](const double* v) { return num(v[0]) + " " + num(v[1]) + " " + num(v[2]) + " " + num(v[3]); };
  std::ostringstream os;
  os << "lambda: " << num(r.lambda) << "\n";
  os << "x0: " << vec(r.x0) << "\n";
  os << "t0: " << num(r.t0) << "\n";
  os << "converged: " << r.converged << "\n";
  os << "resolved: " << r.resolved << "\n";
  os << "scan_box_lo: " << vec(r.box_lo) << "\n";
  os << "scan_box_hi: " << vec(r.box_hi) << "\n";
  os << "scan_t: " << num(r.t_lo) << " " << num(r.t_hi) << "\n";
  os << "t_floor: " << num(r.t_floor) << "\n";
  write_text(run.output("entropy.txt"), os.str());
  run.note("lambda", num(r.lambda));
  std::cout << os.str();
  return kExitOk;
}

int cmd_maslov(Run& run, const std::string& snap) {
  run.add_input(snap);
  MapPtr m = read_map(snap);
  int m1 = 0, m2 = 0;
  check(lsk_maslov(m.get(), run.cfg.get(), &m1, &m2), "maslov");
  const std::string line = std::to_string(m1) + " " + std::to_string(m2) + "\n";
  write_text(run.output("maslov.txt"), line);
  run.note("maslov", line.substr(0, line.size() - 1));
  std::cout << line;
  return kExitOk;
}

int cmd_spectrum(Run& run, const std::string& snap, const std::vector<double>& tau) {
  run.add_input(snap);
  MapPtr m = read_map(snap);
  if (tau.size() == 2) check(lsk_map_set_tau(m.get(), tau[0], tau[1]), "tau");
  size_t n = 0;
  check(lsk_spectrum(m.get(), run.cfg.get(), nullptr, 0, &n), "spectrum");
  std::vector<double> ev(n);
  check(lsk_spectrum(m.get(), run.cfg.get(), ev.data(), n, &n), "spectrum");
  std::ostringstream os;
  os << "index,eigenvalue\n";
  for (size_t i = 0; i < ev.size(); ++i) os << i << ',' << num(ev[i]) << '\n';
  write_text(run.output("spectrum.csv"), os.str());
  run.note("eigenvalues", std::to_string(n));
  if (n) run.note("lowest", num(ev.front()));
  std::cout << os.str();
  return kExitOk;
}

int cmd_lojasiewicz(Run& run, const std::string& snap) {
  run.add_input(snap);
  MapPtr m = read_map(snap);
  lsk_lojasiewicz_fit f;
  size_t n = 0;
  check(lsk_lojasiewicz(m.get(), run.cfg.get(), &f, nullptr, 0, &n), "lojasiewicz");
  std::vector<double> s(4 * n);
  check(lsk_lojasiewicz(m.get(), run.cfg.get(), &f, s.data(), n, &n), "lojasiewicz");
  std::ostringstream csv;
  csv << "direction,eps,energy_gap,grad_norm,log_energy_gap,log_grad_norm\n";
  for (size_t i = 0; i < n; ++i)
    csv << static_cast<int>(s[4 * i]) << ',' << num(s[4 * i + 1]) << ',' << num(s[4 * i + 2]) << ','
        << num(s[4 * i + 3]) << ',' << num(std::log(s[4 * i + 2])) << ',' << num(std::log(s[4 * i + 3])) << '\n';
  write_text(run.output("lojasiewicz_samples.csv"), csv.str());
  const std::string line =
      num(f.theta) + " " + num(f.C2) + " " + std::to_string(f.n_samples) + " " + num(f.max_violation) + "\n";
  write_text(run.output("lojasiewicz.txt"), line);
  run.note("theta", num(f.theta));
  run.note("C2", num(f.C2));
  std::cout << line;
  return kExitOk;
}

std::string singularity_block(const lsk_singularity_report& r, const std::string& stop, const std::string& note) {
  std::ostringstream os;
  os << "stop_reason: " << stop << "\n";
  os << "T0_est: " << num(r.T0_est) << "\n";
  os << "T0_stderr: " << num(r.T0_stderr) << "\n";
  os << "type1_constant: " << num(r.type1_constant) << "\n";
  os << "fit_residual: " << num(r.fit_residual) << "\n";
  os << "is_type1: " << (r.is_type1 ? "true" : "false") << "\n";
  os << "q_est: " << num(r.q_est[0]) << " " << num(r.q_est[1]) << " " << num(r.q_est[2]) << " " << num(r.q_est[3])
     << "\n";
  os << "rescale_converged: " << (r.rescale_converged ? "true" : "false") << "\n";
  os << "rescaled_maps: " << r.rescaled_maps << "\n";
  os << "model_time: " << num(r.model_time) << "\n";
  os << "model_residual: " << num(r.model_residual) << "\n";
  os << "model_tolerance: " << num(r.model_tolerance) << "\n";
  os << "max_diameter: " << num(r.max_diameter) << "\n";
  os << "entropy_resolved_until: " << num(r.entropy_resolved_until) << "\n";
  os << "note: " << note << "\n";
  return os.str();
}

int cmd_flow(Run& run, const std::string& snap) {
  run.add_input(snap);
  MapPtr m = read_map(snap);
  lsk_flow* raw = nullptr;
  check(lsk_flow_run(m.get(), run.cfg.get(), &raw), "flow");
  FlowPtr flow(raw);

  std::vector<lsk_flow_sample> samples(lsk_flow_sample_count(flow.get()));
  for (size_t i = 0; i < samples.size(); ++i) check(lsk_flow_sample_at(flow.get(), i, &samples[i]), "sample");
  write_text(run.output("flow_series.csv"), series_csv(samples));

  fs::create_directories(run.out / "flow_snapshots");
  std::ostringstream index;
  index << "index,time,file\n";
  for (size_t i = 0; i < lsk_flow_snapshot_count(flow.get()); ++i) {
    lsk_map* s = nullptr;
    check(lsk_flow_snapshot(flow.get(), i, &s), "snapshot");
    MapPtr sp(s);
    char name[48];
    std::snprintf(name, sizeof name, "flow_snapshots/snap_%04zu.snap", i);
    write_map(sp.get(), run.output(name));
    double t = 0;
    lsk_map_info(sp.get(), nullptr, nullptr, nullptr, nullptr, &t);
    index << i << ',' << num(t) << ',' << name << '\n';
  }
  write_text(run.output("flow_snapshots.csv"), index.str());

  lsk_singularity_report r;
  check(lsk_flow_report(flow.get(), &r), "report");
  char stop[64], note[512];
  check(lsk_flow_notes(flow.get(), stop, sizeof stop, note, sizeof note), "notes");
  lsk_map* model = nullptr;
  if (lsk_flow_model(flow.get(), &model) == LSK_OK) {
    MapPtr mp(model);
    write_map(mp.get(), run.output("flow_model.snap"));
  }
  const std::string block = singularity_block(r, stop, note);
  write_text(run.output("flow_report.txt"), block);
  run.note("T0_est", num(r.T0_est));
  run.note("type1_constant", num(r.type1_constant));
  run.note("rescale_converged", r.rescale_converged ? "true" : "false");
  std::cout << block;
  return kExitOk;
}

int cmd_piecewise(Run& run, const std::string& snap, double Lambda, double delta) {
  run.add_input(snap);
  MapPtr m = read_map(snap);
  if (!(Lambda > 0)) Lambda = run.get_double("piecewise_lambda");
  if (!(delta > 0)) delta = run.get_double("piecewise_delta");
  lsk_piecewise* raw = nullptr;
  check(lsk_piecewise_run(m.get(), Lambda, delta, run.cfg.get(), &raw), "piecewise");
  PiecewisePtr log(raw);

  lsk_piecewise_outcome outcome;
  int cap = 0;
  double lambda0 = 0;
  char note[1024];
  check(lsk_piecewise_outcome_of(log.get(), &outcome, &cap, &lambda0, note, sizeof note), "outcome");
  static const char* names[] = {"terminal-non-compact", "cap-reached", "error"};

  std::ostringstream os;
  os << "Lambda: " << num(Lambda) << "\n";
  os << "delta: " << num(delta) << "\n";
  os << "lambda_initial: " << num(lambda0) << "\n";
  os << "event_cap: " << cap << "\n";
  os << "legs: " << lsk_piecewise_leg_count(log.get()) << "\n";
  os << "events: " << lsk_piecewise_event_count(log.get()) << "\n";
  fs::create_directories(run.out / "piecewise_legs");
  for (size_t i = 0; i < lsk_piecewise_leg_count(log.get()); ++i) {
    lsk_piecewise_leg l;
    char lnote[512];
    check(lsk_piecewise_leg_at(log.get(), i, &l, lnote, sizeof lnote), "leg");
    os << "\n[leg " << i << "]\n";
    os << "t_start: " << num(l.t_start) << "\n";
    os << "t_end: " << num(l.t_end) << "\n";
    os << "steps: " << l.steps << "\n";
    os << "lambda_start: " << num(l.lambda_start) << "\n";
    os << "max_entropy_increase: " << num(l.max_entropy_increase) << "\n";
    os << "area_start: " << num(l.area_start) << "\n";
    os << "area_end: " << num(l.area_end) << "\n";
    os << "maslov_start: " << l.maslov_start[0] << " " << l.maslov_start[1] << "\n";
    os << "maslov_end: " << l.maslov_end[0] << " " << l.maslov_end[1] << "\n";
    os << "T0_est: " << num(l.T0_est) << "\n";
    os << "type1_constant: " << num(l.type1_constant) << "\n";
    os << "is_type1: " << (l.is_type1 ? "true" : "false") << "\n";
    os << "compact_model: " << (l.compact_model ? "true" : "false") << "\n";
    os << "model_area: " << num(l.model_area) << "\n";
    os << "model_diameter: " << num(l.model_diameter) << "\n";
    os << "note: " << lnote << "\n";

    size_t n = 0;
    check(lsk_piecewise_leg_sample(log.get(), i, 0, nullptr, &n), "leg samples");
    std::vector<lsk_flow_sample> s(n);
    for (size_t k = 0; k < n; ++k) check(lsk_piecewise_leg_sample(log.get(), i, k, &s[k], nullptr), "leg sample");
    write_text(run.output("piecewise_legs/leg_" + std::to_string(i) + ".csv"), series_csv(s));
    lsk_map* start = nullptr;
    if (lsk_piecewise_leg_start(log.get(), i, &start) == LSK_OK) {
      MapPtr sp(start);
      write_map(sp.get(), run.output("piecewise_legs/leg_" + std::to_string(i) + "_start.snap"));
    }
  }
  for (size_t i = 0; i < lsk_piecewise_event_count(log.get()); ++i) {
    lsk_piecewise_event e;
    check(lsk_piecewise_event_at(log.get(), i, &e), "event");
    os << "\n[event " << i << "]\n";
    os << "t: " << num(e.t) << "\n";
    os << "direction: " << e.direction << "\n";
    os << "s: " << num(e.s) << "\n";
    os << "lambda_before: " << num(e.lambda_before) << "\n";
    os << "lambda_after: " << num(e.lambda_after) << "\n";
    os << "area_before: " << num(e.area_before) << "\n";
    os << "area_after: " << num(e.area_after) << "\n";
    os << "c0_distance: " << num(e.c0_distance) << "\n";
    os << "delta_bound: " << num(e.delta_bound) << "\n";
    os << "maslov_before: " << e.maslov_before[0] << " " << e.maslov_before[1] << "\n";
    os << "maslov_after: " << e.maslov_after[0] << " " << e.maslov_after[1] << "\n";
    os << "kappa: " << num(e.kappa) << "\n";
    auto tf = [](int b) { return b ? "true" : "false"; };
    os << "cert_lagrangian: " << tf(e.cert_lagrangian) << "\n";
    os << "cert_area: " << tf(e.cert_area) << "\n";
    os << "cert_entropy: " << tf(e.cert_entropy) << "\n";
    os << "cert_c0: " << tf(e.cert_c0) << "\n";
    os << "cert_maslov: " << tf(e.cert_maslov) << "\n";
  }
  os << "\noutcome: " << names[outcome] << "\n";
  os << "terminal_note: " << note << "\n";
  write_text(run.output("piecewise_log.txt"), os.str());
  run.note("outcome", names[outcome]);
  run.note("events", std::to_string(lsk_piecewise_event_count(log.get())));
  std::cout << os.str();
  if (outcome == LSK_PIECEWISE_CAP) return kExitCap;
  if (outcome == LSK_PIECEWISE_ERROR) return kExitNumerical;
  return kExitOk;
}

int cmd_census(Run& run, const std::vector<std::string>& snaps, int perturbed, double Lambda) {
  std::vector<MapPtr> maps;
  std::vector<std::string> labels;
  const int n = run.get_int("grid");
  if (perturbed < 0) perturbed = run.get_int("census_perturbed");
  const double amp = run.get_double("census_amplitude");
  const auto seed = static_cast<uint64_t>(std::stoull(run.get("seed")));
  if (!(Lambda > 0)) Lambda = run.get_double("piecewise_lambda");
  for (int i = 0; i <= perturbed; ++i) {
    lsk_map* m = nullptr;
    check(lsk_map_perturbed_clifford(n, i, amp, seed, run.cfg.get(), &m), "perturbed seed");
    maps.emplace_back(m);
    labels.push_back(i == 0 ? "clifford" : "clifford+" + std::to_string(i));
  }
  for (const std::string& s : snaps) {
    run.add_input(s);
    maps.push_back(read_map(s));
    labels.push_back(fs::path(s).filename().string());
  }
  std::vector<const lsk_map*> ptrs;
  std::vector<const char*> names;
  for (size_t i = 0; i < maps.size(); ++i) {
    ptrs.push_back(maps[i].get());
    names.push_back(labels[i].c_str());
  }
  lsk_census* raw = nullptr;
  check(lsk_census_run(ptrs.data(), names.data(), ptrs.size(), Lambda, run.cfg.get(), &raw), "census");
  CensusPtr c(raw);

  std::ostringstream entries;
  entries << "index,label,accepted,area,entropy,grad_norm,shrinker_residual,iterations,embedding_checked,embedded\n";
  for (size_t i = 0; i < lsk_census_entry_count(c.get()); ++i) {
    lsk_census_entry e;
    char notice[512];
    check(lsk_census_entry_at(c.get(), i, &e, notice, sizeof notice), "entry");
    if (!e.accepted) std::cerr << "skipped " << notice << "\n";
    entries << i << ',' << labels[i] << ',' << e.accepted << ',' << num(e.area) << ',' << num(e.entropy) << ','
            << num(e.grad_norm) << ',' << num(e.shrinker_residual) << ',' << e.iterations << ','
            << e.embedding_checked << ',' << e.embedded << '\n';
  }
  write_text(run.output("census_entries.csv"), entries.str());

  std::ostringstream clusters;
  clusters << "cluster,entropy,spread,area,members,entries\n";
  const size_t nc = lsk_census_cluster_count(c.get());
  for (size_t i = 0; i < nc; ++i) {
    lsk_census_cluster k;
    check(lsk_census_cluster_at(c.get(), i, &k), "cluster");
    std::vector<int> mem(static_cast<size_t>(k.members));
    check(lsk_census_cluster_members(c.get(), i, mem.data(), mem.size()), "members");
    std::string list;
    for (int x : mem) list += (list.empty() ? "" : " ") + std::to_string(x);
    clusters << i << ',' << num(k.entropy) << ',' << num(k.spread) << ',' << num(k.area) << ',' << k.members << ','
             << list << '\n';
  }
  write_text(run.output("census_clusters.csv"), clusters.str());
  run.note("clusters", std::to_string(nc));
  std::cout << clusters.str();
  return kExitOk;
}

int cmd_report(Run& run, const std::string& dir) {
  if (!fs::is_directory(dir)) throw Failure{LSK_E_IO, "not a directory: " + dir};
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = e.path().extension().string();
    const std::string fname = e.path().filename().string();
    if (fname == "report.txt" || fname == "report.manifest" || ext == ".snap") continue;
    if (ext == ".txt" || ext == ".csv" || ext == ".manifest") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::ostringstream os;
  os << "lagshrink " << lsk_version() << " report for " << dir << "\n";
  for (const fs::path& p : files) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    os << "\n== " << fs::relative(p, dir).string() << " (" << lines.size() << " lines) ==\n";
    // Long series are summarized by their header and last rows.
    const bool series = p.extension() == ".csv" && lines.size() > 12;
    for (size_t i = 0; i < lines.size(); ++i) {
      if (series && i > 0 && i + 5 < lines.size()) {
        if (i == 1) os << "... " << lines.size() - 6 << " rows ...\n";
        continue;
      }
      os << lines[i] << "\n";
    }
  }
  run.out = dir;
  write_text(run.output("report.txt"), os.str());
  run.note("files", std::to_string(files.size()));
  std::cout << os.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian self-shrinking tori: seeds, entropy, spectra, flows and censuses"};
  app.require_subcommand(1);
  Run run;
  run.started = wall_time();

  std::string out_dir = ".";
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", run.config_paths, "key = value configuration file")->expected(1);
    sub->add_option("--set", run.overrides, "override a config key (key=value), repeatable");
    sub->add_option("--out", out_dir, "output directory");
  };

  std::vector<std::string> seed_args;
  std::string seed_output;
  auto* seed = app.add_subcommand("seed", "write a seed snapshot: clifford N | product p1 q1 p2 q2 N");
  seed->add_option("args", seed_args)->required();
  seed->add_option("-o,--output", seed_output, "snapshot path");
  common(seed);

  std::string snap;
  auto snap_cmd = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("snapshot", snap, "input snapshot")->required();
    common(s);
    return s;
  };
  auto* flow = snap_cmd("flow", "Lagrangian mean curvature flow to the first singularity");
  auto* entropy = snap_cmd("entropy", "Colding-Minicozzi entropy");
  auto* maslov = snap_cmd("maslov", "Maslov numbers");
  auto* lojasiewicz = snap_cmd("lojasiewicz", "Lojasiewicz exponent fit at the nearby critical point");
  std::vector<double> tau;
  auto* spectrum = snap_cmd("spectrum", "eigenvalues of the linearized operator");
  spectrum->add_option("--tau", tau, "conformal structure tau1 tau2 (default: from the snapshot)")->expected(2);

  double Lambda = 0.0, delta = 0.0;
  auto* piecewise = snap_cmd("piecewise", "piecewise flow with entropy-lowering perturbations");
  piecewise->add_option("--lambda", Lambda, "area bound (default: piecewise_lambda)");
  piecewise->add_option("--delta", delta, "closeness parameter (default: piecewise_delta)");

  std::vector<std::string> census_snaps;
  int perturbed = -1;
  double census_lambda = 0.0;
  auto* census = app.add_subcommand("census", "entropy census of Clifford, its perturbations and extra seeds");
  census->add_option("snapshots", census_snaps, "additional seed snapshots");
  census->add_option("--perturbed", perturbed, "number of perturbed Clifford seeds (default: census_perturbed)");
  census->add_option("--lambda", census_lambda, "area bound (default: piecewise_lambda)");
  common(census);

  std::string run_dir;
  auto* report = app.add_subcommand("report", "consolidate the outputs of a run directory");
  report->add_option("run_dir", run_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    if (!app.get_subcommands().empty()) run.subcommand = app.get_subcommands().front()->get_name();
    run.out = out_dir;
    run.write_manifest(kExitUsage, e.what());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  run.subcommand = sub->get_name();
  run.out = out_dir;
  int code = kExitOk;
  std::string error;
  try {
    fs::create_directories(run.out);
    run.load_config();
    if (sub == seed) code = cmd_seed(run, seed_args, seed_output);
    else if (sub == flow) code = cmd_flow(run, snap);
    else if (sub == entropy) code = cmd_entropy(run, snap);
    else if (sub == maslov) code = cmd_maslov(run, snap);
    else if (sub == lojasiewicz) code = cmd_lojasiewicz(run, snap);
    else if (sub == spectrum) code = cmd_spectrum(run, snap, tau);
    else if (sub == piecewise) code = cmd_piecewise(run, snap, Lambda, delta);
    else if (sub == census) code = cmd_census(run, census_snaps, perturbed, census_lambda);
    else if (sub == report) code = cmd_report(run, run_dir);
  } catch (const Failure& f) {
    error = f.message;
    code = f.usage || f.status == LSK_E_INVALID_ARGUMENT ? kExitUsage : kExitNumerical;
  } catch (const std::exception& e) {
    error = e.what();
    code = kExitUsage;
  }
  if (!error.empty()) {
    std::cerr << "error: " << error << "\n";
    if (code == kExitUsage) std::cerr << "\n" << sub->help();
  }
  run.write_manifest(code, error);
  return code;
}
