#include "qalloc/experiment.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qalloc/error.hpp"

namespace qalloc {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw ConfigError("attack: bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::string_view kind_name(AttackSpec::Kind k) {
  switch (k) {
    case AttackSpec::Kind::None: return "none";
    case AttackSpec::Kind::H1: return "H1";
    case AttackSpec::Kind::H2: return "H2";
    case AttackSpec::Kind::PlanFile: return "plan";
  }
  return "none";
}

AttackSpec::Kind parse_kind(std::string_view s) {
  if (s == "none") return AttackSpec::Kind::None;
  if (s == "H1" || s == "h1") return AttackSpec::Kind::H1;
  if (s == "H2" || s == "h2") return AttackSpec::Kind::H2;
  if (s == "plan") return AttackSpec::Kind::PlanFile;
  throw ConfigError("attack.kind: expected none, H1, H2 or plan, got '" + std::string(s) + "'");
}

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, std::string_view where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type");
  }
}

json attack_json(const AttackSpec& a) {
  return json{{"kind", std::string(kind_name(a.kind))}, {"n", a.n}, {"k", a.k}, {"ks", a.ks},
              {"plan_file", a.plan_file}};
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["topology"] = c.topology;
  j["base_errors"] = {{"cnot", c.base_cnot_error}, {"readout", c.base_readout_error}, {"snapshot", c.base_snapshot}};
  j["allocator"] = std::string(to_string(c.allocator));
  j["community_weighting"] = std::string(to_string(c.community_weighting));
  j["attack"] = attack_json(c.attack);
  j["workload"] = {{"count", c.workload.count},           {"size_min", c.workload.size_min},
                   {"size_max", c.workload.size_max},     {"gate_density", c.workload.gate_density},
                   {"seed", c.workload.seed},             {"qasm_files", c.qasm_files}};
  j["natural_cv"] = c.natural_cv;
  j["outputs"] = {{"report", c.outputs.report}, {"rounds_csv", c.outputs.rounds_csv}, {"jobs_csv", c.outputs.jobs_csv}};
  return j;
}

ExperimentConfig config_from(const json& j) {
  check_keys(j, "config",
             {"topology", "base_errors", "allocator", "community_weighting", "attack", "workload", "natural_cv",
              "outputs"});
  ExperimentConfig c;
  read(j, "topology", c.topology, "config");
  if (j.contains("base_errors")) {
    const json& b = j["base_errors"];
    check_keys(b, "base_errors", {"cnot", "readout", "snapshot"});
    read(b, "cnot", c.base_cnot_error, "base_errors");
    read(b, "readout", c.base_readout_error, "base_errors");
    read(b, "snapshot", c.base_snapshot, "base_errors");
  }
  if (j.contains("allocator")) {
    std::string s;
    read(j, "allocator", s, "config");
    c.allocator = parse_allocator(s);
  }
  if (j.contains("community_weighting")) {
    std::string s;
    read(j, "community_weighting", s, "config");
    c.community_weighting = parse_edge_weighting(s);
  }
  if (j.contains("attack")) {
    const json& a = j["attack"];
    check_keys(a, "attack", {"kind", "n", "k", "ks", "plan_file"});
    std::string kind = "none";
    read(a, "kind", kind, "attack");
    c.attack.kind = parse_kind(kind);
    read(a, "n", c.attack.n, "attack");
    read(a, "k", c.attack.k, "attack");
    read(a, "ks", c.attack.ks, "attack");
    read(a, "plan_file", c.attack.plan_file, "attack");
  }
  if (j.contains("workload")) {
    const json& w = j["workload"];
    check_keys(w, "workload", {"count", "size_min", "size_max", "gate_density", "seed", "qasm_files"});
    read(w, "count", c.workload.count, "workload");
    read(w, "size_min", c.workload.size_min, "workload");
    read(w, "size_max", c.workload.size_max, "workload");
    read(w, "gate_density", c.workload.gate_density, "workload");
    read(w, "seed", c.workload.seed, "workload");
    read(w, "qasm_files", c.qasm_files, "workload");
  }
  read(j, "natural_cv", c.natural_cv, "config");
  if (j.contains("outputs")) {
    const json& o = j["outputs"];
    check_keys(o, "outputs", {"report", "rounds_csv", "jobs_csv"});
    read(o, "report", c.outputs.report, "outputs");
    read(o, "rounds_csv", c.outputs.rounds_csv, "outputs");
    read(o, "jobs_csv", c.outputs.jobs_csv, "outputs");
  }
  c.validate();
  return c;
}

bool file_exists(const std::string& path) {
  std::error_code ec;
  return std::filesystem::is_regular_file(path, ec);
}

void check_stealth(const MisreportPlan& plan, double cv) {
  for (const auto& t : plan.targets) {
    if (std::abs(t.delta) > cv) {
      throw ConfigError("attack: perturbation " + fmt(t.delta) + " on qubit " + std::to_string(t.qubit) +
                        " exceeds natural_cv " + fmt(cv));
    }
  }
}

json leg_json(const ExperimentReport& r) {
  json rounds = json::array();
  for (const auto& rd : r.rounds) {
    json placed = json::array();
    for (const auto& p : rd.placed) {
      placed.push_back({{"job", p.job_id}, {"qubits", p.partition.members.members()}, {"score", p.partition.score}});
    }
    rounds.push_back({{"round", rd.round_index},
                      {"active_qubits", rd.active_qubits},
                      {"utilization", rd.utilization},
                      {"placed", std::move(placed)}});
  }
  json jobs = json::array();
  for (const auto& m : r.jobs) {
    jobs.push_back({{"id", m.job_id},
                    {"round", m.round},
                    {"size", m.size},
                    {"depth", m.depth},
                    {"cnots", m.cnot_count},
                    {"swaps", m.swap_count},
                    {"pst", m.pst}});
  }
  return json{{"total_rounds", r.total_rounds()}, {"mean_utilization", r.mean_utilization()},
              {"mean_depth", r.mean_depth()},     {"mean_pst", r.mean_pst()},
              {"mean_cnots", r.mean_cnots()},     {"mean_swaps", r.mean_swaps()},
              {"rounds", std::move(rounds)},      {"jobs", std::move(jobs)}};
}

double pct_change(double before, double after) {
  return before == 0.0 ? 0.0 : 100.0 * (after - before) / before;
}

std::vector<Job> load_jobs(const ExperimentConfig& c) {
  if (c.qasm_files.empty()) return gen_workload(c.workload);
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < c.qasm_files.size(); ++i) {
    const std::string text = read_file(c.qasm_files[i]);
    try {
      jobs.push_back({i, parse_qasm_subset(text)});
    } catch (const ParseError& e) {
      throw DataError(c.qasm_files[i] + ": " + e.what());
    }
  }
  return jobs;
}

}  // namespace

AttackSpec AttackSpec::parse(std::string_view text) {
  AttackSpec a;
  if (text == "none" || text.empty()) return a;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("attack: expected none, H1:<n>:<k>, H2:<k,...> or plan:<file>");
  const std::string_view head = text.substr(0, colon);
  const std::string_view rest = text.substr(colon + 1);
  a.kind = parse_kind(head);
  switch (a.kind) {
    case Kind::H1: {
      const auto c2 = rest.find(':');
      if (c2 == std::string_view::npos) throw ConfigError("attack: H1 needs H1:<n>:<k>");
      const double n = parse_double(rest.substr(0, c2), "n");
      if (n < 1 || n != std::floor(n)) throw ConfigError("attack: H1 n must be a positive integer");
      a.n = static_cast<std::size_t>(n);
      a.k = parse_double(rest.substr(c2 + 1), "k");
      break;
    }
    case Kind::H2: {
      a.ks.clear();
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        const auto comma = rest.find(',', pos);
        const auto end = comma == std::string_view::npos ? rest.size() : comma;
        a.ks.push_back(parse_double(rest.substr(pos, end - pos), "k"));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
      }
      a.n = a.ks.size();
      break;
    }
    case Kind::PlanFile:
      a.plan_file = std::string(rest);
      break;
    case Kind::None:
      break;
  }
  return a;
}

std::string AttackSpec::to_string() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::H1: return "H1:" + std::to_string(n) + ":" + fmt(k);
    case Kind::H2: {
      std::string s = "H2:";
      for (std::size_t i = 0; i < ks.size(); ++i) s += (i ? "," : "") + fmt(ks[i]);
      return s;
    }
    case Kind::PlanFile: return "plan:" + plan_file;
  }
  return "none";
}

void ExperimentConfig::validate() const {
  if (topology.empty()) throw ConfigError("topology: must name a builtin or an edge-list file");
  if (topology != "hanoi27" && !file_exists(topology)) throw ConfigError("topology: file not found: " + topology);
  if (!(base_cnot_error >= 0.0 && base_cnot_error <= 1.0)) throw ConfigError("base_errors.cnot: must lie in [0,1]");
  if (!(base_readout_error >= 0.0 && base_readout_error <= 1.0)) {
    throw ConfigError("base_errors.readout: must lie in [0,1]");
  }
  if (!base_snapshot.empty() && !file_exists(base_snapshot)) {
    throw ConfigError("base_errors.snapshot: file not found: " + base_snapshot);
  }
  if (!(natural_cv >= 0.0)) throw ConfigError("natural_cv: must be non-negative");
  switch (attack.kind) {
    case AttackSpec::Kind::None: break;
    case AttackSpec::Kind::H1:
      if (attack.n == 0) throw ConfigError("attack.n: must be positive");
      if (!(attack.k > 0.0)) throw ConfigError("attack.k: must be positive");
      if (attack.k > natural_cv) throw ConfigError("attack.k: " + fmt(attack.k) + " exceeds natural_cv " + fmt(natural_cv));
      break;
    case AttackSpec::Kind::H2:
      if (attack.ks.empty()) throw ConfigError("attack.ks: must be non-empty");
      for (std::size_t i = 0; i < attack.ks.size(); ++i) {
        if (!(attack.ks[i] > 0.0 && attack.ks[i] < 1.0)) throw ConfigError("attack.ks: values must lie in (0,1)");
        if (i > 0 && !(attack.ks[i] < attack.ks[i - 1])) throw ConfigError("attack.ks: must be strictly decreasing");
      }
      if (attack.ks.front() > natural_cv) {
        throw ConfigError("attack.ks: " + fmt(attack.ks.front()) + " exceeds natural_cv " + fmt(natural_cv));
      }
      break;
    case AttackSpec::Kind::PlanFile:
      if (!file_exists(attack.plan_file)) throw ConfigError("attack.plan_file: file not found: " + attack.plan_file);
      break;
  }
  if (qasm_files.empty()) {
    if (workload.size_min < 1 || workload.size_min > workload.size_max) {
      throw ConfigError("workload: sizes must satisfy 1 <= size_min <= size_max");
    }
    if (!(workload.gate_density >= 0.0)) throw ConfigError("workload.gate_density: must be non-negative");
  }
  for (const auto& f : qasm_files) {
    if (!file_exists(f)) throw ConfigError("workload.qasm_files: file not found: " + f);
  }
}

std::string config_to_json(const ExperimentConfig& c, int indent) { return config_json(c).dump(indent); }

ExperimentConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return config_from(j);
}

ExperimentConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("config")) return config_from(j["config"]);
  return config_from(j);
}

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  if (name == "hanoi-h1") {
    c.attack.kind = AttackSpec::Kind::H1;
    c.attack.n = 3;
    c.attack.k = 0.15;
  } else if (name == "hanoi-h2") {
    c.attack.kind = AttackSpec::Kind::H2;
    c.attack.ks = {0.15, 0.12, 0.10};
    c.attack.n = 3;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

std::vector<std::string> preset_names() { return {"hanoi-h1", "hanoi-h2"}; }

SimulationResult simulate(const ExperimentConfig& config) {
  config.validate();
  SimulationResult r;
  r.config = config;
  const CouplingGraph g = load_topology(config.topology);
  CalibrationSnapshot truth = config.base_snapshot.empty()
                                  ? CalibrationSnapshot::uniform(g, config.base_cnot_error, config.base_readout_error)
                                  : load_calibration_csv(read_file(config.base_snapshot), g)[0];
  const std::vector<Job> jobs = load_jobs(config);

  switch (config.attack.kind) {
    case AttackSpec::Kind::None: break;
    case AttackSpec::Kind::H1: r.plan = make_h1_plan(g, config.attack.n, config.attack.k); break;
    case AttackSpec::Kind::H2: r.plan = make_h2_plan(g, config.attack.ks); break;
    case AttackSpec::Kind::PlanFile: {
      r.plan = plan_from_json(read_file(config.attack.plan_file));
      for (const auto& t : r.plan->targets) {
        if (t.qubit >= g.qubit_count()) throw ConfigError("attack plan: qubit " + std::to_string(t.qubit) + " not on device");
      }
      break;
    }
  }
  if (r.plan) check_stealth(*r.plan, config.natural_cv);

  const ComdapOptions options{config.community_weighting, ExtractionMode::Greedy};
  r.baseline = run_queue(jobs, g, truth, truth, config.allocator, options);
  if (r.plan) {
    const CalibrationSnapshot reported = apply_misreport(truth, g, *r.plan);
    r.attacked = run_queue(jobs, g, truth, reported, config.allocator, options);
  } else {
    r.attacked = r.baseline;
  }

  r.comparison.delta_rounds =
      static_cast<double>(r.attacked.total_rounds()) - static_cast<double>(r.baseline.total_rounds());
  r.comparison.delta_utilization = r.baseline.mean_utilization() - r.attacked.mean_utilization();
  r.comparison.depth_change_pct = pct_change(r.baseline.mean_depth(), r.attacked.mean_depth());
  r.comparison.pst_change_pct = pct_change(r.baseline.mean_pst(), r.attacked.mean_pst());
  return r;
}

std::string report_to_json(const SimulationResult& r, int indent) {
  json j;
  j["config"] = config_json(r.config);
  j["config"].erase("outputs");
  j["seeds"] = json::array({r.config.workload.seed});
  j["plan"] = r.plan ? json::parse(plan_to_json(*r.plan, -1)) : json(nullptr);
  j["labels"] = {{"latency_metric", "rounds"},
                 {"pst", "analytic product of true gate and readout fidelities"},
                 {"community_weighting", std::string(to_string(r.config.community_weighting))},
                 {"cri_normalizer", "all qubits"}};
  j["baseline"] = leg_json(r.baseline);
  j["attacked"] = leg_json(r.attacked);
  j["comparison"] = {{"delta_rounds", r.comparison.delta_rounds},
                     {"delta_utilization", r.comparison.delta_utilization},
                     {"depth_change_pct", r.comparison.depth_change_pct},
                     {"pst_change_pct", r.comparison.pst_change_pct}};
  return j.dump(indent) + "\n";
}

std::string rounds_csv(const SimulationResult& r) {
  std::ostringstream out;
  out << "round,leg,placed,active,utilization\n";
  auto emit = [&](const char* leg, const ExperimentReport& rep) {
    for (const auto& rd : rep.rounds) {
      out << rd.round_index << ',' << leg << ',' << rd.placed.size() << ',' << rd.active_qubits << ','
          << fmt(rd.utilization) << '\n';
    }
  };
  emit("baseline", r.baseline);
  emit("attacked", r.attacked);
  return out.str();
}

std::string jobs_csv(const SimulationResult& r) {
  std::ostringstream out;
  out << "leg,id,round,size,depth,cnots,swaps,pst\n";
  auto emit = [&](const char* leg, const ExperimentReport& rep) {
    for (const auto& m : rep.jobs) {
      out << leg << ',' << m.job_id << ',' << m.round << ',' << m.size << ',' << m.depth << ',' << m.cnot_count << ','
          << m.swap_count << ',' << fmt(m.pst) << '\n';
    }
  };
  emit("baseline", r.baseline);
  emit("attacked", r.attacked);
  return out.str();
}

SweepRow summarize(std::uint64_t seed, const SimulationResult& r) {
  SweepRow row;
  row.seed = seed;
  row.baseline_rounds = r.baseline.total_rounds();
  row.attacked_rounds = r.attacked.total_rounds();
  row.baseline_utilization = r.baseline.mean_utilization();
  row.attacked_utilization = r.attacked.mean_utilization();
  row.baseline_depth = r.baseline.mean_depth();
  row.attacked_depth = r.attacked.mean_depth();
  row.baseline_pst = r.baseline.mean_pst();
  row.attacked_pst = r.attacked.mean_pst();
  row.comparison = r.comparison;
  return row;
}

namespace {

SweepRow sweep_one(const ExperimentConfig& config, std::uint64_t seed) {
  ExperimentConfig c = config;
  c.workload.seed = seed;
  return summarize(seed, simulate(c));
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentConfig& config, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("sweep: at least one seed required");
  config.validate();
  std::vector<SweepRow> rows(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  const auto n = static_cast<std::int64_t>(seeds.size());
#ifdef QALLOC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      rows[k] = sweep_one(config, seeds[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

namespace serial {

std::vector<SweepRow> sweep(const ExperimentConfig& config, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("sweep: at least one seed required");
  std::vector<SweepRow> rows;
  for (std::uint64_t s : seeds) rows.push_back(sweep_one(config, s));
  return rows;
}

}  // namespace serial

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "seed,baseline_rounds,attacked_rounds,delta_rounds,baseline_utilization,attacked_utilization,"
         "delta_utilization,baseline_depth,attacked_depth,depth_change_pct,baseline_pst,attacked_pst,pst_change_pct\n";
  auto values = [](const SweepRow& r) {
    return std::vector<double>{static_cast<double>(r.baseline_rounds),
                               static_cast<double>(r.attacked_rounds),
                               r.comparison.delta_rounds,
                               r.baseline_utilization,
                               r.attacked_utilization,
                               r.comparison.delta_utilization,
                               r.baseline_depth,
                               r.attacked_depth,
                               r.comparison.depth_change_pct,
                               r.baseline_pst,
                               r.attacked_pst,
                               r.comparison.pst_change_pct};
  };
  constexpr std::size_t kCols = 12;
  std::vector<double> sum(kCols, 0.0);
  std::vector<double> sq(kCols, 0.0);
  for (const auto& r : rows) {
    const auto v = values(r);
    out << r.seed;
    for (std::size_t i = 0; i < kCols; ++i) {
      out << ',' << fmt(v[i]);
      sum[i] += v[i];
    }
    out << '\n';
  }
  if (rows.empty()) return out.str();
  const double n = static_cast<double>(rows.size());
  std::vector<double> mean(kCols);
  for (std::size_t i = 0; i < kCols; ++i) mean[i] = sum[i] / n;
  for (const auto& r : rows) {
    const auto v = values(r);
    for (std::size_t i = 0; i < kCols; ++i) sq[i] += (v[i] - mean[i]) * (v[i] - mean[i]);
  }
  out << "mean";
  for (double m : mean) out << ',' << fmt(m);
  out << "\nstd";
  for (std::size_t i = 0; i < kCols; ++i) out << ',' << fmt(rows.size() > 1 ? std::sqrt(sq[i] / (n - 1.0)) : 0.0);
  out << '\n';
  return out.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw ConfigError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw ConfigError("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace qalloc
