#include "bpsim/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bpsim/analysis.hpp"
#include "bpsim/csvio.hpp"
#include "bpsim/errors.hpp"
#include "bpsim/hash.hpp"
#include "bpsim/network_io.hpp"
#include "bpsim/scenario.hpp"
#include "bpsim/sim.hpp"
#include "bpsim/svg.hpp"

namespace bpsim {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path resolve_out(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("BPSIM_OUT"); env != nullptr && *env != 0)
    return env;
  return "out";
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct ArtifactSet {
  fs::path dir;
  std::vector<std::pair<std::string, std::string>> hashes;

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(dir / name, content);
    hashes.emplace_back(name, to_hex(fnv1a64(content)));
  }
};

void write_manifest(ArtifactSet& arts, const std::vector<std::string>& command,
                    std::optional<std::uint64_t> input_hash,
                    std::optional<std::uint64_t> seed) {
  json doc;
  doc["schema"] = "bpsim.manifest.v1";
  doc["tool_version"] = kToolVersion;
  doc["command"] = command;
  if (input_hash) doc["scenario_hash"] = to_hex(*input_hash);
  if (seed) doc["seed"] = *seed;
  json a = json::object();
  for (const auto& [name, hash] : arts.hashes) a[name] = hash;
  doc["artifacts"] = std::move(a);
  write_file_atomic(arts.dir / "manifest.json", doc.dump(2) + "\n");
}

struct SimOverrides {
  std::int64_t horizon = -1;
  std::int64_t seed = -1;
  double scale = -1.0;
  std::string controller;
};

// Overrides are applied to the document before the scenario is built so the
// scenario hash matches what actually runs.
Scenario load_patched(const fs::path& path, const SimOverrides& ov) {
  json doc;
  try {
    doc = json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path.string() + ": not a JSON object");
  if (ov.horizon >= 0) doc["horizon"] = ov.horizon;
  if (ov.seed >= 0) doc["seed"] = static_cast<std::uint64_t>(ov.seed);
  if (ov.scale > 0.0) {
    double base = 1.0;
    if (auto it = doc.find("arrival_scale"); it != doc.end()) {
      if (!it->is_number()) throw ConfigError("\"arrival_scale\" must be a number");
      base = it->get<double>();
    }
    doc["arrival_scale"] = base * ov.scale;
  }
  if (!ov.controller.empty()) {
    if (!doc.contains("controller")) doc["controller"] = json::object();
    doc["controller"]["kind"] = ov.controller;
  }
  return load_scenario(doc.dump(), fs::absolute(path).parent_path());
}

void append_overrides(std::vector<std::string>& cmd, const SimOverrides& ov) {
  if (ov.horizon >= 0) {
    cmd.push_back("--horizon");
    cmd.push_back(std::to_string(ov.horizon));
  }
  if (ov.seed >= 0) {
    cmd.push_back("--seed");
    cmd.push_back(std::to_string(ov.seed));
  }
  if (ov.scale > 0.0) {
    cmd.push_back("--scale");
    cmd.push_back(format_double(ov.scale));
  }
  if (!ov.controller.empty()) {
    cmd.push_back("--controller");
    cmd.push_back(ov.controller);
  }
}

struct RunMetrics {
  double mean_queue = 0.0;  // time average of total queue
  double max_queue = 0.0;   // worst single queue over the run
  double throughput = 0.0;  // exits per slot
  double exited = 0.0;
};

RunMetrics compute_metrics(const Trace& tr) {
  RunMetrics m;
  for (const SlotRecord& rec : tr.slots) {
    double tot = 0.0;
    for (double q : rec.queues) {
      tot += q;
      m.max_queue = std::max(m.max_queue, q);
    }
    m.mean_queue += tot;
  }
  const auto t = static_cast<double>(tr.slots.size());
  if (t > 0) {
    m.mean_queue /= t;
    m.throughput = tr.total_exits / t;
  }
  m.exited = tr.total_exits;
  return m;
}

double metric_value(const RunMetrics& m, const std::string& name) {
  if (name == "mean-queue") return m.mean_queue;
  if (name == "max-queue") return m.max_queue;
  if (name == "throughput") return m.throughput;
  if (name == "exited") return m.exited;
  throw ConfigError("unknown metric \"" + name + "\"");
}

const std::vector<std::string> kAllControllers = {"backpressure", "fixed-time",
                                                  "scats"};
const std::vector<std::string> kAllMetrics = {"mean-queue", "max-queue",
                                              "throughput", "exited"};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ",";
    out += p;
  }
  return out;
}

// Queue-over-time chart; at most ten series, largest time-averaged queues
// first when the network has more links than colors.
std::string queues_chart(const Trace& tr) {
  const std::size_t t = tr.slots.size();
  std::vector<double> mean(tr.num_links, 0.0);
  for (const SlotRecord& rec : tr.slots)
    for (int a = 0; a < tr.num_links; ++a) mean[a] += rec.queues[a];
  std::vector<int> order(tr.num_links);
  for (int a = 0; a < tr.num_links; ++a) order[a] = a;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return mean[a] > mean[b]; });
  if (order.size() > 10) order.resize(10);
  std::sort(order.begin(), order.end());

  std::vector<Series> series;
  for (int a : order) {
    Series s;
    s.label = "link " + std::to_string(a);
    s.x.reserve(t);
    s.y.reserve(t);
    for (const SlotRecord& rec : tr.slots) {
      s.x.push_back(static_cast<double>(rec.slot));
      s.y.push_back(rec.queues[a]);
    }
    series.push_back(std::move(s));
  }
  return line_chart("queue length by link", "slot", "vehicles", series);
}

std::string comparison_chart(
    const std::string& title,
    const std::vector<std::pair<std::string, Trace>>& runs, bool use_max) {
  std::vector<Series> series;
  for (const auto& [name, tr] : runs) {
    Series s;
    s.label = name;
    for (const SlotRecord& rec : tr.slots) {
      double v = 0.0;
      if (use_max) {
        for (double q : rec.queues) v = std::max(v, q);
      } else {
        for (double q : rec.queues) v += q;
        if (!rec.queues.empty()) v /= static_cast<double>(rec.queues.size());
      }
      s.x.push_back(static_cast<double>(rec.slot));
      s.y.push_back(v);
    }
    series.push_back(std::move(s));
  }
  return line_chart(title, "slot", "vehicles", series);
}

// --lambda / --direction values: one per link, or one per entry link in
// ascending link order.
std::vector<double> parse_rate_vector(const std::string& text,
                                      const Network& net, const char* what) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
      vals.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": cannot parse \"" + item + "\"");
    }
  }
  if (vals.size() == net.links.size()) return vals;
  std::vector<LinkId> entries;
  for (const Link& l : net.links)
    if (l.is_entry) entries.push_back(l.id);
  if (vals.size() == entries.size()) {
    std::vector<double> full(net.links.size(), 0.0);
    for (std::size_t i = 0; i < entries.size(); ++i) full[entries[i]] = vals[i];
    return full;
  }
  throw ConfigError(std::string(what) + " needs one value per link (" +
                    std::to_string(net.links.size()) + ") or per entry link (" +
                    std::to_string(entries.size()) + ")");
}

StateDistribution uniform_pi(const Network& net) {
  StateDistribution pi;
  for (const Junction& jn : net.junctions)
    pi.per_junction.emplace_back(
        jn.states.size(), 1.0 / static_cast<double>(jn.states.size()));
  return pi;
}

StateDistribution load_pi(const fs::path& path, const Network& net) {
  json doc;
  try {
    doc = json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  StateDistribution pi;
  if (doc.is_object() && doc.contains("product")) {
    if (doc.size() != 1 || !doc["product"].is_array())
      throw ConfigError("pi file: \"product\" must be the only key, an array");
    for (const auto& row : doc["product"]) {
      if (!row.is_array()) throw ConfigError("pi file: product rows are arrays");
      pi.per_junction.push_back(row.get<std::vector<double>>());
    }
    return pi;
  }
  if (doc.is_object() && doc.contains("joint")) {
    if (doc.size() != 1 || !doc["joint"].is_array())
      throw ConfigError("pi file: \"joint\" must be the only key, an array");
    pi.joint = true;
    for (const auto& entry : doc["joint"]) {
      if (!entry.is_object() || !entry.contains("states") ||
          !entry.contains("p"))
        throw ConfigError("pi file: joint entries need \"states\" and \"p\"");
      const auto ids = entry["states"].get<std::vector<int>>();
      if (ids.size() != net.junctions.size())
        throw ConfigError("pi file: joint entry needs one state per junction");
      std::vector<int> assignment(ids.size(), -1);
      for (std::size_t ji = 0; ji < ids.size(); ++ji) {
        const auto& states = net.junctions[ji].states;
        for (std::size_t zi = 0; zi < states.size(); ++zi)
          if (states[zi].id == ids[ji]) assignment[ji] = static_cast<int>(zi);
        if (assignment[ji] < 0)
          throw ConfigError("pi file: junction " +
                            std::to_string(net.junctions[ji].id) +
                            " has no state " + std::to_string(ids[ji]));
      }
      pi.support.emplace_back(std::move(assignment), entry["p"].get<double>());
    }
    return pi;
  }
  throw ConfigError("pi file needs a \"product\" or \"joint\" key");
}

int cmd_simulate(const std::string& scenario, const std::string& out,
                 const SimOverrides& ov) {
  const Scenario sc = load_patched(scenario, ov);
  if (sc.horizon < 1) throw ConfigError("simulate needs horizon >= 1");
  const Trace tr = run(sc);

  ArtifactSet arts{resolve_out(out)};
  arts.write("trace.csv", trace_csv(tr));
  const RunMetrics m = compute_metrics(tr);
  const std::string cname = to_string(sc.controller.kind);
  std::vector<MetricRow> rows;
  for (const auto& name : kAllMetrics)
    rows.push_back({cname, name, metric_value(m, name)});
  arts.write("metrics.csv", metrics_csv(rows));
  const std::vector<double> grid = {1,  2,  5,   10,  20,
                                    50, 100, 200, 500, 1000};
  arts.write("stability.csv", stability_csv(stability_statistic(tr, grid)));
  arts.write("drift.csv", drift_csv(drift_estimate(tr, 12)));
  arts.write("queues_per_link.svg", queues_chart(tr));

  std::vector<std::string> cmd = {"simulate", "--scenario",
                                  fs::absolute(scenario).string()};
  append_overrides(cmd, ov);
  write_manifest(arts, cmd, sc.hash(), sc.seed);

  std::cout << "controller=" << cname << " slots=" << tr.slots.size()
            << " arrivals=" << format_double(tr.total_arrivals)
            << " exits=" << format_double(tr.total_exits)
            << " breach=" << (tr.any_breach() ? 1 : 0) << "\n";
  return 0;
}

int cmd_capacity(const std::string& network, const std::string& scenario,
                 const std::string& pi_path, const std::string& lambda_s,
                 const std::string& direction_s, bool routed,
                 const std::string& out) {
  if (network.empty() == scenario.empty())
    throw ConfigError("capacity needs exactly one of --network or --scenario");
  if (!lambda_s.empty() && !direction_s.empty())
    throw ConfigError("pass --lambda or --direction, not both");
  if (routed && scenario.empty())
    throw ConfigError("--routed needs --scenario (turn ratios live there)");
  if (!pi_path.empty() && !scenario.empty())
    throw ConfigError("--pi applies only with --network");

  Network net;
  NetIndex ix;
  StateDistribution pi;
  TurnRatios ratios;
  std::vector<double> default_direction;
  std::optional<std::uint64_t> input_hash, seed;
  if (!scenario.empty()) {
    const Scenario sc = load_patched(scenario, {});
    net = sc.net;
    ix = sc.index;
    pi = StateDistribution::product_of(sc);
    ratios = sc.ratios;
    default_direction = sc.mean_rates();
    input_hash = sc.hash();
    seed = sc.seed;
  } else {
    net = load_network_file(network);
    ix = NetIndex::build(net);
    pi = pi_path.empty() ? uniform_pi(net) : load_pi(pi_path, net);
    input_hash = fnv1a64(save_network(net));
  }

  ArtifactSet arts{resolve_out(out)};
  std::vector<std::string> cmd = {"capacity"};
  if (!scenario.empty()) {
    cmd.push_back("--scenario");
    cmd.push_back(fs::absolute(scenario).string());
  } else {
    cmd.push_back("--network");
    cmd.push_back(fs::absolute(network).string());
  }
  if (!pi_path.empty()) {
    cmd.push_back("--pi");
    cmd.push_back(fs::absolute(pi_path).string());
  }

  if (!lambda_s.empty()) {
    const auto lambda = parse_rate_vector(lambda_s, net, "--lambda");
    cmd.push_back("--lambda");
    cmd.push_back(lambda_s);
    const RegionCertificate cert = capacity_feasible(net, ix, pi, lambda);
    arts.write("certificate.json", certificate_json(net, ix, cert, lambda));
    write_manifest(arts, cmd, input_hash, seed);
    if (cert.feasible) {
      std::cout << "feasible max_residual="
                << format_double(cert.max_residual) << "\n";
    } else {
      std::cout << "infeasible\n";
      for (const auto& w : cert.witness) std::cout << "witness: " << w << "\n";
    }
    return 0;
  }

  std::vector<double> direction;
  if (!direction_s.empty()) {
    direction = parse_rate_vector(direction_s, net, "--direction");
    cmd.push_back("--direction");
    cmd.push_back(direction_s);
  } else if (!scenario.empty()) {
    direction = default_direction;
  } else {
    throw ConfigError("capacity with --network needs --lambda or --direction");
  }
  if (routed) cmd.push_back("--routed");

  const ThroughputResult res =
      routed ? max_throughput_multiplier_routed(net, ix, pi, ratios, direction)
             : max_throughput_multiplier(net, ix, pi, direction);
  json doc;
  if (res.unbounded) {
    doc["schema"] = "bpsim.certificate.v1";
    doc["unbounded"] = true;
    doc["direction"] = direction;
  } else {
    std::vector<double> lambda_eff(direction.size(), 0.0);
    for (std::size_t a = 0; a < direction.size(); ++a)
      lambda_eff[a] = res.rho_star * direction[a];
    doc = json::parse(certificate_json(net, ix, res.cert, lambda_eff));
    doc["rho_star"] = res.rho_star;
    doc["direction"] = direction;
    doc["routed"] = routed;
  }
  arts.write("certificate.json", doc.dump(2) + "\n");
  write_manifest(arts, cmd, input_hash, seed);
  if (res.unbounded)
    std::cout << "unbounded\n";
  else
    std::cout << "rho_star=" << fmt6(res.rho_star) << "\n";
  return 0;
}

int cmd_sweep(const std::string& scenario, const std::string& out,
              std::vector<std::string> controllers, const SweepSpec& base,
              const std::string& criterion_name, double v_flag,
              const SimOverrides& ov) {
  const Scenario sc = load_patched(scenario, ov);
  if (sc.horizon < 1) throw ConfigError("sweep needs horizon >= 1");
  if (controllers.empty()) controllers = kAllControllers;

  SweepSpec spec = base;
  if (criterion_name == "stability") {
    spec.criterion = SweepCriterion::StabilityThreshold;
    spec.v_threshold =
        v_flag >= 0.0 ? v_flag : 10.0 * static_cast<double>(sc.net.num_links());
  } else {
    spec.criterion = SweepCriterion::NoCapacityBreach;
  }

  std::vector<std::pair<std::string, SweepResult>> runs;
  for (const auto& name : controllers) {
    ControllerConfig cfg = sc.controller;
    cfg.kind = controller_kind_from(name);
    runs.emplace_back(name, empirical_multiplier(sc, cfg, spec));
  }

  ArtifactSet arts{resolve_out(out)};
  arts.write("sweep.csv", sweep_csv(runs));
  std::vector<double> rho_hats;
  for (const auto& [name, res] : runs) rho_hats.push_back(res.rho_hat);
  arts.write("sweep_multiplier.svg",
             bar_chart("largest sustainable demand multiplier", "controller",
                       "rho", controllers, rho_hats));

  std::vector<std::string> cmd = {"sweep", "--scenario",
                                  fs::absolute(scenario).string(),
                                  "--controllers", join(controllers)};
  cmd.push_back("--criterion");
  cmd.push_back(criterion_name);
  cmd.push_back("--rho-min");
  cmd.push_back(format_double(spec.rho_lo));
  cmd.push_back("--rho-max");
  cmd.push_back(format_double(spec.rho_hi));
  cmd.push_back("--resolution");
  cmd.push_back(format_double(spec.resolution));
  if (spec.criterion == SweepCriterion::StabilityThreshold) {
    cmd.push_back("--v");
    cmd.push_back(format_double(spec.v_threshold));
    cmd.push_back("--tau");
    cmd.push_back(format_double(spec.tau));
  }
  append_overrides(cmd, ov);
  write_manifest(arts, cmd, sc.hash(), sc.seed);

  for (const auto& [name, res] : runs)
    std::cout << name << " rho_hat=" << fmt6(res.rho_hat)
              << (res.hit_upper_bound ? " (hit search bound)" : "") << "\n";
  return 0;
}

int cmd_compare(const std::string& scenario, const std::string& out,
                std::vector<std::string> controllers,
                std::vector<std::string> metrics, const SimOverrides& ov) {
  const Scenario sc = load_patched(scenario, ov);
  if (sc.horizon < 1) throw ConfigError("compare needs horizon >= 1");
  if (controllers.empty()) controllers = kAllControllers;
  if (metrics.empty()) metrics = kAllMetrics;
  for (const auto& name : metrics) metric_value(RunMetrics{}, name);

  std::vector<std::pair<std::string, Trace>> runs;
  for (const auto& name : controllers) {
    ControllerConfig cfg = sc.controller;
    cfg.kind = controller_kind_from(name);
    auto controller = make_controller(sc, cfg);
    runs.emplace_back(name, run(sc, *controller));
  }

  std::vector<MetricRow> rows;
  for (const auto& [name, tr] : runs) {
    const RunMetrics m = compute_metrics(tr);
    for (const auto& metric : metrics)
      rows.push_back({name, metric, metric_value(m, metric)});
  }

  ArtifactSet arts{resolve_out(out)};
  arts.write("metrics.csv", metrics_csv(rows));
  arts.write("max_queue_comparison.svg",
             comparison_chart("worst queue by controller", runs, true));
  arts.write("avg_queue_comparison.svg",
             comparison_chart("average queue by controller", runs, false));

  std::vector<std::string> cmd = {"compare", "--scenario",
                                  fs::absolute(scenario).string(),
                                  "--controllers", join(controllers),
                                  "--metrics", join(metrics)};
  append_overrides(cmd, ov);
  write_manifest(arts, cmd, sc.hash(), sc.seed);

  for (const MetricRow& r : rows)
    std::cout << r.controller << " " << r.metric << "="
              << format_double(r.value) << "\n";
  return 0;
}

int cmd_rerun(const std::string& manifest, const std::string& out) {
  json doc;
  try {
    doc = json::parse(slurp(manifest));
  } catch (const json::exception& e) {
    throw ConfigError(manifest + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("command") ||
      !doc["command"].is_array())
    throw ConfigError(manifest + ": no \"command\" array to replay");
  std::vector<std::string> cmd;
  for (const auto& part : doc["command"]) {
    if (!part.is_string())
      throw ConfigError(manifest + ": command parts must be strings");
    cmd.push_back(part.get<std::string>());
  }
  cmd.push_back("--out");
  cmd.push_back(resolve_out(out).string());
  return run_command(cmd);
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"road-network simulation, control, and capacity analysis"};
  app.name("bpsim");
  app.require_subcommand(1);

  std::string scenario, network, out, pi_path, lambda_s, direction_s;
  std::string manifest, criterion = "breach", controller_override;
  std::vector<std::string> controllers, metrics;
  bool routed = false;
  SimOverrides ov;
  SweepSpec spec;
  double v_flag = -1.0;

  auto* sim = app.add_subcommand("simulate", "run one scenario, dump artifacts");
  sim->add_option("--scenario", scenario, "scenario JSON")->required();
  sim->add_option("--out", out, "output directory (default $BPSIM_OUT or ./out)");
  sim->add_option("--horizon", ov.horizon, "override horizon");
  sim->add_option("--seed", ov.seed, "override seed");
  sim->add_option("--scale", ov.scale, "multiply arrival_scale");
  sim->add_option("--controller", controller_override, "override controller kind")
      ->check(CLI::IsMember(kAllControllers));

  auto* cap = app.add_subcommand("capacity", "capacity region membership and boundary");
  cap->add_option("--network", network, "network JSON");
  cap->add_option("--scenario", scenario, "scenario JSON (brings pi and ratios)");
  cap->add_option("--pi", pi_path, "state distribution JSON (with --network)");
  cap->add_option("--lambda", lambda_s, "demand vector, comma separated");
  cap->add_option("--direction", direction_s, "demand direction, comma separated");
  cap->add_flag("--routed", routed, "pin flows to the scenario's turn ratios");
  cap->add_option("--out", out, "output directory");

  auto* swp = app.add_subcommand("sweep", "empirical throughput multiplier search");
  swp->add_option("--scenario", scenario, "scenario JSON")->required();
  swp->add_option("--out", out, "output directory");
  swp->add_option("--controllers", controllers, "controller list")
      ->delimiter(',');
  swp->add_option("--rho-min", spec.rho_lo, "search lower bound");
  swp->add_option("--rho-max", spec.rho_hi, "search upper bound");
  swp->add_option("--resolution", spec.resolution, "grid step");
  swp->add_option("--criterion", criterion, "breach | stability")
      ->check(CLI::IsMember({"breach", "stability"}));
  swp->add_option("--v", v_flag, "stability threshold (default 10x links)");
  swp->add_option("--tau", spec.tau, "stability statistic bound");
  swp->add_option("--horizon", ov.horizon, "override horizon");
  swp->add_option("--seed", ov.seed, "override seed");

  auto* cmp = app.add_subcommand("compare", "run several controllers, compare metrics");
  cmp->add_option("--scenario", scenario, "scenario JSON")->required();
  cmp->add_option("--out", out, "output directory");
  cmp->add_option("--controllers", controllers, "controller list")
      ->delimiter(',');
  cmp->add_option("--metrics", metrics, "metric list")->delimiter(',');
  cmp->add_option("--horizon", ov.horizon, "override horizon");
  cmp->add_option("--seed", ov.seed, "override seed");

  auto* rer = app.add_subcommand("rerun", "replay a manifest's command");
  rer->add_option("--manifest", manifest, "manifest JSON")->required();
  rer->add_option("--out", out, "output directory");

  std::vector<const char*> argv;
  argv.push_back("bpsim");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (sim->parsed()) {
      ov.controller = controller_override;
      return cmd_simulate(scenario, out, ov);
    }
    if (cap->parsed())
      return cmd_capacity(network, scenario, pi_path, lambda_s, direction_s,
                          routed, out);
    if (swp->parsed())
      return cmd_sweep(scenario, out, controllers, spec, criterion, v_flag, ov);
    if (cmp->parsed()) return cmd_compare(scenario, out, controllers, metrics, ov);
    if (rer->parsed()) return cmd_rerun(manifest, out);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace bpsim
