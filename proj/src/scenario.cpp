#include "bpsim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bpsim/errors.hpp"
#include "bpsim/hash.hpp"
#include "bpsim/network_io.hpp"

namespace bpsim {

using nlohmann::json;

namespace {

// Stream-id namespaces keep arrival and state draws independent even when a
// link id collides with a junction id.
constexpr std::uint64_t kArrivalStreamBase = 0x4100'0000ull;
constexpr std::uint64_t kStateStreamBase = 0x5a00'0000ull;

[[noreturn]] void fail(const std::string& what) {
  throw ConfigError("scenario: " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      fail(where + ": unknown key \"" + it.key() + "\"");
}

double num(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + " must be a number");
  return v.get<double>();
}

// Object keys that name links or junctions must be integer strings.
std::int32_t parse_id(const std::string& key, const std::string& where) {
  try {
    std::size_t used = 0;
    const long v = std::stol(key, &used);
    if (used != key.size()) throw std::invalid_argument(key);
    return static_cast<std::int32_t>(v);
  } catch (const std::exception&) {
    fail(where + ": key \"" + key + "\" is not an id");
  }
}

TiePolicy tie_from(const std::string& name) {
  if (name == "lowest-phase-id") return TiePolicy::LowestPhaseId;
  if (name == "keep-previous") return TiePolicy::KeepPrevious;
  if (name == "seeded-random") return TiePolicy::SeededRandom;
  fail("unknown tie policy \"" + name + "\"");
}

ControllerConfig parse_controller(const json& cj, const Network& net) {
  if (!cj.is_object()) fail("\"controller\" must be an object");
  check_keys(cj,
             {"kind", "tie", "plans", "default_phase_slots", "scats"},
             "controller");
  ControllerConfig cfg;
  if (!cj.contains("kind") || !cj["kind"].is_string())
    fail("controller needs a string \"kind\"");
  cfg.kind = controller_kind_from(cj["kind"].get<std::string>());

  if (auto it = cj.find("tie"); it != cj.end()) {
    if (!it->is_string()) fail("controller \"tie\" must be a string");
    cfg.tie = tie_from(it->get<std::string>());
  }
  if (auto it = cj.find("default_phase_slots"); it != cj.end()) {
    if (!it->is_number_integer() || it->get<int>() < 1)
      fail("\"default_phase_slots\" must be a positive integer");
    cfg.default_phase_slots = it->get<int>();
  }
  if (auto it = cj.find("plans"); it != cj.end()) {
    if (!it->is_object()) fail("controller \"plans\" must map junction id to slices");
    for (auto pit = it->begin(); pit != it->end(); ++pit) {
      const JunctionId j = parse_id(pit.key(), "controller.plans");
      if (j < 0 || j >= net.num_junctions())
        fail("plan for unknown junction " + pit.key());
      FixedTimePlan plan;
      if (!pit->is_array() || pit->empty()) fail("plan must be a nonempty array");
      for (const auto& sj : *pit) {
        if (!sj.is_array() || sj.size() != 2 || !sj[0].is_number_integer() ||
            !sj[1].is_number_integer())
          fail("plan slices are [phase id, slots] pairs");
        const PhaseId p = sj[0].get<PhaseId>();
        const int d = sj[1].get<int>();
        if (d < 1) fail("plan durations must be >= 1");
        if (net.junctions[j].find_phase(p) == nullptr)
          fail("plan for junction " + pit.key() + " names unknown phase " +
               std::to_string(p));
        plan.slices.emplace_back(p, d);
      }
      cfg.plans.emplace(j, std::move(plan));
    }
  }
  if (auto it = cj.find("scats"); it != cj.end()) {
    if (!it->is_object()) fail("controller \"scats\" must be an object");
    check_keys(*it,
               {"cycle_min", "cycle_max", "target_ds", "adapt_step",
                "libraries"},
               "controller.scats");
    auto& s = cfg.scats;
    if (auto f = it->find("cycle_min"); f != it->end()) s.cycle_min = f->get<int>();
    if (auto f = it->find("cycle_max"); f != it->end()) s.cycle_max = f->get<int>();
    if (auto f = it->find("target_ds"); f != it->end())
      s.target_ds = num(*f, "target_ds");
    if (auto f = it->find("adapt_step"); f != it->end())
      s.adapt_step = num(*f, "adapt_step");
    if (s.cycle_min <= 0 || s.cycle_max < s.cycle_min)
      fail("scats cycle bounds must satisfy 0 < cycle_min <= cycle_max");
    if (s.target_ds <= 0.0 || s.target_ds > 1.0)
      fail("scats target_ds must be in (0, 1]");
    if (s.adapt_step <= 0.0 || s.adapt_step > 0.5)
      fail("scats adapt_step must be in (0, 0.5]");
    if (auto f = it->find("libraries"); f != it->end()) {
      if (!f->is_object()) fail("scats \"libraries\" must map junction id to plans");
      for (auto lit = f->begin(); lit != f->end(); ++lit) {
        const JunctionId j = parse_id(lit.key(), "controller.scats.libraries");
        if (j < 0 || j >= net.num_junctions())
          fail("scats library for unknown junction " + lit.key());
        std::vector<std::vector<double>> lib;
        if (!lit->is_array() || lit->empty())
          fail("scats library must be a nonempty array of plans");
        for (const auto& plj : *lit) {
          if (!plj.is_array()) fail("scats plans are arrays of fractions");
          std::vector<double> plan;
          for (const auto& v : plj) plan.push_back(num(v, "split fraction"));
          lib.push_back(std::move(plan));
        }
        s.libraries.emplace(j, std::move(lib));
      }
    }
  }
  return cfg;
}

ArrivalProcess parse_arrival(const json& aj) {
  if (!aj.is_object()) fail("arrival entries must be objects");
  check_keys(aj,
             {"link", "kind", "rate", "a_max", "values", "weights", "pieces",
              "jitter"},
             "arrivals");
  ArrivalProcess p;
  if (!aj.contains("link") || !aj["link"].is_number_integer())
    fail("arrival needs an integer \"link\"");
  p.link = aj["link"].get<LinkId>();
  p.stream = kArrivalStreamBase + static_cast<std::uint64_t>(p.link);
  if (!aj.contains("kind") || !aj["kind"].is_string())
    fail("arrival needs a string \"kind\"");
  const std::string kind = aj["kind"].get<std::string>();
  if (!aj.contains("a_max")) fail("arrival needs \"a_max\" (admissibility bound)");
  p.a_max = num(aj["a_max"], "a_max");

  if (kind == "constant") {
    p.kind = ArrivalProcess::Kind::Constant;
    if (!aj.contains("rate")) fail("constant arrival needs \"rate\"");
    p.rate = num(aj["rate"], "rate");
  } else if (kind == "iid-bounded") {
    p.kind = ArrivalProcess::Kind::IidBounded;
    if (!aj.contains("values") || !aj.contains("weights"))
      fail("iid-bounded arrival needs \"values\" and \"weights\"");
    for (const auto& v : aj["values"]) p.values.push_back(num(v, "values"));
    for (const auto& w : aj["weights"]) p.weights.push_back(num(w, "weights"));
  } else if (kind == "time-profile") {
    p.kind = ArrivalProcess::Kind::TimeProfile;
    if (!aj.contains("pieces")) fail("time-profile arrival needs \"pieces\"");
    for (const auto& pj : aj["pieces"]) {
      if (!pj.is_array() || pj.size() != 2 || !pj[0].is_number_integer())
        fail("profile pieces are [duration slots, rate] pairs");
      ArrivalProcess::Piece piece;
      piece.duration = pj[0].get<std::int64_t>();
      piece.rate = num(pj[1], "piece rate");
      p.pieces.push_back(piece);
    }
    if (auto it = aj.find("jitter"); it != aj.end())
      p.jitter = num(*it, "jitter");
  } else {
    fail("unknown arrival kind \"" + kind + "\"");
  }
  p.validate();
  return p;
}

StateProcess parse_state_proc(const json& sj, const Network& net) {
  if (!sj.is_object()) fail("state entries must be objects");
  check_keys(sj, {"junction", "kind", "pi", "matrix", "initial"}, "states");
  StateProcess sp;
  if (!sj.contains("junction") || !sj["junction"].is_number_integer())
    fail("state process needs an integer \"junction\"");
  sp.junction = sj["junction"].get<JunctionId>();
  if (sp.junction < 0 || sp.junction >= net.num_junctions())
    fail("state process for unknown junction " + std::to_string(sp.junction));
  sp.stream = kStateStreamBase + static_cast<std::uint64_t>(sp.junction);
  if (!sj.contains("kind") || !sj["kind"].is_string())
    fail("state process needs a string \"kind\"");
  const std::string kind = sj["kind"].get<std::string>();
  if (kind == "fixed") {
    sp.kind = StateProcess::Kind::Fixed;
  } else if (kind == "iid") {
    sp.kind = StateProcess::Kind::Iid;
    if (!sj.contains("pi")) fail("iid state process needs \"pi\"");
    for (const auto& v : sj["pi"]) sp.pi.push_back(num(v, "pi"));
  } else if (kind == "markov") {
    sp.kind = StateProcess::Kind::Markov;
    if (!sj.contains("matrix")) fail("markov state process needs \"matrix\"");
    for (const auto& row : sj["matrix"]) {
      std::vector<double> r;
      for (const auto& v : row) r.push_back(num(v, "matrix"));
      sp.matrix.push_back(std::move(r));
    }
    if (auto it = sj.find("initial"); it != sj.end())
      sp.initial = it->get<int>();
  } else {
    fail("unknown state process kind \"" + kind + "\"");
  }
  sp.validate(static_cast<int>(net.junctions[sp.junction].states.size()));
  return sp;
}

}  // namespace

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Backpressure: return "backpressure";
    case ControllerKind::FixedTime: return "fixed-time";
    case ControllerKind::Scats: return "scats";
  }
  return "backpressure";
}

ControllerKind controller_kind_from(const std::string& name) {
  if (name == "backpressure") return ControllerKind::Backpressure;
  if (name == "fixed-time") return ControllerKind::FixedTime;
  if (name == "scats") return ControllerKind::Scats;
  fail("unknown controller kind \"" + name + "\"");
}

std::uint64_t Scenario::hash() const { return fnv1a64(canonical); }

std::vector<double> Scenario::mean_rates() const {
  std::vector<double> out(net.num_links(), 0.0);
  for (const auto& p : arrivals) out[p.link] = p.mean_rate() * arrival_scale;
  return out;
}

Scenario Scenario::scaled(double rho) const {
  if (!(rho > 0.0)) throw ConfigError("scenario: scale must be positive");
  Scenario out = *this;
  out.arrival_scale *= rho;
  return out;
}

Scenario load_scenario(const std::string& text,
                       const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario: JSON parse failed: ") + e.what());
  }
  if (!doc.is_object()) fail("document must be a JSON object");
  check_keys(doc,
             {"network", "horizon", "seed", "slot_seconds", "arrival_scale",
              "controller", "arrivals", "turn_ratios", "states"},
             "top level");

  Scenario sc;
  if (!doc.contains("network") || !doc["network"].is_string())
    fail("needs a string \"network\" path");
  sc.network_path = doc["network"].get<std::string>();
  std::filesystem::path net_path(sc.network_path);
  if (net_path.is_relative()) net_path = base_dir / net_path;
  sc.net = load_network_file(net_path);
  sc.index = NetIndex::build(sc.net);

  if (!doc.contains("horizon") || !doc["horizon"].is_number_integer() ||
      doc["horizon"].get<std::int64_t>() < 0)
    fail("needs a nonnegative integer \"horizon\"");
  sc.horizon = doc["horizon"].get<std::int64_t>();
  if (!doc.contains("seed") || !doc["seed"].is_number_unsigned())
    fail("needs a nonnegative integer \"seed\"");
  sc.seed = doc["seed"].get<std::uint64_t>();
  if (auto it = doc.find("slot_seconds"); it != doc.end()) {
    sc.slot_seconds = num(*it, "slot_seconds");
    if (sc.slot_seconds <= 0.0) fail("\"slot_seconds\" must be positive");
  }
  if (auto it = doc.find("arrival_scale"); it != doc.end()) {
    sc.arrival_scale = num(*it, "arrival_scale");
    if (sc.arrival_scale <= 0.0) fail("\"arrival_scale\" must be positive");
  }

  if (!doc.contains("controller")) fail("needs a \"controller\" object");
  sc.controller = parse_controller(doc["controller"], sc.net);

  std::set<LinkId> seen_links;
  if (auto it = doc.find("arrivals"); it != doc.end()) {
    if (!it->is_array()) fail("\"arrivals\" must be an array");
    for (const auto& aj : *it) {
      ArrivalProcess p = parse_arrival(aj);
      if (p.link < 0 || p.link >= sc.net.num_links())
        fail("arrival for unknown link " + std::to_string(p.link));
      if (!sc.net.links[p.link].is_entry)
        fail("arrival at link " + std::to_string(p.link) +
             " which is not an entry");
      if (!seen_links.insert(p.link).second)
        fail("duplicate arrival process for link " + std::to_string(p.link));
      sc.arrivals.push_back(std::move(p));
    }
  }

  sc.ratios = TurnRatios::uniform(sc.index);
  if (auto it = doc.find("turn_ratios"); it != doc.end()) {
    if (!it->is_object()) fail("\"turn_ratios\" must map from-link to {to-link: fraction}");
    for (auto lit = it->begin(); lit != it->end(); ++lit) {
      const LinkId from = parse_id(lit.key(), "turn_ratios");
      if (from < 0 || from >= sc.net.num_links())
        fail("turn ratios for unknown link " + lit.key());
      const auto& outs = sc.index.out_of[from];
      if (outs.empty())
        fail("turn ratios for link " + lit.key() + " which has no outgoing movements");
      if (!lit->is_object()) fail("turn ratios for link " + lit.key() + " must be an object");
      for (int g : outs) sc.ratios.fraction[g] = 0.0;
      for (auto tit = lit->begin(); tit != lit->end(); ++tit) {
        const LinkId to = parse_id(tit.key(), "turn_ratios");
        const int g = sc.index.find(Movement{from, to});
        if (g < 0)
          fail("turn ratio names missing movement " + lit.key() + "->" + tit.key());
        sc.ratios.fraction[g] = num(*tit, "turn ratio");
      }
    }
  }
  sc.ratios.validate(sc.index);

  sc.state_procs.resize(sc.net.num_junctions());
  for (int j = 0; j < sc.net.num_junctions(); ++j) {
    sc.state_procs[j].kind = StateProcess::Kind::Fixed;
    sc.state_procs[j].junction = j;
    sc.state_procs[j].stream = kStateStreamBase + static_cast<std::uint64_t>(j);
  }
  if (auto it = doc.find("states"); it != doc.end()) {
    if (!it->is_array()) fail("\"states\" must be an array");
    std::set<JunctionId> seen;
    for (const auto& sj : *it) {
      StateProcess sp = parse_state_proc(sj, sc.net);
      if (!seen.insert(sp.junction).second)
        fail("duplicate state process for junction " + std::to_string(sp.junction));
      sc.state_procs[sp.junction] = std::move(sp);
    }
  }

  // Canonical form: the parsed document with the network inlined, so the
  // hash changes whenever anything the run depends on changes.
  json canon = doc;
  canon["network"] = json::parse(save_network(sc.net));
  sc.canonical = canon.dump();
  return sc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("scenario: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_scenario(buf.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::unique_ptr<Controller> make_controller(const Scenario& sc) {
  return make_controller(sc, sc.controller);
}

std::unique_ptr<Controller> make_controller(const Scenario& sc,
                                            const ControllerConfig& cfg) {
  switch (cfg.kind) {
    case ControllerKind::Backpressure:
      return std::make_unique<BackpressureController>(cfg.tie, sc.seed);
    case ControllerKind::FixedTime: {
      std::vector<FixedTimePlan> plans;
      for (const auto& jn : sc.net.junctions) {
        auto it = cfg.plans.find(jn.id);
        plans.push_back(it != cfg.plans.end()
                            ? it->second
                            : equal_split_plan(jn, cfg.default_phase_slots));
      }
      return std::make_unique<FixedTimeController>(std::move(plans));
    }
    case ControllerKind::Scats:
      return std::make_unique<ScatsController>(cfg.scats, sc.net);
  }
  throw ConfigError("scenario: unknown controller kind");
}

}  // namespace bpsim
