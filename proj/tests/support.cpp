#include "support.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include "bpsim/network_io.hpp"

namespace bpsim::testing {

std::filesystem::path data_dir() {
#ifdef BPSIM_DATA_DIR
  return std::filesystem::path(BPSIM_DATA_DIR);
#else
  return std::filesystem::path("data");
#endif
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::filesystem::path fresh_tmp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto base = std::filesystem::temp_directory_path() / "bpsim_tests";
  const auto dir =
      base / (tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Network load_data_network(const std::string& name) {
  return load_network_file(data_dir() / name);
}

Scenario load_data_scenario(const std::string& name) {
  return load_scenario_file(data_dir() / name);
}

JunctionCase random_junction_case(std::mt19937_64& rng) {
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  const int num_in = pick(1, 4);
  const int num_out = pick(1, 3);

  JunctionCase jc;
  for (int a = 0; a < num_in; ++a)
    jc.net.links.push_back({a, kUnboundedCapacity, true, false});
  for (int b = 0; b < num_out; ++b) {
    const bool exit = pick(0, 1) == 1;
    jc.net.links.push_back(
        {num_in + b, kUnboundedCapacity, false, exit});
  }

  Junction jn;
  jn.id = 0;
  for (int a = 0; a < num_in; ++a)
    for (int b = 0; b < num_out; ++b)
      if (static_cast<int>(jn.movements.size()) < 12 && pick(0, 3) > 0)
        jn.movements.push_back({a, num_in + b});
  if (jn.movements.empty()) jn.movements.push_back({0, num_in});

  const int num_phases = pick(1, std::min<int>(8, 2 * static_cast<int>(jn.movements.size())));
  for (int p = 0; p < num_phases; ++p) {
    Phase ph;
    ph.id = p;
    for (const auto& m : jn.movements)
      if (pick(0, 2) > 0) ph.movements.push_back(m);
    if (ph.movements.empty())
      ph.movements.push_back(jn.movements[pick(0, static_cast<int>(jn.movements.size()) - 1)]);
    jn.phases.push_back(std::move(ph));
  }

  const int num_states = pick(1, 3);
  for (int z = 0; z < num_states; ++z) jn.states.push_back({z, ""});

  jn.rates.default_saturation = pick(0, 1) ? 1.0 : uni(0.5, 3.0);
  for (const auto& ph : jn.phases)
    for (const auto& m : ph.movements)
      for (const auto& st : jn.states)
        if (pick(0, 3) == 0) {
          // Mostly integers so distinct phases can tie exactly; some zeros to
          // exercise blocked movements inside a green phase.
          const double r = pick(0, 1) ? static_cast<double>(pick(0, 3)) : uni(0.0, 4.0);
          jn.rates.entries[{ph.id, m, st.id}] = r;
        }

  jc.net.junctions.push_back(std::move(jn));

  const bool integer_queues = pick(0, 2) > 0;
  for (int a = 0; a < num_in + num_out; ++a)
    jc.queues.push_back(integer_queues ? static_cast<double>(pick(0, 12))
                                       : uni(0.0, 20.0));
  jc.state = pick(0, num_states - 1);
  return jc;
}

namespace {

double oracle_rate(const Junction& jn, PhaseId p, const Movement& m,
                   StateId z) {
  const auto it = jn.rates.entries.find({p, m, z});
  return it != jn.rates.entries.end() ? it->second
                                      : jn.rates.default_saturation;
}

}  // namespace

std::vector<double> oracle_pressures(const JunctionCase& jc) {
  const Junction& jn = jc.net.junctions.front();
  std::vector<double> out;
  for (const auto& ph : jn.phases) {
    double s = 0.0;
    for (const auto& m : ph.movements) {
      const double xi = oracle_rate(jn, ph.id, m, jc.state);
      if (xi == 0.0) continue;
      const double down = jc.net.links[m.to].is_exit ? 0.0 : jc.queues[m.to];
      s += (jc.queues[m.from] - down) * xi;
    }
    out.push_back(s);
  }
  return out;
}

std::set<PhaseId> oracle_tie_set(const JunctionCase& jc) {
  const auto pressures = oracle_pressures(jc);
  const Junction& jn = jc.net.junctions.front();
  double best = pressures.front();
  for (double s : pressures) best = std::max(best, s);
  std::set<PhaseId> ties;
  for (std::size_t i = 0; i < pressures.size(); ++i)
    if (pressures[i] == best) ties.insert(jn.phases[i].id);
  return ties;
}

// conflict2: one junction, two conflicting unit-rate movements, one per
// phase. Feasible iff some grid split theta serves both demands.
bool conflict2_grid_feasible(double l0, double l1) {
  for (int k = 0; k <= 100; ++k) {
    const double theta = k / 100.0;
    if (l0 <= theta + 1e-12 && l1 <= (1.0 - theta) + 1e-12) return true;
  }
  return false;
}

double conflict2_boundary_distance(double l0, double l1) {
  return std::abs(l0 + l1 - 1.0);
}

// tandem2: junction 0 serves link 0 with its only phase (theta = 1), so the
// grid only splits junction 1 between the middle link and the side entry.
bool tandem2_grid_feasible(double l0, double l3) {
  if (l0 > 1.0 + 1e-12) return false;
  for (int k = 0; k <= 100; ++k) {
    const double theta = k / 100.0;
    if (l0 <= theta + 1e-12 && l3 <= (1.0 - theta) + 1e-12) return true;
  }
  return false;
}

double tandem2_boundary_distance(double l0, double l3) {
  return std::min(std::abs(l0 + l3 - 1.0), std::abs(l0 - 1.0));
}

Scenario chain_scenario(int junctions, std::uint64_t seed,
                        std::int64_t horizon) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 17);
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  Scenario sc;
  Network& net = sc.net;

  // One entry link per junction, then two outgoing links per junction; an
  // outgoing link feeds junction j+1 or j+2 and becomes an exit past the end.
  std::vector<LinkId> entry_of(junctions);
  for (int j = 0; j < junctions; ++j) {
    entry_of[j] = static_cast<LinkId>(net.links.size());
    net.links.push_back({entry_of[j], kUnboundedCapacity, true, false});
  }
  std::vector<std::array<LinkId, 2>> outs(junctions);
  std::vector<std::vector<LinkId>> extra_in(junctions);
  for (int j = 0; j < junctions; ++j) {
    for (int s = 0; s < 2; ++s) {
      const LinkId id = static_cast<LinkId>(net.links.size());
      const int target = j + 1 + s;
      const bool exit = target >= junctions;
      net.links.push_back({id, kUnboundedCapacity, false, exit});
      outs[j][s] = id;
      if (!exit) extra_in[target].push_back(id);
    }
  }

  for (int j = 0; j < junctions; ++j) {
    Junction jn;
    jn.id = j;
    std::vector<LinkId> ins{entry_of[j]};
    for (LinkId a : extra_in[j]) ins.push_back(a);
    for (LinkId a : ins)
      for (LinkId b : outs[j]) jn.movements.push_back({a, b});

    // Two phases split by approach: the entry link against everything
    // upstream; single-approach junctions collapse to one phase.
    Phase ph0{0, {}};
    Phase ph1{1, {}};
    for (const auto& m : jn.movements)
      (m.from == entry_of[j] ? ph0 : ph1).movements.push_back(m);
    jn.phases.push_back(std::move(ph0));
    if (!ph1.movements.empty()) jn.phases.push_back(std::move(ph1));

    jn.states.push_back({0, "dry"});
    jn.states.push_back({1, "wet"});
    jn.rates.default_saturation = 2.0;
    for (const auto& m : jn.phases.front().movements)
      jn.rates.entries[{0, m, 1}] = 1.5;
    net.junctions.push_back(std::move(jn));
  }

  sc.index = NetIndex::build(net);
  sc.network_path = "<generated>";
  sc.horizon = horizon;
  sc.seed = seed;
  sc.controller.kind = ControllerKind::Backpressure;

  for (int j = 0; j < junctions; ++j) {
    ArrivalProcess p;
    p.kind = ArrivalProcess::Kind::IidBounded;
    p.link = entry_of[j];
    p.stream = 0x41000000ull + static_cast<std::uint64_t>(p.link);
    p.a_max = 1.0;
    const double q = 0.15 + 0.02 * pick(0, 5);
    p.values = {0.0, 1.0};
    p.weights = {1.0 - q, q};
    sc.arrivals.push_back(std::move(p));
  }

  sc.ratios = TurnRatios::uniform(sc.index);
  for (int j = 0; j < junctions; ++j) {
    StateProcess z;
    z.kind = StateProcess::Kind::Iid;
    z.junction = j;
    z.stream = 0x5a000000ull + static_cast<std::uint64_t>(j);
    z.pi = {0.8, 0.2};
    sc.state_procs.push_back(std::move(z));
  }

  sc.canonical = save_network(net) + "|chain|" + std::to_string(seed) + "|" +
                 std::to_string(horizon);
  return sc;
}

}  // namespace bpsim::testing
