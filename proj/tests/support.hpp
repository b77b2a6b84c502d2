#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bpsim/network.hpp"
#include "bpsim/scenario.hpp"

namespace bpsim::testing {

std::filesystem::path data_dir();
std::string read_file(const std::filesystem::path& path);
// Fresh empty directory under the system temp root; unique per call.
std::filesystem::path fresh_tmp_dir(const std::string& tag);

Network load_data_network(const std::string& name);
Scenario load_data_scenario(const std::string& name);

// A randomized single-junction network with queues and a state draw, the
// input shape the max-pressure oracle checks run on. Bounded at 8 phases and
// 12 movements; queues are often integers so exact pressure ties occur.
struct JunctionCase {
  Network net;
  std::vector<double> queues;
  StateId state = 0;
};

JunctionCase random_junction_case(std::mt19937_64& rng);

// Independent pressure evaluation: direct rate-table lookup and a plain
// weight sum, sharing no code with the controller.
std::vector<double> oracle_pressures(const JunctionCase& jc);
std::set<PhaseId> oracle_tie_set(const JunctionCase& jc);

// Hand region oracles for the two analytically solvable networks, brute
// forced over time-share weights on a 0.01 grid.
bool conflict2_grid_feasible(double l0, double l1);
bool tandem2_grid_feasible(double l0, double l3);

// Distance from lambda to the region boundary, for band exclusion.
double conflict2_boundary_distance(double l0, double l1);
double tandem2_boundary_distance(double l0, double l3);

// A layered random network of `junctions` junctions (two outgoing links each,
// feeding the next junctions or exits) wrapped in a runnable scenario:
// Bernoulli demand at every entry, two traffic states per junction, uniform
// turn ratios, backpressure control.
Scenario chain_scenario(int junctions, std::uint64_t seed, std::int64_t horizon);

}  // namespace bpsim::testing
