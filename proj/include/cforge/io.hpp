#ifndef CFORGE_IO_HPP
#define CFORGE_IO_HPP

#include <string>

#include "cforge/cocycle.hpp"
#include "cforge/domination.hpp"
#include "cforge/graph.hpp"
#include "cforge/majorization.hpp"
#include "cforge/perturb.hpp"
#include "cforge/separation.hpp"

namespace cforge {

// JSON payloads carry floats with 17 significant digits, so every double
// round-trips bit-exactly.

std::string cocycle_to_json(const CyclicCocycle& c);
CyclicCocycle cocycle_from_json(const std::string& text);

std::string graph_to_json(const LyapunovGraph& g);
LyapunovGraph graph_from_json(const std::string& text);

std::string domination_report_to_json(const DominationReport& r);

// One row per vertex: step, moved_index (-1 for the start), sigma_0..sigma_d.
std::string plan_to_csv(const GraphPathPlan& plan);

// One row per sample: sample, max phase deviation from the base,
// sigma_0..sigma_d.  The path must have its graphs computed.
std::string path_to_csv(const PerturbationPath& path);

// One row per phase: phase, z_1..z_d, good flag.
std::string zscores_to_csv(const ZScoreTable& t);

// File helpers; throw on I/O failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace cforge

#endif
