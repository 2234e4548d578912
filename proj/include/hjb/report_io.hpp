#pragma once

#include <iosfwd>
#include <string>

#include "hjb/solvers.hpp"

namespace hjb {

/// JSON document: algorithm, grid shape, dx, dt, control count, epsilon,
/// iterations, sub-iterations, node updates, wall seconds, residual history,
/// and nested phases.
void write_report(std::ostream& out, const RunReport& report);
RunReport read_report(std::istream& in);

/// Report text without wall-clock fields, for reproducibility comparisons.
std::string report_numerics(const RunReport& report);

}  // namespace hjb
