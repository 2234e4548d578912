#pragma once

#include <chrono>
#include <string>

#include "hjb/solvers.hpp"

namespace hjb::detail {

RunReport make_report(std::string algorithm, const RegularGrid& grid, const ControlSet& controls,
                      const SolverConfig& config);
double seconds_since(std::chrono::steady_clock::time_point start);
void require_grid(const ValueField& field, const RegularGrid& grid, const char* what);

}  // namespace hjb::detail
