#pragma once

#include <string>
#include <vector>

#include "rmpc/sim.hpp"

namespace rmpc {

/// Round-trip exact formatting for 64-bit floats (17 significant
/// digits); NaN renders as an empty field.
std::string csv_number(double v);

/// One row per sample with the fixed header
///   t,r,y,y_true,u,theta,xhat_1..xhat_n
/// where theta is empty for standard-filter runs.
void write_trace_csv(const std::string& path, const ScenarioResult& result);

/// Summary metrics, one row per result.
void write_metrics_csv(const std::string& path, const std::vector<ScenarioResult>& results);

}  // namespace rmpc
