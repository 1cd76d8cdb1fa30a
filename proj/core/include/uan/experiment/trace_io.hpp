#pragma once

#include "uan/experiment/config.hpp"
#include "uan/solvers.hpp"

#include <ostream>
#include <string>

namespace uan::experiment {

/// Compact JSON with every floating-point number printed as %.17g;
/// non-finite numbers become null.
std::string dump_compact(const json& j);

json vector_json(const Vector& x);

json header_record(const ExperimentConfig& config, const IterationTrace& trace);
json step_record(const TraceStep& step);
json summary_record(const IterationTrace& trace);

/// Header, one record per step, summary; one JSON object per line.
void write_trace(std::ostream& out, const ExperimentConfig& config, const IterationTrace& trace);

}  // namespace uan::experiment
