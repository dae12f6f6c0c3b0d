#pragma once

// JSON and CSV serialization of reports. Wall-time fields are the only
// non-deterministic entries.

#include "bilap/bounds.hpp"
#include "bilap/model.hpp"
#include "bilap/solver.hpp"

#include <json.hpp>

#include <iosfwd>

namespace bilap {

nlohmann::json to_json(const BoundsReport& r);
nlohmann::json to_json(const IntegrabilityReport& r);
nlohmann::json to_json(const NonlinearityReport& r);
nlohmann::json to_json(const C2Norm& c);
nlohmann::json to_json(const IterationTrace& t);
/// Scalars, trace and bounds; fields are dumped separately.
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const ProbeResult& r);
nlohmann::json to_json(const ContinuityReport& r);

/// Columns k,norm,step,ratio.
void write_trace_csv(std::ostream& os, const IterationTrace& t);

}  // namespace bilap
