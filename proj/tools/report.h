#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rotavg/cds.h"
#include "rotavg/errors.h"
#include "rotavg/metrics.h"
#include "rotavg/pipeline.h"
#include "rotavg/synth.h"

namespace rotavg {

inline constexpr int kReportSchemaVersion = 1;

enum ExitCode { kExitOk = 0, kExitSolver = 1, kExitIo = 2, kExitConfig = 3 };

// io, parse and malformed-input kinds map to 2, config to 3, the rest to 1.
int ExitCodeForKind(const std::string& kind);

nlohmann::ordered_json ErrorJson(const std::string& kind, const std::string& message);

nlohmann::ordered_json ConfigJson(const PipelineConfig& config);

// Everything except timings is a deterministic function of config and input.
nlohmann::ordered_json SolveReportJson(const PipelineResult& result, int num_vertices,
                                       int num_edges);

nlohmann::ordered_json EvalJson(const EvalReport& report);
nlohmann::ordered_json StatsJson(const GraphStats& stats);
nlohmann::ordered_json OutlierJson(const OutlierScores& scores);
nlohmann::ordered_json ReferenceJson(const std::string& algorithm, const ReferenceSet& ref);

// One JSON object per line.
void WriteTrace(const std::vector<TraceRecord>& trace, std::ostream& out);

// Flat CSV projection of a JSON object: a header row of keys and one row
// of values. Nested values are skipped.
void WriteCsvRow(const nlohmann::ordered_json& object, std::ostream& out);

}  // namespace rotavg
