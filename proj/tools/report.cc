#include "report.h"

#include <cmath>

namespace rotavg {

using nlohmann::ordered_json;

namespace {

std::string SourceName(AlignmentSource s) {
  return s == AlignmentSource::kVertex ? "vertex" : "edge";
}

ordered_json SolverJson(const SolverOptions& o) {
  return {{"max_iterations", o.max_iterations},
          {"gradient_tol", o.gradient_tol},
          {"step_tol", o.step_tol},
          {"function_tol", o.function_tol},
          {"initial_lambda", o.initial_lambda},
          {"dense_limit", o.dense_limit}};
}

// NaN is not valid JSON.
ordered_json Number(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(); }

}  // namespace

int ExitCodeForKind(const std::string& kind) {
  if (kind == "io" || kind == "parse" || kind == "duplicate_edge" ||
      kind == "non_unit_quaternion") {
    return kExitIo;
  }
  if (kind == "config") return kExitConfig;
  return kExitSolver;
}

ordered_json ErrorJson(const std::string& kind, const std::string& message) {
  return {{"kind", kind}, {"message", message}};
}

ordered_json ConfigJson(const PipelineConfig& config) {
  ordered_json j;
  j["mode"] = std::string(ModeName(config.mode));
  j["theta_th_deg"] = config.engine.theta_th_deg;
  j["global_rate"] = config.engine.global_rate;
  j["clusters"] = config.clusters == 0 ? ordered_json("auto") : ordered_json(config.clusters);
  j["community_resolution"] = config.communities.resolution;
  j["community_min_size"] = config.communities.min_size;
  j["freeze_reference"] = config.freeze_reference;
  j["rng_seed"] = config.rng_seed;
  j["reference_extractions"] = config.reference_extractions;
  j["local_solver"] = SolverJson(config.engine.local_solver);
  j["global_solver"] = SolverJson(config.engine.global_solver);
  return j;
}

ordered_json SolveReportJson(const PipelineResult& result, int num_vertices, int num_edges) {
  ordered_json j;
  j["mode_executed"] = std::string(ModeName(result.mode));
  j["input"] = {{"vertices", num_vertices}, {"edges", num_edges}};
  j["component_size"] = result.component_size;
  j["rotations"] = result.rotations.size();
  j["inlier_edges"] = result.inlier_edges.size();
  j["gauge_vertex"] = result.gauge_vertex;
  j["aligned_cost"] = result.aligned_cost;
  j["final_cost"] = result.final_cost;
  if (result.reference) {
    j["reference"] = {{"n_ref", result.reference->n_ref},
                      {"connected", result.reference->connected},
                      {"dominating", result.reference->dominating},
                      {"gauge_vertex", result.reference->gauge_vertex}};
  }
  ordered_json clusters = ordered_json::array();
  for (const ClusterSummary& c : result.clusters) {
    clusters.push_back({{"size", c.size},
                        {"common_vertices", c.common_vertices},
                        {"cross_edges", c.cross_edges},
                        {"support", c.support},
                        {"source", SourceName(c.source)},
                        {"alignment_angle_deg", c.alignment_angle_deg}});
  }
  j["clusters"] = clusters;
  j["trace_steps"] = result.trace.size();
  ordered_json timings = ordered_json::object();
  for (const auto& [stage, seconds] : result.timings) timings[stage] = seconds;
  j["timings_s"] = timings;
  return j;
}

ordered_json EvalJson(const EvalReport& report) {
  const Eigen::Quaterniond q = report.alignment.quaternion();
  return {{"n_common", report.n_common},
          {"median_error_deg", report.median_error},
          {"mean_error_deg", report.mean_error},
          {"alignment", {q.w(), q.x(), q.y(), q.z()}}};
}

ordered_json StatsJson(const GraphStats& stats) {
  ordered_json j = {{"n_v", stats.n_v}, {"n_v_star", stats.n_v_star}, {"n_e", stats.n_e}};
  if (stats.median_rel_err) j["median_rel_err_deg"] = *stats.median_rel_err;
  if (stats.mean_rel_err) j["mean_rel_err_deg"] = *stats.mean_rel_err;
  return j;
}

ordered_json OutlierJson(const OutlierScores& scores) {
  return {{"precision", Number(scores.precision)},
          {"recall", Number(scores.recall)},
          {"predicted", scores.predicted},
          {"actual", scores.actual},
          {"true_positives", scores.true_positives}};
}

ordered_json ReferenceJson(const std::string& algorithm, const ReferenceSet& ref) {
  return {{"algorithm", algorithm}, {"n_ref", ref.n_ref}, {"members", ref.members}};
}

void WriteTrace(const std::vector<TraceRecord>& trace, std::ostream& out) {
  for (const TraceRecord& r : trace) {
    const ordered_json j = {{"step", r.step},
                            {"vertex", r.chosen_vertex},
                            {"anchor", r.anchor_vertex},
                            {"reward", r.reward},
                            {"support", r.support_size},
                            {"self_support_only", r.self_support_only},
                            {"global_opt", r.global_opt},
                            {"cost_after", r.cost_after},
                            {"size_after", r.size_after}};
    out << j.dump() << '\n';
  }
}

void WriteCsvRow(const ordered_json& object, std::ostream& out) {
  std::string header, row;
  for (const auto& [key, value] : object.items()) {
    if (value.is_structured()) continue;
    if (!header.empty()) {
      header += ',';
      row += ',';
    }
    header += key;
    row += value.is_string() ? value.get<std::string>() : value.dump();
  }
  out << header << '\n' << row << '\n';
}

}  // namespace rotavg
