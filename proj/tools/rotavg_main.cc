// rotavg: rotation averaging from the command line.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <glog/logging.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "report.h"
#include "rotavg/cds.h"
#include "rotavg/errors.h"
#include "rotavg/graph.h"
#include "rotavg/metrics.h"
#include "rotavg/pipeline.h"
#include "rotavg/synth.h"

namespace rotavg {
namespace {

using nlohmann::ordered_json;

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

void WriteJson(const ordered_json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out = OpenOutput(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

// Inlier edge list, one `i j` line per edge.
void SaveInliers(const EpipolarGraph& g, const std::vector<int>& inliers,
                 const std::string& path) {
  std::ofstream out = OpenOutput(path);
  for (int e : inliers) out << g.Edge(e).i << ' ' << g.Edge(e).j << '\n';
  if (!out) throw IoError("failed writing " + path);
}

std::vector<int> LoadInliers(const EpipolarGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<int> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    long long i, j;
    if (!(fields >> i)) continue;
    if (!(fields >> j) || i < 0 || j < 0 || i >= g.NumVertices() || j >= g.NumVertices()) {
      throw ParseError(line_no, "expected an edge 'i j' of the graph");
    }
    const auto e = g.FindEdge(static_cast<VertexId>(i), static_cast<VertexId>(j));
    if (!e) throw ParseError(line_no, "edge not in the graph");
    edges.push_back(*e);
  }
  return edges;
}

AveragingMode ParseAveraging(const std::string& name) {
  if (name == "geodesic-l1") return AveragingMode::kGeodesicL1;
  if (name == "chordal-l2") return AveragingMode::kChordalL2;
  throw ConfigError("unknown averaging mode '" + name + "'");
}

struct SolveArgs {
  std::string input, output, report, trace, inliers, assignment, gt;
  std::string mode = "irav4", clusters = "auto";
  int threads = 1;
};

int Solve(const SolveArgs& args, PipelineConfig config) {
  config.mode = ParseMode(args.mode);
  if (args.clusters == "auto") {
    config.clusters = 0;
  } else {
    try {
      config.clusters = std::stoi(args.clusters);
    } catch (const std::exception&) {
      throw ConfigError("--clusters must be 'auto' or a count");
    }
  }
  if (args.threads < 1) throw ConfigError("--threads must be at least 1");
  if (args.threads > 1) LOG(INFO) << "running single-threaded; --threads " << args.threads;

  const EpipolarGraph g = LoadGraphFile(args.input);
  const PipelineResult result = RunPipeline(g, config);
  SaveRegistrationFile(result.rotations, args.output);
  if (!args.inliers.empty()) SaveInliers(g, result.inlier_edges, args.inliers);
  if (!args.assignment.empty()) {
    ordered_json clusters = ordered_json::object();
    for (size_t v = 0; v < result.assignment.size(); ++v) {
      if (result.assignment[v] >= 0) clusters[std::to_string(v)] = result.assignment[v];
    }
    WriteJson(clusters, args.assignment);
  }
  if (!args.trace.empty()) {
    std::ofstream out = OpenOutput(args.trace);
    WriteTrace(result.trace, out);
  }

  ordered_json report;
  report["schema_version"] = kReportSchemaVersion;
  report["command"] = "solve";
  report["config"] = ConfigJson(config);
  report["config"]["threads"] = args.threads;
  report["config"]["paths"] = {{"input", args.input}, {"output", args.output}};
  report["result"] = SolveReportJson(result, g.NumVertices(), g.NumEdges());
  if (!args.gt.empty()) {
    const Registration gt = LoadRegistrationFile(args.gt);
    report["evaluation"] = EvalJson(AlignAndScore(result.rotations, gt));
    if (result.reference) {
      report["result"]["reference"]["e_ref_deg"] = ReferenceAccuracy(*result.reference, gt);
    }
  }
  WriteJson(report, args.report);
  LOG(INFO) << "solved " << result.rotations.size() << " rotations (" << ModeName(result.mode)
            << ")";
  return kExitOk;
}

int Synth(SynthConfig config, const std::string& structure, const std::string& prefix) {
  if (!structure.empty()) config.structure = LoadGraphFile(structure);
  const SynthInstance inst = Generate(config);
  SaveGraphFile(inst.graph, prefix + "_eg.txt");
  SaveRegistrationFile(inst.gt, prefix + "_gt.txt");
  SaveLabelsFile(inst.graph, inst.outlier, prefix + "_labels.txt");
  int outliers = 0;
  for (char o : inst.outlier) outliers += o;
  ordered_json j = {{"schema_version", kReportSchemaVersion},
                    {"command", "synth"},
                    {"seed", config.seed},
                    {"sigma_deg", config.sigma_deg},
                    {"outlier_percent", config.outlier_percent},
                    {"vertices", inst.graph.NumVertices()},
                    {"edges", inst.graph.NumEdges()},
                    {"outliers", outliers},
                    {"files",
                     {prefix + "_eg.txt", prefix + "_gt.txt", prefix + "_labels.txt"}}};
  WriteJson(j, "");
  return kExitOk;
}

struct EvalArgs {
  std::string estimate, gt, graph, labels, inliers, averaging = "geodesic-l1";
  bool csv = false;
};

int Eval(const EvalArgs& args) {
  const Registration est = LoadRegistrationFile(args.estimate);
  const Registration gt = LoadRegistrationFile(args.gt);
  ordered_json j = EvalJson(AlignAndScore(est, gt, ParseAveraging(args.averaging)));
  if (!args.labels.empty() || !args.inliers.empty()) {
    if (args.graph.empty() || args.labels.empty() || args.inliers.empty()) {
      throw ConfigError("outlier scores need --graph, --labels and --inliers together");
    }
    const EpipolarGraph g = LoadGraphFile(args.graph);
    const OutlierScores scores =
        ScoreOutliers(LoadInliers(g, args.inliers), LoadLabelsFile(g, args.labels));
    j["outlier_precision"] = OutlierJson(scores)["precision"];
    j["outlier_recall"] = OutlierJson(scores)["recall"];
  }
  if (args.csv) {
    WriteCsvRow(j, std::cout);
  } else {
    WriteJson(j, "");
  }
  return kExitOk;
}

int Stats(const std::string& input, const std::string& gt_path, bool csv) {
  const EpipolarGraph g = LoadGraphFile(input);
  Registration gt;
  if (!gt_path.empty()) gt = LoadRegistrationFile(gt_path);
  const ordered_json j = StatsJson(ComputeGraphStats(g, gt_path.empty() ? nullptr : &gt));
  if (csv) {
    WriteCsvRow(j, std::cout);
  } else {
    WriteJson(j, "");
  }
  return kExitOk;
}

int Cds(const std::string& input, const std::string& algorithm, const std::string& gt_path,
        const EngineOptions& engine, uint64_t seed, int extractions) {
  const EpipolarGraph full = LoadGraphFile(input);
  const Subgraph sub = InducedSubgraph(full, LargestComponent(full));
  ReferenceSet ref;
  if (algorithm == "traditional") {
    ref = TraditionalCds(sub.graph);
  } else if (algorithm == "task-specific") {
    ref = TaskSpecificCds(sub.graph, engine);
  } else if (algorithm == "union") {
    ref = RandomizedUnionReference(sub.graph, engine, extractions, seed);
  } else {
    throw ConfigError("unknown CDS algorithm '" + algorithm + "'");
  }
  ReferenceSet mapped = ref;
  mapped.members.clear();
  for (VertexId v : ref.members) mapped.members.push_back(sub.to_parent[v]);
  mapped.rotations.clear();
  for (const auto& [v, r] : ref.rotations) mapped.rotations.emplace(sub.to_parent[v], r);
  ordered_json j = ReferenceJson(algorithm, mapped);
  if (!gt_path.empty() && !mapped.rotations.empty()) {
    j["e_ref"] = ReferenceAccuracy(mapped, LoadRegistrationFile(gt_path));
  }
  WriteJson(j, "");
  return kExitOk;
}

int RunSweep(SweepConfig config, const std::string& structure, const std::string& output) {
  if (!structure.empty()) config.base.structure = LoadGraphFile(structure);
  const std::vector<SweepRow> rows = Sweep(config);
  if (output.empty() || output == "-") {
    WriteSweepCsv(rows, std::cout);
  } else {
    std::ofstream out = OpenOutput(output);
    WriteSweepCsv(rows, out);
    if (!out) throw IoError("failed writing " + output);
  }
  return kExitOk;
}

void AddEngineFlags(CLI::App* cmd, EngineOptions* engine) {
  cmd->add_option("--theta", engine->theta_th_deg, "Outlier threshold in degrees")
      ->capture_default_str();
  cmd->add_option("--global-rate", engine->global_rate,
                  "Growth fraction between global optimizations")
      ->capture_default_str();
}

int Main(int argc, char** argv) {
  CLI::App app{"Incremental rotation averaging with cluster alignment"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "More log output (repeatable)");

  SolveArgs solve_args;
  PipelineConfig pipeline;
  auto* solve = app.add_subcommand("solve", "Estimate absolute rotations");
  solve->add_option("input", solve_args.input, "Epipolar graph file")->required();
  solve->add_option("-o,--output", solve_args.output, "Rotations file")->required();
  solve->add_option("--report", solve_args.report, "Report JSON (default stdout)");
  solve->add_option("--trace", solve_args.trace, "Per-step trace as JSON lines");
  solve->add_option("--inliers", solve_args.inliers, "Write the final inlier edges");
  solve->add_option("--assignment", solve_args.assignment, "Cluster per vertex as JSON");
  solve->add_option("--gt", solve_args.gt, "Ground truth for an evaluation block");
  solve->add_option("--mode", solve_args.mode, "ira | irav4 | irav3plus-ref | spanning-tree")
      ->capture_default_str();
  solve->add_option("--clusters", solve_args.clusters, "auto, 1 (plain run) or a cap")
      ->capture_default_str();
  solve->add_option("--seed", pipeline.rng_seed, "Seed for randomized steps");
  solve->add_flag("--freeze-reference", pipeline.freeze_reference,
                  "Hold reference rotations fixed in the final optimization");
  solve->add_option("--min-community-size", pipeline.communities.min_size)
      ->capture_default_str();
  solve->add_option("--reference-extractions", pipeline.reference_extractions)
      ->capture_default_str();
  solve->add_option("--threads", solve_args.threads, "Worker cap")->capture_default_str();
  AddEngineFlags(solve, &pipeline.engine);

  SynthConfig synth_config;
  std::string structure, prefix;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic instance");
  auto* n_opt = synth->add_option("--n", synth_config.n)->capture_default_str();
  auto* prob_opt =
      synth->add_option("--edge-prob", synth_config.edge_probability)->capture_default_str();
  auto* structure_opt = synth->add_option("--structure", structure, "Topology from a graph file");
  structure_opt->excludes(n_opt)->excludes(prob_opt);
  synth->add_option("--sigma", synth_config.sigma_deg, "Noise in degrees")->capture_default_str();
  synth->add_option("--p", synth_config.outlier_percent, "Outlier percentage")
      ->capture_default_str();
  synth->add_option("--seed", synth_config.seed)->capture_default_str();
  synth->add_option("--out-prefix", prefix)->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Score an estimate against ground truth");
  eval->add_option("estimate", eval_args.estimate)->required();
  eval->add_option("gt", eval_args.gt)->required();
  eval->add_option("--graph", eval_args.graph);
  eval->add_option("--labels", eval_args.labels);
  eval->add_option("--inliers", eval_args.inliers);
  eval->add_option("--averaging", eval_args.averaging, "geodesic-l1 | chordal-l2")
      ->capture_default_str();
  eval->add_flag("--csv", eval_args.csv);

  std::string stats_input, stats_gt;
  bool stats_csv = false;
  auto* stats = app.add_subcommand("stats", "Graph statistics");
  stats->add_option("input", stats_input)->required();
  stats->add_option("--gt", stats_gt);
  stats->add_flag("--csv", stats_csv);

  std::string cds_input, cds_algorithm = "task-specific", cds_gt;
  EngineOptions cds_engine;
  uint64_t cds_seed = 0;
  int cds_extractions = 5;
  auto* cds = app.add_subcommand("cds", "Extract a connected dominating set");
  cds->add_option("input", cds_input)->required();
  cds->add_option("--algorithm", cds_algorithm, "traditional | task-specific | union")
      ->capture_default_str();
  cds->add_option("--gt", cds_gt);
  cds->add_option("--seed", cds_seed);
  cds->add_option("--extractions", cds_extractions)->capture_default_str();
  AddEngineFlags(cds, &cds_engine);

  SweepConfig sweep_config;
  std::string sweep_structure, sweep_output, sweep_mode = "irav4";
  auto* sweep = app.add_subcommand("sweep", "Noise and outlier sweep over synthetic data");
  auto* sweep_n = sweep->add_option("--n", sweep_config.base.n)->capture_default_str();
  auto* sweep_prob = sweep->add_option("--edge-prob", sweep_config.base.edge_probability)
                         ->capture_default_str();
  sweep->add_option("--structure", sweep_structure)->excludes(sweep_n)->excludes(sweep_prob);
  sweep->add_option("--sigmas", sweep_config.sigmas)->delimiter(',')->capture_default_str();
  sweep->add_option("--ps", sweep_config.outlier_percents)
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--trials", sweep_config.trials)->capture_default_str();
  sweep->add_option("--seed", sweep_config.base.seed)->capture_default_str();
  sweep->add_option("--mode", sweep_mode)->capture_default_str();
  sweep->add_option("-o,--output", sweep_output, "CSV file (default stdout)");
  AddEngineFlags(sweep, &sweep_config.pipeline.engine);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cout << ErrorJson("config", e.what()).dump() << '\n';
    return kExitConfig;
  }
  FLAGS_v = verbosity;
  if (verbosity > 0) FLAGS_minloglevel = google::GLOG_INFO;

  try {
    if (*solve) return Solve(solve_args, pipeline);
    if (*synth) return Synth(synth_config, structure, prefix);
    if (*eval) return Eval(eval_args);
    if (*stats) return Stats(stats_input, stats_gt, stats_csv);
    if (*cds) return Cds(cds_input, cds_algorithm, cds_gt, cds_engine, cds_seed, cds_extractions);
    if (*sweep) {
      sweep_config.pipeline.mode = ParseMode(sweep_mode);
      return RunSweep(sweep_config, sweep_structure, sweep_output);
    }
  } catch (const Error& e) {
    std::cout << ErrorJson(e.kind(), e.what()).dump() << '\n';
    return ExitCodeForKind(e.kind());
  } catch (const std::invalid_argument& e) {
    std::cout << ErrorJson("config", e.what()).dump() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace
}  // namespace rotavg

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;
  FLAGS_minloglevel = google::GLOG_WARNING;
  return rotavg::Main(argc, argv);
}
