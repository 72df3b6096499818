#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rotavg/graph.h"
#include "rotavg/pipeline.h"

namespace rotavg {

struct SynthConfig {
  double sigma_deg = 5.0;   // std-dev of the perturbation angle
  double outlier_percent = 0.0;
  uint64_t seed = 0;
  // Random model, used when `structure` is unset.
  int n = 100;
  double edge_probability = 0.3;
  // Loaded topology; its measurements are ignored.
  std::optional<EpipolarGraph> structure;
};

struct SynthInstance {
  EpipolarGraph graph;
  Registration gt;
  std::vector<char> outlier;  // per edge
};

// Haar ground truth, left-multiplied perturbations and exactly
// round(p% |E|) Haar-random replacements. Disconnected structures are cut
// to their largest component (renumbered) with a warning. Throws
// ConfigError on invalid parameters.
SynthInstance Generate(const SynthConfig& config);

// Label lines `o i j 0|1`, one per edge in edge order.
void SaveLabels(const EpipolarGraph& g, const std::vector<char>& labels, std::ostream& out);
void SaveLabelsFile(const EpipolarGraph& g, const std::vector<char>& labels,
                    const std::string& path);
// Labels indexed by the edges of `g`. Throws ParseError, IoError.
std::vector<char> LoadLabels(const EpipolarGraph& g, std::istream& in);
std::vector<char> LoadLabelsFile(const EpipolarGraph& g, const std::string& path);

struct SweepConfig {
  SynthConfig base;  // structure, n, edge_probability and the base seed
  std::vector<double> sigmas = {5.0, 10.0};
  std::vector<double> outlier_percents = {0, 10, 20, 30, 40, 50};
  int trials = 1;
  PipelineConfig pipeline;
};

struct SweepRow {
  double sigma = 0.0;
  double p = 0.0;
  int trial = 0;
  uint64_t seed = 0;
  double median_error = 0.0;
  double runtime_s = 0.0;
  double outlier_precision = 0.0;
  double outlier_recall = 0.0;
  // Precision against edges deviating more than 3 sigma from ground truth.
  double geometric_precision = 0.0;
  std::string status = "ok";
};

// Independent per-cell seed derived from the base seed and the cell.
uint64_t CellSeed(uint64_t base, double sigma, double p, int trial);

// One row per (sigma, p, trial); a failing cell is recorded with its error
// kind as status.
std::vector<SweepRow> Sweep(const SweepConfig& config);

void WriteSweepCsv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace rotavg
