#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rotavg/alignment.h"
#include "rotavg/cds.h"
#include "rotavg/graph.h"

namespace rotavg {

struct EvalReport {
  int n_common = 0;
  double median_error = 0.0;  // degrees
  double mean_error = 0.0;    // degrees
  Rotation alignment;         // est * alignment ~ gt
  std::vector<std::pair<VertexId, double>> per_vertex_errors;
};

// Median of a non-empty sample; the mean of the two middle values for even
// sizes.
double Median(std::vector<double> values);

// Removes the gauge with a robust average of the per-vertex candidates
// R_est^T R_gt, then scores the vertices present in both. Throws
// EmptyIntersection.
EvalReport AlignAndScore(const Registration& est, const Registration& gt,
                         AveragingMode mode = AveragingMode::kGeodesicL1);

struct GraphStats {
  int n_v = 0;
  int n_v_star = 0;  // vertices with ground truth
  int n_e = 0;
  std::optional<double> median_rel_err;
  std::optional<double> mean_rel_err;
};

// Relative-rotation errors over the edges whose endpoints both have ground
// truth. Pass nullptr when no ground truth is available.
GraphStats ComputeGraphStats(const EpipolarGraph& g, const Registration* gt);

// Median aligned error restricted to the reference members.
double ReferenceAccuracy(const ReferenceSet& ref, const Registration& gt);

struct OutlierScores {
  double precision = 1.0;
  double recall = 1.0;
  int predicted = 0;
  int actual = 0;
  int true_positives = 0;
};

// Scores the predicted outliers (edges not listed in `inlier_edges`) against
// per-edge labels. Precision is 1 when nothing is predicted, recall is 1
// when nothing is labeled.
OutlierScores ScoreOutliers(std::span<const int> inlier_edges,
                            const std::vector<char>& labels);

}  // namespace rotavg
