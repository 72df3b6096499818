#include "rotavg/metrics.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "rotavg/errors.h"

namespace rotavg {

double Median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

EvalReport AlignAndScore(const Registration& est, const Registration& gt,
                         AveragingMode mode) {
  std::vector<VertexId> common;
  std::vector<Rotation> candidates;
  for (const auto& [v, r] : est) {
    auto it = gt.find(v);
    if (it == gt.end()) continue;
    common.push_back(v);
    candidates.push_back(r.Inverse() * it->second);
  }
  if (common.empty()) {
    throw EmptyIntersection("estimate and ground truth share no vertex");
  }
  EvalReport report;
  report.n_common = static_cast<int>(common.size());
  report.alignment = SingleRotationAverage(candidates, mode);
  std::vector<double> errors;
  errors.reserve(common.size());
  for (VertexId v : common) {
    const double err = AngularDistanceDeg(est.at(v) * report.alignment, gt.at(v));
    report.per_vertex_errors.push_back({v, err});
    errors.push_back(err);
  }
  report.mean_error = std::accumulate(errors.begin(), errors.end(), 0.0) / errors.size();
  report.median_error = Median(std::move(errors));
  return report;
}

GraphStats ComputeGraphStats(const EpipolarGraph& g, const Registration* gt) {
  GraphStats stats;
  stats.n_v = g.NumVertices();
  stats.n_e = g.NumEdges();
  if (gt == nullptr) return stats;
  for (VertexId v = 0; v < g.NumVertices(); ++v) {
    if (gt->contains(v)) ++stats.n_v_star;
  }
  std::vector<double> errors;
  for (const auto& m : g.Edges()) {
    auto ri = gt->find(m.i);
    auto rj = gt->find(m.j);
    if (ri == gt->end() || rj == gt->end()) continue;
    errors.push_back(AngularDistanceDeg(m.rot, rj->second * ri->second.Inverse()));
  }
  if (!errors.empty()) {
    stats.mean_rel_err = std::accumulate(errors.begin(), errors.end(), 0.0) / errors.size();
    stats.median_rel_err = Median(std::move(errors));
  }
  return stats;
}

double ReferenceAccuracy(const ReferenceSet& ref, const Registration& gt) {
  Registration restricted;
  for (VertexId v : ref.members) {
    auto it = ref.rotations.find(v);
    if (it != ref.rotations.end()) restricted.emplace(v, it->second);
  }
  return AlignAndScore(restricted, gt).median_error;
}

OutlierScores ScoreOutliers(std::span<const int> inlier_edges,
                            const std::vector<char>& labels) {
  std::vector<char> predicted(labels.size(), 1);
  for (int e : inlier_edges) {
    if (e < 0 || e >= static_cast<int>(labels.size())) {
      throw std::out_of_range("inlier edge outside the label table");
    }
    predicted[e] = 0;
  }
  OutlierScores s;
  for (size_t e = 0; e < labels.size(); ++e) {
    s.predicted += predicted[e];
    s.actual += labels[e] ? 1 : 0;
    s.true_positives += predicted[e] && labels[e] ? 1 : 0;
  }
  if (s.predicted > 0) s.precision = static_cast<double>(s.true_positives) / s.predicted;
  if (s.actual > 0) s.recall = static_cast<double>(s.true_positives) / s.actual;
  return s;
}

}  // namespace rotavg
