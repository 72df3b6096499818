#include "rotavg/synth.h"

#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <glog/logging.h>

#include "rotavg/errors.h"
#include "rotavg/metrics.h"

namespace rotavg {

namespace {

std::vector<std::pair<VertexId, VertexId>> Topology(const SynthConfig& config,
                                                    std::mt19937_64& rng, int* n) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  if (config.structure) {
    *n = config.structure->NumVertices();
    for (const auto& m : config.structure->Edges()) edges.push_back({m.i, m.j});
    return edges;
  }
  *n = config.n;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (VertexId i = 0; i < config.n; ++i) {
    for (VertexId j = i + 1; j < config.n; ++j) {
      if (uniform(rng) < config.edge_probability) edges.push_back({i, j});
    }
  }
  return edges;
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

SynthInstance Generate(const SynthConfig& config) {
  if (!(config.sigma_deg >= 0.0)) throw ConfigError("sigma must be non-negative");
  if (!(config.outlier_percent >= 0.0 && config.outlier_percent <= 100.0)) {
    throw ConfigError("outlier percentage must lie in [0, 100]");
  }
  if (!config.structure) {
    if (config.n < 1) throw ConfigError("vertex count must be positive");
    if (!(config.edge_probability >= 0.0 && config.edge_probability <= 1.0)) {
      throw ConfigError("edge probability must lie in [0, 1]");
    }
  }
  std::mt19937_64 rng(config.seed);
  int n = 0;
  const auto edges = Topology(config, rng, &n);

  EpipolarGraph topology(n);
  for (const auto& [i, j] : edges) topology.AddEdge(i, j, Rotation());
  std::vector<VertexId> keep = LargestComponent(topology);
  if (static_cast<int>(keep.size()) < n) {
    LOG(WARNING) << "structure is disconnected; keeping the largest component ("
                 << keep.size() << " of " << n << " vertices)";
  }
  const Subgraph sub = InducedSubgraph(topology, keep);

  SynthInstance out;
  out.graph.EnsureVertices(sub.graph.NumVertices());
  for (VertexId v = 0; v < sub.graph.NumVertices(); ++v) out.gt.emplace(v, SampleUniform(rng));
  for (const auto& m : sub.graph.Edges()) {
    const Rotation rel = out.gt.at(m.j) * out.gt.at(m.i).Inverse();
    out.graph.AddEdge(m.i, m.j, SamplePerturbation(rng, config.sigma_deg) * rel);
  }

  const int num_edges = out.graph.NumEdges();
  const int num_outliers =
      static_cast<int>(std::llround(config.outlier_percent / 100.0 * num_edges));
  // Partial Fisher-Yates: the first num_outliers slots form a uniform subset.
  std::vector<int> order(num_edges);
  std::iota(order.begin(), order.end(), 0);
  for (int k = 0; k < num_outliers; ++k) {
    std::uniform_int_distribution<int> pick(k, num_edges - 1);
    std::swap(order[k], order[pick(rng)]);
  }
  out.outlier.assign(num_edges, 0);
  for (int k = 0; k < num_outliers; ++k) out.outlier[order[k]] = 1;

  // Rebuild with the replacements in edge order.
  EpipolarGraph graph(out.graph.NumVertices());
  for (int e = 0; e < num_edges; ++e) {
    const auto& m = out.graph.Edge(e);
    graph.AddEdge(m.i, m.j, out.outlier[e] ? SampleUniform(rng) : m.rot);
  }
  out.graph = std::move(graph);
  return out;
}

void SaveLabels(const EpipolarGraph& g, const std::vector<char>& labels, std::ostream& out) {
  CHECK_EQ(static_cast<int>(labels.size()), g.NumEdges());
  for (int e = 0; e < g.NumEdges(); ++e) {
    out << "o " << g.Edge(e).i << ' ' << g.Edge(e).j << ' ' << (labels[e] ? 1 : 0) << '\n';
  }
}

void SaveLabelsFile(const EpipolarGraph& g, const std::vector<char>& labels,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  SaveLabels(g, labels, out);
  if (!out) throw IoError("failed writing " + path);
}

std::vector<char> LoadLabels(const EpipolarGraph& g, std::istream& in) {
  std::vector<char> labels(g.NumEdges(), 0);
  std::vector<char> seen(g.NumEdges(), 0);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string tag;
    if (!(fields >> tag) || tag[0] == '#') continue;
    long long i, j;
    int flag;
    std::string extra;
    if (tag != "o" || !(fields >> i >> j >> flag) || (fields >> extra) ||
        (flag != 0 && flag != 1)) {
      throw ParseError(line_no, "expected 'o i j 0|1'");
    }
    if (i < 0 || j < 0 || i >= g.NumVertices() || j >= g.NumVertices()) {
      throw ParseError(line_no, "vertex out of range");
    }
    const auto e = g.FindEdge(static_cast<VertexId>(i), static_cast<VertexId>(j));
    if (!e) throw ParseError(line_no, "label for an edge not in the graph");
    if (seen[*e]) throw ParseError(line_no, "duplicate label");
    seen[*e] = 1;
    labels[*e] = static_cast<char>(flag);
  }
  for (int e = 0; e < g.NumEdges(); ++e) {
    if (!seen[e]) throw ParseError(line_no, "labels do not cover every edge");
  }
  return labels;
}

std::vector<char> LoadLabelsFile(const EpipolarGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return LoadLabels(g, in);
}

uint64_t CellSeed(uint64_t base, double sigma, double p, int trial) {
  uint64_t h = SplitMix64(base);
  h = SplitMix64(h ^ std::bit_cast<uint64_t>(sigma));
  h = SplitMix64(h ^ std::bit_cast<uint64_t>(p));
  return SplitMix64(h ^ static_cast<uint64_t>(trial));
}

std::vector<SweepRow> Sweep(const SweepConfig& config) {
  if (config.trials < 1) throw ConfigError("trial count must be positive");
  SynthConfig cell = config.base;
  if (!cell.structure) {
    // One topology for the whole grid, drawn from the base seed.
    SynthConfig topology = config.base;
    topology.sigma_deg = 0.0;
    topology.outlier_percent = 0.0;
    cell.structure = Generate(topology).graph;
  }
  std::vector<SweepRow> rows;
  for (double sigma : config.sigmas) {
    for (double p : config.outlier_percents) {
      for (int trial = 0; trial < config.trials; ++trial) {
        SweepRow row;
        row.sigma = sigma;
        row.p = p;
        row.trial = trial;
        row.seed = CellSeed(config.base.seed, sigma, p, trial);
        cell.sigma_deg = sigma;
        cell.outlier_percent = p;
        cell.seed = row.seed;
        try {
          const SynthInstance inst = Generate(cell);
          const auto start = std::chrono::steady_clock::now();
          const PipelineResult result = RunPipeline(inst.graph, config.pipeline);
          row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                        start)
                              .count();
          row.median_error = AlignAndScore(result.rotations, inst.gt).median_error;
          const OutlierScores scores = ScoreOutliers(result.inlier_edges, inst.outlier);
          row.outlier_precision = scores.precision;
          row.outlier_recall = scores.recall;
          const double geometric_th = std::max(3.0 * sigma, 1e-6);
          std::vector<char> geometric(inst.graph.NumEdges(), 0);
          for (int e = 0; e < inst.graph.NumEdges(); ++e) {
            const auto& m = inst.graph.Edge(e);
            geometric[e] = AngularDistanceDeg(
                               m.rot, inst.gt.at(m.j) * inst.gt.at(m.i).Inverse()) >
                           geometric_th;
          }
          row.geometric_precision = ScoreOutliers(result.inlier_edges, geometric).precision;
        } catch (const Error& e) {
          LOG(WARNING) << "sweep cell sigma=" << sigma << " p=" << p << " trial=" << trial
                       << " failed: " << e.what();
          row.status = e.kind();
          row.median_error = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void WriteSweepCsv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "sigma,p,trial,seed,median_error,runtime_s,outlier_precision,outlier_recall,"
         "geometric_precision,status\n";
  out << std::setprecision(10);
  for (const SweepRow& r : rows) {
    out << r.sigma << ',' << r.p << ',' << r.trial << ',' << r.seed << ','
        << r.median_error << ',' << r.runtime_s << ',' << r.outlier_precision << ','
        << r.outlier_recall << ',' << r.geometric_precision << ',' << r.status << '\n';
  }
}

}  // namespace rotavg
