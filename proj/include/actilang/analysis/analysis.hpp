// Copyright 2026 The actilang Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "actilang/nn/tensor.hpp"

namespace actilang::analysis {

using Rows = std::vector<std::vector<double>>;

struct ClusterModel {
  int k = 0;
  Rows centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  // Inertia after each assignment pass of the winning restart.
  std::vector<double> inertia_trace;
  int iterations = 0;
};

struct KMeansOptions {
  int max_iter = 300;
  int n_init = 4;  // independent k-means++ restarts, lowest inertia wins
};

// k-means++ seeding and Lloyd iterations until the assignment is a fixpoint.
// Throws ValidationError if N < k or k < 1, and NumericError if inertia ever
// increases between passes.
ClusterModel kmeans(const Rows& points, int k, std::uint64_t seed, const KMeansOptions& options = {});

// Index of the nearest centroid by squared distance; lowest index on ties.
int nearest_centroid(const Rows& centroids, const std::vector<double>& x);
double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

// per_cluster indices drawn without replacement from each cluster, cluster 0
// first. Throws ValidationError naming any cluster that is too small.
std::vector<std::size_t> sample_cluster_subset(const ClusterModel& model, std::size_t per_cluster,
                                               std::uint64_t seed);

// Column mean over the leading axis of a [rows, D] tensor.
std::vector<double> pool_embeddings(const nn::Tensor& tokens, std::size_t expected_rows = 80);

struct PcaModel {
  std::vector<double> mean;
  std::array<std::vector<double>, 2> components;
  std::array<double, 2> explained_variance{};
};

struct PcaResult {
  PcaModel model;
  std::vector<std::array<double, 2>> coords;
};

// Top two principal directions of the centred data. Each component is signed
// so that its largest-magnitude entry is positive.
PcaResult pca2(const Rows& vectors);

// Mean silhouette coefficient; points in singleton clusters contribute 0.
double silhouette_score(const Rows& points, const std::vector<int>& assignments);

// ---- Cluster-wise metric table --------------------------------------------

inline const std::array<std::string, 3> kClusterMetrics = {"rouge1", "rougeL", "sem_F1"};

struct MetricRow {
  std::string id;
  std::array<double, 3> values{};  // rouge1, rougeL, sem_F1
};

struct ClusterwiseTable {
  int k = 0;
  std::vector<std::size_t> counts;
  // [metric][cluster]; population standard deviation.
  std::array<std::vector<double>, 3> mean;
  std::array<std::vector<double>, 3> stddev;
};

ClusterwiseTable clusterwise_report(const std::vector<MetricRow>& rows,
                                    const std::map<std::string, int>& assignment, int k);

// metric,Cluster 1,...,Cluster k with "mean ± std" cells.
void write_clusterwise_csv(std::ostream& out, const ClusterwiseTable& table);

// ---- SVG ------------------------------------------------------------------

// Cluster id c is drawn with palette[c % palette size].
inline const std::array<std::string, 8> kPalette = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                                    "#66a61e", "#e6ab02", "#a6761d", "#666666"};

void write_scatter_svg(std::ostream& out, const std::vector<std::array<double, 2>>& points,
                       const std::vector<int>& groups, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

struct Series {
  std::string name;
  std::vector<double> y;
  int color = 0;
};

// Line chart with x = 0..len-1 for every series.
void write_line_svg(std::ostream& out, const std::vector<Series>& series, const std::string& title,
                    const std::string& x_label, const std::string& y_label);

}  // namespace actilang::analysis
