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

#include "actilang/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "actilang/errors.hpp"
#include "actilang/rng.hpp"

namespace actilang::analysis {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int nearest_centroid(const Rows& centroids, const std::vector<double>& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(centroids[c], x);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

namespace {

void check_points(const Rows& points) {
  if (points.empty()) throw ValidationError("no points given");
  const std::size_t d = points[0].size();
  if (d == 0) throw ValidationError("points have zero dimensions");
  for (const auto& p : points) {
    if (p.size() != d) throw ValidationError("points have inconsistent dimensions");
    for (double v : p) {
      if (!std::isfinite(v)) throw NumericError("non-finite coordinate in clustering input");
    }
  }
}

Rows plus_plus_seed(const Rows& points, int k, Rng& rng) {
  const std::size_t n = points.size();
  Rows centroids;
  centroids.push_back(points[rng.below(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] > 0.0 && u < d2[i]) {
          pick = i;
          break;
        }
        u -= d2[i];
      }
      while (d2[pick] == 0.0) --pick;
    } else {
      pick = rng.below(n);
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
  }
  return centroids;
}

ClusterModel lloyd(const Rows& points, Rows centroids, int max_iter) {
  const std::size_t n = points.size(), dim = points[0].size();
  const int k = static_cast<int>(centroids.size());
  ClusterModel m;
  m.k = k;
  m.assignments.assign(n, -1);
  for (int iter = 0;; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest_centroid(centroids, points[i]);
      inertia += squared_distance(points[i], centroids[c]);
      if (c != m.assignments[i]) {
        m.assignments[i] = c;
        changed = true;
      }
    }
    if (!m.inertia_trace.empty()) {
      const double prev = m.inertia_trace.back();
      if (inertia > prev + 1e-9 * std::max(1.0, prev)) {
        throw NumericError("k-means inertia increased from " + std::to_string(prev) + " to " +
                           std::to_string(inertia));
      }
    }
    m.inertia_trace.push_back(inertia);
    m.inertia = inertia;
    m.iterations = iter;
    if (!changed || iter >= max_iter) break;

    Rows sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = m.assignments[i];
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
    }
    std::vector<bool> taken(n, false);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its own centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double d = squared_distance(points[i], centroids[m.assignments[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      taken[far] = true;
      centroids[c] = points[far];
    }
  }
  m.centroids = std::move(centroids);
  return m;
}

}  // namespace

ClusterModel kmeans(const Rows& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1) throw ValidationError("kmeans: k must be at least 1");
  if (points.size() < static_cast<std::size_t>(k)) {
    throw ValidationError("kmeans: need at least k=" + std::to_string(k) + " points, got " +
                          std::to_string(points.size()));
  }
  check_points(points);
  ClusterModel best;
  bool have = false;
  for (int r = 0; r < std::max(1, options.n_init); ++r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    ClusterModel m = lloyd(points, plus_plus_seed(points, k, rng), options.max_iter);
    if (!have || m.inertia < best.inertia) {
      best = std::move(m);
      have = true;
    }
  }
  return best;
}

std::vector<std::size_t> sample_cluster_subset(const ClusterModel& model, std::size_t per_cluster,
                                               std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> members(model.k);
  for (std::size_t i = 0; i < model.assignments.size(); ++i) members.at(model.assignments[i]).push_back(i);
  for (int c = 0; c < model.k; ++c) {
    if (members[c].size() < per_cluster) {
      throw ValidationError("cluster " + std::to_string(c) + " has " + std::to_string(members[c].size()) +
                            " members, fewer than the " + std::to_string(per_cluster) + " requested");
    }
  }
  std::vector<std::size_t> out;
  out.reserve(per_cluster * model.k);
  for (int c = 0; c < model.k; ++c) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
    auto& pool = members[c];
    for (std::size_t i = 0; i < per_cluster; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      out.push_back(pool[i]);
    }
  }
  return out;
}

std::vector<double> pool_embeddings(const nn::Tensor& tokens, std::size_t expected_rows) {
  if (tokens.rank() != 2 || tokens.rows() != expected_rows) {
    throw ShapeError("pool_embeddings: expected [" + std::to_string(expected_rows) + ", D], got " +
                     nn::shape_str(tokens.shape()));
  }
  std::vector<double> mean(tokens.cols(), 0.0);
  for (std::size_t r = 0; r < tokens.rows(); ++r) {
    for (std::size_t c = 0; c < tokens.cols(); ++c) mean[c] += tokens.at(r, c);
  }
  for (double& v : mean) v /= static_cast<double>(tokens.rows());
  return mean;
}

PcaResult pca2(const Rows& vectors) {
  if (vectors.size() < 2) throw ValidationError("pca2: need at least 2 vectors");
  check_points(vectors);
  const std::size_t n = vectors.size(), d = vectors[0].size();
  if (d < 2) throw ValidationError("pca2: need at least 2 dimensions");

  PcaResult res;
  res.model.mean.assign(d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t j = 0; j < d; ++j) res.model.mean[j] += v[j];
  }
  for (double& m : res.model.mean) m /= static_cast<double>(n);

  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = vectors[i][j] - res.model.mean[j];
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();
  const double cutoff = (s.size() > 0 ? s(0) : 0.0) * 1e-12;
  for (int c = 0; c < 2; ++c) {
    std::vector<double> comp(d, 0.0);
    double sv = 0.0;
    if (c < v.cols()) {
      for (std::size_t j = 0; j < d; ++j) comp[j] = v(j, c);
      sv = s(c) > cutoff ? s(c) : 0.0;
    } else {
      // Fewer samples than components: any unit vector orthogonal to the first.
      const auto& first = res.model.components[0];
      std::size_t pick = 0;
      for (std::size_t j = 1; j < d; ++j) {
        if (std::abs(first[j]) < std::abs(first[pick])) pick = j;
      }
      comp[pick] = 1.0;
      double dotp = first[pick];
      double norm = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        comp[j] -= dotp * first[j];
        norm += comp[j] * comp[j];
      }
      for (double& e : comp) e /= std::sqrt(norm);
    }
    std::size_t big = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (std::abs(comp[j]) > std::abs(comp[big])) big = j;
    }
    if (comp[big] < 0.0) {
      for (double& e : comp) e = -e;
    }
    res.model.components[c] = std::move(comp);
    res.model.explained_variance[c] = sv * sv / static_cast<double>(n - 1);
  }

  res.coords.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += x(i, j) * res.model.components[c][j];
      res.coords[i][c] = acc;
    }
  }
  return res;
}

double silhouette_score(const Rows& points, const std::vector<int>& assignments) {
  check_points(points);
  if (assignments.size() != points.size()) throw ValidationError("silhouette: one assignment per point required");
  const int k = *std::max_element(assignments.begin(), assignments.end()) + 1;
  std::vector<std::size_t> sizes(k, 0);
  for (int a : assignments) ++sizes.at(a);
  const std::size_t n = points.size();
  double total = 0.0;
  std::vector<double> dist_sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    const int own = assignments[i];
    if (sizes[own] < 2) continue;
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist_sum[assignments[j]] += std::sqrt(squared_distance(points[i], points[j]));
    }
    const double a = dist_sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c != own && sizes[c] > 0) b = std::min(b, dist_sum[c] / static_cast<double>(sizes[c]));
    }
    if (!std::isfinite(b)) continue;
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

ClusterwiseTable clusterwise_report(const std::vector<MetricRow>& rows,
                                    const std::map<std::string, int>& assignment, int k) {
  if (k < 1) throw ValidationError("clusterwise_report: k must be at least 1");
  ClusterwiseTable t;
  t.k = k;
  t.counts.assign(k, 0);
  for (auto& m : t.mean) m.assign(k, 0.0);
  for (auto& s : t.stddev) s.assign(k, 0.0);
  std::vector<int> cluster_of(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto it = assignment.find(rows[i].id);
    if (it == assignment.end()) throw ValidationError("participant '" + rows[i].id + "' has no cluster assignment");
    if (it->second < 0 || it->second >= k) {
      throw ValidationError("participant '" + rows[i].id + "' has cluster id " + std::to_string(it->second) +
                            " outside [0, " + std::to_string(k) + ")");
    }
    cluster_of[i] = it->second;
    ++t.counts[it->second];
    for (int m = 0; m < 3; ++m) t.mean[m][it->second] += rows[i].values[m];
  }
  for (int m = 0; m < 3; ++m) {
    for (int c = 0; c < k; ++c) {
      if (t.counts[c] > 0) t.mean[m][c] /= static_cast<double>(t.counts[c]);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double d = rows[i].values[m] - t.mean[m][cluster_of[i]];
      t.stddev[m][cluster_of[i]] += d * d;
    }
    for (int c = 0; c < k; ++c) {
      if (t.counts[c] > 0) t.stddev[m][c] = std::sqrt(t.stddev[m][c] / static_cast<double>(t.counts[c]));
    }
  }
  return t;
}

void write_clusterwise_csv(std::ostream& out, const ClusterwiseTable& t) {
  out << "metric";
  for (int c = 0; c < t.k; ++c) out << ",Cluster " << c + 1;
  out << '\n';
  char buf[64];
  for (int m = 0; m < 3; ++m) {
    out << kClusterMetrics[m];
    for (int c = 0; c < t.k; ++c) {
      if (t.counts[c] == 0) {
        out << ",n/a";
        continue;
      }
      std::snprintf(buf, sizeof(buf), ",%.4f ± %.4f", t.mean[m][c], t.stddev[m][c]);
      out << buf;
    }
    out << '\n';
  }
  out << "n";
  for (int c = 0; c < t.k; ++c) out << ',' << t.counts[c];
  out << '\n';
}

// ---- SVG ------------------------------------------------------------------

namespace {

constexpr double kWidth = 640, kHeight = 480, kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const {
    return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * (kHeight - kTop - kBottom);
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

void open_svg(std::ostream& out, const Frame& f, const std::string& title, const std::string& xl,
              const std::string& yl) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
      << "</text>\n";
  const double left = kLeft, right = kWidth - kRight, top = kTop, bottom = kHeight - kBottom;
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\""
      << bottom - top << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0, yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << bottom + 16 << "\" text-anchor=\"middle\">" << tick(xv)
        << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << fmt(f.py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << kHeight - 18 << "\" text-anchor=\"middle\">"
      << escape_xml(xl) << "</text>\n";
  out << "<text transform=\"translate(16," << (top + bottom) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(yl) << "</text>\n";
}

void legend(std::ostream& out, const std::vector<std::pair<std::string, int>>& entries) {
  double y = kTop + 10;
  for (const auto& [name, color] : entries) {
    out << "<rect x=\"" << kWidth - kRight + 14 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[color % kPalette.size()] << "\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 30 << "\" y=\"" << y << "\">" << escape_xml(name) << "</text>\n";
    y += 18;
  }
}

Frame padded(double x0, double x1, double y0, double y1) {
  const double dx = (x1 - x0) * 0.05, dy = (y1 - y0) * 0.05;
  return {x0 - dx, x1 + dx, y0 - dy, y1 + dy};
}

}  // namespace

void write_scatter_svg(std::ostream& out, const std::vector<std::array<double, 2>>& points,
                       const std::vector<int>& groups, const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  if (groups.size() != points.size()) throw ValidationError("scatter: one group per point required");
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!points.empty()) {
    x0 = x1 = points[0][0];
    y0 = y1 = points[0][1];
    for (const auto& p : points) {
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
  }
  const Frame f = padded(x0, x1, y0, y1);
  open_svg(out, f, title, x_label, y_label);
  int max_group = -1;
  for (std::size_t i = 0; i < points.size(); ++i) {
    max_group = std::max(max_group, groups[i]);
    out << "<circle cx=\"" << fmt(f.px(points[i][0])) << "\" cy=\"" << fmt(f.py(points[i][1]))
        << "\" r=\"3\" fill-opacity=\"0.75\" fill=\"" << kPalette[groups[i] % kPalette.size()] << "\"/>\n";
  }
  std::vector<std::pair<std::string, int>> entries;
  for (int g = 0; g <= max_group; ++g) entries.emplace_back("Cluster " + std::to_string(g + 1), g);
  legend(out, entries);
  out << "</svg>\n";
}

void write_line_svg(std::ostream& out, const std::vector<Series>& series, const std::string& title,
                    const std::string& x_label, const std::string& y_label) {
  double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  std::size_t len = 1;
  for (const auto& s : series) {
    len = std::max(len, s.y.size());
    for (double v : s.y) {
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  Frame f = padded(0.0, static_cast<double>(len - 1), y0, y1);
  f.x0 = 0.0;
  f.x1 = static_cast<double>(len > 1 ? len - 1 : 1);
  open_svg(out, f, title, x_label, y_label);
  std::vector<std::pair<std::string, int>> entries;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << kPalette[s.color % kPalette.size()]
        << "\" points=\"";
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      out << (i ? " " : "") << fmt(f.px(static_cast<double>(i))) << ',' << fmt(f.py(s.y[i]));
    }
    out << "\"/>\n";
    entries.emplace_back(s.name, s.color);
  }
  legend(out, entries);
  out << "</svg>\n";
}

}  // namespace actilang::analysis
