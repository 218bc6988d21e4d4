#pragma once

// k-means++ seeding and Lloyd iteration. Seeding returns row indices so callers can
// reuse the exact same starting points across fitters.

#include <algorithm>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "diagnostics.hpp"
#include "partition.hpp"
#include "rng.hpp"

namespace numclust {

// D^2 seeding: first center uniform, each next drawn with probability proportional
// to the squared distance to the nearest chosen center. Falls back to a uniform
// pick among unchosen rows when every remaining distance is zero (duplicate-heavy
// data). Returns l distinct row indices.
inline std::vector<int> kmeanspp_init(const DataSet& data, int l, SplitRng& rng) {
  data.validate();
  if (l < 1) throw InvalidArgument("kmeanspp_init: l must be >= 1");
  if (l > data.n()) throw TooManyClusters("kmeanspp_init: more clusters than points");

  const int n = data.n();
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(l));
  std::vector<char> is_chosen(static_cast<std::size_t>(n), 0);

  const int first = static_cast<int>(rng.next_below(static_cast<std::size_t>(n)));
  chosen.push_back(first);
  is_chosen[static_cast<std::size_t>(first)] = 1;

  Vector dist2 = (data.x.rowwise() - data.x.row(first)).rowwise().squaredNorm();

  while (static_cast<int>(chosen.size()) < l) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += dist2(i);
    int pick;
    if (total > 0.0) {
      pick = static_cast<int>(rng.next_weighted({dist2.data(), static_cast<std::size_t>(n)}));
      if (is_chosen[static_cast<std::size_t>(pick)] || dist2(pick) == 0.0) {
        // weight mass says this cannot happen unless ties collapse; resolve uniformly
        pick = -1;
      }
    } else {
      pick = -1;
    }
    if (pick < 0) {
      int remaining = 0;
      for (int i = 0; i < n; ++i) remaining += !is_chosen[static_cast<std::size_t>(i)];
      std::size_t ord = rng.next_below(static_cast<std::size_t>(remaining));
      for (int i = 0; i < n; ++i) {
        if (is_chosen[static_cast<std::size_t>(i)]) continue;
        if (ord == 0) {
          pick = i;
          break;
        }
        --ord;
      }
    }
    chosen.push_back(pick);
    is_chosen[static_cast<std::size_t>(pick)] = 1;
    dist2 = dist2.cwiseMin(
        (data.x.rowwise() - data.x.row(pick)).rowwise().squaredNorm().eval());
  }
  return chosen;
}

inline std::vector<Vector> centroids_from_rows(const DataSet& data, const std::vector<int>& idx) {
  std::vector<Vector> c;
  c.reserve(idx.size());
  for (int i : idx) {
    if (i < 0 || i >= data.n()) throw InvalidArgument("centroids_from_rows: index out of range");
    c.push_back(data.x.row(i).transpose());
  }
  return c;
}

struct KmeansResult {
  HardPartition partition;
  std::vector<Vector> centroids;
  double sse = 0.0;
  FitDiagnostics diag;
};

// Lloyd iteration from explicit starting centroids. Assignment ties go to the
// smallest index. A cluster that empties is reseeded at the point farthest from its
// current centroid, which keeps l live clusters whenever l <= n.
inline KmeansResult kmeans(const DataSet& data, std::vector<Vector> centroids, int max_iter = 100,
                           double tol = 1e-6) {
  data.validate();
  const int l = static_cast<int>(centroids.size());
  if (l < 1) throw InvalidArgument("kmeans: no centroids");
  if (l > data.n()) throw TooManyClusters("kmeans: more clusters than points");
  for (const auto& c : centroids)
    if (c.size() != data.dim()) throw DimMismatch("kmeans: centroid dimension mismatch");
  if (max_iter < 1) throw InvalidArgument("kmeans: max_iter must be >= 1");

  const int n = data.n();
  const int r = data.dim();
  Matrix d2(n, l);
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  FitDiagnostics diag;

  auto assign = [&]() {
    for (int m = 0; m < l; ++m)
      d2.col(m) = (data.x.rowwise() - centroids[static_cast<std::size_t>(m)].transpose())
                      .rowwise()
                      .squaredNorm();
    for (int i = 0; i < n; ++i) {
      int best = 0;
      for (int m = 1; m < l; ++m)
        if (d2(i, m) < d2(i, best)) best = m;
      labels[static_cast<std::size_t>(i)] = best;
    }
  };

  for (int it = 1; it <= max_iter; ++it) {
    diag.iterations = it;
    assign();

    std::vector<int> counts(static_cast<std::size_t>(l), 0);
    std::vector<Vector> sums(static_cast<std::size_t>(l), Vector::Zero(r));
    for (int i = 0; i < n; ++i) {
      const auto m = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
      ++counts[m];
      sums[m] += data.x.row(i).transpose();
    }

    double movement = 0.0;
    for (int m = 0; m < l; ++m) {
      if (counts[static_cast<std::size_t>(m)] == 0) {
        // farthest point from its own centroid becomes the new seed
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double di = d2(i, labels[static_cast<std::size_t>(i)]);
          if (di > far_d) {
            far_d = di;
            far = i;
          }
        }
        ++diag.empty_cluster_events;
        Vector nc = data.x.row(far).transpose();
        movement = std::max(movement, (nc - centroids[static_cast<std::size_t>(m)]).norm());
        centroids[static_cast<std::size_t>(m)] = std::move(nc);
        labels[static_cast<std::size_t>(far)] = m;
        d2(far, m) = 0.0;
        continue;
      }
      Vector nc = sums[static_cast<std::size_t>(m)] / counts[static_cast<std::size_t>(m)];
      movement = std::max(movement, (nc - centroids[static_cast<std::size_t>(m)]).norm());
      centroids[static_cast<std::size_t>(m)] = std::move(nc);
    }

    if (movement <= tol) {
      diag.converged_by = ConvergedBy::kParameterChange;
      break;
    }
    if (it == max_iter) diag.converged_by = ConvergedBy::kMaxIter;
  }

  assign();  // labels consistent with the final centroids
  double sse = 0.0;
  for (int i = 0; i < n; ++i) sse += d2(i, labels[static_cast<std::size_t>(i)]);

  KmeansResult out;
  out.partition = partition_from_labels(data, labels, l);
  out.centroids = std::move(centroids);
  out.sse = sse;
  out.diag = std::move(diag);
  return out;
}

}  // namespace numclust
