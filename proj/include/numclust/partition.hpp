#pragma once

// Hard partitions and the responsibility -> partition reduction. A partition keeps
// the sufficient statistics (count, mean, scatter about the mean) per cluster so the
// scoring layer never has to touch the raw data again.

#include <utility>
#include <vector>

#include "dataset.hpp"

namespace numclust {

// Posterior membership weights, one row per observation, one column per component.
// Rows must be simplex points (within tolerance) before hard assignment.
struct Responsibilities {
  Matrix r;

  int n() const { return static_cast<int>(r.rows()); }
  int k() const { return static_cast<int>(r.cols()); }
};

struct HardPartition {
  std::vector<int> labels;        // cluster index per row, 0-based
  std::vector<int> counts;        // N_m
  std::vector<Vector> means;      // cluster sample means
  std::vector<Matrix> scatters;   // sum of outer products about the cluster mean

  int n_clusters() const { return static_cast<int>(counts.size()); }
  int n() const { return static_cast<int>(labels.size()); }

  bool has_empty() const {
    for (int c : counts)
      if (c == 0) return true;
    return false;
  }
};

// Builds counts/means/scatters from explicit labels in [0, l). Means first, then
// scatters in a second pass; this keeps each scatter exact about its own mean.
inline HardPartition partition_from_labels(const DataSet& data, std::vector<int> labels, int l) {
  data.validate();
  if (l < 1) throw InvalidArgument("partition_from_labels: l must be >= 1");
  if (static_cast<int>(labels.size()) != data.n())
    throw DimMismatch("partition_from_labels: label count != row count");

  const int r = data.dim();
  HardPartition p;
  p.labels = std::move(labels);
  p.counts.assign(static_cast<std::size_t>(l), 0);
  p.means.assign(static_cast<std::size_t>(l), Vector::Zero(r));
  p.scatters.assign(static_cast<std::size_t>(l), Matrix::Zero(r, r));

  for (int i = 0; i < data.n(); ++i) {
    const int m = p.labels[static_cast<std::size_t>(i)];
    if (m < 0 || m >= l) throw InvalidArgument("partition_from_labels: label out of range");
    ++p.counts[static_cast<std::size_t>(m)];
    p.means[static_cast<std::size_t>(m)] += data.x.row(i).transpose();
  }
  for (int m = 0; m < l; ++m)
    if (p.counts[static_cast<std::size_t>(m)] > 0)
      p.means[static_cast<std::size_t>(m)] /= static_cast<double>(p.counts[static_cast<std::size_t>(m)]);

  for (int i = 0; i < data.n(); ++i) {
    const int m = p.labels[static_cast<std::size_t>(i)];
    Vector d = data.x.row(i).transpose() - p.means[static_cast<std::size_t>(m)];
    p.scatters[static_cast<std::size_t>(m)] += d * d.transpose();
  }
  return p;
}

// Argmax over responsibility rows, ties to the smallest index. Empty clusters are
// legal here (the scoring layer decides what to do with them).
inline HardPartition hard_assign(const DataSet& data, const Responsibilities& resp) {
  data.validate();
  if (resp.n() != data.n()) throw DimMismatch("hard_assign: row count mismatch");
  if (resp.k() < 1) throw InvalidArgument("hard_assign: no components");

  for (int i = 0; i < resp.n(); ++i) {
    double sum = 0.0;
    for (int m = 0; m < resp.k(); ++m) {
      const double v = resp.r(i, m);
      if (v < -1e-12 || v > 1.0 + 1e-9 || !std::isfinite(v))
        throw InvalidArgument("hard_assign: responsibility outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw InvalidArgument("hard_assign: responsibility row does not sum to 1");
  }

  std::vector<int> labels(static_cast<std::size_t>(resp.n()));
  for (int i = 0; i < resp.n(); ++i) {
    int best = 0;
    double best_v = resp.r(i, 0);
    for (int m = 1; m < resp.k(); ++m)
      if (resp.r(i, m) > best_v) {
        best_v = resp.r(i, m);
        best = m;
      }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return partition_from_labels(data, std::move(labels), resp.k());
}

}  // namespace numclust
