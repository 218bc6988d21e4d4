#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "linalg.hpp"

namespace numclust {

// Observations as rows. labels, when present, carry ground truth class ids exactly
// as ingested (they are never consumed by the fitters, only by evaluation).
struct DataSet {
  Matrix x;
  std::vector<int> labels;

  int n() const { return static_cast<int>(x.rows()); }
  int dim() const { return static_cast<int>(x.cols()); }

  void validate() const {
    if (x.rows() < 1 || x.cols() < 1) throw InvalidArgument("DataSet: empty");
    if (!x.allFinite()) throw InvalidArgument("DataSet: non-finite value");
    if (!labels.empty() && static_cast<int>(labels.size()) != n())
      throw InvalidArgument("DataSet: label count != row count");
  }

  int distinct_labels() const {
    std::vector<int> seen;
    for (int v : labels) {
      bool found = false;
      for (int s : seen) found = found || (s == v);
      if (!found) seen.push_back(v);
    }
    return static_cast<int>(seen.size());
  }
};

inline DataSet make_dataset(Matrix x, std::vector<int> labels = {}) {
  DataSet d{std::move(x), std::move(labels)};
  d.validate();
  return d;
}

}  // namespace numclust
