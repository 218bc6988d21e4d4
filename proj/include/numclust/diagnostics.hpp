#pragma once

#include <limits>
#include <vector>

namespace numclust {

enum class ConvergedBy { kLogLikChange, kParameterChange, kMaxIter };

// Bookkeeping every fitter fills in. log_lik_trace holds one objective value per
// iteration in evaluation order (kmeans leaves it empty and reports SSE separately).
struct FitDiagnostics {
  int iterations = 0;
  ConvergedBy converged_by = ConvergedBy::kMaxIter;
  double final_log_lik = std::numeric_limits<double>::quiet_NaN();
  int regularization_events = 0;
  int empty_cluster_events = 0;
  std::vector<double> log_lik_trace;
};

}  // namespace numclust
