#pragma once

// Random swap refinement: repeatedly teleport one component to a random data row,
// refit to convergence, and keep the move only when the objective improves. The rng
// is consumed identically (component draw, then row draw) whether or not a swap is
// accepted, so results are reproducible under one stream.

#include <utility>

#include "em.hpp"
#include "kmeans.hpp"
#include "rng.hpp"

namespace numclust {

inline EmResult random_swap_em(const DataSet& data, EmResult base, const EmOptions& opt,
                               int n_swaps, SplitRng& rng) {
  if (n_swaps < 0) throw InvalidArgument("random_swap_em: negative swap count");
  const int l = base.params.n_components();
  for (int s = 0; s < n_swaps; ++s) {
    const auto comp = rng.next_below(static_cast<std::size_t>(l));
    const auto row = rng.next_below(static_cast<std::size_t>(data.n()));
    GmmParams trial = base.params;
    trial.means[comp] = data.x.row(static_cast<long>(row)).transpose();
    try {
      EmResult refit = em_fit(data, trial, opt);
      if (refit.diag.final_log_lik > base.diag.final_log_lik) base = std::move(refit);
    } catch (const Degenerate&) {
      // swap killed a component; keep the incumbent
    }
  }
  return base;
}

inline KmeansResult random_swap_kmeans(const DataSet& data, KmeansResult base, int max_iter,
                                       double tol, int n_swaps, SplitRng& rng) {
  if (n_swaps < 0) throw InvalidArgument("random_swap_kmeans: negative swap count");
  const int l = static_cast<int>(base.centroids.size());
  for (int s = 0; s < n_swaps; ++s) {
    const auto comp = rng.next_below(static_cast<std::size_t>(l));
    const auto row = rng.next_below(static_cast<std::size_t>(data.n()));
    std::vector<Vector> trial = base.centroids;
    trial[comp] = data.x.row(static_cast<long>(row)).transpose();
    KmeansResult refit = kmeans(data, std::move(trial), max_iter, tol);
    if (refit.sse < base.sse) base = std::move(refit);
  }
  return base;
}

}  // namespace numclust
