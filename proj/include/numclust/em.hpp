#pragma once

// Gaussian mixture EM with full covariances. E step runs in the log domain with
// max subtraction; a component whose weight collapses is rescued once (moved to the
// worst-explained point with the global covariance) and the fit aborts as Degenerate
// if it collapses again.

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "diagnostics.hpp"
#include "kmeans.hpp"
#include "partition.hpp"

namespace numclust {

// Mixture parameters plus a ready Cholesky factor per component. covariance holds
// the plain maximum-likelihood matrix; its factor may carry a recorded diagonal
// ridge when that matrix was not positive definite on its own.
struct GmmParams {
  std::vector<double> weights;
  std::vector<Vector> means;
  std::vector<Matrix> covariances;
  std::vector<SpdFactor> factors;

  int n_components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }

  void validate() const {
    const std::size_t l = weights.size();
    if (l == 0) throw InvalidArgument("GmmParams: no components");
    if (means.size() != l || covariances.size() != l || factors.size() != l)
      throw DimMismatch("GmmParams: inconsistent component counts");
    double sum = 0.0;
    for (double w : weights) {
      if (w < 0.0 || !std::isfinite(w)) throw InvalidArgument("GmmParams: bad weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw InvalidArgument("GmmParams: weights do not sum to 1");
  }
};

struct EmOptions {
  int max_iter = 200;
  double tol = 1e-6;
  double reg_eps = 1e-8;
};

struct EmResult {
  GmmParams params;
  Responsibilities resp;
  FitDiagnostics diag;
};

// Starting parameters from seed centroids: nearest-centroid partition, then that
// partition's weights, means and covariances.
inline GmmParams init_from_centroids(const DataSet& data, const std::vector<Vector>& centroids,
                                     double reg_eps = 1e-8) {
  data.validate();
  const int l = static_cast<int>(centroids.size());
  if (l < 1) throw InvalidArgument("init_from_centroids: no centroids");
  const int n = data.n();
  const int r = data.dim();

  std::vector<int> labels(static_cast<std::size_t>(n));
  Matrix d2(n, l);
  for (int m = 0; m < l; ++m) {
    if (centroids[static_cast<std::size_t>(m)].size() != r)
      throw DimMismatch("init_from_centroids: centroid dimension mismatch");
    d2.col(m) = (data.x.rowwise() - centroids[static_cast<std::size_t>(m)].transpose())
                    .rowwise()
                    .squaredNorm();
  }
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int m = 1; m < l; ++m)
      if (d2(i, m) < d2(i, best)) best = m;
    labels[static_cast<std::size_t>(i)] = best;
  }

  HardPartition part = partition_from_labels(data, std::move(labels), l);
  Matrix global_cov = scatter_matrix(data.x, data.x.colwise().mean().transpose()) / n;

  GmmParams params;
  for (int m = 0; m < l; ++m) {
    const int nm = part.counts[static_cast<std::size_t>(m)];
    params.weights.push_back(std::max(nm, 1) / static_cast<double>(n));
    if (nm > 0) {
      params.means.push_back(part.means[static_cast<std::size_t>(m)]);
      params.covariances.push_back(part.scatters[static_cast<std::size_t>(m)] / nm);
    } else {
      params.means.push_back(centroids[static_cast<std::size_t>(m)]);
      params.covariances.push_back(global_cov);
    }
  }
  double wsum = 0.0;
  for (double w : params.weights) wsum += w;
  for (double& w : params.weights) w /= wsum;
  for (int m = 0; m < l; ++m)
    params.factors.push_back(cholesky(params.covariances[static_cast<std::size_t>(m)], reg_eps));
  return params;
}

namespace detail {

// Fills resp and the per-point total log densities; returns the log-likelihood.
inline double e_step(const DataSet& data, const GmmParams& params, Matrix& resp,
                     Vector& point_ll) {
  const int n = data.n();
  const int l = params.n_components();
  const double r = static_cast<double>(data.dim());
  constexpr double log2pi = 1.8378770664093454835606594728112;

  Matrix logp(n, l);
  for (int m = 0; m < l; ++m) {
    const auto mu = static_cast<std::size_t>(m);
    const double w = params.weights[mu];
    const double head =
        (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()) -
        0.5 * (r * log2pi + params.factors[mu].log_det());
    logp.col(m) = (params.factors[mu].mahalanobis_sq(data.x, params.means[mu]) * -0.5).array() + head;
  }

  Vector rowmax = logp.rowwise().maxCoeff();
  resp = (logp.colwise() - rowmax).array().exp();
  Vector rowsum = resp.rowwise().sum();
  resp.array().colwise() /= rowsum.array();
  point_ll = rowmax.array() + rowsum.array().log();
  return point_ll.sum();
}

inline double param_delta(const GmmParams& a, const GmmParams& b) {
  double d = 0.0;
  for (int m = 0; m < a.n_components(); ++m) {
    const auto mu = static_cast<std::size_t>(m);
    d = std::max(d, std::abs(a.weights[mu] - b.weights[mu]));
    d = std::max(d, (a.means[mu] - b.means[mu]).cwiseAbs().maxCoeff());
    d = std::max(d, (a.covariances[mu] - b.covariances[mu]).cwiseAbs().maxCoeff());
  }
  return d;
}

}  // namespace detail

inline EmResult em_fit(const DataSet& data, const GmmParams& init, const EmOptions& opt = {}) {
  data.validate();
  init.validate();
  if (init.dim() != data.dim()) throw DimMismatch("em_fit: dimension mismatch");
  if (opt.max_iter < 1) throw InvalidArgument("em_fit: max_iter must be >= 1");
  if (init.n_components() > data.n()) throw TooManyClusters("em_fit: more components than points");

  const int n = data.n();
  const int l = init.n_components();
  constexpr double weight_floor = 1e-12;

  GmmParams params = init;
  Matrix resp;
  Vector point_ll;
  FitDiagnostics diag;
  std::vector<char> rescued(static_cast<std::size_t>(l), 0);

  Matrix global_cov;  // built lazily, only if a rescue is needed

  double ll = detail::e_step(data, params, resp, point_ll);
  diag.log_lik_trace.push_back(ll);
  double prev_ll = ll;

  for (int it = 1; it <= opt.max_iter; ++it) {
    diag.iterations = it;
    GmmParams old = params;

    // M step
    Vector nk = resp.colwise().sum();
    bool need_refactor_all = false;
    for (int m = 0; m < l; ++m) {
      const auto mu = static_cast<std::size_t>(m);
      const double w = nk(m) / n;
      if (w < weight_floor) {
        if (rescued[mu]) throw Degenerate("em_fit: component collapsed twice");
        rescued[mu] = 1;
        ++diag.empty_cluster_events;
        if (global_cov.size() == 0)
          global_cov = scatter_matrix(data.x, data.x.colwise().mean().transpose()) / n;
        int worst;
        point_ll.minCoeff(&worst);
        params.means[mu] = data.x.row(worst).transpose();
        params.covariances[mu] = global_cov;
        params.factors[mu] = cholesky(global_cov, opt.reg_eps);
        params.weights[mu] = 1.0 / n;
        need_refactor_all = true;  // weights renormalize below
        continue;
      }
      params.weights[mu] = w;
      params.means[mu] = (resp.col(m).transpose() * data.x).transpose() / nk(m);
      Matrix centered = data.x.rowwise() - params.means[mu].transpose();
      params.covariances[mu] =
          (centered.transpose() * resp.col(m).asDiagonal() * centered) / nk(m);
      SpdFactor f = cholesky(params.covariances[mu], opt.reg_eps);
      if (f.ridge() > 0.0) ++diag.regularization_events;
      params.factors[mu] = std::move(f);
    }
    if (need_refactor_all) {
      double wsum = 0.0;
      for (double w : params.weights) wsum += w;
      for (double& w : params.weights) w /= wsum;
    }

    const double delta = detail::param_delta(old, params);

    ll = detail::e_step(data, params, resp, point_ll);
    diag.log_lik_trace.push_back(ll);
    diag.final_log_lik = ll;

    if (std::abs(ll - prev_ll) <= opt.tol * std::max(std::abs(ll), 1e-12)) {
      diag.converged_by = ConvergedBy::kLogLikChange;
      break;
    }
    if (delta <= opt.tol) {
      diag.converged_by = ConvergedBy::kParameterChange;
      break;
    }
    if (it == opt.max_iter) diag.converged_by = ConvergedBy::kMaxIter;
    prev_ll = ll;
  }

  diag.final_log_lik = ll;
  EmResult out;
  out.params = std::move(params);
  out.resp = Responsibilities{std::move(resp)};
  out.diag = std::move(diag);
  return out;
}

}  // namespace numclust
