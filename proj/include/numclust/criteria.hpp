#pragma once

// Cluster-count scoring criteria. Every criterion scores a hard partition at its
// Gaussian maximum-likelihood parameters and returns a CandidateScore whose total is
// compared across candidate counts by argmax. Five scores are provided:
//
//   bic-n   fit terms sum_m [N_m log N_m - (N_m/2) log det S_m] minus half the
//           per-cluster penalty q * sum_m log N_m
//   bic-o   doubled assigned-cluster log-likelihood minus q * l * log N
//   bic-os  doubled spherical fit terms minus (r l + 1) log N, on the kmeans fit
//   bic-ns  spherical fit terms minus half of (r + 1) * sum_m log N_m
//   bic-g   assigned-cluster log-likelihood minus half the exact information
//           penalty sum_m log det J_m - l q log 2pi, plus an optional log prior
//
// bic-n, bic-o and bic-g expose one shared data_fidelity, the assigned-cluster
// log-likelihood computed by a single code path; bic-os stores double the spherical
// fidelity bic-ns stores. Each total keeps its criterion's native scale, so totals
// compare across counts within one criterion only. Terms constant across counts
// are omitted throughout.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "em.hpp"
#include "linalg.hpp"
#include "partition.hpp"

namespace numclust {

enum class Criterion { kBicN, kBicO, kBicOs, kBicNs, kBicG };

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::kBicN: return "bic-n";
    case Criterion::kBicO: return "bic-o";
    case Criterion::kBicOs: return "bic-os";
    case Criterion::kBicNs: return "bic-ns";
    case Criterion::kBicG: return "bic-g";
  }
  return "?";
}

inline Criterion criterion_from_string(const std::string& s) {
  if (s == "bic-n") return Criterion::kBicN;
  if (s == "bic-o") return Criterion::kBicO;
  if (s == "bic-os") return Criterion::kBicOs;
  if (s == "bic-ns") return Criterion::kBicNs;
  if (s == "bic-g") return Criterion::kBicG;
  throw UnknownCriterion("unknown criterion: " + s);
}

// Spherical criteria score the kmeans partition; the rest score whatever the
// configured clusterer produced.
inline bool is_spherical(Criterion c) { return c == Criterion::kBicOs || c == Criterion::kBicNs; }

struct ModelDims {
  int r = 0;  // feature dimension

  // free parameters per cluster: r for the mean, r(r+1)/2 for the covariance
  int q() const { return r * (r + 3) / 2; }
  // spherical model: l means plus one shared variance
  int alpha_spherical(int l) const { return r * l + 1; }
  // per-cluster free parameters of the spherical model
  int alpha_spherical_cluster() const { return r + 1; }
};

struct CandidateScore {
  Criterion criterion = Criterion::kBicN;
  int l = 0;
  double total = -std::numeric_limits<double>::infinity();
  double data_fidelity = 0.0;
  double penalty = 0.0;
  bool valid = false;
  std::string reason;                  // empty when valid
  std::vector<double> nm_log_nm;       // N_m log N_m per cluster
  std::vector<double> log_det_sigma;   // log det of each cluster covariance (full model)
};

inline CandidateScore invalid_score(Criterion c, int l, std::string reason) {
  CandidateScore s;
  s.criterion = c;
  s.l = l;
  s.valid = false;
  s.reason = std::move(reason);
  return s;
}

// Log-likelihood contribution of one cluster of size count under N(mu, sigma) with
// mixing weight count/n_total. mean and scatter are the cluster's own statistics, so
// an off-mean mu only costs the shifted quadratic term.
inline double loglik_cluster(int count, const Vector& mean, const Matrix& scatter,
                             const Vector& mu, const SpdFactor& sigma, int n_total) {
  if (count < 1) throw InvalidCluster("loglik_cluster: empty cluster");
  if (n_total < count) throw InvalidArgument("loglik_cluster: n_total < count");
  const long r = mean.size();
  if (mu.size() != r || scatter.rows() != r || scatter.cols() != r || sigma.dim() != r)
    throw DimMismatch("loglik_cluster: size mismatch");
  constexpr double log2pi = 1.8378770664093454835606594728112;
  const double nm = count;
  const double trace_term = sigma.solve(scatter).trace() + nm * sigma.quad_form(mean - mu);
  return nm * std::log(nm / n_total) - 0.5 * nm * r * log2pi - 0.5 * nm * sigma.log_det() -
         0.5 * trace_term;
}

// Hard-assignment MLE bundle for a partition: weights N_m/N, cluster means, and
// covariances scatter/N_m (factored with the given ridge policy).
inline GmmParams mle_params(const HardPartition& part, double reg_eps = 1e-8) {
  GmmParams params;
  const int n = part.n();
  for (int m = 0; m < part.n_clusters(); ++m) {
    const auto mu = static_cast<std::size_t>(m);
    const int nm = part.counts[mu];
    if (nm == 0) throw EmptySubset("mle_params: empty cluster");
    params.weights.push_back(nm / static_cast<double>(n));
    params.means.push_back(part.means[mu]);
    params.covariances.push_back(part.scatters[mu] / nm);
    params.factors.push_back(cholesky(params.covariances.back(), reg_eps));
  }
  return params;
}

// Sum of loglik_cluster over all clusters: the joint likelihood when every point is
// charged to its assigned component alone.
inline double hard_loglik(const HardPartition& part, const GmmParams& params) {
  if (params.n_components() != part.n_clusters())
    throw DimMismatch("hard_loglik: component count mismatch");
  double total = 0.0;
  for (int m = 0; m < part.n_clusters(); ++m) {
    const auto mu = static_cast<std::size_t>(m);
    total += loglik_cluster(part.counts[mu], part.means[mu], part.scatters[mu], params.means[mu],
                            params.factors[mu], part.n());
  }
  return total;
}

// Mixture log-likelihood of the sample: sum over rows of the log-sum-exp of the
// weighted component densities. Diagnostic companion to hard_loglik; the criteria
// themselves score the assigned-cluster value.
inline double mixture_loglik(const Matrix& x, const GmmParams& params) {
  params.validate();
  if (x.rows() == 0) throw EmptySubset("mixture_loglik: no rows");
  if (x.cols() != params.dim()) throw DimMismatch("mixture_loglik: dimension mismatch");
  constexpr double log2pi = 1.8378770664093454835606594728112;
  const double r = static_cast<double>(x.cols());
  const int l = params.n_components();
  Matrix logp(x.rows(), l);
  for (int m = 0; m < l; ++m) {
    const auto mu = static_cast<std::size_t>(m);
    const double w = params.weights[mu];
    const double head = (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()) -
                        0.5 * (r * log2pi + params.factors[mu].log_det());
    logp.col(m) = (params.factors[mu].mahalanobis_sq(x, params.means[mu]) * -0.5).array() + head;
  }
  Vector rowmax = logp.rowwise().maxCoeff();
  return rowmax.sum() + (logp.colwise() - rowmax).array().exp().rowwise().sum().log().sum();
}

namespace detail {

inline bool fill_common(CandidateScore& s, const HardPartition& part) {
  s.l = part.n_clusters();
  if (part.n() == 0) {
    s.reason = "no data";
    return false;
  }
  if (part.has_empty()) {
    s.reason = "empty cluster";
    return false;
  }
  for (int c : part.counts) s.nm_log_nm.push_back(c * std::log(static_cast<double>(c)));
  return true;
}

// Pooled spherical variance: total scatter trace / (r N).
inline double spherical_variance(const HardPartition& part) {
  double trace = 0.0;
  for (const auto& sc : part.scatters) trace += sc.trace();
  const double v = trace / (static_cast<double>(part.n()) * part.scatters[0].rows());
  if (v < 1e-300) throw ZeroVariance("spherical model: pooled variance is zero");
  return v;
}

// Fit terms of the spherical model on bic-ns's scale; bic-os stores exactly twice
// this value, computed through this one code path.
inline double spherical_fidelity(std::span<const double> nm_log_nm, const ModelDims& dims,
                                 double n, double variance) {
  double sum_nm_log_nm = 0.0;
  for (double v : nm_log_nm) sum_nm_log_nm += v;
  return sum_nm_log_nm - 0.5 * dims.r * n * std::log(variance);
}

}  // namespace detail

inline CandidateScore bic_n(const HardPartition& part, const GmmParams& mle) {
  CandidateScore s;
  s.criterion = Criterion::kBicN;
  if (!detail::fill_common(s, part)) return s;
  const ModelDims dims{static_cast<int>(part.means[0].size())};
  double sum_log_nm = 0.0;
  double fit_terms = 0.0;
  for (int m = 0; m < part.n_clusters(); ++m) {
    const auto mu = static_cast<std::size_t>(m);
    s.log_det_sigma.push_back(mle.factors[mu].log_det());
    sum_log_nm += std::log(static_cast<double>(part.counts[mu]));
    fit_terms += s.nm_log_nm[mu] - 0.5 * part.counts[mu] * s.log_det_sigma[mu];
  }
  s.data_fidelity = hard_loglik(part, mle);
  s.penalty = dims.q() * sum_log_nm;
  s.total = fit_terms - 0.5 * s.penalty;
  s.valid = std::isfinite(s.total);
  if (!s.valid) s.reason = "non-finite score";
  return s;
}

inline CandidateScore bic_o(const HardPartition& part, const GmmParams& mle) {
  CandidateScore s;
  s.criterion = Criterion::kBicO;
  if (!detail::fill_common(s, part)) return s;
  const ModelDims dims{static_cast<int>(part.means[0].size())};
  for (int m = 0; m < part.n_clusters(); ++m)
    s.log_det_sigma.push_back(mle.factors[static_cast<std::size_t>(m)].log_det());
  s.data_fidelity = hard_loglik(part, mle);
  s.penalty = static_cast<double>(dims.q()) * part.n_clusters() * std::log(static_cast<double>(part.n()));
  s.total = 2.0 * s.data_fidelity - s.penalty;
  s.valid = std::isfinite(s.total);
  if (!s.valid) s.reason = "non-finite score";
  return s;
}

inline CandidateScore bic_os(const HardPartition& part) {
  CandidateScore s;
  s.criterion = Criterion::kBicOs;
  if (!detail::fill_common(s, part)) return s;
  const ModelDims dims{static_cast<int>(part.means[0].size())};
  double variance;
  try {
    variance = detail::spherical_variance(part);
  } catch (const ZeroVariance& e) {
    s.nm_log_nm.clear();
    s.reason = e.what();
    return s;
  }
  const double n = part.n();
  s.data_fidelity = 2.0 * detail::spherical_fidelity(s.nm_log_nm, dims, n, variance);
  s.penalty = dims.alpha_spherical(part.n_clusters()) * std::log(n);
  s.total = s.data_fidelity - s.penalty;
  s.valid = std::isfinite(s.total);
  if (!s.valid) s.reason = "non-finite score";
  return s;
}

inline CandidateScore bic_ns(const HardPartition& part) {
  CandidateScore s;
  s.criterion = Criterion::kBicNs;
  if (!detail::fill_common(s, part)) return s;
  const ModelDims dims{static_cast<int>(part.means[0].size())};
  double variance;
  try {
    variance = detail::spherical_variance(part);
  } catch (const ZeroVariance& e) {
    s.nm_log_nm.clear();
    s.reason = e.what();
    return s;
  }
  double sum_log_nm = 0.0;
  for (int c : part.counts) sum_log_nm += std::log(static_cast<double>(c));
  const double n = part.n();
  s.data_fidelity = detail::spherical_fidelity(s.nm_log_nm, dims, n, variance);
  s.penalty = dims.alpha_spherical_cluster() * sum_log_nm;
  s.total = s.data_fidelity - 0.5 * s.penalty;
  s.valid = std::isfinite(s.total);
  if (!s.valid) s.reason = "non-finite score";
  return s;
}

// Fisher information of one Gaussian cluster at its MLE, in (mean, uniq(covariance))
// coordinates: block diag(N Sigma^-1, N/2 D' (Sigma^-1 kron Sigma^-1) D). Returns the
// matrix and its log determinant; throws NotSpd if either block fails a strict
// factorization.
inline std::pair<Matrix, double> fim_gaussian(int count, const SpdFactor& sigma) {
  if (count < 1) throw InvalidCluster("fim_gaussian: empty cluster");
  const int r = sigma.dim();
  const Matrix inv = sigma.inverse();
  const Matrix d = duplication_matrix(r);
  Matrix cov_block = 0.5 * count * (d.transpose() * kron(inv, inv) * d);
  cov_block = 0.5 * (cov_block + cov_block.transpose());  // exact symmetry for the strict factor
  const SpdFactor cov_f = cholesky(cov_block, 0.0);

  const double mean_block_log_det = r * std::log(static_cast<double>(count)) - sigma.log_det();
  const int q = r * (r + 3) / 2;
  Matrix j = Matrix::Zero(q, q);
  j.topLeftCorner(r, r) = count * inv;
  j.bottomRightCorner(cov_block.rows(), cov_block.cols()) = cov_block;
  return {std::move(j), mean_block_log_det + cov_f.log_det()};
}

// Exact finite-N form: fidelity plus l*q/2 log 2pi minus half the log determinant
// of the full-model Fisher information, plus optional log prior mass. No asymptotic
// simplification of the penalty.
inline CandidateScore bic_g(const HardPartition& part, const GmmParams& mle,
                            double log_prior = 0.0) {
  CandidateScore s;
  s.criterion = Criterion::kBicG;
  if (!detail::fill_common(s, part)) return s;
  const ModelDims dims{static_cast<int>(part.means[0].size())};
  constexpr double log2pi = 1.8378770664093454835606594728112;
  double sum_log_det_j = 0.0;
  try {
    for (int m = 0; m < part.n_clusters(); ++m) {
      const auto mu = static_cast<std::size_t>(m);
      s.log_det_sigma.push_back(mle.factors[mu].log_det());
      sum_log_det_j += fim_gaussian(part.counts[mu], mle.factors[mu]).second;
    }
  } catch (const NotSpd&) {
    s.log_det_sigma.clear();
    s.reason = "information matrix not positive definite";
    return s;
  }
  const int l = part.n_clusters();
  s.data_fidelity = hard_loglik(part, mle);
  s.penalty = sum_log_det_j - l * dims.q() * log2pi;
  s.total = s.data_fidelity - 0.5 * s.penalty + log_prior;
  s.valid = std::isfinite(s.total);
  if (!s.valid) s.reason = "non-finite score";
  return s;
}

// Closed-form penalty (the eta term whose half is subtracted from the fidelity) with
// real-valued cluster sizes, enabling algebraic identity checks. bic-g has no closed
// form independent of the fit, so it is rejected here.
inline double penalty_of(Criterion c, std::span<const double> counts, double n_total, int r) {
  if (counts.empty()) throw InvalidArgument("penalty_of: no clusters");
  if (!(n_total > 0.0)) throw InvalidArgument("penalty_of: n_total must be positive");
  if (r < 1) throw InvalidArgument("penalty_of: r must be >= 1");
  const ModelDims dims{r};
  const double l = static_cast<double>(counts.size());
  double sum_log = 0.0;
  for (double nm : counts) {
    if (!(nm > 0.0)) throw InvalidCluster("penalty_of: non-positive cluster size");
    sum_log += std::log(nm);
  }
  switch (c) {
    case Criterion::kBicN: return dims.q() * sum_log;
    case Criterion::kBicO: return dims.q() * l * std::log(n_total);
    case Criterion::kBicOs: return (dims.r * l + 1.0) * std::log(n_total);
    case Criterion::kBicNs: return dims.alpha_spherical_cluster() * sum_log;
    case Criterion::kBicG: break;
  }
  throw UnknownCriterion("penalty_of: no closed-form penalty for this criterion");
}

}  // namespace numclust
