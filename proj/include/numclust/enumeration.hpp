#pragma once

// Candidate sweep: fit every cluster count in [l_min, l_max] once, score each fit
// under every requested criterion, then pick the argmax (or the knee) per criterion.
// Randomness is keyed by (seed, l, purpose), so enlarging the family or adding
// criteria never changes the scores of existing candidates.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "criteria.hpp"
#include "random_swap.hpp"

namespace numclust {

enum class Clusterer { kEm, kKmeans, kRsEm, kRsKmeans };

inline const char* to_string(Clusterer c) {
  switch (c) {
    case Clusterer::kEm: return "em";
    case Clusterer::kKmeans: return "kmeans";
    case Clusterer::kRsEm: return "rs-em";
    case Clusterer::kRsKmeans: return "rs-kmeans";
  }
  return "?";
}

inline Clusterer clusterer_from_string(const std::string& s) {
  if (s == "em") return Clusterer::kEm;
  if (s == "kmeans") return Clusterer::kKmeans;
  if (s == "rs-em") return Clusterer::kRsEm;
  if (s == "rs-kmeans") return Clusterer::kRsKmeans;
  throw InvalidArgument("unknown clusterer: " + s);
}

struct CandidateFamily {
  int l_min = 1;
  int l_max = 1;

  int size() const { return l_max - l_min + 1; }
  void validate() const {
    if (l_min < 1 || l_max < l_min) throw InvalidArgument("CandidateFamily: need 1 <= l_min <= l_max");
  }
  bool operator==(const CandidateFamily&) const = default;
};

struct EnumerationConfig {
  CandidateFamily family;
  Clusterer clusterer = Clusterer::kEm;
  std::vector<Criterion> criteria{Criterion::kBicN};
  int max_iter = 200;
  double tol = 1e-6;
  double reg_eps = 1e-8;
  int n_swaps = 20;     // rs-em / rs-kmeans only
  int replicates = 1;   // independent seedings for em / kmeans, best objective kept
  bool use_knee = false;

  bool operator==(const EnumerationConfig&) const = default;
};

struct BicCurve {
  Criterion criterion = Criterion::kBicN;
  std::vector<CandidateScore> scores;  // ascending l, one per family member
  int selected_l = 0;
  bool by_knee = false;
};

struct CandidateInfo {
  int l = 0;
  bool em_ran = false;
  bool kmeans_ran = false;
  FitDiagnostics em_diag;
  FitDiagnostics kmeans_diag;
  std::string failure;  // set when the candidate could not be fitted at all
};

struct EnumerationReport {
  std::uint64_t seed = 0;
  EnumerationConfig config;
  std::vector<BicCurve> curves;            // parallel to config.criteria
  std::vector<CandidateInfo> candidates;   // ascending l
  std::vector<GmmParams> selected_params;  // parallel to curves; empty if unavailable
};

// Argmax over valid scores; ties resolve to the smallest l. Scores are expected in
// ascending-l order, as produced by the sweep.
inline int select_k(const std::vector<CandidateScore>& scores) {
  int best_l = -1;
  double best = 0.0;
  for (const auto& s : scores) {
    if (!s.valid) continue;
    if (best_l < 0 || s.total > best) {
      best = s.total;
      best_l = s.l;
    }
  }
  if (best_l < 0) throw NoValidCandidate("select_k: no valid candidate");
  return best_l;
}

// Sharpest concave corner of the curve: the interior l maximizing
// 2 BIC(l) - BIC(l-1) - BIC(l+1) over windows of three consecutive valid scores.
// Ties resolve to the smallest l. Useful when a weak penalty makes the curve keep
// climbing past the true count but with a visible slope break at it.
inline int knee_point(const std::vector<CandidateScore>& scores) {
  int best_l = -1;
  double best = 0.0;
  for (std::size_t i = 1; i + 1 < scores.size(); ++i) {
    if (!scores[i - 1].valid || !scores[i].valid || !scores[i + 1].valid) continue;
    const double curvature = 2.0 * scores[i].total - scores[i - 1].total - scores[i + 1].total;
    if (best_l < 0 || curvature > best) {
      best = curvature;
      best_l = scores[i].l;
    }
  }
  if (best_l < 0)
    throw CurveTooShort("knee_point: need three consecutive valid scores");
  return best_l;
}

inline EnumerationReport enumerate_models(const DataSet& data, const EnumerationConfig& cfg,
                                          std::uint64_t seed) {
  data.validate();
  cfg.family.validate();
  if (cfg.criteria.empty()) throw InvalidArgument("enumerate_models: no criteria");
  if (cfg.replicates < 1) throw InvalidArgument("enumerate_models: replicates must be >= 1");
  if (cfg.n_swaps < 0) throw InvalidArgument("enumerate_models: negative swap count");

  const bool em_family = cfg.clusterer == Clusterer::kEm || cfg.clusterer == Clusterer::kRsEm;
  bool want_full = false, want_spherical = false;
  for (Criterion c : cfg.criteria) (is_spherical(c) ? want_spherical : want_full) = true;
  // spherical criteria always score a kmeans partition; full-model criteria score
  // whatever the configured clusterer produced
  const bool need_em = em_family && want_full;
  const bool need_km = !em_family || want_spherical;

  const int count = cfg.family.size();
  std::vector<std::optional<HardPartition>> em_part(static_cast<std::size_t>(count));
  std::vector<std::optional<HardPartition>> km_part(static_cast<std::size_t>(count));
  std::vector<std::optional<GmmParams>> em_mle(static_cast<std::size_t>(count));
  std::vector<std::optional<GmmParams>> km_mle(static_cast<std::size_t>(count));

  EnumerationReport rep;
  rep.seed = seed;
  rep.config = cfg;

  const EmOptions em_opt{cfg.max_iter, cfg.tol, cfg.reg_eps};

  for (int li = 0; li < count; ++li) {
    const int l = cfg.family.l_min + li;
    CandidateInfo info;
    info.l = l;
    try {
      SplitRng rng_init = SplitRng::derive(seed, static_cast<std::uint64_t>(l), 0);
      const int reps =
          (cfg.clusterer == Clusterer::kEm || cfg.clusterer == Clusterer::kKmeans)
              ? cfg.replicates
              : 1;
      std::vector<std::vector<Vector>> inits;
      inits.reserve(static_cast<std::size_t>(reps));
      for (int rep = 0; rep < reps; ++rep)
        inits.push_back(centroids_from_rows(data, kmeanspp_init(data, l, rng_init)));

      if (need_em) {
        std::optional<EmResult> best;
        std::string fail;
        for (const auto& init : inits) {
          try {
            EmResult fit = em_fit(data, init_from_centroids(data, init, cfg.reg_eps), em_opt);
            if (!best || fit.diag.final_log_lik > best->diag.final_log_lik) best = std::move(fit);
          } catch (const Degenerate& e) {
            fail = e.what();
          } catch (const NotSpd& e) {
            fail = e.what();
          }
        }
        if (best && cfg.clusterer == Clusterer::kRsEm && cfg.n_swaps > 0) {
          SplitRng rng_swap = SplitRng::derive(seed, static_cast<std::uint64_t>(l), 1);
          best = random_swap_em(data, std::move(*best), em_opt, cfg.n_swaps, rng_swap);
        }
        if (best) {
          info.em_ran = true;
          info.em_diag = best->diag;
          HardPartition part = hard_assign(data, best->resp);
          if (!part.has_empty()) {
            try {
              em_mle[static_cast<std::size_t>(li)] = mle_params(part, cfg.reg_eps);
            } catch (const NotSpd&) {
            }
          }
          em_part[static_cast<std::size_t>(li)] = std::move(part);
        } else {
          info.failure = fail.empty() ? "fit failed" : fail;
        }
      }

      if (need_km) {
        std::optional<KmeansResult> best;
        for (const auto& init : inits) {
          KmeansResult fit = kmeans(data, init, cfg.max_iter, cfg.tol);
          if (!best || fit.sse < best->sse) best = std::move(fit);
        }
        if (cfg.clusterer == Clusterer::kRsKmeans && cfg.n_swaps > 0) {
          SplitRng rng_swap = SplitRng::derive(seed, static_cast<std::uint64_t>(l), 2);
          best = random_swap_kmeans(data, std::move(*best), cfg.max_iter, cfg.tol, cfg.n_swaps,
                                    rng_swap);
        }
        info.kmeans_ran = true;
        info.kmeans_diag = best->diag;
        if (!em_family && !best->partition.has_empty()) {
          try {
            km_mle[static_cast<std::size_t>(li)] = mle_params(best->partition, cfg.reg_eps);
          } catch (const NotSpd&) {
          }
        }
        km_part[static_cast<std::size_t>(li)] = std::move(best->partition);
      }
    } catch (const TooManyClusters& e) {
      info.failure = e.what();
    }
    rep.candidates.push_back(std::move(info));
  }

  for (Criterion c : cfg.criteria) {
    BicCurve curve;
    curve.criterion = c;
    for (int li = 0; li < count; ++li) {
      const int l = cfg.family.l_min + li;
      const auto k = static_cast<std::size_t>(li);
      const auto& info = rep.candidates[k];
      CandidateScore sc;
      if (is_spherical(c)) {
        if (!km_part[k])
          sc = invalid_score(c, l, info.failure.empty() ? "fit failed" : info.failure);
        else
          sc = (c == Criterion::kBicOs) ? bic_os(*km_part[k]) : bic_ns(*km_part[k]);
      } else {
        const auto& part = em_family ? em_part[k] : km_part[k];
        const auto& mle = em_family ? em_mle[k] : km_mle[k];
        if (!part)
          sc = invalid_score(c, l, info.failure.empty() ? "fit failed" : info.failure);
        else if (part->has_empty())
          sc = invalid_score(c, l, "empty cluster");
        else if (!mle)
          sc = invalid_score(c, l, "covariance not positive definite");
        else if (c == Criterion::kBicN)
          sc = bic_n(*part, *mle);
        else if (c == Criterion::kBicO)
          sc = bic_o(*part, *mle);
        else
          sc = bic_g(*part, *mle);
      }
      sc.l = l;
      curve.scores.push_back(std::move(sc));
    }

    try {
      curve.selected_l = cfg.use_knee ? knee_point(curve.scores) : select_k(curve.scores);
    } catch (const NoValidCandidate&) {
      throw AllCandidatesInvalid(std::string("enumerate_models: every candidate invalid for ") +
                                 to_string(c));
    }
    curve.by_knee = cfg.use_knee;

    const auto sel = static_cast<std::size_t>(curve.selected_l - cfg.family.l_min);
    GmmParams chosen;
    if (is_spherical(c)) {
      if (km_mle[sel])
        chosen = *km_mle[sel];
      else if (km_part[sel] && !km_part[sel]->has_empty()) {
        try {
          chosen = mle_params(*km_part[sel], cfg.reg_eps);
        } catch (const NotSpd&) {
        }
      }
    } else {
      const auto& mle = em_family ? em_mle[sel] : km_mle[sel];
      if (mle) chosen = *mle;
    }
    rep.selected_params.push_back(std::move(chosen));
    rep.curves.push_back(std::move(curve));
  }

  return rep;
}

}  // namespace numclust
