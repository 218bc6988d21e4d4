#pragma once

// Monte Carlo evaluation of the criteria: repeat draw-or-reload + enumerate, collect
// the per-criterion count estimates, and reduce them to detection statistics. Each
// trial gets its own derived seed, so the trial set is reproducible and insensitive
// to thread schedule.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "csv.hpp"
#include "enumeration.hpp"
#include "synthdata.hpp"

namespace numclust {

enum class SourceKind { kData1, kData2, kFile };

inline const char* to_string(SourceKind s) {
  switch (s) {
    case SourceKind::kData1: return "data1";
    case SourceKind::kData2: return "data2";
    case SourceKind::kFile: return "file";
  }
  return "?";
}

struct McConfig {
  int mc = 1;
  std::uint64_t seed = 0;
  SourceKind source = SourceKind::kData1;
  int gamma = 1;                            // data1 size multiplier
  int n_k = 100;                            // data2 points per cluster
  std::string input_path;                   // file source
  bool has_labels = false;
  Normalize normalize = Normalize::kNone;
  int true_k = 0;                           // 0 = derive from source or labels
  int threads = 0;                          // 0 = hardware concurrency
  EnumerationConfig enumeration;

  bool operator==(const McConfig&) const = default;
};

struct CriterionSummary {
  Criterion criterion = Criterion::kBicN;
  double p_det = 0.0;
  double p_under = 0.0;
  double p_over = 0.0;
  double mae = 0.0;               // over valid trials; NaN if none
  std::vector<int> histogram;     // selections per l, ascending from l_min
  int invalid_trials = 0;

  bool operator==(const CriterionSummary& o) const {
    const bool mae_same = (std::isnan(mae) && std::isnan(o.mae)) || mae == o.mae;
    return criterion == o.criterion && p_det == o.p_det && p_under == o.p_under &&
           p_over == o.p_over && mae_same && histogram == o.histogram &&
           invalid_trials == o.invalid_trials;
  }
};

struct McResult {
  McConfig config;
  int true_k = 0;
  std::vector<CriterionSummary> summaries;   // parallel to config.enumeration.criteria
  std::vector<std::vector<int>> khats;       // [criterion][trial]; 0 marks an invalid trial
  double wall_clock_seconds = 0.0;

  // timing is run-dependent, so equality deliberately ignores it
  bool operator==(const McResult& o) const {
    return config == o.config && true_k == o.true_k && summaries == o.summaries &&
           khats == o.khats;
  }
};

inline double metric_p_det(std::span<const int> khats, int true_k) {
  if (khats.empty()) throw InvalidArgument("metric_p_det: no trials");
  int hit = 0;
  for (int k : khats) hit += (k == true_k);
  return static_cast<double>(hit) / khats.size();
}

inline double metric_p_under(std::span<const int> khats, int true_k) {
  if (khats.empty()) throw InvalidArgument("metric_p_under: no trials");
  int under = 0;
  for (int k : khats) under += (k >= 1 && k < true_k);
  return static_cast<double>(under) / khats.size();
}

inline double metric_p_over(std::span<const int> khats, int true_k) {
  if (khats.empty()) throw InvalidArgument("metric_p_over: no trials");
  int over = 0;
  for (int k : khats) over += (k > true_k);
  return static_cast<double>(over) / khats.size();
}

inline double metric_mae(std::span<const int> khats, int true_k) {
  if (khats.empty()) throw InvalidArgument("metric_mae: no trials");
  double sum = 0.0;
  for (int k : khats) sum += std::abs(k - true_k);
  return sum / khats.size();
}

namespace detail {

inline constexpr std::uint64_t kDrawPurpose = 0xd1;
inline constexpr std::uint64_t kEnumPurpose = 0xe1;

inline DataSet trial_dataset(const McConfig& cfg, const DataSet* fixed, int trial) {
  if (cfg.source == SourceKind::kFile) return *fixed;
  SplitRng rng(derive_key(cfg.seed, static_cast<std::uint64_t>(trial), kDrawPurpose));
  return cfg.source == SourceKind::kData1 ? gen_data1(cfg.gamma, rng).data
                                          : gen_data2(cfg.n_k, rng).data;
}

}  // namespace detail

inline McResult run_monte_carlo(const McConfig& cfg) {
  if (cfg.mc < 1) throw InvalidArgument("run_monte_carlo: mc must be >= 1");
  cfg.enumeration.family.validate();
  if (cfg.enumeration.criteria.empty()) throw InvalidArgument("run_monte_carlo: no criteria");

  DataSet fixed;
  const DataSet* fixed_ptr = nullptr;
  int true_k = cfg.true_k;
  if (cfg.source == SourceKind::kFile) {
    fixed = ingest_csv(cfg.input_path, cfg.has_labels, cfg.normalize);
    fixed_ptr = &fixed;
    if (true_k == 0 && cfg.has_labels) true_k = fixed.distinct_labels();
  } else if (true_k == 0) {
    true_k = cfg.source == SourceKind::kData1 ? 3 : 10;
  }
  if (true_k < 1)
    throw InvalidArgument("run_monte_carlo: true cluster count unknown; set true_k or labels");

  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t n_crit = cfg.enumeration.criteria.size();
  std::vector<std::vector<int>> khats(n_crit, std::vector<int>(static_cast<std::size_t>(cfg.mc), 0));

  auto run_trial = [&](int t) {
    DataSet data = detail::trial_dataset(cfg, fixed_ptr, t);
    const std::uint64_t enum_seed =
        derive_key(cfg.seed, static_cast<std::uint64_t>(t), detail::kEnumPurpose);
    try {
      EnumerationReport rep = enumerate_models(data, cfg.enumeration, enum_seed);
      for (std::size_t c = 0; c < n_crit; ++c)
        khats[c][static_cast<std::size_t>(t)] = rep.curves[c].selected_l;
    } catch (const AllCandidatesInvalid&) {
      // whole trial is uninformative for every criterion; khats stay 0
    } catch (const CurveTooShort&) {
    }
  };

  int n_threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = std::min(n_threads, cfg.mc);

  if (n_threads == 1) {
    for (int t = 0; t < cfg.mc; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto worker = [&]() {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= cfg.mc) return;
        try {
          run_trial(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  McResult out;
  out.config = cfg;
  out.true_k = true_k;
  out.khats = std::move(khats);

  const int l_min = cfg.enumeration.family.l_min;
  const int span = cfg.enumeration.family.size();
  for (std::size_t c = 0; c < n_crit; ++c) {
    CriterionSummary s;
    s.criterion = cfg.enumeration.criteria[c];
    s.histogram.assign(static_cast<std::size_t>(span), 0);
    int det = 0, under = 0, over = 0;
    double abs_err = 0.0;
    int valid = 0;
    for (int k : out.khats[c]) {
      if (k == 0) {
        ++s.invalid_trials;
        continue;
      }
      ++valid;
      abs_err += std::abs(k - true_k);
      if (k == true_k)
        ++det;
      else if (k < true_k)
        ++under;
      else
        ++over;
      if (k >= l_min && k < l_min + span) ++s.histogram[static_cast<std::size_t>(k - l_min)];
    }
    s.p_det = static_cast<double>(det) / cfg.mc;
    s.p_under = static_cast<double>(under) / cfg.mc;
    s.p_over = static_cast<double>(over) / cfg.mc;
    s.mae = valid > 0 ? abs_err / valid : std::numeric_limits<double>::quiet_NaN();
    out.summaries.push_back(std::move(s));
  }

  out.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace numclust
