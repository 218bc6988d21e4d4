#pragma once

// Result serialization. JSON carries everything (configs echoed back, curves,
// diagnostics, selected parameters); CSV carries the two tabular views consumed by
// downstream analysis: per-candidate scores and per-criterion selection counts.
// Doubles go through shortest-round-trip formatting in both formats; non-finite
// values appear as null in JSON.

#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "monte_carlo.hpp"

namespace numclust {

namespace detail {

using Json = nlohmann::ordered_json;

inline Json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline const char* to_string(ConvergedBy c) {
  switch (c) {
    case ConvergedBy::kLogLikChange: return "loglik-change";
    case ConvergedBy::kParameterChange: return "parameter-change";
    case ConvergedBy::kMaxIter: return "max-iter";
  }
  return "?";
}

inline Json diag_to_json(const FitDiagnostics& d) {
  return Json{{"iterations", d.iterations},
              {"converged_by", to_string(d.converged_by)},
              {"final_log_lik", finite_or_null(d.final_log_lik)},
              {"regularization_events", d.regularization_events},
              {"empty_cluster_events", d.empty_cluster_events}};
}

inline Json enumeration_config_to_json(const EnumerationConfig& c) {
  Json criteria = Json::array();
  for (Criterion cr : c.criteria) criteria.push_back(numclust::to_string(cr));
  return Json{{"l_min", c.family.l_min},
              {"l_max", c.family.l_max},
              {"clusterer", numclust::to_string(c.clusterer)},
              {"criteria", criteria},
              {"max_iter", c.max_iter},
              {"tol", c.tol},
              {"reg_eps", c.reg_eps},
              {"swaps", c.n_swaps},
              {"replicates", c.replicates},
              {"knee", c.use_knee}};
}

inline EnumerationConfig enumeration_config_from_json(const Json& j) {
  EnumerationConfig c;
  c.family.l_min = j.at("l_min").get<int>();
  c.family.l_max = j.at("l_max").get<int>();
  c.clusterer = clusterer_from_string(j.at("clusterer").get<std::string>());
  c.criteria.clear();
  for (const auto& s : j.at("criteria")) c.criteria.push_back(criterion_from_string(s.get<std::string>()));
  c.max_iter = j.at("max_iter").get<int>();
  c.tol = j.at("tol").get<double>();
  c.reg_eps = j.at("reg_eps").get<double>();
  c.n_swaps = j.at("swaps").get<int>();
  c.replicates = j.at("replicates").get<int>();
  c.use_knee = j.at("knee").get<bool>();
  return c;
}

inline const char* to_string(Normalize n) { return n == Normalize::kMean ? "mean" : "none"; }

inline Json mc_config_to_json(const McConfig& c) {
  return Json{{"mc", c.mc},
              {"seed", c.seed},
              {"source", numclust::to_string(c.source)},
              {"gamma", c.gamma},
              {"n_k", c.n_k},
              {"input", c.input_path},
              {"labels", c.has_labels},
              {"normalize", to_string(c.normalize)},
              {"true_k", c.true_k},
              {"threads", c.threads},
              {"enumeration", enumeration_config_to_json(c.enumeration)}};
}

inline McConfig mc_config_from_json(const Json& j) {
  McConfig c;
  c.mc = j.at("mc").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const std::string src = j.at("source").get<std::string>();
  if (src == "data1")
    c.source = SourceKind::kData1;
  else if (src == "data2")
    c.source = SourceKind::kData2;
  else if (src == "file")
    c.source = SourceKind::kFile;
  else
    throw ParseError("unknown source: " + src);
  c.gamma = j.at("gamma").get<int>();
  c.n_k = j.at("n_k").get<int>();
  c.input_path = j.at("input").get<std::string>();
  c.has_labels = j.at("labels").get<bool>();
  c.normalize = j.at("normalize").get<std::string>() == "mean" ? Normalize::kMean : Normalize::kNone;
  c.true_k = j.at("true_k").get<int>();
  c.threads = j.at("threads").get<int>();
  c.enumeration = enumeration_config_from_json(j.at("enumeration"));
  return c;
}

}  // namespace detail

inline nlohmann::ordered_json mc_result_to_json(const McResult& r) {
  using detail::Json;
  Json criteria = Json::array();
  for (std::size_t c = 0; c < r.summaries.size(); ++c) {
    const auto& s = r.summaries[c];
    criteria.push_back(Json{{"criterion", to_string(s.criterion)},
                            {"p_det", s.p_det},
                            {"p_under", s.p_under},
                            {"p_over", s.p_over},
                            {"mae", detail::finite_or_null(s.mae)},
                            {"invalid_trials", s.invalid_trials},
                            {"histogram", s.histogram},
                            {"khats", r.khats[c]}});
  }
  return Json{{"config", detail::mc_config_to_json(r.config)},
              {"true_k", r.true_k},
              {"wall_clock_seconds", r.wall_clock_seconds},
              {"criteria", criteria}};
}

inline McResult mc_result_from_json(const nlohmann::ordered_json& j) {
  McResult r;
  r.config = detail::mc_config_from_json(j.at("config"));
  r.true_k = j.at("true_k").get<int>();
  r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  for (const auto& cj : j.at("criteria")) {
    CriterionSummary s;
    s.criterion = criterion_from_string(cj.at("criterion").get<std::string>());
    s.p_det = cj.at("p_det").get<double>();
    s.p_under = cj.at("p_under").get<double>();
    s.p_over = cj.at("p_over").get<double>();
    s.mae = cj.at("mae").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                   : cj.at("mae").get<double>();
    s.invalid_trials = cj.at("invalid_trials").get<int>();
    s.histogram = cj.at("histogram").get<std::vector<int>>();
    r.khats.push_back(cj.at("khats").get<std::vector<int>>());
    r.summaries.push_back(std::move(s));
  }
  return r;
}

inline nlohmann::ordered_json enumeration_report_to_json(const EnumerationReport& rep) {
  using detail::Json;
  Json candidates = Json::array();
  for (const auto& c : rep.candidates) {
    Json cj{{"l", c.l}, {"failure", c.failure}};
    cj["em"] = c.em_ran ? detail::diag_to_json(c.em_diag) : Json(nullptr);
    cj["kmeans"] = c.kmeans_ran ? detail::diag_to_json(c.kmeans_diag) : Json(nullptr);
    candidates.push_back(std::move(cj));
  }
  Json curves = Json::array();
  for (const auto& curve : rep.curves) {
    Json scores = Json::array();
    for (const auto& s : curve.scores)
      scores.push_back(Json{{"l", s.l},
                            {"total", detail::finite_or_null(s.total)},
                            {"data_fidelity", detail::finite_or_null(s.data_fidelity)},
                            {"penalty", detail::finite_or_null(s.penalty)},
                            {"valid", s.valid},
                            {"reason", s.reason}});
    curves.push_back(Json{{"criterion", to_string(curve.criterion)},
                          {"selected_l", curve.selected_l},
                          {"rule", curve.by_knee ? "knee" : "argmax"},
                          {"scores", std::move(scores)}});
  }
  Json params = Json::array();
  for (const auto& p : rep.selected_params) {
    if (p.n_components() == 0) {
      params.push_back(nullptr);
      continue;
    }
    Json means = Json::array(), covs = Json::array();
    for (const auto& m : p.means) means.push_back(std::vector<double>(m.data(), m.data() + m.size()));
    for (const auto& c : p.covariances) {
      Json rows = Json::array();
      for (long i = 0; i < c.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(c.cols()));
        for (long jcol = 0; jcol < c.cols(); ++jcol) row[static_cast<std::size_t>(jcol)] = c(i, jcol);
        rows.push_back(std::move(row));
      }
      covs.push_back(std::move(rows));
    }
    params.push_back(Json{{"weights", p.weights}, {"means", std::move(means)}, {"covariances", std::move(covs)}});
  }
  return Json{{"seed", rep.seed},
              {"config", detail::enumeration_config_to_json(rep.config)},
              {"candidates", std::move(candidates)},
              {"curves", std::move(curves)},
              {"selected_params", std::move(params)}};
}

inline void write_json_file(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Selection counts per criterion and candidate count, then a summary block. The
// l = 0 row carries trials that produced no valid candidate at all.
inline void write_mc_csv(const McResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  const int l_min = r.config.enumeration.family.l_min;
  out << "criterion,l,selection_count\n";
  for (const auto& s : r.summaries) {
    out << to_string(s.criterion) << ",0," << s.invalid_trials << "\n";
    for (std::size_t i = 0; i < s.histogram.size(); ++i)
      out << to_string(s.criterion) << "," << (l_min + static_cast<int>(i)) << ","
          << s.histogram[i] << "\n";
  }
  out << "criterion,p_det,p_under,mae\n";
  for (const auto& s : r.summaries)
    out << to_string(s.criterion) << "," << detail::format_double(s.p_det) << ","
        << detail::format_double(s.p_under) << "," << detail::format_double(s.mae) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

// Per-candidate scores, then one selection row per criterion.
inline void write_enumeration_csv(const EnumerationReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "criterion,l,total,data_fidelity,penalty,valid\n";
  for (const auto& curve : rep.curves)
    for (const auto& s : curve.scores)
      out << to_string(curve.criterion) << "," << s.l << "," << detail::format_double(s.total)
          << "," << detail::format_double(s.data_fidelity) << ","
          << detail::format_double(s.penalty) << "," << (s.valid ? 1 : 0) << "\n";
  out << "criterion,selected_l,rule\n";
  for (const auto& curve : rep.curves)
    out << to_string(curve.criterion) << "," << curve.selected_l << ","
        << (curve.by_knee ? "knee" : "argmax") << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace numclust
