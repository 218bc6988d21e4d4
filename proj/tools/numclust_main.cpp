// Command line front end.
//
//   numclust generate   draw a synthetic benchmark dataset to CSV (+ JSON sidecar)
//   numclust enumerate  score candidate cluster counts on one dataset
//   numclust bench      Monte Carlo study of the criteria
//
// Exit codes: 0 success, 2 bad input (flags, files, parsing), 3 numeric failure
// (no valid candidate, degenerate fits).

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <numclust/numclust.hpp>

namespace {

std::vector<numclust::Criterion> parse_criteria(const std::string& list) {
  std::vector<numclust::Criterion> out;
  std::string cur;
  std::stringstream ss(list);
  while (std::getline(ss, cur, ',')) {
    if (!cur.empty()) out.push_back(numclust::criterion_from_string(cur));
  }
  if (out.empty()) throw numclust::InvalidArgument("--criteria: empty list");
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (out[i] == out[j]) throw numclust::InvalidArgument("--criteria: duplicate entry");
  return out;
}

numclust::Normalize parse_normalize(const std::string& s) {
  if (s.empty() || s == "none") return numclust::Normalize::kNone;
  if (s == "mean") return numclust::Normalize::kMean;
  throw numclust::InvalidArgument("--normalize: expected 'mean'");
}

std::string sidecar_path(const std::string& out) {
  const auto dot = out.find_last_of('.');
  const auto slash = out.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return out + ".json";
  return out.substr(0, dot) + ".json";
}

int run(int argc, char** argv) {
  CLI::App app{"Bayesian cluster count estimation"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "draw a synthetic benchmark dataset");
  std::string gen_dataset, gen_out;
  int gen_gamma = 1, gen_nk = 100;
  std::uint64_t gen_seed = 0;
  gen->add_option("--dataset", gen_dataset, "data1 or data2")->required();
  gen->add_option("--gamma", gen_gamma, "data1 size multiplier (counts 50/100/200 scaled)");
  gen->add_option("--nk", gen_nk, "data2 points per cluster");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();

  // shared enumeration flags
  std::string in_path, normalize_str, clusterer_str = "em", criteria_str = "bic-n,bic-o",
              out_path, format = "csv";
  bool has_labels = false, use_knee = false;
  int lmin = 1, lmax = 0, max_iter = 200, swaps = 20, replicates = 1;
  double tol = 1e-6, reg_eps = 1e-8;
  std::uint64_t seed = 0;

  auto add_fit_flags = [&](CLI::App* cmd, bool input_required) {
    auto* in = cmd->add_option("--input", in_path, "input CSV of points");
    if (input_required) in->required();
    cmd->add_flag("--labels", has_labels, "last CSV column is a ground-truth label");
    cmd->add_option("--normalize", normalize_str, "feature normalization: mean");
    cmd->add_option("--lmin", lmin, "smallest candidate cluster count");
    cmd->add_option("--lmax", lmax, "largest candidate cluster count")->required();
    cmd->add_option("--clusterer", clusterer_str, "em | kmeans | rs-em | rs-kmeans");
    cmd->add_option("--criteria", criteria_str, "comma list: bic-n,bic-o,bic-os,bic-ns,bic-g");
    cmd->add_flag("--knee", use_knee, "select by knee point instead of argmax");
    cmd->add_option("--seed", seed, "rng seed");
    cmd->add_option("--tol", tol, "convergence tolerance");
    cmd->add_option("--max-iter", max_iter, "iteration cap per fit");
    cmd->add_option("--reg-eps", reg_eps, "covariance ridge scale");
    cmd->add_option("--swaps", swaps, "random swap count for rs-* clusterers");
    cmd->add_option("--replicates", replicates, "independent seedings, best kept");
    cmd->add_option("--out", out_path, "output path")->required();
    cmd->add_option("--format", format, "csv | json");
  };

  auto* enum_cmd = app.add_subcommand("enumerate", "score candidate cluster counts");
  add_fit_flags(enum_cmd, true);

  auto* bench = app.add_subcommand("bench", "Monte Carlo study");
  std::string bench_dataset;
  int mc = 0, bench_gamma = 1, bench_nk = 100, true_k = 0, threads = 0;
  bench->add_option("--dataset", bench_dataset, "data1 | data2 | file")->required();
  bench->add_option("--mc", mc, "number of Monte Carlo trials")->required();
  bench->add_option("--gamma", bench_gamma, "data1 size multiplier");
  bench->add_option("--nk", bench_nk, "data2 points per cluster");
  bench->add_option("--true-k", true_k, "ground-truth cluster count for file datasets");
  bench->add_option("--threads", threads, "worker threads (0 = hardware)");
  add_fit_flags(bench, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (gen->parsed()) {
    numclust::SplitRng rng(gen_seed);
    numclust::LabeledDraw draw;
    nlohmann::ordered_json meta;
    if (gen_dataset == "data1") {
      draw = numclust::gen_data1(gen_gamma, rng);
      meta["dataset"] = "data1";
      meta["gamma"] = gen_gamma;
    } else if (gen_dataset == "data2") {
      draw = numclust::gen_data2(gen_nk, rng);
      meta["dataset"] = "data2";
      meta["n_k"] = gen_nk;
    } else {
      throw numclust::InvalidArgument("--dataset: expected data1 or data2");
    }
    numclust::write_points_csv(gen_out, draw.data.x, draw.data.labels);
    meta["seed"] = gen_seed;
    meta["true_k"] = draw.true_k;
    meta["n"] = draw.data.n();
    meta["dim"] = draw.data.dim();
    numclust::write_json_file(meta, sidecar_path(gen_out));
    std::cout << "wrote " << draw.data.n() << " points to " << gen_out << "\n";
    return 0;
  }

  numclust::EnumerationConfig ecfg;
  ecfg.family = {lmin, lmax};
  ecfg.clusterer = numclust::clusterer_from_string(clusterer_str);
  ecfg.criteria = parse_criteria(criteria_str);
  ecfg.max_iter = max_iter;
  ecfg.tol = tol;
  ecfg.reg_eps = reg_eps;
  ecfg.n_swaps = swaps;
  ecfg.replicates = replicates;
  ecfg.use_knee = use_knee;
  if (format != "csv" && format != "json")
    throw numclust::InvalidArgument("--format: expected csv or json");

  if (enum_cmd->parsed()) {
    numclust::DataSet data =
        numclust::ingest_csv(in_path, has_labels, parse_normalize(normalize_str));
    numclust::EnumerationReport rep = numclust::enumerate_models(data, ecfg, seed);
    if (format == "json")
      numclust::write_json_file(numclust::enumeration_report_to_json(rep), out_path);
    else
      numclust::write_enumeration_csv(rep, out_path);
    for (const auto& curve : rep.curves)
      std::cout << numclust::to_string(curve.criterion) << ": selected " << curve.selected_l
                << (curve.by_knee ? " (knee)" : "") << "\n";
    return 0;
  }

  numclust::McConfig mcfg;
  mcfg.mc = mc;
  mcfg.seed = seed;
  if (bench_dataset == "data1")
    mcfg.source = numclust::SourceKind::kData1;
  else if (bench_dataset == "data2")
    mcfg.source = numclust::SourceKind::kData2;
  else if (bench_dataset == "file")
    mcfg.source = numclust::SourceKind::kFile;
  else
    throw numclust::InvalidArgument("--dataset: expected data1, data2 or file");
  if (mcfg.source == numclust::SourceKind::kFile && in_path.empty())
    throw numclust::InvalidArgument("--dataset file requires --input");
  mcfg.gamma = bench_gamma;
  mcfg.n_k = bench_nk;
  mcfg.input_path = in_path;
  mcfg.has_labels = has_labels;
  mcfg.normalize = parse_normalize(normalize_str);
  mcfg.true_k = true_k;
  mcfg.threads = threads;
  mcfg.enumeration = ecfg;

  numclust::McResult res = numclust::run_monte_carlo(mcfg);
  if (format == "json")
    numclust::write_json_file(numclust::mc_result_to_json(res), out_path);
  else
    numclust::write_mc_csv(res, out_path);
  for (const auto& s : res.summaries)
    std::cout << numclust::to_string(s.criterion) << ": p_det " << s.p_det << " p_under "
              << s.p_under << " p_over " << s.p_over << " mae " << s.mae << " invalid "
              << s.invalid_trials << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const numclust::NoValidCandidate& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const numclust::AllCandidatesInvalid& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const numclust::CurveTooShort& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const numclust::Degenerate& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const numclust::NotSpd& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const numclust::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
