#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numclust/criteria.hpp>
#include <numclust/kmeans.hpp>
#include <numclust/synthdata.hpp>

using namespace numclust;

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// the two-point line {0, 2} as a single cluster: every quantity is hand-computable
struct TwoPointFixture {
  DataSet data;
  HardPartition part;
  GmmParams mle;

  TwoPointFixture() {
    Matrix x(2, 1);
    x << 0.0, 2.0;
    data = make_dataset(std::move(x));
    part = partition_from_labels(data, {0, 0}, 1);
    mle = mle_params(part, 0.0);  // sample covariance is 1, already spd
  }
};

// independent route: the hard-assignment likelihood as an explicit sum of weighted
// point densities
double pointwise_loglik(const DataSet& data, const HardPartition& part, const GmmParams& p) {
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const auto m = static_cast<std::size_t>(part.labels[static_cast<std::size_t>(i)]);
    total += std::log(p.weights[m]) +
             mvn_logpdf(data.x.row(i).transpose(), p.means[m], p.factors[m]);
  }
  return total;
}

// independent route for the mixture value: per-point weighted density sums taken in
// extended precision, no log-sum-exp shift
double pointwise_mixture(const DataSet& data, const GmmParams& p) {
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    long double acc = 0.0L;
    for (std::size_t m = 0; m < p.weights.size(); ++m)
      acc += static_cast<long double>(p.weights[m]) *
             std::exp(static_cast<long double>(
                 mvn_logpdf(data.x.row(i).transpose(), p.means[m], p.factors[m])));
    total += static_cast<double>(std::log(acc));
  }
  return total;
}

Matrix unpack_symmetric(const Vector& packed, int r) {
  Matrix s(r, r);
  long k = 0;
  for (int j = 0; j < r; ++j)
    for (int i = j; i < r; ++i) {
      s(i, j) = packed(k);
      s(j, i) = packed(k);
      ++k;
    }
  return s;
}

// Gaussian log-likelihood of a fixed sample as a function of packed (mean, cov)
double gauss_loglik_packed(const Matrix& x, const Vector& theta) {
  const int r = static_cast<int>(x.cols());
  Vector mu = theta.head(r);
  Matrix sigma = unpack_symmetric(theta.tail(theta.size() - r), r);
  SpdFactor f = cholesky(sigma, 0.0);
  double total = 0.0;
  for (long i = 0; i < x.rows(); ++i) total += mvn_logpdf(x.row(i).transpose(), mu, f);
  return total;
}

// central-difference Hessian with per-coordinate steps
Matrix numerical_hessian(const Matrix& x, const Vector& theta) {
  const long q = theta.size();
  Matrix h(q, q);
  Vector step(q);
  for (long i = 0; i < q; ++i) step(i) = 1e-4 * std::max(1.0, std::abs(theta(i)));
  const double f0 = gauss_loglik_packed(x, theta);
  for (long i = 0; i < q; ++i) {
    for (long j = i; j < q; ++j) {
      double v;
      if (i == j) {
        Vector tp = theta, tm = theta;
        tp(i) += step(i);
        tm(i) -= step(i);
        v = (gauss_loglik_packed(x, tp) - 2.0 * f0 + gauss_loglik_packed(x, tm)) /
            (step(i) * step(i));
      } else {
        Vector tpp = theta, tpm = theta, tmp = theta, tmm = theta;
        tpp(i) += step(i);
        tpp(j) += step(j);
        tpm(i) += step(i);
        tpm(j) -= step(j);
        tmp(i) -= step(i);
        tmp(j) += step(j);
        tmm(i) -= step(i);
        tmm(j) -= step(j);
        v = (gauss_loglik_packed(x, tpp) - gauss_loglik_packed(x, tpm) -
             gauss_loglik_packed(x, tmp) + gauss_loglik_packed(x, tmm)) /
            (4.0 * step(i) * step(j));
      }
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

Vector pack_theta(const Vector& mu, const Matrix& sigma) {
  const int r = static_cast<int>(mu.size());
  Vector theta(r + r * (r + 1) / 2);
  theta.head(r) = mu;
  long k = r;
  for (int j = 0; j < r; ++j)
    for (int i = j; i < r; ++i) theta(k++) = sigma(i, j);
  return theta;
}

}  // namespace

TEST_CASE("criterion names round-trip") {
  for (Criterion c : {Criterion::kBicN, Criterion::kBicO, Criterion::kBicOs, Criterion::kBicNs,
                      Criterion::kBicG})
    CHECK(criterion_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(criterion_from_string("bic-x"), UnknownCriterion);
}

TEST_CASE("free parameter counts per dimension") {
  CHECK(ModelDims{1}.q() == 2);
  CHECK(ModelDims{2}.q() == 5);
  CHECK(ModelDims{3}.q() == 9);
  CHECK(ModelDims{2}.alpha_spherical(4) == 9);
  CHECK(ModelDims{2}.alpha_spherical_cluster() == 3);
}

TEST_CASE("two-point cluster: every criterion matches its hand value") {
  TwoPointFixture fx;
  const double log2 = std::log(2.0);

  // single cluster of weight 1: the assigned-cluster likelihood is -log(2 pi) - 1
  const double fidelity = -kLog2Pi - 1.0;

  // fit terms 2 log 2 - 0, penalty q log 2 with q = 2
  auto n = bic_n(fx.part, fx.mle);
  REQUIRE(n.valid);
  CHECK_THAT(n.total, Catch::Matchers::WithinAbs(log2, 1e-12));
  CHECK_THAT(n.data_fidelity, Catch::Matchers::WithinAbs(fidelity, 1e-12));
  CHECK_THAT(n.penalty, Catch::Matchers::WithinAbs(2.0 * log2, 1e-12));

  auto o = bic_o(fx.part, fx.mle);
  REQUIRE(o.valid);
  CHECK_THAT(o.total, Catch::Matchers::WithinAbs(2.0 * fidelity - 2.0 * log2, 1e-12));
  CHECK_THAT(o.penalty, Catch::Matchers::WithinAbs(2.0 * log2, 1e-12));
  CHECK(o.data_fidelity == n.data_fidelity);  // one evaluation, one value

  auto os = bic_os(fx.part);
  REQUIRE(os.valid);  // pooled variance is exactly 1
  CHECK_THAT(os.data_fidelity, Catch::Matchers::WithinAbs(4.0 * log2, 1e-12));
  CHECK_THAT(os.total, Catch::Matchers::WithinAbs(2.0 * log2, 1e-12));
  CHECK_THAT(os.penalty, Catch::Matchers::WithinAbs(2.0 * log2, 1e-12));

  auto ns = bic_ns(fx.part);
  REQUIRE(ns.valid);
  CHECK_THAT(ns.total, Catch::Matchers::WithinAbs(log2, 1e-12));
  CHECK_THAT(ns.penalty, Catch::Matchers::WithinAbs(2.0 * log2, 1e-12));
  CHECK(os.data_fidelity == 2.0 * ns.data_fidelity);

  auto g = bic_g(fx.part, fx.mle);
  REQUIRE(g.valid);
  // information matrix diag(2, 1): total = fidelity + log 2pi - (log 2)/2
  CHECK_THAT(g.total, Catch::Matchers::WithinAbs(-1.0 - 0.5 * log2, 1e-12));
  CHECK_THAT(g.penalty, Catch::Matchers::WithinAbs(log2 - 2.0 * kLog2Pi, 1e-12));
  CHECK(g.data_fidelity == n.data_fidelity);
}

TEST_CASE("two-point cluster: exact information matrix is diag(2, 1)") {
  TwoPointFixture fx;
  auto [j, log_det] = fim_gaussian(2, fx.mle.factors[0]);
  REQUIRE(j.rows() == 2);
  CHECK_THAT(j(0, 0), Catch::Matchers::WithinAbs(2.0, 1e-14));
  CHECK_THAT(j(1, 1), Catch::Matchers::WithinAbs(1.0, 1e-14));
  CHECK(j(0, 1) == 0.0);
  CHECK_THAT(log_det, Catch::Matchers::WithinAbs(std::log(2.0), 1e-14));
}

TEST_CASE("cluster likelihood equals the pointwise density sum, on and off the mean") {
  SplitRng rng(41);
  Matrix x = sample_mvn(60, Vector::Zero(2), Matrix::Identity(2, 2) * 2.0, rng);
  DataSet data = make_dataset(x);
  HardPartition part = partition_from_labels(data, std::vector<int>(60, 0), 1);

  SECTION("at the maximum likelihood parameters") {
    GmmParams mle = mle_params(part, 0.0);
    const double direct = pointwise_loglik(data, part, mle);
    const double moment = hard_loglik(part, mle);
    CHECK_THAT(moment, Catch::Matchers::WithinAbs(direct, 1e-9));
    // trace term collapses to r N / 2 at the MLE
    const double closed = -0.5 * 60 * (2 * kLog2Pi + mle.factors[0].log_det()) - 60.0;
    CHECK_THAT(moment, Catch::Matchers::WithinAbs(closed, 1e-9));
  }

  SECTION("at shifted parameters the quadratic correction appears") {
    GmmParams off = mle_params(part, 0.0);
    off.means[0] = Vector::Constant(2, 0.75);
    const double direct = pointwise_loglik(data, part, off);
    const double moment =
        loglik_cluster(60, part.means[0], part.scatters[0], off.means[0], off.factors[0], 60);
    CHECK_THAT(moment, Catch::Matchers::WithinAbs(direct, 1e-9));
  }
}

TEST_CASE("multi-cluster hard likelihood equals the pointwise sum") {
  SplitRng rng(43);
  DataSet data = gen_data1(1, rng).data;
  for (int l = 1; l <= 4; ++l) {
    SplitRng seed_rng = SplitRng::derive(7, static_cast<std::uint64_t>(l), 0);
    auto fit = kmeans(data, centroids_from_rows(data, kmeanspp_init(data, l, seed_rng)), 100, 1e-8);
    if (fit.partition.has_empty()) continue;
    GmmParams mle = mle_params(fit.partition, 1e-8);
    CHECK_THAT(hard_loglik(fit.partition, mle),
               Catch::Matchers::WithinAbs(pointwise_loglik(data, fit.partition, mle), 1e-7));
  }
}

TEST_CASE("mixture likelihood: hand value, duplicate collapse, pointwise route") {
  SECTION("equal duplicate components reduce to a single density") {
    // x = 1 under N(0, 1) however the unit mass is split between the two copies
    Matrix x(1, 1);
    x << 1.0;
    GmmParams p;
    for (double w : {0.25, 0.75}) {
      p.weights.push_back(w);
      p.means.push_back(Vector::Zero(1));
      p.covariances.push_back(Matrix::Identity(1, 1));
      p.factors.push_back(cholesky(p.covariances.back(), 0.0));
    }
    CHECK_THAT(mixture_loglik(x, p),
               Catch::Matchers::WithinAbs(-0.5 * kLog2Pi - 0.5, 1e-14));
  }

  SECTION("agrees with the extended-precision pointwise route") {
    SplitRng rng(67);
    DataSet data = gen_data1(1, rng).data;
    for (int l = 2; l <= 4; ++l) {
      SplitRng seed_rng = SplitRng::derive(9, static_cast<std::uint64_t>(l), 0);
      auto fit =
          kmeans(data, centroids_from_rows(data, kmeanspp_init(data, l, seed_rng)), 100, 1e-8);
      if (fit.partition.has_empty()) continue;
      GmmParams mle = mle_params(fit.partition, 1e-8);
      const double batched = mixture_loglik(data.x, mle);
      CHECK_THAT(batched, Catch::Matchers::WithinAbs(pointwise_mixture(data, mle), 1e-7));
      // summing over all components can only raise the per-point density
      CHECK(batched >= hard_loglik(fit.partition, mle) - 1e-9);
    }
  }

  SECTION("rejects inconsistent inputs") {
    TwoPointFixture fx;
    Matrix wide(2, 2);
    wide.setZero();
    CHECK_THROWS_AS(mixture_loglik(wide, fx.mle), DimMismatch);
    CHECK_THROWS_AS(mixture_loglik(Matrix(0, 1), fx.mle), EmptySubset);
    GmmParams bad = fx.mle;
    bad.weights[0] = 0.5;
    CHECK_THROWS_AS(mixture_loglik(fx.data.x, bad), InvalidArgument);
  }
}

TEST_CASE("loglik_cluster input validation") {
  TwoPointFixture fx;
  CHECK_THROWS_AS(
      loglik_cluster(0, fx.part.means[0], fx.part.scatters[0], fx.mle.means[0], fx.mle.factors[0], 2),
      InvalidCluster);
  CHECK_THROWS_AS(
      loglik_cluster(3, fx.part.means[0], fx.part.scatters[0], fx.mle.means[0], fx.mle.factors[0], 2),
      InvalidArgument);
}

TEST_CASE("the fidelity value is shared bit for bit across criteria with one model") {
  SplitRng rng(47);
  DataSet data = gen_data1(2, rng).data;
  for (int l = 1; l <= 5; ++l) {
    SplitRng seed_rng = SplitRng::derive(21, static_cast<std::uint64_t>(l), 0);
    auto fit = kmeans(data, centroids_from_rows(data, kmeanspp_init(data, l, seed_rng)), 100, 1e-8);
    if (fit.partition.has_empty()) continue;
    GmmParams mle = mle_params(fit.partition, 1e-8);
    auto n = bic_n(fit.partition, mle);
    auto o = bic_o(fit.partition, mle);
    auto g = bic_g(fit.partition, mle);
    REQUIRE(n.valid);
    CHECK(n.data_fidelity == o.data_fidelity);  // exact, same evaluation
    CHECK(n.data_fidelity == g.data_fidelity);
    auto os = bic_os(fit.partition);
    auto ns = bic_ns(fit.partition);
    REQUIRE(os.valid);
    CHECK(os.data_fidelity == 2.0 * ns.data_fidelity);
    // rebuilt from the stored terms, the totals differ by penalty bookkeeping alone
    double fit_terms = 0.0;
    for (int m = 0; m < l; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      fit_terms += n.nm_log_nm[mi] - 0.5 * fit.partition.counts[mi] * n.log_det_sigma[mi];
    }
    CHECK_THAT(n.total - (fit_terms - 0.5 * o.penalty),
               Catch::Matchers::WithinAbs(0.5 * (o.penalty - n.penalty), 1e-9));
  }
}

TEST_CASE("score fields reconstruct the totals") {
  SplitRng rng(53);
  DataSet data = gen_data1(1, rng).data;
  SplitRng seed_rng(3);
  auto fit = kmeans(data, centroids_from_rows(data, kmeanspp_init(data, 3, seed_rng)), 100, 1e-8);
  REQUIRE_FALSE(fit.partition.has_empty());
  GmmParams mle = mle_params(fit.partition, 1e-8);
  const ModelDims dims{2};

  // per-cluster fit terms rebuilt exactly as the score assembles them
  auto n = bic_n(fit.partition, mle);
  double fit_terms = 0.0;
  for (int m = 0; m < 3; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    fit_terms += n.nm_log_nm[mi] - 0.5 * fit.partition.counts[mi] * n.log_det_sigma[mi];
  }
  CHECK(n.total == fit_terms - 0.5 * n.penalty);

  // the stored per-cluster terms carry the hard likelihood up to constants:
  // sum N_m log N_m - sum (N_m/2) log|S_m| = hard + N log N + (N r / 2)(log 2pi + 1)
  const double nn = data.n();
  CHECK_THAT(fit_terms - nn * std::log(nn) - 0.5 * nn * dims.r * (kLog2Pi + 1.0),
             Catch::Matchers::WithinAbs(hard_loglik(fit.partition, mle), 1e-8));

  auto o = bic_o(fit.partition, mle);
  CHECK(o.total == 2.0 * o.data_fidelity - o.penalty);

  auto os = bic_os(fit.partition);
  CHECK(os.total == os.data_fidelity - os.penalty);

  auto ns = bic_ns(fit.partition);
  CHECK(ns.total == ns.data_fidelity - 0.5 * ns.penalty);

  auto g = bic_g(fit.partition, mle);
  CHECK(g.total == g.data_fidelity - 0.5 * g.penalty);

  // a log prior shifts the exact-information total additively
  auto g_prior = bic_g(fit.partition, mle, -3.25);
  CHECK_THAT(g_prior.total, Catch::Matchers::WithinAbs(g.total - 3.25, 1e-12));

  // closed-form penalties agree with the score fields
  std::vector<double> counts;
  for (int c : fit.partition.counts) counts.push_back(c);
  CHECK_THAT(penalty_of(Criterion::kBicN, counts, data.n(), dims.r),
             Catch::Matchers::WithinRel(n.penalty, 1e-12));
  CHECK_THAT(penalty_of(Criterion::kBicO, counts, data.n(), dims.r),
             Catch::Matchers::WithinRel(o.penalty, 1e-12));
  CHECK_THAT(penalty_of(Criterion::kBicOs, counts, data.n(), dims.r),
             Catch::Matchers::WithinRel(os.penalty, 1e-12));
  CHECK_THAT(penalty_of(Criterion::kBicNs, counts, data.n(), dims.r),
             Catch::Matchers::WithinRel(ns.penalty, 1e-12));
}

TEST_CASE("penalty strengths on the benchmark sizes order as expected") {
  // sizes 50/100/200 in two dimensions: per-cluster penalty sits between the
  // spherical and the classic one
  const double counts[] = {50.0, 100.0, 200.0};
  const double n = 350.0;
  const double eta_n = penalty_of(Criterion::kBicN, counts, n, 2);
  const double eta_o = penalty_of(Criterion::kBicO, counts, n, 2);
  const double eta_os = penalty_of(Criterion::kBicOs, counts, n, 2);
  CHECK_THAT(eta_n, Catch::Matchers::WithinAbs(69.0776, 1e-3));
  CHECK_THAT(eta_o, Catch::Matchers::WithinAbs(87.8690, 1e-3));
  CHECK_THAT(eta_os, Catch::Matchers::WithinAbs(41.0055, 1e-3));
  CHECK(eta_os < eta_n);
  CHECK(eta_n < eta_o);
}

TEST_CASE("balanced-size penalty gap identity") {
  // with sizes N/l each: classic minus per-cluster penalty = q l log l
  for (double n : {1e2, 1e4}) {
    for (int l = 2; l <= 10; ++l) {
      std::vector<double> counts(static_cast<std::size_t>(l), n / l);
      const int r = 2;
      const double gap = penalty_of(Criterion::kBicO, counts, n, r) -
                         penalty_of(Criterion::kBicN, counts, n, r);
      const double expected = ModelDims{r}.q() * l * std::log(static_cast<double>(l));
      CHECK_THAT(gap, Catch::Matchers::WithinAbs(expected, 1e-9));
    }
  }
}

TEST_CASE("penalty_of rejects what it cannot compute") {
  const double counts[] = {10.0, 20.0};
  CHECK_THROWS_AS(penalty_of(Criterion::kBicG, counts, 30.0, 2), UnknownCriterion);
  const double bad[] = {10.0, 0.0};
  CHECK_THROWS_AS(penalty_of(Criterion::kBicN, bad, 10.0, 2), InvalidCluster);
  CHECK_THROWS_AS(penalty_of(Criterion::kBicN, std::span<const double>{}, 10.0, 2),
                  InvalidArgument);
}

TEST_CASE("exact information matrix has the advertised block structure") {
  SplitRng rng(59);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix a(2, 2);
    a << 1.5 + rng.next_unit(), 0.3, 0.3, 0.8 + rng.next_unit();
    SpdFactor f = cholesky(a, 0.0);
    const int count = 50;
    auto [j, log_det] = fim_gaussian(count, f);
    REQUIRE(j.rows() == 5);

    Matrix inv = a.inverse();
    CHECK((j.topLeftCorner(2, 2) - count * inv).cwiseAbs().maxCoeff() < 1e-10);
    Matrix d = duplication_matrix(2);
    Matrix bottom = 0.5 * count * (d.transpose() * kron(inv, inv) * d);
    CHECK((j.bottomRightCorner(3, 3) - bottom).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(j.topRightCorner(2, 3).cwiseAbs().maxCoeff() == 0.0);

    // determinant consistency through an independent factorization
    Eigen::LLT<Matrix> llt(j);
    REQUIRE(llt.info() == Eigen::Success);
    Matrix lower = llt.matrixL();
    CHECK_THAT(log_det,
               Catch::Matchers::WithinAbs(2.0 * lower.diagonal().array().log().sum(), 1e-9));
  }
  CHECK_THROWS_AS(fim_gaussian(0, cholesky(Matrix::Identity(2, 2))), InvalidCluster);
}

TEST_CASE("exact information matrix matches a finite-difference Hessian") {
  SplitRng rng(61);
  for (int r : {1, 2}) {
    for (int count : {50, 500}) {
      Matrix sigma_true = Matrix::Identity(r, r);
      if (r == 2) sigma_true << 1.2, 0.4, 0.4, 0.9;
      Vector mu_true = Vector::Constant(r, 1.0);
      Matrix x = sample_mvn(count, mu_true, sigma_true, rng);

      DataSet data = make_dataset(x);
      HardPartition part =
          partition_from_labels(data, std::vector<int>(static_cast<std::size_t>(count), 0), 1);
      Vector mean = part.means[0];
      Matrix cov = part.scatters[0] / count;

      Matrix h = numerical_hessian(x, pack_theta(mean, cov));
      Matrix j = fim_gaussian(count, cholesky(cov, 0.0)).first;

      const double rel = (j + h).norm() / j.norm();  // information = -Hessian
      INFO("r=" << r << " count=" << count << " rel=" << rel);
      CHECK(rel < 1e-4);
    }
  }
}

TEST_CASE("criteria mark degenerate partitions invalid instead of scoring them") {
  Matrix x(4, 1);
  x << 0, 1, 2, 3;
  DataSet data = make_dataset(x);
  HardPartition with_empty = partition_from_labels(data, {0, 0, 1, 1}, 3);
  REQUIRE(with_empty.has_empty());

  GmmParams dummy;  // never touched on the invalid path
  auto n = bic_n(with_empty, dummy);
  CHECK_FALSE(n.valid);
  CHECK(n.reason == "empty cluster");
  CHECK(n.total == -std::numeric_limits<double>::infinity());
  CHECK_FALSE(bic_os(with_empty).valid);

  Matrix same(3, 1);
  same << 5, 5, 5;  // zero pooled variance
  DataSet flat = make_dataset(same);
  HardPartition p = partition_from_labels(flat, {0, 0, 0}, 1);
  auto os = bic_os(p);
  CHECK_FALSE(os.valid);
  CHECK_THAT(os.reason, Catch::Matchers::ContainsSubstring("variance"));
}

TEST_CASE("mle_params reproduces hand statistics and rejects empty clusters") {
  Matrix x(4, 1);
  x << 0.0, 1.0, 9.0, 11.0;
  DataSet data = make_dataset(x);
  HardPartition p = partition_from_labels(data, {0, 0, 1, 1}, 2);
  GmmParams mle = mle_params(p, 0.0);
  CHECK(mle.weights == std::vector<double>{0.5, 0.5});
  CHECK(mle.means[0](0) == 0.5);
  CHECK(mle.means[1](0) == 10.0);
  CHECK(mle.covariances[0](0, 0) == 0.25);
  CHECK(mle.covariances[1](0, 0) == 1.0);

  HardPartition bad = partition_from_labels(data, {0, 0, 0, 0}, 2);
  CHECK_THROWS_AS(mle_params(bad, 0.0), EmptySubset);
}
