#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numclust/linalg.hpp>
#include <numclust/rng.hpp>

using namespace numclust;

namespace {

// cofactor-expansion determinant, independent of any factorization
double det_cofactor(const Matrix& m) {
  const long n = m.rows();
  if (n == 1) return m(0, 0);
  double det = 0.0;
  for (long j = 0; j < n; ++j) {
    Matrix minor(n - 1, n - 1);
    for (long r = 1; r < n; ++r) {
      long cc = 0;
      for (long c = 0; c < n; ++c) {
        if (c == j) continue;
        minor(r - 1, cc++) = m(r, c);
      }
    }
    det += ((j % 2 == 0) ? 1.0 : -1.0) * m(0, j) * det_cofactor(minor);
  }
  return det;
}

Matrix random_spd(int r, SplitRng& rng) {
  Matrix a(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) a(i, j) = rng.next_normal();
  return a * a.transpose() + Matrix::Identity(r, r);
}

// column-stacked lower triangle
Vector uniq_lower(const Matrix& s) {
  const long r = s.rows();
  Vector u(r * (r + 1) / 2);
  long k = 0;
  for (long j = 0; j < r; ++j)
    for (long i = j; i < r; ++i) u(k++) = s(i, j);
  return u;
}

Vector vec_colmajor(const Matrix& s) {
  Vector v(s.rows() * s.cols());
  long k = 0;
  for (long j = 0; j < s.cols(); ++j)
    for (long i = 0; i < s.rows(); ++i) v(k++) = s(i, j);
  return v;
}

}  // namespace

TEST_CASE("cholesky factors identity with zero ridge and zero log det") {
  auto f = cholesky(Matrix::Identity(3, 3));
  CHECK(f.ridge() == 0.0);
  CHECK(f.log_det() == 0.0);
  CHECK((f.lower() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cholesky log det matches cofactor determinant on random spd matrices") {
  SplitRng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const int r = 1 + static_cast<int>(rng.next_below(3));
    Matrix m = random_spd(r, rng);
    auto f = cholesky(m);
    REQUIRE(f.ridge() == 0.0);
    CHECK_THAT(f.log_det(), Catch::Matchers::WithinAbs(std::log(det_cofactor(m)), 1e-10));
  }
}

TEST_CASE("cholesky diag(4,9) has log det log 36") {
  Matrix m(2, 2);
  m << 4, 0, 0, 9;
  CHECK_THAT(cholesky(m).log_det(), Catch::Matchers::WithinAbs(std::log(36.0), 1e-14));
}

TEST_CASE("cholesky regularizes a singular matrix with the unit-scale ridge") {
  Matrix m(2, 2);
  m << 1, 1, 1, 1;  // rank 1, trace/r = 1
  auto f = cholesky(m, 1e-8);
  CHECK(f.ridge() == Catch::Approx(1e-8).epsilon(1e-12));
  Matrix rebuilt = f.lower() * f.lower().transpose();
  Matrix target = m + f.ridge() * Matrix::Identity(2, 2);
  CHECK((rebuilt - target).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cholesky escalates the ridge when the first rung is too small") {
  Matrix m(2, 2);
  m << -5e-8, 0, 0, 1;  // needs more than eps * trace/2 on the diagonal
  auto f = cholesky(m, 1e-8);
  const double scale = m.trace() / 2.0;
  CHECK(f.ridge() == Catch::Approx(100.0 * 1e-8 * scale).epsilon(1e-12));
}

TEST_CASE("cholesky gives up on a negative definite matrix") {
  CHECK_THROWS_AS(cholesky(-Matrix::Identity(2, 2), 1e-8), NotSpd);
}

TEST_CASE("cholesky strict mode rejects a singular matrix") {
  Matrix m(2, 2);
  m << 1, 1, 1, 1;
  CHECK_THROWS_AS(cholesky(m, 0.0), NotSpd);
}

TEST_CASE("cholesky rejects malformed input") {
  CHECK_THROWS_AS(cholesky(Matrix::Ones(2, 3)), DimMismatch);
  Matrix m(2, 2);
  m << 1, 0.5, 0.2, 1;  // clearly asymmetric
  CHECK_THROWS_AS(cholesky(m), InvalidArgument);
}

TEST_CASE("SpdFactor solves match explicit inverse") {
  SplitRng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int r = 2 + static_cast<int>(rng.next_below(3));
    Matrix m = random_spd(r, rng);
    auto f = cholesky(m);
    Matrix inv_oracle = m.inverse();

    Vector b(r);
    for (int i = 0; i < r; ++i) b(i) = rng.next_normal();
    CHECK((f.solve(b) - inv_oracle * b).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((f.inverse() - inv_oracle).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_THAT(f.quad_form(b), Catch::Matchers::WithinRel(b.dot(inv_oracle * b), 1e-10));
  }
}

TEST_CASE("batched mahalanobis agrees with per-row quadratic forms") {
  SplitRng rng(11);
  Matrix m = random_spd(3, rng);
  auto f = cholesky(m);
  Matrix x(5, 3);
  for (long i = 0; i < x.size(); ++i) x(i / 3, i % 3) = rng.next_normal();
  Vector mu(3);
  mu << 0.5, -1.0, 2.0;
  Vector batch = f.mahalanobis_sq(x, mu);
  for (long i = 0; i < 5; ++i) {
    Vector d = x.row(i).transpose() - mu;
    CHECK_THAT(batch(i), Catch::Matchers::WithinRel(f.quad_form(d), 1e-12));
  }
}

TEST_CASE("mvn_logpdf standard normal values") {
  const double log2pi = std::log(2.0 * std::acos(-1.0));
  auto f1 = cholesky(Matrix::Identity(1, 1));
  Vector zero1 = Vector::Zero(1);
  CHECK_THAT(mvn_logpdf(zero1, zero1, f1), Catch::Matchers::WithinAbs(-0.5 * log2pi, 1e-14));

  auto f2 = cholesky(Matrix::Identity(2, 2));
  Vector x(2), mu2 = Vector::Zero(2);
  x << 1, 2;
  CHECK_THAT(mvn_logpdf(x, mu2, f2), Catch::Matchers::WithinAbs(-log2pi - 2.5, 1e-14));
}

TEST_CASE("mvn_logpdf matches the explicit-inverse density formula") {
  SplitRng rng(13);
  const double log2pi = std::log(2.0 * std::acos(-1.0));
  for (int trial = 0; trial < 20; ++trial) {
    const int r = 1 + static_cast<int>(rng.next_below(4));
    Matrix sigma = random_spd(r, rng);
    Vector x(r), mu(r);
    for (int i = 0; i < r; ++i) {
      x(i) = rng.next_normal();
      mu(i) = rng.next_normal();
    }
    Vector d = x - mu;
    const double oracle = -0.5 * (r * log2pi + std::log(det_cofactor(sigma)) +
                                  d.dot(sigma.inverse() * d));
    CHECK_THAT(mvn_logpdf(x, mu, cholesky(sigma)), Catch::Matchers::WithinAbs(oracle, 1e-9));
  }
}

TEST_CASE("mvn_logpdf rejects mismatched sizes") {
  auto f = cholesky(Matrix::Identity(2, 2));
  CHECK_THROWS_AS(mvn_logpdf(Vector::Zero(3), Vector::Zero(3), f), DimMismatch);
  CHECK_THROWS_AS(mvn_logpdf(Vector::Zero(2), Vector::Zero(3), f), DimMismatch);
}

TEST_CASE("scatter_matrix equals the brute-force outer product sum") {
  SplitRng rng(17);
  Matrix x(6, 2);
  for (long i = 0; i < x.size(); ++i) x(i / 2, i % 2) = rng.next_normal();
  Vector c(2);
  c << 0.3, -0.7;
  Matrix oracle = Matrix::Zero(2, 2);
  for (long i = 0; i < x.rows(); ++i) {
    Vector d = x.row(i).transpose() - c;
    oracle += d * d.transpose();
  }
  CHECK((scatter_matrix(x, c) - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scatter_matrix rejects empty and mismatched input") {
  CHECK_THROWS_AS(scatter_matrix(Matrix(0, 2), Vector::Zero(2)), EmptySubset);
  CHECK_THROWS_AS(scatter_matrix(Matrix::Ones(3, 2), Vector::Zero(3)), DimMismatch);
}

TEST_CASE("duplication matrix reproduces vec from the packed lower triangle") {
  SplitRng rng(19);
  for (int r = 1; r <= 4; ++r) {
    Matrix d = duplication_matrix(r);
    REQUIRE(d.rows() == r * r);
    REQUIRE(d.cols() == r * (r + 1) / 2);
    // every vec entry maps from exactly one packed entry
    for (long i = 0; i < d.rows(); ++i) CHECK(d.row(i).sum() == 1.0);

    Matrix s(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j <= i; ++j) {
        s(i, j) = rng.next_normal();
        s(j, i) = s(i, j);
      }
    CHECK((vec_colmajor(s) - d * uniq_lower(s)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(duplication_matrix(0), InvalidArgument);
}

TEST_CASE("kron matches the elementwise definition and the mixed product rule") {
  SplitRng rng(23);
  Matrix a(2, 3), b(3, 2);
  for (long i = 0; i < a.size(); ++i) a(i / 3, i % 3) = rng.next_normal();
  for (long i = 0; i < b.size(); ++i) b(i / 2, i % 2) = rng.next_normal();
  Matrix k = kron(a, b);
  REQUIRE(k.rows() == 6);
  REQUIRE(k.cols() == 6);
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      for (long p = 0; p < b.rows(); ++p)
        for (long q = 0; q < b.cols(); ++q)
          CHECK(k(i * b.rows() + p, j * b.cols() + q) == a(i, j) * b(p, q));

  Matrix c(3, 2), d(2, 2);
  for (long i = 0; i < c.size(); ++i) c(i / 2, i % 2) = rng.next_normal();
  for (long i = 0; i < d.size(); ++i) d(i / 2, i % 2) = rng.next_normal();
  Matrix lhs = kron(a, b) * kron(c, d);
  Matrix rhs = kron(a * c, b * d);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("packed quadratic form determinant identity") {
  // det(D' (A kron A) D) = 2^(r(r-1)/2) det(A)^(r+1) for spd A; the exact-information
  // scoring path leans on this structure, so pin it against cholesky determinants
  SplitRng rng(29);
  for (int r = 2; r <= 3; ++r) {
    for (int trial = 0; trial < 10; ++trial) {
      Matrix a = random_spd(r, rng);
      Matrix d = duplication_matrix(r);
      Matrix packed = d.transpose() * kron(a, a) * d;
      packed = 0.5 * (packed + packed.transpose());
      const double lhs = cholesky(packed, 0.0).log_det();
      const double rhs = 0.5 * r * (r - 1) * std::log(2.0) + (r + 1) * cholesky(a, 0.0).log_det();
      CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-8));
    }
  }
}
