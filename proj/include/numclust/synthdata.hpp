#pragma once

// Synthetic Gaussian mixture generators used by the benchmark harness. Draw order is
// pinned (components in declaration order, one point at a time, dim normals per
// point) so a seed fully determines the sample.

#include <cstdint>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"

namespace numclust {

struct MixtureComponent {
  int count = 0;
  Vector mean;
  Matrix covariance;
};

struct MixtureSpec {
  std::vector<MixtureComponent> components;

  int k() const { return static_cast<int>(components.size()); }
  int dim() const { return components.empty() ? 0 : static_cast<int>(components[0].mean.size()); }
  int total() const {
    int t = 0;
    for (const auto& c : components) t += c.count;
    return t;
  }

  void validate() const {
    if (components.empty()) throw InvalidArgument("MixtureSpec: no components");
    for (const auto& c : components) {
      if (c.count < 1) throw InvalidArgument("MixtureSpec: component count must be >= 1");
      if (c.mean.size() != dim() || c.covariance.rows() != dim() || c.covariance.cols() != dim())
        throw DimMismatch("MixtureSpec: inconsistent dimensions");
    }
  }
};

struct LabeledDraw {
  DataSet data;  // labels hold the 1-based generating component
  int true_k = 0;
};

// n rows from N(mu, sigma). sigma must be strictly positive definite.
inline Matrix sample_mvn(int n, const Vector& mu, const Matrix& sigma, SplitRng& rng) {
  if (n < 1) throw InvalidArgument("sample_mvn: n must be >= 1");
  SpdFactor f = cholesky(sigma, 0.0);
  if (mu.size() != f.dim()) throw DimMismatch("sample_mvn: mean/covariance size mismatch");
  const long r = mu.size();
  Matrix out(n, r);
  Vector z(r);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < r; ++j) z(j) = rng.next_normal();
    out.row(i) = (mu + f.lower() * z).transpose();
  }
  return out;
}

inline LabeledDraw draw_mixture(const MixtureSpec& spec, SplitRng& rng) {
  spec.validate();
  Matrix x(spec.total(), spec.dim());
  std::vector<int> labels(static_cast<std::size_t>(spec.total()));
  long row = 0;
  for (std::size_t m = 0; m < spec.components.size(); ++m) {
    const auto& c = spec.components[m];
    x.middleRows(row, c.count) = sample_mvn(c.count, c.mean, c.covariance, rng);
    for (int i = 0; i < c.count; ++i) labels[static_cast<std::size_t>(row + i)] = static_cast<int>(m) + 1;
    row += c.count;
  }
  return LabeledDraw{make_dataset(std::move(x), std::move(labels)), spec.k()};
}

// Three elongated, partially overlapping 2-d clusters; gamma scales the sizes
// (50, 100, 200) without moving the geometry.
inline MixtureSpec data1_spec(int gamma) {
  if (gamma < 1) throw InvalidArgument("data1_spec: gamma must be >= 1");
  MixtureSpec s;
  auto add = [&s](int count, double m1, double m2, double c11, double c12, double c22) {
    MixtureComponent c;
    c.count = count;
    c.mean = Vector(2);
    c.mean << m1, m2;
    c.covariance = Matrix(2, 2);
    c.covariance << c11, c12, c12, c22;
    s.components.push_back(std::move(c));
  };
  add(50 * gamma, 2.0, 3.5, 0.2, 0.1, 0.75);
  add(100 * gamma, 6.0, 2.7, 0.5, 0.25, 0.5);
  add(200 * gamma, 9.0, 4.0, 1.0, 0.5, 1.0);
  return s;
}

// Ten small 2-d clusters in a tight arrangement, n_k points each.
inline MixtureSpec data2_spec(int n_k) {
  if (n_k < 1) throw InvalidArgument("data2_spec: n_k must be >= 1");
  MixtureSpec s;
  auto add = [&s, n_k](double m1, double m2, double c11, double c12, double c22) {
    MixtureComponent c;
    c.count = n_k;
    c.mean = Vector(2);
    c.mean << m1, m2;
    c.covariance = Matrix(2, 2);
    c.covariance << c11, c12, c12, c22;
    s.components.push_back(std::move(c));
  };
  add(0.0, 0.0, 0.25, -0.15, 0.15);
  add(3.0, -2.5, 0.5, 0.0, 0.15);
  add(3.0, 1.0, 0.1, 0.0, 0.1);
  add(-1.0, -3.0, 0.1, 0.0, 0.1);
  add(-4.0, 0.0, 0.1, 0.0, 0.1);
  add(-1.0, 1.0, 0.1, 0.0, 0.1);
  add(-3.0, 3.0, 0.1, 0.0, 0.1);
  add(2.5, 4.0, 0.1, 0.0, 0.1);
  add(-3.5, -2.5, 0.1, 0.0, 0.1);
  add(0.0, 3.0, 0.1, 0.0, 0.1);
  return s;
}

inline LabeledDraw gen_data1(int gamma, SplitRng& rng) { return draw_mixture(data1_spec(gamma), rng); }
inline LabeledDraw gen_data2(int n_k, SplitRng& rng) { return draw_mixture(data2_spec(n_k), rng); }

}  // namespace numclust
