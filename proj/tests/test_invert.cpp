#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "patk/acoustics.hpp"
#include "patk/error.hpp"
#include "patk/invert.hpp"
#include "patk/phantom.hpp"

using namespace patk;

namespace {

DenseOperator random_dense(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  return DenseOperator(rows, cols, oracle::normal_vector(rows * cols, seed));
}

Eigen::MatrixXd to_eigen(const DenseOperator& a, std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd m(rows, cols);
  std::vector<float> e(cols), col(rows);
  for (std::size_t j = 0; j < cols; ++j) {
    std::fill(e.begin(), e.end(), 0.0f);
    e[j] = 1.0f;
    a.apply(e, col);
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = col[i];
  }
  return m;
}

double rel_diff(const std::vector<float>& x, const Eigen::VectorXd& ref) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < ref.size(); ++i) {
    num += (x[i] - ref[i]) * (x[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return std::sqrt(num / den);
}

Eigen::VectorXd to_vec(const std::vector<float>& v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

}  // namespace

TEST(Lipschitz, DiagonalOperator) {
  const DiagonalOperator d({1.0f, 2.0f, 3.0f});
  EXPECT_NEAR(estimate_lipschitz(d, 100, 1) / (9.0 * 1.05), 1.0, 0.01);
  const IdentityOperator id(50);
  EXPECT_NEAR(estimate_lipschitz(id, 10, 1), 1.05, 1e-6);
}

TEST(Lipschitz, SeedInvariant) {
  const auto a = random_dense(64, 32, 3);
  const Eigen::MatrixXd m = to_eigen(a, 64, 32);
  const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.transpose() * m)
                         .eigenvalues()
                         .maxCoeff();
  double lo = 1e300, hi = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const double l = estimate_lipschitz(a, 100, s);
    lo = std::min(lo, l);
    hi = std::max(hi, l);
    EXPECT_LE(l, 1.05 * top * (1.0 + 1e-5));
  }
  EXPECT_LE(hi / lo, 1.02);
}

TEST(Fista, IdentityWithoutRegularizationReturnsData) {
  const IdentityOperator id(64);
  const auto y = oracle::normal_vector(64, 8);
  FistaConfig cfg;
  SolveReport rep;
  const auto x = fista_solve(id, y, cfg, rep);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num += (x[i] - y[i]) * (x[i] - y[i]);
    den += y[i] * y[i];
  }
  EXPECT_LE(std::sqrt(num / den), cfg.rel_tol);
}

TEST(Fista, MatchesTikhonovClosedForm) {
  const std::size_t m = 24, n = 16;
  const auto a = random_dense(m, n, 11);
  const auto y = oracle::normal_vector(m, 12);
  const Eigen::MatrixXd am = to_eigen(a, m, n);
  const double alpha = 0.3;
  const Eigen::VectorXd ref =
      (am.transpose() * am + 2.0 * alpha * alpha * Eigen::MatrixXd::Identity(n, n))
          .ldlt()
          .solve(am.transpose() * to_vec(y));
  FistaConfig cfg;
  cfg.alpha = alpha;
  cfg.max_iters = 500;
  cfg.rel_tol = 1e-12;
  SolveReport rep;
  const auto x = fista_solve(a, y, cfg, rep);
  EXPECT_LE(rel_diff(x, ref), 1e-4);
  EXPECT_LE(rep.iterations, 500);
  for (std::size_t i = 1; i < rep.objective.size(); ++i) {
    EXPECT_LE(rep.objective[i], rep.objective[i - 1]);
  }
}

TEST(Fista, UnsquaredNormSatisfiesStationarity) {
  // Minimizer of 1/2 |Ax - y|^2 + a^2 |x| solves (A^T A + a^2/|x| I) x = A^T y.
  const std::size_t m = 24, n = 16;
  const auto a = random_dense(m, n, 21);
  const auto y = oracle::normal_vector(m, 22);
  const Eigen::MatrixXd am = to_eigen(a, m, n);
  FistaConfig cfg;
  cfg.alpha = 1.5;
  cfg.penalty = Penalty::l2_norm;
  cfg.max_iters = 2000;
  cfg.rel_tol = 1e-12;
  SolveReport rep;
  const auto x = fista_solve(a, y, cfg, rep);
  const double nx = to_vec(x).norm();
  ASSERT_GT(nx, 0.0);
  const Eigen::VectorXd ref =
      (am.transpose() * am + cfg.alpha * cfg.alpha / nx * Eigen::MatrixXd::Identity(n, n))
          .ldlt()
          .solve(am.transpose() * to_vec(y));
  EXPECT_LE(rel_diff(x, ref), 1e-3);
}

TEST(Fista, LinearInData) {
  const auto a = random_dense(24, 16, 31);
  auto y = oracle::normal_vector(24, 32);
  FistaConfig cfg;
  cfg.alpha = 0.5;
  cfg.max_iters = 1000;
  cfg.rel_tol = 1e-12;
  cfg.lipschitz = estimate_lipschitz(a, 50, 0);
  SolveReport rep;
  const auto x1 = fista_solve(a, y, cfg, rep);
  for (float& v : y) v *= 2.0f;
  const auto x2 = fista_solve(a, y, cfg, rep);
  for (std::size_t i = 0; i < x1.size(); ++i) EXPECT_NEAR(x2[i], 2.0f * x1[i], 1e-4 * (1 + std::abs(x1[i])));
}

TEST(Fista, StartingPointDoesNotMatter) {
  const auto a = random_dense(30, 20, 41);
  const auto y = oracle::normal_vector(30, 42);
  FistaConfig cfg;
  cfg.alpha = 0.4;
  cfg.max_iters = 1000;
  cfg.rel_tol = 1e-12;
  SolveReport rep;
  cfg.seed = 1;
  const auto xa = fista_solve(a, y, cfg, rep);
  cfg.seed = 2;
  const auto x0 = oracle::normal_vector(20, 43, 10.0);
  const auto xb = fista_solve(a, y, cfg, rep, x0);
  EXPECT_LE(rel_diff(xa, to_vec(xb)), 1e-3);
}

TEST(Fista, GradientMatchesCentralDifference) {
  // f(x) = 1/2 |Ax - y|^2 is quadratic, so the central difference along d is
  // exact up to rounding and compares directly with <A^T(Ax - y), d>.
  const Grid g = Grid::centered(12, 12, 1e-4, 0.0, 6e-3);
  const Medium med;
  ProbeConfig p;
  p.n_elements = 8;
  const PropagationOperator op(g, covering(p, g, med), med);
  auto f = [&](const std::vector<double>& x, const std::vector<float>& y) {
    std::vector<float> xf(x.begin(), x.end()), ax(op.range_size());
    op.apply(xf, ax);
    double s = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) s += 0.5 * (ax[i] - y[i]) * (ax[i] - y[i]);
    return s;
  };
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const auto xf = oracle::normal_vector(op.domain_size(), 50 + trial);
    const auto y = oracle::normal_vector(op.range_size(), 60 + trial);
    const auto d = oracle::normal_vector(op.domain_size(), 70 + trial);
    std::vector<float> ax(op.range_size()), grad(op.domain_size());
    op.apply(xf, ax);
    for (std::size_t i = 0; i < ax.size(); ++i) ax[i] -= y[i];
    op.apply_adjoint(ax, grad);
    const double analytic = oracle::dot(grad, d);
    const double h = 0.25;  // exactly representable
    std::vector<double> xp(xf.size()), xm(xf.size());
    for (std::size_t i = 0; i < xf.size(); ++i) {
      xp[i] = xf[i] + h * d[i];
      xm[i] = xf[i] - h * d[i];
    }
    const double fd = (f(xp, y) - f(xm, y)) / (2.0 * h);
    EXPECT_NEAR(fd / analytic, 1.0, 1e-4) << "trial " << trial;
  }
}

TEST(Fista, TraceNonIncreasingOnPhantomProblem) {
  BranchingConfig bc;
  bc.grid = Grid::centered(48, 48, 40e-6, 0.0, 8e-3);
  bc.width_max_px = 6.0;
  const Image obj = generate_branching_phantom(4, bc);
  const Medium med;
  ProbeConfig p;
  p.n_elements = 24;
  const PropagationOperator op(bc.grid, covering(p, bc.grid, med), med);
  FistaConfig cfg;
  cfg.alpha = 0.05;
  cfg.max_iters = 150;
  cfg.nonnegative = true;
  const Deconvolution d = fista_solve(op.apply(obj), op, cfg);
  ASSERT_GE(d.report.objective.size(), 2u);
  for (std::size_t i = 1; i < d.report.objective.size(); ++i) {
    EXPECT_LE(d.report.objective[i], d.report.objective[i - 1]) << i;
  }
  EXPECT_LT(d.report.objective.back(), 0.5 * d.report.objective.front());
  for (float v : d.image.pixels) EXPECT_GE(v, 0.0f);
}

TEST(Fista, SnapshotsFollowTheSchedule) {
  const auto a = random_dense(10, 6, 5);
  const auto y = oracle::normal_vector(10, 6);
  FistaConfig cfg;
  cfg.max_iters = 20;
  cfg.rel_tol = 1e-15;
  cfg.snapshot_every = 5;
  std::vector<int> seen;
  cfg.on_snapshot = [&](int it, std::span<const float> x) {
    EXPECT_EQ(x.size(), 6u);
    seen.push_back(it);
  };
  SolveReport rep;
  fista_solve(a, y, cfg, rep);
  ASSERT_FALSE(seen.empty());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i] % 5, 0);
    if (i > 0) {
      EXPECT_GT(seen[i], seen[i - 1]);
    }
  }
  EXPECT_LE(seen.back(), rep.iterations);
}

TEST(Fista, RejectsBadInputs) {
  const IdentityOperator id(4);
  SolveReport rep;
  FistaConfig cfg;
  std::vector<float> y{1, 2, std::numeric_limits<float>::quiet_NaN(), 4};
  EXPECT_THROW(fista_solve(id, y, cfg, rep), DivergenceError);
  y[2] = 3;
  cfg.alpha = -1.0;
  cfg.max_iters = 0;
  try {
    fista_solve(id, y, cfg, rep);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("alpha"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("max_iters"), std::string::npos);
  }
  EXPECT_THROW(parse_penalty("l1"), InvalidArgument);
}
