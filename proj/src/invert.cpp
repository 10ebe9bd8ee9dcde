#include "patk/invert.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "patk/error.hpp"
#include "patk/hash.hpp"

namespace patk {
namespace {

constexpr int kResyncInterval = 50;

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

double sq_residual(std::span<const float> ax, std::span<const float> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = static_cast<double>(ax[i]) - y[i];
    s += d * d;
  }
  return s;
}

double penalty_value(const FistaConfig& cfg, std::span<const float> x) {
  const double a2 = cfg.alpha * cfg.alpha;
  if (a2 == 0.0) return 0.0;
  const double n2 = dot(x, x);
  return cfg.penalty == Penalty::l2_squared ? a2 * n2 : a2 * std::sqrt(n2);
}

// In place: projection (optional) then the proximal map of penalty / L.
void prox(const FistaConfig& cfg, double lipschitz, std::span<float> z) {
  if (cfg.nonnegative) {
    for (float& v : z) v = std::max(v, 0.0f);
  }
  const double a2 = cfg.alpha * cfg.alpha;
  if (a2 == 0.0) return;
  double scale = 1.0;
  if (cfg.penalty == Penalty::l2_squared) {
    scale = lipschitz / (lipschitz + 2.0 * a2);
  } else {
    const double n = norm(z);
    scale = n > 0.0 ? std::max(0.0, 1.0 - a2 / (lipschitz * n)) : 0.0;
  }
  for (float& v : z) v = static_cast<float>(v * scale);
}

}  // namespace

std::string to_string(Penalty p) { return p == Penalty::l2_squared ? "l2_squared" : "l2_norm"; }

Penalty parse_penalty(const std::string& s) {
  if (s == "l2_squared") return Penalty::l2_squared;
  if (s == "l2_norm") return Penalty::l2_norm;
  throw InvalidArgument("unknown penalty '" + s + "' (expected l2_squared or l2_norm)");
}

void validate(const FistaConfig& cfg) {
  std::vector<std::string> bad;
  if (!(cfg.alpha >= 0.0)) bad.push_back("alpha must be >= 0");
  if (cfg.max_iters < 1) bad.push_back("max_iters must be >= 1");
  if (!(cfg.rel_tol > 0.0)) bad.push_back("rel_tol must be > 0");
  if (cfg.lipschitz <= 0.0 && cfg.power_iters < 5) bad.push_back("power_iters must be >= 5");
  if (!bad.empty()) {
    std::string msg = "invalid FISTA config:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw InvalidArgument(msg);
  }
}

double estimate_lipschitz(const LinearOperator& op, int iters, std::uint64_t seed) {
  if (iters < 5) throw InvalidArgument("power iteration needs at least 5 iterations");
  const std::size_t n = op.domain_size();
  std::vector<float> v(n);
  std::vector<float> av(op.range_size());
  std::vector<float> w(n);
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> g(0.0, 1.0);
  for (float& x : v) x = static_cast<float>(g(rng));
  double nv = norm(v);
  for (float& x : v) x = static_cast<float>(x / nv);

  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    op.apply(v, av);
    op.apply_adjoint(av, w);
    lambda = dot(v, w);
    const double nw = norm(w);
    if (!(nw > 0.0) || !std::isfinite(nw)) {
      throw InvalidArgument("operator is degenerate: A^T A maps the probe vector to zero");
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(w[i] / nw);
  }
  return 1.05 * lambda;
}

std::vector<float> fista_solve(const LinearOperator& op, std::span<const float> y,
                               const FistaConfig& cfg, SolveReport& report,
                               std::span<const float> x0) {
  validate(cfg);
  const std::size_t n = op.domain_size();
  const std::size_t m = op.range_size();
  if (y.size() != m) throw InvalidArgument("measurement size does not match the operator range");
  if (!x0.empty() && x0.size() != n) throw InvalidArgument("initial guess has the wrong size");

  report = SolveReport{};
  const double lip = cfg.lipschitz > 0.0 ? cfg.lipschitz
                                         : estimate_lipschitz(op, cfg.power_iters, cfg.seed);
  report.lipschitz = lip;
  const auto step = static_cast<float>(1.0 / lip);

  std::vector<float> x(n, 0.0f);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), x.begin());
  std::vector<float> ax(m);
  op.apply(x, ax);
  std::vector<float> yk = x;
  std::vector<float> ayk = ax;
  std::vector<float> z(n);
  std::vector<float> d(n);
  std::vector<float> ad(m);
  std::vector<float> resid(m);
  std::vector<float> grad(n);

  double f = 0.5 * sq_residual(ax, y) + penalty_value(cfg, x);
  if (!std::isfinite(f)) throw DivergenceError("initial objective is not finite");
  report.objective.push_back(f);
  double t = 1.0;
  bool momentum_fresh = true;  // y_k == x_k
  const double a2 = cfg.alpha * cfg.alpha;
  double sq_x = dot(x, x);
  int since_resync = 0;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    report.iterations = it;
    for (std::size_t i = 0; i < m; ++i) resid[i] = ayk[i] - y[i];
    op.apply_adjoint(resid, grad);
    for (std::size_t i = 0; i < n; ++i) z[i] = yk[i] - step * grad[i];
    prox(cfg, lip, z);

    // The objective change is evaluated from the step d = z - x rather than
    // by differencing two objectives, so it keeps its sign near convergence.
    for (std::size_t i = 0; i < n; ++i) d[i] = z[i] - x[i];
    op.apply(d, ad);
    double fit = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = static_cast<double>(ax[i]) - y[i];
      fit += static_cast<double>(ad[i]) * (r + 0.5 * ad[i]);
    }
    const double sq_z = dot(z, z);
    double pen = 0.0;
    if (a2 > 0.0) {
      if (cfg.penalty == Penalty::l2_squared) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(d[i]) * (x[i] + z[i]);
        pen = a2 * s;
      } else {
        const double nz = std::sqrt(sq_z);
        const double nx = std::sqrt(sq_x);
        pen = nz + nx > 0.0 ? a2 * (sq_z - sq_x) / (nz + nx) : 0.0;
      }
    }
    const double delta = fit + pen;
    if (!std::isfinite(delta)) {
      throw DivergenceError("objective became non-finite at iteration " + std::to_string(it) +
                            "; the Lipschitz constant is probably too small");
    }

    if (delta > 0.0) {
      // A plain proximal-gradient step from x that fails to descend means we
      // are at the floating-point floor.
      if (momentum_fresh) break;
      yk = x;
      ayk = ax;
      t = 1.0;
      momentum_fresh = true;
      ++report.restarts;
      continue;
    }

    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const auto beta = static_cast<float>((t - 1.0) / t_new);
    x.swap(z);
    sq_x = sq_z;
    if (++since_resync == kResyncInterval) {
      op.apply(x, ax);
      since_resync = 0;
    } else {
      for (std::size_t i = 0; i < m; ++i) ax[i] += ad[i];
    }
    for (std::size_t i = 0; i < n; ++i) yk[i] = x[i] + beta * d[i];
    for (std::size_t i = 0; i < m; ++i) ayk[i] = ax[i] + beta * ad[i];
    t = t_new;
    momentum_fresh = beta == 0.0f;

    f += delta;
    report.objective.push_back(f);
    if (cfg.snapshot_every > 0 && cfg.on_snapshot && it % cfg.snapshot_every == 0) {
      cfg.on_snapshot(it, x);
    }
    if (-delta <= cfg.rel_tol * std::max(std::abs(f), 1e-300) && it > 1) break;
  }

  op.apply(x, ax);
  const double ny = norm(y);
  report.relative_residual = ny > 0.0 ? std::sqrt(sq_residual(ax, y)) / ny : 0.0;
  return x;
}

Deconvolution fista_solve(const RFData& rf, const PropagationOperator& op, const FistaConfig& cfg) {
  if (rf.n_elements != static_cast<std::size_t>(op.probe().n_elements) ||
      rf.n_samples != op.probe().n_samples) {
    throw InvalidArgument("RF record does not match the operator's measurement geometry");
  }
  Deconvolution out;
  auto x = fista_solve(op, rf.samples, cfg, out.report);
  out.image = Image(op.grid(), std::move(x));
  return out;
}

std::string to_json(const SolveReport& report) {
  nlohmann::json j;
  j["iterations"] = report.iterations;
  j["restarts"] = report.restarts;
  j["objective"] = report.objective;
  j["relative_residual"] = report.relative_residual;
  j["lipschitz"] = report.lipschitz;
  return j.dump(2) + "\n";
}

}  // namespace patk
