#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "patk/acoustics.hpp"
#include "patk/image.hpp"
#include "patk/linear_operator.hpp"

namespace patk {

enum class Penalty {
  l2_squared,  ///< alpha^2 ||x||^2
  l2_norm,     ///< alpha^2 ||x||
};

std::string to_string(Penalty p);
Penalty parse_penalty(const std::string& s);

struct FistaConfig {
  double alpha = 0.0;
  int max_iters = 200;
  double rel_tol = 1e-6;  ///< stop when the relative objective decrease falls below this
  Penalty penalty = Penalty::l2_squared;
  bool nonnegative = false;
  double lipschitz = 0.0;  ///< <= 0: estimate by power iteration
  int power_iters = 30;
  std::uint64_t seed = 0;
  int snapshot_every = 0;  ///< > 0: call on_snapshot every N iterations
  std::function<void(int, std::span<const float>)> on_snapshot;
};

void validate(const FistaConfig& cfg);

struct SolveReport {
  int iterations = 0;
  int restarts = 0;
  std::vector<double> objective;  ///< objective of each accepted iterate, starting at x0
  double relative_residual = 0.0; ///< ||A x - y|| / ||y||
  double lipschitz = 0.0;
};

/// Largest eigenvalue of A^T A by power iteration from a seeded random start,
/// times a 1.05 safety factor.
double estimate_lipschitz(const LinearOperator& op, int iters, std::uint64_t seed);

/// Minimizes 1/2 ||A x - y||^2 + penalty(x) with FISTA. A step that increases
/// the objective is rejected and momentum restarts from the last accepted
/// iterate, so the objective trace never increases.
std::vector<float> fista_solve(const LinearOperator& op, std::span<const float> y,
                               const FistaConfig& cfg, SolveReport& report,
                               std::span<const float> x0 = {});

struct Deconvolution {
  GroundTruthImage image;
  SolveReport report;
};

Deconvolution fista_solve(const RFData& rf, const PropagationOperator& op, const FistaConfig& cfg);

/// Structured-text (JSON) form of a report.
std::string to_json(const SolveReport& report);

}  // namespace patk
