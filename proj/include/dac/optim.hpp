#pragma once

#include <functional>
#include <optional>

#include "dac/types.hpp"

namespace dac {

struct LossEval {
  double value = 0.0;
  Vector gradient;
};

/// Backtracking parameters. Every outer iteration restarts at initial_step unless
/// reset_step is false, in which case it restarts at the last accepted step / decay.
struct ArmijoOptions {
  double initial_step = 1000.0;
  double decay = 0.9;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 600;
  bool reset_step = true;
};

struct DescentResult {
  Vector x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Objective callback. Returning nullopt marks a point outside the domain, which the
/// line search treats as a failed sufficient-decrease test.
using Objective = std::function<std::optional<LossEval>(const Vector&)>;

/// Gradient descent with Armijo backtracking. Stops after max_iters accepted steps,
/// when the gradient norm drops below grad_tol, or when no step size is accepted.
DescentResult armijo_descent(const Objective& objective, Vector x0, int max_iters, double grad_tol,
                             const ArmijoOptions& options = {});

/// Same as armijo_descent on the negated objective; the result reports the original value.
DescentResult armijo_ascent(const Objective& objective, Vector x0, int max_iters, double grad_tol,
                            const ArmijoOptions& options = {});

}  // namespace dac
