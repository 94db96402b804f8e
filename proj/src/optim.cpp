#include "dac/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dac {

DescentResult armijo_descent(const Objective& objective, Vector x0, int max_iters, double grad_tol,
                             const ArmijoOptions& options) {
  if (max_iters < 0) throw std::invalid_argument("armijo_descent: negative iteration budget");
  std::optional<LossEval> current = objective(x0);
  if (!current) throw DomainError("armijo_descent: starting point outside the domain");

  DescentResult result;
  result.x = std::move(x0);
  result.value = current->value;
  result.grad_norm = current->gradient.norm();

  double last_step = options.initial_step;
  while (result.iterations < max_iters) {
    if (result.grad_norm < grad_tol) {
      result.converged = true;
      break;
    }
    const double g2 = current->gradient.squaredNorm();
    double step = options.reset_step ? options.initial_step
                                     : std::min(options.initial_step, last_step / options.decay);
    bool accepted = false;
    for (int k = 0; k <= options.max_backtracks; ++k, step *= options.decay) {
      Vector trial = result.x - step * current->gradient;
      std::optional<LossEval> next = objective(trial);
      if (next && std::isfinite(next->value) &&
          next->value <= current->value - options.sufficient_decrease * step * g2) {
        result.x = std::move(trial);
        current = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    last_step = step;
    ++result.iterations;
    result.value = current->value;
    result.grad_norm = current->gradient.norm();
  }
  if (result.grad_norm < grad_tol) result.converged = true;
  return result;
}

DescentResult armijo_ascent(const Objective& objective, Vector x0, int max_iters, double grad_tol,
                            const ArmijoOptions& options) {
  const Objective negated = [&objective](const Vector& x) -> std::optional<LossEval> {
    std::optional<LossEval> e = objective(x);
    if (e) {
      e->value = -e->value;
      e->gradient = -e->gradient;
    }
    return e;
  };
  DescentResult r = armijo_descent(negated, std::move(x0), max_iters, grad_tol, options);
  r.value = -r.value;
  return r;
}

}  // namespace dac
