#pragma once

#include <functional>
#include <span>
#include <vector>

namespace servosys::optim {

struct NelderMeadOptions {
  int max_iterations = 2000;
  int max_evaluations = 4000;
  // Converged when the simplex spread in f and in x both fall below these.
  double f_tolerance = 1e-10;
  double x_tolerance = 1e-8;
  // Edge length of the initial simplex, in box coordinates.
  double initial_step = 0.1;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead simplex minimization inside the box [lower, upper]. Trial
/// points are projected onto the box, so f is only evaluated inside it.
NelderMeadResult minimize(const Objective& f, std::vector<double> x0,
                          std::span<const double> lower,
                          std::span<const double> upper,
                          const NelderMeadOptions& options = {});

}  // namespace servosys::optim
