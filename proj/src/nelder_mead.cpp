#include "servosys/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "servosys/errors.hpp"

namespace servosys::optim {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

}  // namespace

NelderMeadResult minimize(const Objective& f, std::vector<double> x0,
                          std::span<const double> lower,
                          std::span<const double> upper,
                          const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0 || lower.size() != n || upper.size() != n) {
    throw ValidationError("nelder-mead: dimension mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i])) throw ValidationError("nelder-mead: bad box");
  }

  NelderMeadResult result;
  auto project = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  };
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  project(x0);
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = simplex[i + 1];
    const double span = upper[i] - lower[i];
    const double h = options.initial_step * (span > 0.0 ? span : 1.0);
    // Step away from the nearer bound so the vertex stays distinct.
    v[i] += (v[i] + h <= upper[i]) ? h : -h;
    project(v);
  }
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);

  while (result.iterations < options.max_iterations &&
         result.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double x_spread = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        x_spread = std::max(x_spread, std::abs(simplex[k][i] - simplex[best][i]));
      }
    }
    if (values[worst] - values[best] <= options.f_tolerance &&
        x_spread <= options.x_tolerance) {
      result.converged = true;
      break;
    }
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    auto along = [&](double coeff, std::vector<double>& out) {
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = centroid[i] + coeff * (centroid[i] - simplex[worst][i]);
      }
      project(out);
    };

    along(kReflect, trial);
    const double f_reflect = eval(trial);
    if (f_reflect < values[best]) {
      along(kExpand, trial2);
      const double f_expand = eval(trial2);
      if (f_expand < f_reflect) {
        simplex[worst] = trial2;
        values[worst] = f_expand;
      } else {
        simplex[worst] = trial;
        values[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < values[second]) {
      simplex[worst] = trial;
      values[worst] = f_reflect;
      continue;
    }
    // Outside contraction when the reflection beat the worst, inside otherwise.
    const bool outside = f_reflect < values[worst];
    along(outside ? kContract * kReflect : -kContract, trial2);
    const double f_contract = eval(trial2);
    if (f_contract < (outside ? f_reflect : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = f_contract;
      continue;
    }
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      for (std::size_t i = 0; i < n; ++i) {
        simplex[k][i] = simplex[best][i] + kShrink * (simplex[k][i] - simplex[best][i]);
      }
      project(simplex[k]);
      values[k] = eval(simplex[k]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  const auto best = static_cast<std::size_t>(best_it - values.begin());
  result.x = simplex[best];
  result.value = values[best];
  return result;
}

}  // namespace servosys::optim
