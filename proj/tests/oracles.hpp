#pragma once

// Test-only reference computations, independent of the library code paths.

#include <cmath>
#include <vector>

namespace servosys::testing {

// Table of sysID'd parameters, typed once for preset verification.
struct TableColumn {
  const char* family;
  double damping, armature, friction_loss, tau_max, qdot_tau_max, qdot_max,
      tau_at_qdot_max, kd_min, tau_brake;
};

inline constexpr TableColumn kTable[] = {
    {"2XL430", 0.0010, 0.0083, 0.078, 0.94, 2.00, 5.97, 0.10, 0.161, 1.40},
    {"XC330", 0.0036, 0.0040, 0.036, 0.76, 1.80, 6.50, 0.48, 0.384, 1.75},
    {"XC430", 0.0066, 0.0042, 0.024, 1.32, 1.60, 7.00, 0.21, 0.170, 3.00},
    {"2XC430", 0.0028, 0.0044, 0.060, 1.09, 2.00, 6.78, 0.23, 0.185, 2.20},
    {"XM430-W210", 0.0056, 0.0022, 0.025, 1.61, 0.10, 7.63, 0.47, 0.203, 3.70},
};

// Periodic central-difference solution of x'' = w2 * (x - p) on a uniform
// grid of n points spanning one period (x[n] == x[0]). Cyclic tridiagonal
// system solved by Sherman-Morrison on top of the Thomas algorithm.
inline std::vector<double> periodic_lipm_fd(const std::vector<double>& p, double h,
                                            double w2) {
  const std::size_t n = p.size();
  const double diag = -(2.0 + h * h * w2);
  std::vector<double> rhs(n);
  for (std::size_t k = 0; k < n; ++k) rhs[k] = -h * h * w2 * p[k];

  // A = T + u v^T with corner entries 1 folded into u = (g, 0.., 1),
  // v = (1, 0.., 1/g).
  const double gamma = -diag;
  auto thomas = [&](std::vector<double> d) {
    std::vector<double> b(n, diag), c(n, 1.0), a(n, 1.0);
    b[0] = diag - gamma;
    b[n - 1] = diag - 1.0 / gamma;
    for (std::size_t k = 1; k < n; ++k) {
      const double m = a[k] / b[k - 1];
      b[k] -= m * c[k - 1];
      d[k] -= m * d[k - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) x[k] = (d[k] - c[k] * x[k + 1]) / b[k];
    return x;
  };
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = 1.0;
  const std::vector<double> y = thomas(rhs);
  const std::vector<double> z = thomas(u);
  const double vy = y[0] + y[n - 1] / gamma;
  const double vz = z[0] + z[n - 1] / gamma;
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = y[k] - vy / (1.0 + vz) * z[k];
  return x;
}

}  // namespace servosys::testing
