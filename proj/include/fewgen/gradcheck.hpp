#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace fewgen {

// Compares an analytic gradient against central finite differences of a
// scalar double-precision function. Returns the worst componentwise
// deviation |a_i - fd_i| normalized by the larger of the two gradients'
// max-norms, so near-zero components do not blow up the ratio while real
// disagreements in any component still surface.
//
// f must be a pure function of the point; evaluation must not perturb
// shared state.
template <typename F>
double grad_check(F&& f, std::vector<double> point, const std::vector<double>& analytic,
                  double step = 1e-3) {
  std::vector<double> fd(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double fp = f(point);
    point[i] = saved - step;
    const double fm = f(point);
    point[i] = saved;
    fd[i] = (fp - fm) / (2.0 * step);
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i)
    scale = std::max({scale, std::abs(analytic[i]), std::abs(fd[i])});
  if (scale < 1e-12) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i)
    worst = std::max(worst, std::abs(analytic[i] - fd[i]) / scale);
  return worst;
}

}  // namespace fewgen
