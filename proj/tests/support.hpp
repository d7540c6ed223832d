#pragma once

#include <cmath>
#include <functional>

#include "fronttrack/flux.hpp"
#include "fronttrack/rng.hpp"

namespace ft_test {

inline fronttrack::Flux burgers() { return fronttrack::make_builtin_flux(fronttrack::FluxFamily::homogeneous_burgers); }

// a(x) = 1 + 0.5 sin(x)
inline fronttrack::Flux modulated() {
  fronttrack::FluxParams p;
  p.amplitude = 0.5;
  return fronttrack::make_builtin_flux(fronttrack::FluxFamily::modulated_burgers, p);
}

inline double central_difference(const std::function<double(double)>& f, double at, double h) {
  return (f(at + h) - f(at - h)) / (2.0 * h);
}

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace ft_test
