#pragma once
#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "levym/errors.hpp"

namespace levym {

struct QuadNode {
    double x;
    double w;
};

// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by Newton
// iteration on the Legendre polynomial roots.
const std::vector<QuadNode>& gauss_legendre(int n);

// \int_a^b f(x) dx with an n-point Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n = 64);

// Adaptive Simpson for complex-valued integrands (used by the Fourier layer).
std::complex<double> adaptive_simpson(const std::function<std::complex<double>(double)>& f,
                                      double a, double b, double tol, int max_depth = 48);

}  // namespace levym
