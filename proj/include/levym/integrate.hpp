#pragma once
#include <functional>

#include "levym/model.hpp"
#include "levym/simulate.hpp"

namespace levym {

// Integrand contracts: the value at (t_k, k) may use path data up to index k
// only (the strict past plus the cadlag value at t_k).  Mark integrands are
// called with atom = true at jump atoms, where the predictable version must
// read the pre-jump state (path.x_left(k), strict-left running statistics),
// and atom = false on compensator cells, where the cadlag left-endpoint state
// applies.
using Integrand1 = std::function<double(double t, const SamplePath& p, int k)>;
using Integrand2 = std::function<double(double t, double z, const SamplePath& p, int k, bool atom)>;

struct IntegrandPair {
    Integrand1 phi;
    Integrand2 psi;
};

// Left-point Ito sum over union cells.
double ito_integral_w(const SamplePath& p, const Integrand1& f);

// Left-point time quadrature of \int f(t,z) nu(dz) dt over [0, T], with the
// mark integral evaluated on the model's quadrature nodes.
double compensator(const SamplePath& p, const Integrand2& f, const LevyModel& model);

// Jump atoms (evaluated with strict left history) minus the compensator.
double integral_ntilde(const SamplePath& p, const Integrand2& f, const LevyModel& model);

}  // namespace levym
