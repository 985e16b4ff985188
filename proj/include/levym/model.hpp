#pragma once
#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "levym/errors.hpp"

namespace levym {

enum class JumpLaw { none, two_point, gaussian, uniform };

// Finite-activity jump-size law; intensity is the total jump rate.
struct JumpSpec {
    JumpLaw law = JumpLaw::none;
    double intensity = 0.0;
    // two_point
    double z1 = 0.0, p1 = 0.0, z2 = 0.0, p2 = 0.0;
    // gaussian
    double mean = 0.0, sd = 0.0;
    // uniform
    double lo = 0.0, hi = 0.0;
};

struct MarkNode {
    double z;
    double w;  // weights sum to the intensity
};

// Square-integrable model: X_t = mu*t + sigma*W_t + compensated jump part.
class LevyModel {
  public:
    LevyModel(double mu, double sigma, double horizon, JumpSpec jump);

    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    double horizon() const { return horizon_; }
    const JumpSpec& jump() const { return jump_; }
    double intensity() const { return jump_.intensity; }
    bool has_jumps() const { return jump_.intensity > 0.0; }

    // Closed-form law moments (per jump).
    double mean_jump() const;
    double mean_jump_sq() const;

    // \int f(z) nu(dz); exact for atomic laws, 64-point Gauss-Legendre else.
    double nu_integral(const std::function<double(double)>& f) const;
    std::complex<double> nu_integral_c(const std::function<std::complex<double>(double)>& f) const;

    // Quadrature nodes of nu (weights sum to the intensity).
    const std::vector<MarkNode>& mark_nodes() const { return mark_nodes_; }

    // Quantile of the jump-size law.
    double jump_quantile(double q) const;
    double sample_jump(std::mt19937_64& rng) const;

    // sigma^2 + \int z^2 nu(dz): variance growth rate of X.
    double variance_rate() const;

    // Drift of the uncompensated decomposition: mu - \int_{|z|>=1} z nu(dz).
    // Derived diagnostic only; simulation is parameterised by mu directly.
    double alpha() const;

    // Characteristic exponent: E[e^{iyX_t}] = exp(t * psi(y)).
    std::complex<double> characteristic_exponent(double y) const;

  private:
    double mu_, sigma_, horizon_;
    JumpSpec jump_;
    std::vector<MarkNode> mark_nodes_;
};

// Validates parameters and returns the model; throws SigmaNotPositive,
// NegativeIntensity, MassAtZero or BadLawParams.
LevyModel validate_model(double mu, double sigma, double horizon, const JumpSpec& jump);

// Bijection used by the separable exponent family: e^z - 1 for z < 0,
// 1 - e^{-z} for z >= 0.
double gamma_map(double z);

}  // namespace levym
