#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "levym/model.hpp"
#include "levym/simulate.hpp"
#include "levym/stats.hpp"

namespace levym {

// Deterministic exponent pair (h, g) of the exponential martingale
//   Z_t = exp{ int h dW - 1/2 int h^2 ds + sum g(tau, J) - int (e^g - 1) nu dz ds }.
// Norms are evaluated by quadrature at construction; construction fails if
// they are not finite.
struct ExponentParams {
    std::function<double(double)> h;           // may be null for h == 0
    std::function<double(double, double)> g;   // may be null for g == 0
    bool g_time_independent = false;           // enables cached mark quadrature
    double h_norm2 = 0.0;                      // int_0^T h^2 ds
    double eg_norm2 = 0.0;                     // int_0^T int (e^g-1)^2 nu dz ds
    double comp_rate0 = 0.0;                   // int (e^{g(0,z)}-1) nu(dz), cached
    double s_total() const { return h_norm2 + eg_norm2; }
};

ExponentParams make_exponent(std::function<double(double)> h,
                             std::function<double(double, double)> g, const LevyModel& model,
                             bool g_time_independent = false);

// Separable family: g(t, z) = gbar(t) * gamma_map(z).
ExponentParams make_exponent_separable(std::function<double(double)> h,
                                       std::function<double(double)> gbar, const LevyModel& model,
                                       bool gbar_constant = false);

// Z along the path's union points (Z[0] = 1).
std::vector<double> doleans_exponential(const SamplePath& p, const ExponentParams& params,
                                        const LevyModel& model);

// Closed form E[Z_t^2] = exp{ int_0^t h^2 + int_0^t int (e^g-1)^2 nu }.
double z_second_moment(const ExponentParams& params, const LevyModel& model, double t);

// Terminal value of the plain exponential family member
//   Y = exp{ int h dW + int int gbar(t) gamma(z) dNtilde },
// whose mean is exp(y_log_mean(...)).
double y_functional(const SamplePath& p, const std::function<double(double)>& h,
                    const std::function<double(double)>& gbar, const LevyModel& model);
double y_log_mean(const std::function<double(double)>& h,
                  const std::function<double(double)>& gbar, const LevyModel& model, double t);

struct ZCheckpoint {
    double t = 0.0;
    Estimate mean_z;        // target 1
    Estimate mean_z2;       // target closed_form
    double closed_form = 0.0;
    bool pass = false;
};

struct ZMartingaleReport {
    std::vector<ZCheckpoint> rows;
    bool pass = false;
};

// Monte Carlo mean and second moment of Z at base-grid checkpoints, compared
// against 1 and the closed form within k_se standard errors.
ZMartingaleReport verify_z_martingale(const LevyModel& model, const TimeGrid& grid,
                                      const ExponentParams& params,
                                      const std::vector<int>& checkpoint_nodes, int n_paths,
                                      std::uint64_t master, double k_se = 3.0);

// Nested-MC residual E[Z_T | F_t] - Z_t averaged over outer paths; mean
// should vanish within its standard error.
Estimate conditional_z_residual(const LevyModel& model, const TimeGrid& grid,
                                const ExponentParams& params, int t_node, int n_outer, int n_inner,
                                std::uint64_t master);

}  // namespace levym
