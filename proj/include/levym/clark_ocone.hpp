#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "levym/integrate.hpp"
#include "levym/malliavin.hpp"
#include "levym/max_repr.hpp"
#include "levym/model.hpp"
#include "levym/simulate.hpp"
#include "levym/stats.hpp"

namespace levym {

// Predictable-projection integrands phi(t) = E[D1_t F | F_t] and
// psi(t, z) = E[D2_{t,z} F | F_t], tabulated on base-grid nodes x mark grid.
struct ClarkOconeIntegrands {
    enum class Method { closed_form, nested_mc };
    std::vector<double> t;    // base-grid left endpoints
    std::vector<double> z;    // mark grid
    std::vector<double> phi;  // per t
    std::vector<double> psi;  // row-major t x z
    Method method = Method::closed_form;
    int n_inner = 0;
};

// Exact predictable integrands on union points for the variants that admit
// them (terminal value, terminal square, running maximum with a tail table).
// The callables follow the integrate.hpp contract: the value at (t, k) reads
// the path only through index k, with strict-left state at jump atoms.  The
// running-max pair recomputes prefix maxima per call; bind a path with
// max_integrands_for_path in hot loops instead.
IntegrandPair closed_form_integrands(const FunctionalSpec& F, const LevyModel& model,
                                     const TailTable* tab = nullptr);

// Closed-form mean E[F] where available (terminal value, terminal square,
// running maximum via the table).
std::optional<double> closed_form_mean(const FunctionalSpec& F, const LevyModel& model,
                                       const TailTable* tab = nullptr);

// Nested Monte Carlo conditional derivative at a base-grid node: average of
// the derivative over n_inner continuations regenerated from (master,
// outer_index, t_index, j) streams, so the value depends on the path only
// through [0, t].  inner_steps = 0 reuses the base grid after t.
Estimate conditional_derivative(const FunctionalSpec& F, const SamplePath& p,
                                const LevyModel& model, double t, std::optional<double> z,
                                int n_inner, std::uint64_t master, std::uint64_t outer_index,
                                int inner_steps = 0);

// Full nested-MC tabulation on selected base nodes x mark grid.
ClarkOconeIntegrands nested_integrands(const FunctionalSpec& F, const SamplePath& p,
                                       const LevyModel& model, const std::vector<int>& t_nodes,
                                       const MarkGrid& marks, int n_inner, std::uint64_t master,
                                       std::uint64_t outer_index, int inner_steps = 0);

// E[F] + int phi dW + int int psi dNtilde along the path.
double reconstruct(const SamplePath& p, const LevyModel& model, double mean_f,
                   const IntegrandPair& integrands);

// Table-backed variant: phi piecewise-constant on base cells, psi linear in z.
IntegrandPair tabled_integrands(const ClarkOconeIntegrands& tab);

struct ResidualRow {
    int steps = 0;
    double delta = 0.0;
    double resid_l2 = 0.0;   // ||F - R||_2
    double rel_resid = 0.0;  // / ||F - E F||_2
    double se = 0.0;         // se of resid_l2^2, propagated to resid_l2
};

struct ResidualReport {
    std::vector<ResidualRow> rows;
    double slope = 0.0;  // OLS slope of log resid vs log delta
    Estimate mean_f;     // E[F] actually used
    double var_f = 0.0;
};

// L2 reconstruction residuals along a ladder of grids with closed-form
// integrands; mean_f from an independent stream unless a closed form exists.
ResidualReport residual_study(const FunctionalSpec& F, const LevyModel& model,
                              const std::vector<int>& ladder, int n_paths, std::uint64_t master,
                              const TailTable* tab = nullptr);

// Variance identity Var F = E int phi^2 dt + E int int psi^2 nu dz dt for
// closed-form integrands; returns (lhs estimate, rhs estimate).
struct VarianceIdentity {
    Estimate var_f;
    Estimate integrated;
    bool pass = false;
};
VarianceIdentity variance_identity(const FunctionalSpec& F, const LevyModel& model,
                                   const TimeGrid& grid, int n_paths, std::uint64_t master,
                                   const TailTable* tab = nullptr, double k_se = 3.0);

}  // namespace levym
