#pragma once
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "levym/doleans.hpp"
#include "levym/model.hpp"
#include "levym/simulate.hpp"
#include "levym/stats.hpp"

namespace levym {

inline constexpr int kMaxChaosOrder = 6;

// Integration slots: 1 = Brownian, 2 = compensated jump measure.  The first
// entry is the innermost integral.
struct MultiIndex {
    std::vector<int> v;
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries);
    int order() const { return static_cast<int>(v.size()); }
    int brownian_slots() const;  // count of 1-entries
    std::string str() const;     // e.g. "(1,2,1)"
    static std::vector<MultiIndex> all_of_order(int n);
};

// Time window restricting one slot; cells enter by their left endpoint
// (lo <= t < hi), jump atoms strictly (lo < tau < hi).  Windows are meant to
// be aligned with union points.
struct Window {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
};

// One factor of a product simplex function.
struct SlotFactor {
    int kind = 1;
    std::function<double(double)> f_time;          // kind 1
    std::function<double(double, double)> f_mark;  // kind 2
    Window win;
};

// Product function on the ordered simplex, one factor per slot.
struct SimplexFunction {
    std::vector<SlotFactor> slots;
    MultiIndex index() const;
};

// h^{2-i_k} * u^{i_k-1} per slot: time slots carry h, mark slots carry u.
SimplexFunction tensor_product(std::function<double(double)> h,
                               std::function<double(double, double)> u, const MultiIndex& idx);
SimplexFunction unit_simplex_function(const MultiIndex& idx);

// Iterated stochastic integral of f over the ordered simplex up to T,
// innermost slot first, left-point in time, strict left limits at atoms.
double iterated_integral(const SamplePath& p, const SimplexFunction& f, const LevyModel& model);

// Monte Carlo estimate of E[J(fa) J(fb)].
Estimate estimate_inner_product(const LevyModel& model, const TimeGrid& grid,
                                const SimplexFunction& fa, const SimplexFunction& fb, int n_paths,
                                std::uint64_t master);

// Deterministic nested Gauss-Legendre evaluation of the simplex inner product
// (fa, fb); zero when the indices differ.  Supported up to order 3.
double simplex_inner_product(const SimplexFunction& fa, const SimplexFunction& fb,
                             const LevyModel& model, int quad_order = 64);

// Full E[J_a J_b] matrix for every multi-index pair up to max_order with unit
// integrands, from a single path sweep, with quadrature oracles per entry
// (zero off the diagonal).
struct InnerProductMatrix {
    std::vector<MultiIndex> indices;  // sorted by (order, lexicographic)
    std::vector<Estimate> entries;    // row-major, symmetric
    std::vector<double> oracle;       // same layout
    int n = 0;
    const Estimate& at(int i, int j) const {
        return entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                       static_cast<std::size_t>(j)];
    }
    double oracle_at(int i, int j) const {
        return oracle[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                      static_cast<std::size_t>(j)];
    }
};
InnerProductMatrix inner_product_matrix(const LevyModel& model, const TimeGrid& grid,
                                        int max_order, int n_paths, std::uint64_t master);

struct ChaosOrderRow {
    int order = 0;
    Estimate energy;         // sum over indices of E[J^2]
    double analytic = 0.0;   // S^n / n!
};

struct ChaosIndexRow {
    MultiIndex idx;
    Estimate energy;
};

struct ChaosReport {
    double s_total = 0.0;
    int max_order = 0;
    std::vector<ChaosOrderRow> orders;
    std::vector<ChaosIndexRow> per_index;
    Estimate trunc_l2sq;          // E[(Z_T - partial sum)^2]
    double analytic_tail = 0.0;   // exp(S) - sum_{n<=N} S^n/n!
    Estimate mean_z;              // diagnostic, target 1
};

// Expands the terminal exponential Z_T in iterated integrals of
// h (x) (e^g - 1) up to order N and measures per-order energies and the
// truncation distance.  Throws OrderTooLarge for N > kMaxChaosOrder.
ChaosReport chaos_expand_Z(const LevyModel& model, const TimeGrid& grid,
                           const ExponentParams& params, int max_order, int n_paths,
                           std::uint64_t master);

struct TruncationReport {
    double s_total = 0.0;
    int trunc_order = 0;   // N of the partial sum S_N
    int cv_max_order = 0;  // highest control-variate order M
    std::vector<ChaosOrderRow> orders;  // per-order-sum energies, 1..M
    Estimate trunc_l2sq;   // CV estimate of E[(Z_T - S_N)^2]
    Estimate raw_l2sq;     // plain estimate (diagnostic)
    double analytic_tail = 0.0;
    Estimate mean_z;
};

// Truncation study with a tail control variate.  Per-order sums
// B_n = sum over all indices of order n are computed in one linear pass
// (multilinearity of the simplex recursion).  With `hermite` set, each cell
// contributes its exact second-order factor ((inc^2 - h^2 dt - u^2)/2, u the
// atom term) as well, which removes the O(dt) discretisation bias of the
// per-order sums.  The estimator subtracts the sampled tail square
// (sum_{N<n<=M} B_n)^2 pathwise and adds back the analytic sum of S^n/n!,
// cancelling both sampling noise and discretisation bias of the tail.
// M may exceed kMaxChaosOrder since no index enumeration happens; capped
// at 12.
TruncationReport chaos_truncation_cv(const LevyModel& model, const TimeGrid& grid,
                                     const ExponentParams& params, int trunc_order,
                                     int cv_max_order, int n_paths, std::uint64_t master,
                                     bool hermite = true);

// Terminal functional F = f(X_T); fhat is the unitary-convention transform
// (2pi)^{-1/2} int f(x) e^{-ixy} dx.
struct TerminalFunctional {
    std::function<double(double)> f;
    std::function<double(double)> fprime;
    std::function<std::complex<double>(double)> fhat;
};

// First-order expansion data recovered from the Fourier representation:
// the order-zero term E[f(X_T)], the Brownian coefficient (constant in time
// for terminal functionals) and the jump coefficient as a function of the
// mark.  Signs are normalised so that n0 equals E[f(X_T)].
struct FirstOrderCoeffs {
    double n0 = 0.0;
    double f1 = 0.0;
    std::function<double(double)> f2;
    double y_max = 0.0;  // quadrature support actually used
};

FirstOrderCoeffs first_order_coefficients(const LevyModel& model, const TerminalFunctional& F,
                                          double tol = 1e-10);

}  // namespace levym
