#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "levym/chaos.hpp"
#include "levym/doleans.hpp"
#include "levym/model.hpp"
#include "levym/simulate.hpp"
#include "levym/stats.hpp"

namespace levym {

enum class Variant { smooth_kpoint, iterated, doleans_terminal, running_max };

// F = g(X_{t1}, ..., X_{tk}) with a supplied gradient.
struct SmoothKPoint {
    std::vector<double> times;  // strictly increasing, grid-aligned at evaluation
    std::function<double(const std::vector<double>&)> g;
    std::function<std::vector<double>(const std::vector<double>&)> grad;
};

struct FunctionalSpec {
    Variant variant = Variant::smooth_kpoint;
    SmoothKPoint smooth;    // smooth_kpoint
    SimplexFunction f;      // iterated
    ExponentParams params;  // doleans_terminal

    // Set by the factories when the functional admits closed-form
    // predictable projections.
    enum class Hint { none, terminal_value, terminal_square };
    Hint hint = Hint::none;

    static FunctionalSpec terminal_value(double T);   // F = X_T
    static FunctionalSpec terminal_square(double T);  // F = X_T^2
    static FunctionalSpec smooth_fn(SmoothKPoint s);
    static FunctionalSpec iterated_fn(SimplexFunction f);
    static FunctionalSpec doleans_fn(ExponentParams p);
    static FunctionalSpec maximum();

    double evaluate(const SamplePath& p, const LevyModel& model) const;
};

// Brownian-direction derivative of a smooth k-point functional:
// sigma * sum_j dg_j * 1{t <= t_j}.
double d1_smooth(const SmoothKPoint& F, const SamplePath& p, double t, const LevyModel& model);

// Add-a-mass derivative: effect on F of inserting a jump of size z at time t;
// the cadlag path gains +z from t onwards (inclusive).  Supported for
// smooth_kpoint, running_max and doleans_terminal variants.
double d2_add_mass(const FunctionalSpec& F, const SamplePath& p, double t, double z,
                   const LevyModel& model);

// Slot-removal derivatives of an iterated integral: sum over slots of the
// matching direction, with the omitted slot pinned at t (resp. (t, z)) and
// the remaining slots windowed to the split simplex (before-slots on [0, t),
// after-slots on (t, inf)).
double d1_iterated(const SimplexFunction& f, const SamplePath& p, double t,
                   const LevyModel& model);
double d2_iterated(const SimplexFunction& f, const SamplePath& p, double t, double z,
                   const LevyModel& model);

// Variant dispatch for a single point; prefer derivative_field for whole
// tabulations (it caches per-path state).
double d1_at(const FunctionalSpec& F, const SamplePath& p, double t, const LevyModel& model);
double d2_at(const FunctionalSpec& F, const SamplePath& p, double t, double z,
             const LevyModel& model);

// Mark grid for the z-direction: jump-law quantiles plus small offsets around
// zero; empty when the model has no jumps.
struct MarkGrid {
    std::vector<double> z;
    static MarkGrid for_model(const LevyModel& model, int n = 33);
};

struct DerivativeField {
    std::vector<double> t;
    std::vector<double> z;
    std::vector<double> d1;  // per t
    std::vector<double> d2;  // row-major t x z
    double at1(int ti) const { return d1[static_cast<std::size_t>(ti)]; }
    double at2(int ti, int zi) const {
        return d2[static_cast<std::size_t>(ti) * z.size() + static_cast<std::size_t>(zi)];
    }
};

// Evaluates both derivatives of F on times x marks for one path.
DerivativeField derivative_field(const FunctionalSpec& F, const SamplePath& p,
                                 const LevyModel& model, const std::vector<double>& times,
                                 const MarkGrid& marks);

// Derivative energy E[ int d1^2 dt + int int d2^2 nu dz dt ] over n paths.
Estimate energy_estimate(const FunctionalSpec& F, const LevyModel& model, const TimeGrid& grid,
                         std::int64_t n_paths, std::uint64_t master);

// Heuristic membership guard: the derivative energy estimated at n and 2n
// paths; stable = the two agree within k_se combined standard errors.
struct StabilityReport {
    Estimate half;  // n paths
    Estimate full;  // 2n paths
    bool stable = false;
};
StabilityReport d_membership_heuristic(const FunctionalSpec& F, const LevyModel& model,
                                       const TimeGrid& grid, int n_paths, std::uint64_t master,
                                       double k_se = 3.0);

}  // namespace levym
