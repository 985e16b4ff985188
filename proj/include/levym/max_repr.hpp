#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "levym/integrate.hpp"
#include "levym/model.hpp"
#include "levym/simulate.hpp"
#include "levym/stats.hpp"

namespace levym {

// Running maximum of the cadlag path over [0, T], including left limits at
// jump times and, when present, the exact per-cell maxima of the continuous
// part.  argmax_time is the first time the maximum is attained (cell left
// endpoint when it sits inside a cell).
struct RunningMax {
    double value = 0.0;
    double argmax_time = 0.0;
    int argmax_cell = 0;  // union index of the attaining cell / node
};
RunningMax running_max(const SamplePath& p);

// Prefix maxima along the union grid: at_node[k] = sup_{s<=t_k} X_s (cadlag,
// includes a jump at t_k), at_left[k] = sup_{s<t_k} X_s.
struct MaxPrefix {
    std::vector<double> at_node;
    std::vector<double> at_left;
};
MaxPrefix running_max_prefix(const SamplePath& p);

// Strict-suffix maxima: at[k] = sup_{s>t_k} X_s, with at[last] = -inf.
std::vector<double> running_max_suffix(const SamplePath& p);

// Monte Carlo tables of the running-maximum law for every remaining horizon
// on the build grid: tail probabilities fbar[s][z] = P{M_s > z}, their tail
// integrals iint[s][z] = int_z^inf fbar_s, means em[s] = iint[s][0], and a
// spot-check companion table eplus[s_sub][c] = E[(M_s + c)^+] on a coarse
// subset used to validate the tail-integral identity.
struct TailTable {
    double T = 0.0;
    std::vector<double> s;          // horizons 0, dt, ..., T
    std::vector<double> z;          // levels, z[0] = 0, uniform
    std::vector<double> fbar;       // row-major [s][z]
    std::vector<double> fbar_se;
    std::vector<double> iint;       // row-major [s][z]
    std::vector<double> em;         // per s
    std::vector<double> em_direct;  // direct mean of M_s (diagnostic)
    std::vector<double> em_direct_se;
    std::vector<int> check_rows;    // s-indices carrying the companion table
    std::vector<double> c;          // companion shifts (c < 0)
    std::vector<double> eplus;      // row-major [check_rows][c]
    std::vector<double> eplus_se;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    int isotonic_fixes = 0;

    int s_index(double s_query, double tol = 1e-9) const;  // throws TNotOnGrid
    // Tail probability P{M_s > zz}; 1 for zz < 0; linear in z between nodes;
    // linear in s between rows.  Throws ExtrapolationBeyondTable past z_max.
    double fbar_at(double s_query, double zz) const;
    // I_s(a) = int_a^inf fbar_s; exact piecewise-quadratic antiderivative of
    // the interpolated fbar; a < 0 extends with slope -1.
    double i_at(double s_query, double a) const;
    double em_at(double s_query) const;      // = i_at(s, 0)
    // Conservative standard error of i_at: tail trapezoid of fbar_se (the
    // cell estimates share paths, so errors are summed, not squared).
    double i_se_at(double s_query, double a) const;
    // E[((M_s - a)^+)^2] = 2 int_a^inf I_s(u) du, from the tabulated tail
    // integral.  Gives the true sampling variance of (M - a)^+ draws,
    // m2 - I(a)^2; empirical errors collapse to zero when exceedances are
    // rare, so nested checks floor their error with this instead.
    double excess_m2(double s_query, double a) const;
    // E[(M_s + c)^+] via (M >= 0): c >= 0 -> em + c; c < 0 -> i_at(s, -c).
    double eplus_at(double s_query, double c_shift) const;
    // psi(s, a, z) = E[(M_s + z - a)^+] - I_s(a), the jump integrand with
    // remaining horizon s and gap a = M_t - X_t >= 0.
    double psi(double s_query, double a, double zz) const;
    // phi = sigma * fbar(s, a).
    double phi(double s_query, double a, double sigma) const;
};

TailTable build_tail_table(const LevyModel& model, const TimeGrid& grid, int n_z, double z_max,
                           std::int64_t n_paths, std::uint64_t master);

// Picks z_max from a pilot run: the largest simulated maximum plus the span
// needed by jump shifts.
double pilot_z_max(const LevyModel& model, const TimeGrid& grid, int n_pilot,
                   std::uint64_t master);

void save_tail_table(const TailTable& tab, const std::string& path);
TailTable load_tail_table(const std::string& path);
void write_tail_table_csv(const TailTable& tab, const std::string& path);

// E[M_T | F_t] = M_t + I_{T-t}(M_t - X_t) evaluated at a union node.
double shiryaev_yor(const SamplePath& p, double t, const TailTable& tab);

// Martingale-representation integrands for the running maximum on one path:
// phi(t_k) = sigma * fbar_{T-t_k}(M_{t_k} - X_{t_k}) on cells and
// psi(t_k, z) from TailTable::psi, with strict-left state at jump atoms.
// The pair caches the path's prefix maxima; it is bound to `p` only.
IntegrandPair max_integrands_for_path(const SamplePath& p, const LevyModel& model,
                                      const TailTable& tab);

struct MaxLadderRow {
    int steps = 0;
    double delta = 0.0;
    double rel_resid = 0.0;     // ||M_T - R||_2 / ||M_T - E M_T||_2
    double resid_l2 = 0.0;
    double se = 0.0;            // se of resid_l2^2, propagated
};

struct MaxReport {
    Estimate mean_max;          // direct E[M_T] on the finest grid
    std::vector<MaxLadderRow> ladder;
    std::int64_t phi_violations = 0;   // phi outside [0, sigma]
    std::int64_t psi_violations = 0;   // |psi| > |z| + tol
    std::int64_t nodes_checked = 0;
    double worst_psi_excess = 0.0;
};

// Reconstruction study: per grid in `ladder`, the L2 residual of
// M_T vs E[M_T] + int phi dW + int int psi dNtilde, plus bound audits.
MaxReport verify_max_representation(const LevyModel& model, const std::vector<int>& ladder,
                                    const TailTable& tab, int n_paths, std::uint64_t master);

}  // namespace levym
