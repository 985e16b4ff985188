#pragma once
#include <cstdint>
#include <vector>

#include "levym/model.hpp"

namespace levym {

struct TimeGrid {
    double T = 1.0;
    int steps = 1;
    static TimeGrid uniform(double T, int steps);
    double dt() const { return T / steps; }
    double node(int i) const { return T * static_cast<double>(i) / steps; }
    // Index of a node equal to t; throws TNotOnGrid.
    int node_index(double t, double tol = 1e-9) const;
};

struct Jump {
    double time;
    double size;
    int union_index;  // position of the jump time in SamplePath::t
};

struct SimOptions {
    // Samples the exact in-cell maximum of the continuous part on every cell
    // (inverse-CDF of the conditional bridge maximum).  Off by default.
    bool cell_maxima = false;
};

// Path skeleton on the union of the base grid and the jump times.  x is
// cadlag; left limits at jump indices are x[k] - jump size.  The identity
// x = mu*t + sigma*w + (sum of jumps <= t) - intensity*E[J]*t holds at every
// stored point up to rounding.
struct SamplePath {
    double T = 0.0;
    TimeGrid grid;                 // construction grid (base cells)
    std::vector<double> t, w, x;   // union times and values
    std::vector<Jump> jumps;
    std::vector<int> jump_idx;     // per union point: jump number or -1
    std::vector<double> cell_max;  // empty, or per-cell exact maximum of X

    bool has_cell_max() const { return !cell_max.empty(); }
    int size() const { return static_cast<int>(t.size()); }
    double x_left(int k) const {
        const int j = jump_idx[static_cast<std::size_t>(k)];
        return j >= 0 ? x[static_cast<std::size_t>(k)] - jumps[static_cast<std::size_t>(j)].size
                      : x[static_cast<std::size_t>(k)];
    }
    // Union index whose time equals `time`; throws TNotOnGrid.
    int index_at(double time, double tol = 1e-9) const;
};

// Jump records are drawn from a stream keyed only by (master, path_index), so
// refining the grid never changes them.
SamplePath simulate_path(const LevyModel& model, const TimeGrid& grid, std::uint64_t master,
                         std::uint64_t path_index, const SimOptions& opts = {});

// Convenience for tests and small studies; prefer streaming per-path loops at
// scale.
std::vector<SamplePath> simulate_batch(const LevyModel& model, const TimeGrid& grid,
                                       std::uint64_t master, int n_paths,
                                       const SimOptions& opts = {});

// Keeps `base` up to the union point at time t0 and replaces everything after
// with fresh randomness drawn from a stream keyed by (master, s0, s1, s2).
// inner_steps > 0 regrids (t0, T] with that many uniform cells; 0 reuses the
// base grid nodes.  t0 must be a stored union time.  Cell maxima are sampled
// on the new cells iff the base path carries them.
SamplePath resimulate_from(const LevyModel& model, const SamplePath& base, double t0,
                           std::uint64_t master, std::uint64_t s0, std::uint64_t s1,
                           std::uint64_t s2, int inner_steps = 0);

}  // namespace levym
