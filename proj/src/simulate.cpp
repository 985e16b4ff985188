#include "levym/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "levym/rng.hpp"

namespace levym {

TimeGrid TimeGrid::uniform(double T, int steps) {
    if (!(T > 0.0)) throw Error("grid horizon must be > 0");
    if (steps < 1) throw Error("grid needs at least one step");
    return TimeGrid{T, steps};
}

int TimeGrid::node_index(double t, double tol) const {
    const int i = static_cast<int>(std::lround(t / dt()));
    if (i < 0 || i > steps || std::abs(node(i) - t) > tol * std::max(1.0, T)) throw TNotOnGrid(t);
    return i;
}

int SamplePath::index_at(double time, double tol) const {
    const auto it = std::lower_bound(t.begin(), t.end(), time - tol);
    if (it != t.end() && std::abs(*it - time) <= tol * std::max(1.0, T))
        return static_cast<int>(it - t.begin());
    throw TNotOnGrid(time);
}

namespace {

struct JumpDraw {
    std::vector<double> times;  // sorted, strictly inside (t0, T)
    std::vector<double> sizes;
};

JumpDraw draw_jumps(const LevyModel& model, double t0, double T, std::mt19937_64& rng) {
    JumpDraw out;
    if (!model.has_jumps() || T <= t0) return out;
    std::poisson_distribution<int> pois(model.intensity() * (T - t0));
    const int n = pois(rng);
    out.times.resize(static_cast<std::size_t>(n));
    out.sizes.resize(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> u(t0, T);
    for (int k = 0; k < n; ++k) {
        double tau = u(rng);
        if (tau <= t0) tau = std::nextafter(t0, T);
        out.times[static_cast<std::size_t>(k)] = tau;
    }
    std::sort(out.times.begin(), out.times.end());
    for (int k = 0; k < n; ++k) out.sizes[static_cast<std::size_t>(k)] = model.sample_jump(rng);
    return out;
}

// Exact maximum of the continuous part over one cell, conditioned on the
// endpoint values a (left, cadlag) and b (right, pre-jump).
double bridge_cell_max(double a, double b, double sigma2dt, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double u = std::max(u01(rng), 1e-300);
    const double d = b - a;
    return 0.5 * (a + b + std::sqrt(d * d - 2.0 * sigma2dt * std::log(u)));
}

// Appends the segment (t0, T] to `p` (which already holds [0, t0]) using the
// node times in `nodes` (strictly > t0, last == T) and the given jumps.
void extend_path(SamplePath& p, const LevyModel& model, double t0,
                 const std::vector<double>& nodes, const JumpDraw& jd, bool cellmax,
                 std::mt19937_64& rng_bm, std::mt19937_64& rng_bridge) {
    // Merge node times with jump times; jumps landing exactly on a node attach
    // to that node.
    std::vector<double> times;
    times.reserve(nodes.size() + jd.times.size());
    std::vector<int> jump_no(nodes.size() + jd.times.size(), -1);
    {
        std::size_t a = 0, b = 0;
        while (a < nodes.size() || b < jd.times.size()) {
            if (b >= jd.times.size() || (a < nodes.size() && nodes[a] < jd.times[b])) {
                times.push_back(nodes[a++]);
            } else if (a >= nodes.size() || jd.times[b] < nodes[a]) {
                jump_no[times.size()] = static_cast<int>(b);
                times.push_back(jd.times[b++]);
            } else {  // exact tie: one union point carrying the jump
                jump_no[times.size()] = static_cast<int>(b);
                times.push_back(nodes[a]);
                ++a;
                ++b;
            }
        }
        jump_no.resize(times.size());
    }

    const int first_jump = static_cast<int>(p.jumps.size());
    const double lamEJ = model.intensity() * model.mean_jump();
    std::normal_distribution<double> gauss(0.0, 1.0);
    double tprev = t0;
    double wprev = p.w.back(), xprev = p.x.back();
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double tk = times[k];
        const double dt = tk - tprev;
        const double dW = gauss(rng_bm) * std::sqrt(std::max(dt, 0.0));
        const double wk = wprev + dW;
        const double jsize = jump_no[k] >= 0 ? jd.sizes[static_cast<std::size_t>(jump_no[k])] : 0.0;
        const double xk = xprev + model.mu() * dt + model.sigma() * dW + jsize - lamEJ * dt;
        if (cellmax)
            p.cell_max.push_back(
                bridge_cell_max(xprev, xk - jsize, model.sigma() * model.sigma() * dt, rng_bridge));
        p.t.push_back(tk);
        p.w.push_back(wk);
        p.x.push_back(xk);
        if (jump_no[k] >= 0) {
            p.jumps.push_back({tk, jsize, static_cast<int>(p.t.size()) - 1});
            p.jump_idx.push_back(first_jump + jump_no[k]);
        } else {
            p.jump_idx.push_back(-1);
        }
        tprev = tk;
        wprev = wk;
        xprev = xk;
    }
}

std::vector<double> base_nodes_after(const TimeGrid& grid, double t0) {
    std::vector<double> nodes;
    for (int i = 0; i <= grid.steps; ++i) {
        const double ti = grid.node(i);
        if (ti > t0) nodes.push_back(ti);
    }
    if (nodes.empty() || nodes.back() != grid.T) nodes.push_back(grid.T);
    return nodes;
}

}  // namespace

SamplePath simulate_path(const LevyModel& model, const TimeGrid& grid, std::uint64_t master,
                         std::uint64_t path_index, const SimOptions& opts) {
    auto rng_j = derive_rng(master, {rngchan::jumps, path_index});
    auto rng_bm = derive_rng(master, {rngchan::brownian, path_index});
    auto rng_br = derive_rng(master, {rngchan::bridge, path_index});
    const JumpDraw jd = draw_jumps(model, 0.0, grid.T, rng_j);

    SamplePath p;
    p.T = grid.T;
    p.grid = grid;
    p.t.push_back(0.0);
    p.w.push_back(0.0);
    p.x.push_back(0.0);
    p.jump_idx.push_back(-1);
    extend_path(p, model, 0.0, base_nodes_after(grid, 0.0), jd, opts.cell_maxima, rng_bm, rng_br);
    return p;
}

std::vector<SamplePath> simulate_batch(const LevyModel& model, const TimeGrid& grid,
                                       std::uint64_t master, int n_paths, const SimOptions& opts) {
    std::vector<SamplePath> out;
    out.reserve(static_cast<std::size_t>(n_paths));
    for (int i = 0; i < n_paths; ++i)
        out.push_back(simulate_path(model, grid, master, static_cast<std::uint64_t>(i), opts));
    return out;
}

SamplePath resimulate_from(const LevyModel& model, const SamplePath& base, double t0,
                           std::uint64_t master, std::uint64_t s0, std::uint64_t s1,
                           std::uint64_t s2, int inner_steps) {
    const int k0 = base.index_at(t0);
    SamplePath p;
    p.T = base.T;
    p.grid = base.grid;
    p.t.assign(base.t.begin(), base.t.begin() + k0 + 1);
    p.w.assign(base.w.begin(), base.w.begin() + k0 + 1);
    p.x.assign(base.x.begin(), base.x.begin() + k0 + 1);
    p.jump_idx.assign(base.jump_idx.begin(), base.jump_idx.begin() + k0 + 1);
    for (const Jump& j : base.jumps)
        if (j.union_index <= k0) p.jumps.push_back(j);
    if (base.has_cell_max())
        p.cell_max.assign(base.cell_max.begin(), base.cell_max.begin() + k0);

    if (t0 >= base.T) return p;

    auto rng_j = derive_rng(master, {rngchan::inner, s0, s1, s2, rngchan::jumps});
    auto rng_bm = derive_rng(master, {rngchan::inner, s0, s1, s2, rngchan::brownian});
    auto rng_br = derive_rng(master, {rngchan::inner, s0, s1, s2, rngchan::bridge});
    const JumpDraw jd = draw_jumps(model, t0, base.T, rng_j);

    std::vector<double> nodes;
    if (inner_steps > 0) {
        for (int i = 1; i <= inner_steps; ++i)
            nodes.push_back(t0 + (base.T - t0) * static_cast<double>(i) / inner_steps);
        nodes.back() = base.T;
    } else {
        nodes = base_nodes_after(base.grid, t0);
    }
    extend_path(p, model, t0, nodes, jd, base.has_cell_max(), rng_bm, rng_br);
    return p;
}

}  // namespace levym
