#include "levym/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "levym/errors.hpp"
#include "levym/max_repr.hpp"
#include "levym/parallel.hpp"

namespace levym {

namespace {
inline std::size_t sz(int i) { return static_cast<std::size_t>(i); }

std::vector<double> kpoint_values(const SmoothKPoint& F, const SamplePath& p) {
    std::vector<double> xs(F.times.size());
    for (std::size_t j = 0; j < F.times.size(); ++j) xs[j] = p.x[sz(p.index_at(F.times[j]))];
    return xs;
}
}  // namespace

FunctionalSpec FunctionalSpec::terminal_value(double T) {
    FunctionalSpec s;
    s.variant = Variant::smooth_kpoint;
    s.hint = Hint::terminal_value;
    s.smooth.times = {T};
    s.smooth.g = [](const std::vector<double>& x) { return x[0]; };
    s.smooth.grad = [](const std::vector<double>&) { return std::vector<double>{1.0}; };
    return s;
}

FunctionalSpec FunctionalSpec::terminal_square(double T) {
    FunctionalSpec s;
    s.variant = Variant::smooth_kpoint;
    s.hint = Hint::terminal_square;
    s.smooth.times = {T};
    s.smooth.g = [](const std::vector<double>& x) { return x[0] * x[0]; };
    s.smooth.grad = [](const std::vector<double>& x) { return std::vector<double>{2.0 * x[0]}; };
    return s;
}

FunctionalSpec FunctionalSpec::smooth_fn(SmoothKPoint s) {
    FunctionalSpec out;
    out.variant = Variant::smooth_kpoint;
    out.smooth = std::move(s);
    return out;
}

FunctionalSpec FunctionalSpec::iterated_fn(SimplexFunction f) {
    FunctionalSpec out;
    out.variant = Variant::iterated;
    out.f = std::move(f);
    return out;
}

FunctionalSpec FunctionalSpec::doleans_fn(ExponentParams p) {
    FunctionalSpec out;
    out.variant = Variant::doleans_terminal;
    out.params = std::move(p);
    return out;
}

FunctionalSpec FunctionalSpec::maximum() {
    FunctionalSpec out;
    out.variant = Variant::running_max;
    return out;
}

double FunctionalSpec::evaluate(const SamplePath& p, const LevyModel& model) const {
    switch (variant) {
        case Variant::smooth_kpoint:
            return smooth.g(kpoint_values(smooth, p));
        case Variant::iterated:
            return iterated_integral(p, f, model);
        case Variant::doleans_terminal:
            return doleans_exponential(p, params, model).back();
        case Variant::running_max:
            return running_max(p).value;
    }
    throw Error("unreachable functional variant");
}

double d1_smooth(const SmoothKPoint& F, const SamplePath& p, double t, const LevyModel& model) {
    const std::vector<double> xs = kpoint_values(F, p);
    const std::vector<double> gr = F.grad(xs);
    const double tol = 1e-12 * std::max(1.0, p.T);
    double s = 0.0;
    for (std::size_t j = 0; j < F.times.size(); ++j)
        if (t <= F.times[j] + tol) s += gr[j];
    return model.sigma() * s;
}

double d2_add_mass(const FunctionalSpec& F, const SamplePath& p, double t, double z,
                   const LevyModel& model) {
    const double tol = 1e-12 * std::max(1.0, p.T);
    switch (F.variant) {
        case Variant::smooth_kpoint: {
            std::vector<double> xs = kpoint_values(F.smooth, p);
            const double base = F.smooth.g(xs);
            for (std::size_t j = 0; j < F.smooth.times.size(); ++j)
                if (t <= F.smooth.times[j] + tol) xs[j] += z;
            return F.smooth.g(xs) - base;
        }
        case Variant::running_max: {
            const int k = p.index_at(t);
            const MaxPrefix mp = running_max_prefix(p);
            const std::vector<double> suf = running_max_suffix(p);
            const double m_t = std::max(mp.at_node[sz(k)], suf[sz(k)]);
            const double shifted =
                std::max(mp.at_left[sz(k)], z + std::max(p.x[sz(k)], suf[sz(k)]));
            return shifted - m_t;
        }
        case Variant::doleans_terminal: {
            const double zt = doleans_exponential(p, F.params, model).back();
            const double g = F.params.g ? F.params.g(t, z) : 0.0;
            return zt * std::expm1(g);
        }
        case Variant::iterated:
            throw UnsupportedVariant("iterated integrals use d2_iterated");
    }
    throw Error("unreachable functional variant");
}

namespace {

// Slot-removal sum shared by both directions: for every slot of `kind`, pin
// it at t (value `pinned(slot)`), restrict earlier slots to [0, t) and later
// ones to (t, inf), and evaluate the remaining iterated integral.
template <typename Pinned>
double slot_removal_sum(const SimplexFunction& f, const SamplePath& p, const LevyModel& model,
                        double t, int kind, const Pinned& pinned) {
    double total = 0.0;
    const int n = static_cast<int>(f.slots.size());
    for (int k = 0; k < n; ++k) {
        if (f.slots[sz(k)].kind != kind) continue;
        SimplexFunction g;
        g.slots.reserve(sz(n) - 1);
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            SlotFactor sf = f.slots[sz(j)];
            if (j < k)
                sf.win.hi = std::min(sf.win.hi, t);
            else
                sf.win.lo = std::max(sf.win.lo, t);
            g.slots.push_back(std::move(sf));
        }
        const double w = pinned(f.slots[sz(k)]);
        if (w != 0.0) total += w * iterated_integral(p, g, model);
    }
    return total;
}

}  // namespace

double d1_iterated(const SimplexFunction& f, const SamplePath& p, double t,
                   const LevyModel& model) {
    return slot_removal_sum(f, p, model, t, 1, [&](const SlotFactor& s) {
        return s.f_time ? s.f_time(t) : 1.0;
    });
}

double d2_iterated(const SimplexFunction& f, const SamplePath& p, double t, double z,
                   const LevyModel& model) {
    return slot_removal_sum(f, p, model, t, 2, [&](const SlotFactor& s) {
        return s.f_mark ? s.f_mark(t, z) : 1.0;
    });
}

MarkGrid MarkGrid::for_model(const LevyModel& model, int n) {
    MarkGrid g;
    if (!model.has_jumps()) return g;
    if (model.jump().law == JumpLaw::two_point) {
        g.z = {model.jump().z1, model.jump().z2};
    } else {
        g.z.resize(sz(n));
        for (int i = 0; i < n; ++i)
            g.z[sz(i)] = model.jump_quantile((static_cast<double>(i) + 0.5) / n);
    }
    std::sort(g.z.begin(), g.z.end());
    g.z.erase(std::unique(g.z.begin(), g.z.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-14; }),
              g.z.end());
    return g;
}

namespace {

// Per-path derivative evaluators with variant-specific caching.
struct FieldProvider {
    std::function<double(double)> d1;          // t -> D1
    std::function<double(double, double)> d2;  // (t, z) -> D2
};

FieldProvider make_provider(const FunctionalSpec& F, const SamplePath& p, const LevyModel& model) {
    FieldProvider out;
    switch (F.variant) {
        case Variant::smooth_kpoint: {
            out.d1 = [&F, &p, &model](double t) { return d1_smooth(F.smooth, p, t, model); };
            out.d2 = [&F, &p, &model](double t, double z) {
                return d2_add_mass(F, p, t, z, model);
            };
            break;
        }
        case Variant::iterated: {
            out.d1 = [&F, &p, &model](double t) { return d1_iterated(F.f, p, t, model); };
            out.d2 = [&F, &p, &model](double t, double z) {
                return d2_iterated(F.f, p, t, z, model);
            };
            break;
        }
        case Variant::doleans_terminal: {
            const double zt = doleans_exponential(p, F.params, model).back();
            auto h = F.params.h;
            auto g = F.params.g;
            out.d1 = [zt, h](double t) { return h ? zt * h(t) : 0.0; };
            out.d2 = [zt, g](double t, double z) { return g ? zt * std::expm1(g(t, z)) : 0.0; };
            break;
        }
        case Variant::running_max: {
            auto mp = std::make_shared<MaxPrefix>(running_max_prefix(p));
            auto suf = std::make_shared<std::vector<double>>(running_max_suffix(p));
            const RunningMax rm = running_max(p);
            const double sigma = model.sigma();
            const SamplePath* pp = &p;
            out.d1 = [rm, sigma](double t) { return t <= rm.argmax_time ? sigma : 0.0; };
            out.d2 = [mp, suf, rm, pp](double t, double z) {
                const int k = pp->index_at(t);
                const double shifted =
                    std::max(mp->at_left[sz(k)], z + std::max(pp->x[sz(k)], (*suf)[sz(k)]));
                return shifted - rm.value;
            };
            break;
        }
    }
    return out;
}

}  // namespace

double d1_at(const FunctionalSpec& F, const SamplePath& p, double t, const LevyModel& model) {
    return make_provider(F, p, model).d1(t);
}

double d2_at(const FunctionalSpec& F, const SamplePath& p, double t, double z,
             const LevyModel& model) {
    return make_provider(F, p, model).d2(t, z);
}

DerivativeField derivative_field(const FunctionalSpec& F, const SamplePath& p,
                                 const LevyModel& model, const std::vector<double>& times,
                                 const MarkGrid& marks) {
    DerivativeField out;
    out.t = times;
    out.z = marks.z;
    out.d1.resize(times.size());
    out.d2.resize(times.size() * marks.z.size());
    const FieldProvider fp = make_provider(F, p, model);
    for (std::size_t i = 0; i < times.size(); ++i) {
        out.d1[i] = fp.d1(times[i]);
        for (std::size_t q = 0; q < marks.z.size(); ++q)
            out.d2[i * marks.z.size() + q] = fp.d2(times[i], marks.z[q]);
    }
    return out;
}

// E[ int d1^2 dt + int int d2^2 nu dz dt ] on the first n paths.
Estimate energy_estimate(const FunctionalSpec& F, const LevyModel& model, const TimeGrid& grid,
                         std::int64_t n_paths, std::uint64_t master) {
    struct Partial {
        double s1 = 0.0, s2 = 0.0;
    };
    SimOptions opts;
    opts.cell_maxima = (F.variant == Variant::running_max);
    const auto& nodes = model.mark_nodes();
    Partial acc = block_map_reduce(
        n_paths, kDefaultBlock, Partial{},
        [&](std::int64_t i0, std::int64_t i1, Partial& part) {
            for (std::int64_t i = i0; i < i1; ++i) {
                const SamplePath p =
                    simulate_path(model, grid, master, static_cast<std::uint64_t>(i), opts);
                const FieldProvider fp = make_provider(F, p, model);
                double acc_path = 0.0;
                for (int k = 0; k + 1 < p.size(); ++k) {
                    const double t = p.t[sz(k)];
                    const double dt = p.t[sz(k) + 1] - t;
                    const double v1 = fp.d1(t);
                    double mark = 0.0;
                    for (const MarkNode& q : nodes) {
                        const double v2 = fp.d2(t, q.z);
                        mark += q.w * v2 * v2;
                    }
                    acc_path += dt * (v1 * v1 + mark);
                }
                part.s1 += acc_path;
                part.s2 += acc_path * acc_path;
            }
        },
        [](Partial& a, const Partial& b) {
            a.s1 += b.s1;
            a.s2 += b.s2;
        });
    const double dn = static_cast<double>(n_paths);
    const double mean = acc.s1 / dn;
    const double var = std::max(acc.s2 / dn - mean * mean, 0.0);
    return {mean, std::sqrt(var / dn)};
}

StabilityReport d_membership_heuristic(const FunctionalSpec& F, const LevyModel& model,
                                       const TimeGrid& grid, int n_paths, std::uint64_t master,
                                       double k_se) {
    StabilityReport rep;
    rep.half = energy_estimate(F, model, grid, n_paths, master);
    rep.full = energy_estimate(F, model, grid, 2 * static_cast<std::int64_t>(n_paths), master);
    const double comb = std::sqrt(rep.half.se * rep.half.se + rep.full.se * rep.full.se);
    rep.stable = std::isfinite(rep.full.value) &&
                 std::abs(rep.half.value - rep.full.value) <= k_se * std::max(comb, 1e-300);
    return rep;
}

}  // namespace levym
