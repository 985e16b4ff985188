#include "levym/doleans.hpp"

#include <cmath>

#include "levym/parallel.hpp"
#include "levym/quadrature.hpp"
#include "levym/rng.hpp"

namespace levym {

namespace {
constexpr int kTimeQuad = 128;

double eg1_mark_integral(const ExponentParams& params, const LevyModel& model, double t) {
    if (!params.g || !model.has_jumps()) return 0.0;
    return model.nu_integral([&](double z) { return std::expm1(params.g(t, z)); });
}
}  // namespace

ExponentParams make_exponent(std::function<double(double)> h,
                             std::function<double(double, double)> g, const LevyModel& model,
                             bool g_time_independent) {
    ExponentParams p;
    p.h = std::move(h);
    p.g = std::move(g);
    p.g_time_independent = g_time_independent;
    const double T = model.horizon();
    if (p.h)
        p.h_norm2 = integrate_gl([&](double s) { const double v = p.h(s); return v * v; }, 0.0, T,
                                 kTimeQuad);
    if (p.g && model.has_jumps()) {
        auto rate2 = [&](double s) {
            return model.nu_integral([&](double z) {
                const double u = std::expm1(p.g(s, z));
                return u * u;
            });
        };
        p.eg_norm2 = p.g_time_independent ? T * rate2(0.0) : integrate_gl(rate2, 0.0, T, kTimeQuad);
        p.comp_rate0 = eg1_mark_integral(p, model, 0.0);
    }
    if (!std::isfinite(p.h_norm2) || !std::isfinite(p.eg_norm2))
        throw Error("exponent pair is not square-integrable");
    return p;
}

ExponentParams make_exponent_separable(std::function<double(double)> h,
                                       std::function<double(double)> gbar, const LevyModel& model,
                                       bool gbar_constant) {
    auto g = [gb = std::move(gbar)](double t, double z) { return gb(t) * gamma_map(z); };
    return make_exponent(std::move(h), g, model, gbar_constant);
}

std::vector<double> doleans_exponential(const SamplePath& p, const ExponentParams& params,
                                        const LevyModel& model) {
    const int n = p.size();
    std::vector<double> z(static_cast<std::size_t>(n));
    double a = 0.0;
    z[0] = 1.0;
    for (int k = 0; k + 1 < n; ++k) {
        const std::size_t ku = static_cast<std::size_t>(k);
        const double tk = p.t[ku];
        const double dt = p.t[ku + 1] - tk;
        if (params.h) {
            const double hv = params.h(tk);
            a += hv * (p.w[ku + 1] - p.w[ku]) - 0.5 * hv * hv * dt;
        }
        if (params.g && model.has_jumps()) {
            const double c =
                params.g_time_independent ? params.comp_rate0 : eg1_mark_integral(params, model, tk);
            a -= c * dt;
            const int j = p.jump_idx[ku + 1];
            if (j >= 0) a += params.g(p.t[ku + 1], p.jumps[static_cast<std::size_t>(j)].size);
        }
        z[ku + 1] = std::exp(a);
    }
    return z;
}

double z_second_moment(const ExponentParams& params, const LevyModel& model, double t) {
    double e = 0.0;
    if (params.h)
        e += integrate_gl([&](double s) { const double v = params.h(s); return v * v; }, 0.0, t,
                          kTimeQuad);
    if (params.g && model.has_jumps()) {
        auto rate2 = [&](double s) {
            return model.nu_integral([&](double z) {
                const double u = std::expm1(params.g(s, z));
                return u * u;
            });
        };
        e += params.g_time_independent ? t * rate2(0.0) : integrate_gl(rate2, 0.0, t, kTimeQuad);
    }
    return std::exp(e);
}

double y_functional(const SamplePath& p, const std::function<double(double)>& h,
                    const std::function<double(double)>& gbar, const LevyModel& model) {
    double a = 0.0;
    const double gamma_rate0 = model.has_jumps()
                                   ? model.nu_integral([](double z) { return gamma_map(z); })
                                   : 0.0;
    for (int k = 0; k + 1 < p.size(); ++k) {
        const std::size_t ku = static_cast<std::size_t>(k);
        const double tk = p.t[ku];
        const double dt = p.t[ku + 1] - tk;
        if (h) a += h(tk) * (p.w[ku + 1] - p.w[ku]);
        if (gbar && model.has_jumps()) {
            a -= gbar(tk) * gamma_rate0 * dt;
            const int j = p.jump_idx[ku + 1];
            if (j >= 0)
                a += gbar(p.t[ku + 1]) * gamma_map(p.jumps[static_cast<std::size_t>(j)].size);
        }
    }
    return std::exp(a);
}

double y_log_mean(const std::function<double(double)>& h,
                  const std::function<double(double)>& gbar, const LevyModel& model, double t) {
    double theta = 0.0;
    if (h)
        theta += 0.5 * integrate_gl([&](double s) { const double v = h(s); return v * v; }, 0.0, t,
                                    kTimeQuad);
    if (gbar && model.has_jumps()) {
        auto rate = [&](double s) {
            return model.nu_integral([&](double z) {
                const double gz = gbar(s) * gamma_map(z);
                return std::expm1(gz) - gz;
            });
        };
        theta += integrate_gl(rate, 0.0, t, kTimeQuad);
    }
    return theta;
}

ZMartingaleReport verify_z_martingale(const LevyModel& model, const TimeGrid& grid,
                                      const ExponentParams& params,
                                      const std::vector<int>& checkpoint_nodes, int n_paths,
                                      std::uint64_t master, double k_se) {
    const std::size_t nc = checkpoint_nodes.size();
    struct Partial {
        std::vector<double> s1, s2, q1, q2;  // sums of Z, Z^2 and their squares
    };
    Partial init;
    init.s1.assign(nc, 0.0);
    init.s2.assign(nc, 0.0);
    init.q1.assign(nc, 0.0);
    init.q2.assign(nc, 0.0);
    auto map_fn = [&](std::int64_t i0, std::int64_t i1, Partial& part) {
        for (std::int64_t i = i0; i < i1; ++i) {
            const SamplePath p =
                simulate_path(model, grid, master, static_cast<std::uint64_t>(i));
            const std::vector<double> z = doleans_exponential(p, params, model);
            for (std::size_t c = 0; c < nc; ++c) {
                const int k = p.index_at(grid.node(checkpoint_nodes[c]));
                const double v = z[static_cast<std::size_t>(k)];
                part.s1[c] += v;
                part.q1[c] += v * v;
                part.s2[c] += v * v;
                part.q2[c] += v * v * v * v;
            }
        }
    };
    auto fold_fn = [&](Partial& acc, const Partial& part) {
        for (std::size_t c = 0; c < nc; ++c) {
            acc.s1[c] += part.s1[c];
            acc.s2[c] += part.s2[c];
            acc.q1[c] += part.q1[c];
            acc.q2[c] += part.q2[c];
        }
    };
    const Partial acc =
        block_map_reduce<Partial>(n_paths, kDefaultBlock, init, map_fn, fold_fn);

    ZMartingaleReport rep;
    rep.pass = true;
    const double n = static_cast<double>(n_paths);
    for (std::size_t c = 0; c < nc; ++c) {
        ZCheckpoint row;
        row.t = grid.node(checkpoint_nodes[c]);
        row.mean_z.value = acc.s1[c] / n;
        row.mean_z.se = std::sqrt(std::max(acc.q1[c] / n - row.mean_z.value * row.mean_z.value, 0.0) / n);
        row.mean_z2.value = acc.s2[c] / n;
        row.mean_z2.se =
            std::sqrt(std::max(acc.q2[c] / n - row.mean_z2.value * row.mean_z2.value, 0.0) / n);
        row.closed_form = z_second_moment(params, model, row.t);
        row.pass = row.mean_z.within(1.0, k_se) && row.mean_z2.within(row.closed_form, k_se);
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

Estimate conditional_z_residual(const LevyModel& model, const TimeGrid& grid,
                                const ExponentParams& params, int t_node, int n_outer, int n_inner,
                                std::uint64_t master) {
    if (n_inner <= 0) throw InnerBudgetZero();
    const double t0 = grid.node(t_node);
    std::vector<double> resid(static_cast<std::size_t>(n_outer));
    parallel_blocks(n_outer, 64, [&](std::int64_t i0, std::int64_t i1, std::int64_t) {
        for (std::int64_t i = i0; i < i1; ++i) {
            const SamplePath p =
                simulate_path(model, grid, master, static_cast<std::uint64_t>(i));
            const std::vector<double> z = doleans_exponential(p, params, model);
            const double zt = z[static_cast<std::size_t>(p.index_at(t0))];
            double s = 0.0;
            for (int r = 0; r < n_inner; ++r) {
                const SamplePath q =
                    resimulate_from(model, p, t0, master, static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(t_node), static_cast<std::uint64_t>(r));
                s += doleans_exponential(q, params, model).back();
            }
            resid[static_cast<std::size_t>(i)] = s / n_inner - zt;
        }
    });
    return mean_se(resid);
}

}  // namespace levym
