#include "levym/clark_ocone.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "levym/errors.hpp"
#include "levym/parallel.hpp"
#include "levym/rng.hpp"

namespace levym {

namespace {
inline std::size_t sz(int i) { return static_cast<std::size_t>(i); }
}  // namespace

IntegrandPair closed_form_integrands(const FunctionalSpec& F, const LevyModel& model,
                                     const TailTable* tab) {
    IntegrandPair pair;
    const double sigma = model.sigma();
    const double mu = model.mu();
    switch (F.hint) {
        case FunctionalSpec::Hint::terminal_value:
            pair.phi = [sigma](double, const SamplePath&, int) { return sigma; };
            pair.psi = [](double, double z, const SamplePath&, int, bool) { return z; };
            return pair;
        case FunctionalSpec::Hint::terminal_square:
            pair.phi = [sigma, mu](double t, const SamplePath& p, int k) {
                return 2.0 * sigma * (p.x[sz(k)] + mu * (p.T - t));
            };
            pair.psi = [mu](double t, double z, const SamplePath& p, int k, bool atom) {
                const double xt = atom ? p.x_left(k) : p.x[sz(k)];
                return z * (2.0 * (xt + mu * (p.T - t)) + z);
            };
            return pair;
        case FunctionalSpec::Hint::none:
            break;
    }
    if (F.variant == Variant::running_max) {
        if (!tab) throw UnsupportedVariant("running maximum needs a tail table");
        const TailTable* tb = tab;
        pair.phi = [tb, sigma](double t, const SamplePath& p, int k) {
            const MaxPrefix mp = running_max_prefix(p);
            return tb->phi(p.T - t, mp.at_node[sz(k)] - p.x[sz(k)], sigma);
        };
        pair.psi = [tb](double t, double z, const SamplePath& p, int k, bool atom) {
            const MaxPrefix mp = running_max_prefix(p);
            const double a = atom ? mp.at_left[sz(k)] - p.x_left(k) : mp.at_node[sz(k)] - p.x[sz(k)];
            return tb->psi(p.T - t, a, z);
        };
        return pair;
    }
    throw UnsupportedVariant("no closed-form projections for this functional");
}

std::optional<double> closed_form_mean(const FunctionalSpec& F, const LevyModel& model,
                                       const TailTable* tab) {
    switch (F.variant) {
        case Variant::smooth_kpoint:
            if (F.hint == FunctionalSpec::Hint::terminal_value) return model.mu() * model.horizon();
            if (F.hint == FunctionalSpec::Hint::terminal_square) {
                const double m = model.mu() * model.horizon();
                return m * m + model.variance_rate() * model.horizon();
            }
            return std::nullopt;
        case Variant::iterated:
            return F.f.slots.empty() ? std::optional<double>(1.0) : std::optional<double>(0.0);
        case Variant::doleans_terminal:
            return 1.0;
        case Variant::running_max:
            if (tab) return tab->em_at(model.horizon());
            return std::nullopt;
    }
    return std::nullopt;
}

Estimate conditional_derivative(const FunctionalSpec& F, const SamplePath& p,
                                const LevyModel& model, double t, std::optional<double> z,
                                int n_inner, std::uint64_t master, std::uint64_t outer_index,
                                int inner_steps) {
    if (n_inner <= 0) throw InnerBudgetZero();
    const std::uint64_t t_index = static_cast<std::uint64_t>(p.grid.node_index(t));
    double s1 = 0.0, s2 = 0.0;
    for (int j = 0; j < n_inner; ++j) {
        const SamplePath q = resimulate_from(model, p, t, master, outer_index, t_index,
                                             static_cast<std::uint64_t>(j), inner_steps);
        const double d = z ? d2_at(F, q, t, *z, model) : d1_at(F, q, t, model);
        s1 += d;
        s2 += d * d;
    }
    const double dn = static_cast<double>(n_inner);
    const double mean = s1 / dn;
    const double var = n_inner > 1 ? std::max(s2 / dn - mean * mean, 0.0) * dn / (dn - 1.0) : 0.0;
    return {mean, std::sqrt(var / dn)};
}

ClarkOconeIntegrands nested_integrands(const FunctionalSpec& F, const SamplePath& p,
                                       const LevyModel& model, const std::vector<int>& t_nodes,
                                       const MarkGrid& marks, int n_inner, std::uint64_t master,
                                       std::uint64_t outer_index, int inner_steps) {
    if (n_inner <= 0) throw InnerBudgetZero();
    ClarkOconeIntegrands out;
    out.method = ClarkOconeIntegrands::Method::nested_mc;
    out.n_inner = n_inner;
    out.z = marks.z;
    const std::size_t nz = marks.z.size();
    out.phi.resize(t_nodes.size());
    out.psi.assign(t_nodes.size() * nz, 0.0);
    for (std::size_t ti = 0; ti < t_nodes.size(); ++ti) {
        const double t = p.grid.node(t_nodes[ti]);
        out.t.push_back(t);
        double acc1 = 0.0;
        std::vector<double> acc2(nz, 0.0);
        for (int j = 0; j < n_inner; ++j) {
            const SamplePath q =
                resimulate_from(model, p, t, master, outer_index,
                                static_cast<std::uint64_t>(t_nodes[ti]),
                                static_cast<std::uint64_t>(j), inner_steps);
            acc1 += d1_at(F, q, t, model);
            for (std::size_t zi = 0; zi < nz; ++zi) acc2[zi] += d2_at(F, q, t, marks.z[zi], model);
        }
        out.phi[ti] = acc1 / n_inner;
        for (std::size_t zi = 0; zi < nz; ++zi) out.psi[ti * nz + zi] = acc2[zi] / n_inner;
    }
    return out;
}

double reconstruct(const SamplePath& p, const LevyModel& model, double mean_f,
                   const IntegrandPair& integrands) {
    return mean_f + ito_integral_w(p, integrands.phi) +
           integral_ntilde(p, integrands.psi, model);
}

IntegrandPair tabled_integrands(const ClarkOconeIntegrands& tab) {
    auto tb = std::make_shared<ClarkOconeIntegrands>(tab);
    IntegrandPair pair;
    auto row_of = [tb](double t) {
        auto it = std::upper_bound(tb->t.begin(), tb->t.end(), t + 1e-12);
        const std::size_t i = it == tb->t.begin() ? 0 : static_cast<std::size_t>(it - tb->t.begin()) - 1;
        return std::min(i, tb->t.size() - 1);
    };
    pair.phi = [tb, row_of](double t, const SamplePath&, int) { return tb->phi[row_of(t)]; };
    pair.psi = [tb, row_of](double t, double z, const SamplePath&, int, bool) {
        const std::size_t i = row_of(t);
        const auto& zs = tb->z;
        if (zs.empty()) return 0.0;
        const double* row = &tb->psi[i * zs.size()];
        if (z <= zs.front()) return row[0];
        if (z >= zs.back()) return row[zs.size() - 1];
        const std::size_t j =
            static_cast<std::size_t>(std::upper_bound(zs.begin(), zs.end(), z) - zs.begin()) - 1;
        const double f = (z - zs[j]) / (zs[j + 1] - zs[j]);
        return row[j] * (1.0 - f) + row[j + 1] * f;
    };
    return pair;
}

namespace {

// Pilot E[F] on an independent stream for functionals without a closed form.
Estimate pilot_mean(const FunctionalSpec& F, const LevyModel& model, const TimeGrid& grid,
                    std::int64_t n_paths, std::uint64_t master) {
    std::uint64_t st = master ^ rngchan::pilot;
    const std::uint64_t pm = splitmix64(st);
    SimOptions opts;
    opts.cell_maxima = (F.variant == Variant::running_max);
    struct Partial {
        double s1 = 0.0, s2 = 0.0;
    };
    Partial acc = block_map_reduce(
        n_paths, kDefaultBlock, Partial{},
        [&](std::int64_t i0, std::int64_t i1, Partial& part) {
            for (std::int64_t i = i0; i < i1; ++i) {
                const SamplePath p =
                    simulate_path(model, grid, pm, static_cast<std::uint64_t>(i), opts);
                const double v = F.evaluate(p, model);
                part.s1 += v;
                part.s2 += v * v;
            }
        },
        [](Partial& a, const Partial& b) {
            a.s1 += b.s1;
            a.s2 += b.s2;
        });
    const double dn = static_cast<double>(n_paths);
    const double mean = acc.s1 / dn;
    return {mean, std::sqrt(std::max(acc.s2 / dn - mean * mean, 0.0) / dn)};
}

}  // namespace

ResidualReport residual_study(const FunctionalSpec& F, const LevyModel& model,
                              const std::vector<int>& ladder, int n_paths, std::uint64_t master,
                              const TailTable* tab) {
    ResidualReport rep;
    int finest = 0;
    for (int ssteps : ladder) finest = std::max(finest, ssteps);
    const std::optional<double> cf = closed_form_mean(F, model, tab);
    if (cf)
        rep.mean_f = {*cf, 0.0};
    else
        rep.mean_f = pilot_mean(F, model, TimeGrid::uniform(model.horizon(), finest), n_paths,
                                master);
    const double mean_f = rep.mean_f.value;
    const bool is_max = (F.variant == Variant::running_max);
    if (is_max && !tab) throw UnsupportedVariant("running maximum needs a tail table");
    const IntegrandPair generic =
        is_max ? IntegrandPair{} : closed_form_integrands(F, model, tab);
    SimOptions opts;
    opts.cell_maxima = is_max;
    for (int ssteps : ladder) {
        const TimeGrid grid = TimeGrid::uniform(model.horizon(), ssteps);
        struct Partial {
            double r2 = 0.0, r4 = 0.0, f1 = 0.0, f2 = 0.0;
        };
        Partial acc = block_map_reduce(
            static_cast<std::int64_t>(n_paths), kDefaultBlock, Partial{},
            [&](std::int64_t i0, std::int64_t i1, Partial& part) {
                for (std::int64_t i = i0; i < i1; ++i) {
                    const SamplePath p =
                        simulate_path(model, grid, master, static_cast<std::uint64_t>(i), opts);
                    const IntegrandPair& pr =
                        is_max ? max_integrands_for_path(p, model, *tab) : generic;
                    const double fv = F.evaluate(p, model);
                    const double r = fv - reconstruct(p, model, mean_f, pr);
                    part.r2 += r * r;
                    part.r4 += r * r * r * r;
                    part.f1 += fv;
                    part.f2 += fv * fv;
                }
            },
            [](Partial& a, const Partial& b) {
                a.r2 += b.r2;
                a.r4 += b.r4;
                a.f1 += b.f1;
                a.f2 += b.f2;
            });
        const double dn = static_cast<double>(n_paths);
        const double mr2 = acc.r2 / dn;
        const double se_r2 = std::sqrt(std::max(acc.r4 / dn - mr2 * mr2, 0.0) / dn);
        const double l2 = std::sqrt(mr2);
        const double mf = acc.f1 / dn;
        const double sd_f = std::sqrt(std::max(acc.f2 / dn - mf * mf, 0.0));
        ResidualRow row;
        row.steps = ssteps;
        row.delta = grid.dt();
        row.resid_l2 = l2;
        row.rel_resid = sd_f > 0.0 ? l2 / sd_f : INFINITY;
        row.se = l2 > 0.0 ? se_r2 / (2.0 * l2) : 0.0;
        rep.rows.push_back(row);
        if (ssteps == finest) rep.var_f = sd_f * sd_f;
    }
    // OLS slope of log resid vs log delta over rows with positive residual.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int nn = 0;
    for (const ResidualRow& row : rep.rows) {
        if (row.resid_l2 <= 0.0) continue;
        const double lx = std::log(row.delta), ly = std::log(row.resid_l2);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++nn;
    }
    rep.slope = nn >= 2 ? (sxy - sx * sy / nn) / (sxx - sx * sx / nn) : 0.0;
    return rep;
}

VarianceIdentity variance_identity(const FunctionalSpec& F, const LevyModel& model,
                                   const TimeGrid& grid, int n_paths, std::uint64_t master,
                                   const TailTable* tab, double k_se) {
    const bool is_max = (F.variant == Variant::running_max);
    if (is_max && !tab) throw UnsupportedVariant("running maximum needs a tail table");
    const IntegrandPair generic =
        is_max ? IntegrandPair{} : closed_form_integrands(F, model, tab);
    SimOptions opts;
    opts.cell_maxima = is_max;
    const auto& nodes = model.mark_nodes();
    struct Partial {
        double f1 = 0.0, f2 = 0.0, f3 = 0.0, f4 = 0.0, q1 = 0.0, q2 = 0.0;
    };
    Partial acc = block_map_reduce(
        static_cast<std::int64_t>(n_paths), kDefaultBlock, Partial{},
        [&](std::int64_t i0, std::int64_t i1, Partial& part) {
            for (std::int64_t i = i0; i < i1; ++i) {
                const SamplePath p =
                    simulate_path(model, grid, master, static_cast<std::uint64_t>(i), opts);
                const IntegrandPair& pr =
                    is_max ? max_integrands_for_path(p, model, *tab) : generic;
                const double fv = F.evaluate(p, model);
                double q = 0.0;
                for (int k = 0; k + 1 < p.size(); ++k) {
                    const double t = p.t[sz(k)];
                    const double dt = p.t[sz(k) + 1] - t;
                    const double v1 = pr.phi(t, p, k);
                    double mark = 0.0;
                    for (const MarkNode& mn : nodes) {
                        const double v2 = pr.psi(t, mn.z, p, k, false);
                        mark += mn.w * v2 * v2;
                    }
                    q += dt * (v1 * v1 + mark);
                }
                part.f1 += fv;
                part.f2 += fv * fv;
                part.f3 += fv * fv * fv;
                part.f4 += fv * fv * fv * fv;
                part.q1 += q;
                part.q2 += q * q;
            }
        },
        [](Partial& a, const Partial& b) {
            a.f1 += b.f1;
            a.f2 += b.f2;
            a.f3 += b.f3;
            a.f4 += b.f4;
            a.q1 += b.q1;
            a.q2 += b.q2;
        });
    const double dn = static_cast<double>(n_paths);
    const double m1 = acc.f1 / dn, m2 = acc.f2 / dn, m3 = acc.f3 / dn, m4 = acc.f4 / dn;
    const double c2 = std::max(m2 - m1 * m1, 0.0);
    const double c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
    VarianceIdentity out;
    out.var_f = {c2, std::sqrt(std::max(c4 - c2 * c2, 0.0) / dn)};
    const double qm = acc.q1 / dn;
    out.integrated = {qm, std::sqrt(std::max(acc.q2 / dn - qm * qm, 0.0) / dn)};
    const double comb =
        std::sqrt(out.var_f.se * out.var_f.se + out.integrated.se * out.integrated.se);
    out.pass = std::abs(out.var_f.value - out.integrated.value) <= k_se * std::max(comb, 1e-300);
    return out;
}

}  // namespace levym
