#include "levym/chaos.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "levym/parallel.hpp"
#include "levym/quadrature.hpp"
#include "levym/rng.hpp"

namespace levym {

MultiIndex::MultiIndex(std::vector<int> entries) : v(std::move(entries)) {
    if (static_cast<int>(v.size()) > kMaxChaosOrder) throw OrderTooLarge(static_cast<int>(v.size()));
    for (int e : v)
        if (e != 1 && e != 2) throw Error("multi-index entries must be 1 or 2");
}

int MultiIndex::brownian_slots() const {
    return static_cast<int>(std::count(v.begin(), v.end(), 1));
}

std::string MultiIndex::str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += static_cast<char>('0' + v[i]);
    }
    return s + ")";
}

std::vector<MultiIndex> MultiIndex::all_of_order(int n) {
    if (n < 1 || n > kMaxChaosOrder) throw OrderTooLarge(n);
    std::vector<MultiIndex> out;
    out.reserve(std::size_t{1} << n);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> v(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = (mask >> k) & 1u ? 2 : 1;
        out.emplace_back(std::move(v));
    }
    std::sort(out.begin(), out.end(),
              [](const MultiIndex& a, const MultiIndex& b) { return a.v < b.v; });
    return out;
}

MultiIndex SimplexFunction::index() const {
    std::vector<int> v;
    v.reserve(slots.size());
    for (const auto& s : slots) v.push_back(s.kind);
    return MultiIndex(std::move(v));
}

SimplexFunction tensor_product(std::function<double(double)> h,
                               std::function<double(double, double)> u, const MultiIndex& idx) {
    if (!h) h = [](double) { return 0.0; };
    if (!u) u = [](double, double) { return 0.0; };
    SimplexFunction f;
    f.slots.reserve(idx.v.size());
    for (int e : idx.v) {
        SlotFactor s;
        s.kind = e;
        if (e == 1)
            s.f_time = h;
        else
            s.f_mark = u;
        f.slots.push_back(std::move(s));
    }
    return f;
}

SimplexFunction unit_simplex_function(const MultiIndex& idx) {
    return tensor_product([](double) { return 1.0; }, [](double, double) { return 1.0; }, idx);
}

namespace {

// One level of the simplex recursion: child[j+1] = child[j] + the cell-j
// contribution of slot s applied to the running inner value par[j].  Cells
// enter by left endpoint, atoms strictly inside the window, and the atom at
// union point j+1 multiplies par[j] (the strict left limit of the inner
// integral), which enforces the ordered simplex.
void level_advance(const SamplePath& p, const LevyModel& model, const SlotFactor& s,
                   const double* cached_rate, const std::vector<double>& par,
                   std::vector<double>& child) {
    const int m = p.size();
    child.resize(static_cast<std::size_t>(m));
    child[0] = 0.0;
    const auto& marks = model.mark_nodes();
    for (int j = 0; j + 1 < m; ++j) {
        const double tj = p.t[static_cast<std::size_t>(j)];
        double inc = 0.0;
        if (s.kind == 1) {
            if (tj >= s.win.lo && tj < s.win.hi)
                inc = par[static_cast<std::size_t>(j)] * s.f_time(tj) *
                      (p.w[static_cast<std::size_t>(j) + 1] - p.w[static_cast<std::size_t>(j)]);
        } else {
            if (!marks.empty() && tj >= s.win.lo && tj < s.win.hi) {
                double rate;
                if (cached_rate) {
                    rate = *cached_rate;
                } else {
                    rate = 0.0;
                    for (const auto& q : marks) rate += q.w * s.f_mark(tj, q.z);
                }
                inc -= (p.t[static_cast<std::size_t>(j) + 1] - tj) *
                       par[static_cast<std::size_t>(j)] * rate;
            }
            const int jn = p.jump_idx[static_cast<std::size_t>(j) + 1];
            if (jn >= 0) {
                const double tau = p.t[static_cast<std::size_t>(j) + 1];
                if (tau > s.win.lo && tau < s.win.hi)
                    inc += par[static_cast<std::size_t>(j)] *
                           s.f_mark(tau, p.jumps[static_cast<std::size_t>(jn)].size);
            }
        }
        child[static_cast<std::size_t>(j) + 1] = child[static_cast<std::size_t>(j)] + inc;
    }
}

Estimate estimate_from_sums(double s, double s2, std::int64_t n) {
    if (n <= 0) return {};
    const double mean = s / static_cast<double>(n);
    const double var =
        n > 1 ? std::max(0.0, (s2 - static_cast<double>(n) * mean * mean) /
                                  static_cast<double>(n - 1))
              : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

double iterated_integral(const SamplePath& p, const SimplexFunction& f, const LevyModel& model) {
    const int n = static_cast<int>(f.slots.size());
    if (n > kMaxChaosOrder) throw OrderTooLarge(n);
    std::vector<double> par(static_cast<std::size_t>(p.size()), 1.0), child;
    for (int k = 0; k < n; ++k) {
        level_advance(p, model, f.slots[static_cast<std::size_t>(k)], nullptr, par, child);
        par.swap(child);
    }
    return par.back();
}

Estimate estimate_inner_product(const LevyModel& model, const TimeGrid& grid,
                                const SimplexFunction& fa, const SimplexFunction& fb, int n_paths,
                                std::uint64_t master) {
    struct Partial {
        double s = 0.0, s2 = 0.0;
    };
    Partial acc = block_map_reduce(
        n_paths, kDefaultBlock, Partial{},
        [&](std::int64_t i0, std::int64_t i1, Partial& part) {
            for (std::int64_t i = i0; i < i1; ++i) {
                const SamplePath p =
                    simulate_path(model, grid, master, static_cast<std::uint64_t>(i));
                const double prod = iterated_integral(p, fa, model) * iterated_integral(p, fb, model);
                part.s += prod;
                part.s2 += prod * prod;
            }
        },
        [](Partial& a, const Partial& b) {
            a.s += b.s;
            a.s2 += b.s2;
        });
    return estimate_from_sums(acc.s, acc.s2, n_paths);
}

double simplex_inner_product(const SimplexFunction& fa, const SimplexFunction& fb,
                             const LevyModel& model, int quad_order) {
    if (fa.index().v != fb.index().v) return 0.0;  // orthogonal across indices
    const int n = static_cast<int>(fa.slots.size());
    if (n == 0) return 1.0;
    if (n > 3) throw OrderTooLarge(n);
    const auto& marks = model.mark_nodes();
    auto factor = [&](int k, double t) -> double {
        const auto& sa = fa.slots[static_cast<std::size_t>(k)];
        const auto& sb = fb.slots[static_cast<std::size_t>(k)];
        if (sa.kind == 1) return sa.f_time(t) * sb.f_time(t);
        double r = 0.0;
        for (const auto& q : marks) r += q.w * sa.f_mark(t, q.z) * sb.f_mark(t, q.z);
        return r;
    };
    std::function<double(int, double)> inner = [&](int k, double upper) -> double {
        if (k == 0) return 1.0;
        const auto& wa = fa.slots[static_cast<std::size_t>(k) - 1].win;
        const auto& wb = fb.slots[static_cast<std::size_t>(k) - 1].win;
        const double lo = std::max({0.0, wa.lo, wb.lo});
        const double hi = std::min({upper, wa.hi, wb.hi});
        if (hi <= lo) return 0.0;
        return integrate_gl([&](double t) { return factor(k - 1, t) * inner(k - 1, t); }, lo, hi,
                            quad_order);
    };
    return inner(n, model.horizon());
}

ChaosReport chaos_expand_Z(const LevyModel& model, const TimeGrid& grid,
                           const ExponentParams& params, int max_order, int n_paths,
                           std::uint64_t master) {
    if (max_order < 1 || max_order > kMaxChaosOrder) throw OrderTooLarge(max_order);
    const int N = max_order;

    // Node enumeration in traversal order: at each depth visit kind 1, then 2.
    std::vector<MultiIndex> node_idx;
    {
        std::vector<int> prefix;
        std::function<void()> rec = [&]() {
            if (static_cast<int>(prefix.size()) == N) return;
            for (int kind : {1, 2}) {
                prefix.push_back(kind);
                node_idx.emplace_back(prefix);
                rec();
                prefix.pop_back();
            }
        };
        rec();
    }
    const int n_nodes = static_cast<int>(node_idx.size());

    SlotFactor sf1, sf2;
    sf1.kind = 1;
    sf1.f_time = params.h ? params.h : [](double) { return 0.0; };
    sf2.kind = 2;
    sf2.f_mark = [g = params.g](double t, double z) { return g ? std::expm1(g(t, z)) : 0.0; };

    double rate_u = 0.0;
    bool have_rate = false;
    if (params.g_time_independent || !params.g) {
        for (const auto& q : model.mark_nodes()) rate_u += q.w * sf2.f_mark(0.0, q.z);
        have_rate = true;
    }
    const double* rate_ptr = have_rate ? &rate_u : nullptr;

    struct Partial {
        std::vector<double> j2, j4;  // per node
        std::vector<double> q1, q2;  // per order, 0-based
        double r1 = 0.0, r2 = 0.0, z1 = 0.0, z2 = 0.0;
    };
    Partial init;
    init.j2.assign(static_cast<std::size_t>(n_nodes), 0.0);
    init.j4.assign(static_cast<std::size_t>(n_nodes), 0.0);
    init.q1.assign(static_cast<std::size_t>(N), 0.0);
    init.q2.assign(static_cast<std::size_t>(N), 0.0);

    Partial acc = block_map_reduce(
        n_paths, kDefaultBlock, init,
        [&](std::int64_t i0, std::int64_t i1, Partial& part) {
            std::vector<std::vector<double>> lv(static_cast<std::size_t>(N) + 1);
            std::array<double, kMaxChaosOrder> qloc{};
            for (std::int64_t i = i0; i < i1; ++i) {
                const SamplePath p =
                    simulate_path(model, grid, master, static_cast<std::uint64_t>(i));
                lv[0].assign(static_cast<std::size_t>(p.size()), 1.0);
                qloc.fill(0.0);
                double series = 1.0;
                int slot = 0;
                std::function<void(int)> rec = [&](int depth) {
                    for (int kind : {1, 2}) {
                        level_advance(p, model, kind == 1 ? sf1 : sf2,
                                      kind == 2 ? rate_ptr : nullptr,
                                      lv[static_cast<std::size_t>(depth)],
                                      lv[static_cast<std::size_t>(depth) + 1]);
                        const double J = lv[static_cast<std::size_t>(depth) + 1].back();
                        const double J2 = J * J;
                        part.j2[static_cast<std::size_t>(slot)] += J2;
                        part.j4[static_cast<std::size_t>(slot)] += J2 * J2;
                        qloc[static_cast<std::size_t>(depth)] += J2;
                        series += J;
                        ++slot;
                        if (depth + 1 < N) rec(depth + 1);
                    }
                };
                rec(0);
                for (int n = 0; n < N; ++n) {
                    part.q1[static_cast<std::size_t>(n)] += qloc[static_cast<std::size_t>(n)];
                    part.q2[static_cast<std::size_t>(n)] +=
                        qloc[static_cast<std::size_t>(n)] * qloc[static_cast<std::size_t>(n)];
                }
                const double z = doleans_exponential(p, params, model).back();
                const double rr = (z - series) * (z - series);
                part.r1 += rr;
                part.r2 += rr * rr;
                part.z1 += z;
                part.z2 += z * z;
            }
        },
        [](Partial& a, const Partial& b) {
            for (std::size_t k = 0; k < a.j2.size(); ++k) {
                a.j2[k] += b.j2[k];
                a.j4[k] += b.j4[k];
            }
            for (std::size_t k = 0; k < a.q1.size(); ++k) {
                a.q1[k] += b.q1[k];
                a.q2[k] += b.q2[k];
            }
            a.r1 += b.r1;
            a.r2 += b.r2;
            a.z1 += b.z1;
            a.z2 += b.z2;
        });

    ChaosReport rep;
    rep.s_total = params.s_total();
    rep.max_order = N;
    double term = 1.0, partial_exp = 1.0;
    for (int n = 1; n <= N; ++n) {
        term *= rep.s_total / n;
        partial_exp += term;
        ChaosOrderRow row;
        row.order = n;
        row.energy = estimate_from_sums(acc.q1[static_cast<std::size_t>(n) - 1],
                                        acc.q2[static_cast<std::size_t>(n) - 1], n_paths);
        row.analytic = term;
        rep.orders.push_back(std::move(row));
    }
    rep.per_index.reserve(static_cast<std::size_t>(n_nodes));
    for (int k = 0; k < n_nodes; ++k)
        rep.per_index.push_back({node_idx[static_cast<std::size_t>(k)],
                                 estimate_from_sums(acc.j2[static_cast<std::size_t>(k)],
                                                    acc.j4[static_cast<std::size_t>(k)], n_paths)});
    std::sort(rep.per_index.begin(), rep.per_index.end(),
              [](const ChaosIndexRow& a, const ChaosIndexRow& b) {
                  if (a.idx.order() != b.idx.order()) return a.idx.order() < b.idx.order();
                  return a.idx.v < b.idx.v;
              });
    rep.trunc_l2sq = estimate_from_sums(acc.r1, acc.r2, n_paths);
    rep.analytic_tail = std::exp(rep.s_total) - partial_exp;
    rep.mean_z = estimate_from_sums(acc.z1, acc.z2, n_paths);
    return rep;
}

InnerProductMatrix inner_product_matrix(const LevyModel& model, const TimeGrid& grid,
                                        int max_order, int n_paths, std::uint64_t master) {
    if (max_order < 1 || max_order > kMaxChaosOrder) throw OrderTooLarge(max_order);
    if (max_order > 3) throw Error("inner-product oracles support order <= 3");
    InnerProductMatrix out;
    for (int n = 1; n <= max_order; ++n)
        for (MultiIndex& idx : MultiIndex::all_of_order(n)) out.indices.push_back(std::move(idx));
    const int nn = static_cast<int>(out.indices.size());
    out.n = nn;

    // Map traversal order (kind 1 then 2 at each depth) to sorted position.
    std::vector<int> slot_of;
    {
        std::vector<int> prefix;
        std::function<void()> rec = [&]() {
            if (static_cast<int>(prefix.size()) == max_order) return;
            for (int kind : {1, 2}) {
                prefix.push_back(kind);
                const MultiIndex idx(prefix);
                for (int q = 0; q < nn; ++q)
                    if (out.indices[static_cast<std::size_t>(q)].v == idx.v) {
                        slot_of.push_back(q);
                        break;
                    }
                rec();
                prefix.pop_back();
            }
        };
        rec();
    }

    SlotFactor sf1, sf2;
    sf1.kind = 1;
    sf1.f_time = [](double) { return 1.0; };
    sf2.kind = 2;
    sf2.f_mark = [](double, double) { return 1.0; };
    const double rate = model.intensity();

    struct Partial {
        std::vector<double> s1, s2;  // per (i, j) pair, row-major full
    };
    Partial init;
    init.s1.assign(static_cast<std::size_t>(nn) * static_cast<std::size_t>(nn), 0.0);
    init.s2 = init.s1;

    Partial acc = block_map_reduce(
        n_paths, kDefaultBlock, init,
        [&](std::int64_t i0, std::int64_t i1, Partial& part) {
            std::vector<std::vector<double>> lv(static_cast<std::size_t>(max_order) + 1);
            std::vector<double> J(static_cast<std::size_t>(nn));
            for (std::int64_t i = i0; i < i1; ++i) {
                const SamplePath p =
                    simulate_path(model, grid, master, static_cast<std::uint64_t>(i));
                lv[0].assign(static_cast<std::size_t>(p.size()), 1.0);
                int slot = 0;
                std::function<void(int)> rec = [&](int depth) {
                    for (int kind : {1, 2}) {
                        level_advance(p, model, kind == 1 ? sf1 : sf2,
                                      kind == 2 ? &rate : nullptr,
                                      lv[static_cast<std::size_t>(depth)],
                                      lv[static_cast<std::size_t>(depth) + 1]);
                        J[static_cast<std::size_t>(slot_of[static_cast<std::size_t>(slot)])] =
                            lv[static_cast<std::size_t>(depth) + 1].back();
                        ++slot;
                        if (depth + 1 < max_order) rec(depth + 1);
                    }
                };
                rec(0);
                for (int a = 0; a < nn; ++a)
                    for (int b = a; b < nn; ++b) {
                        const double v = J[static_cast<std::size_t>(a)] * J[static_cast<std::size_t>(b)];
                        const std::size_t q = static_cast<std::size_t>(a) *
                                                  static_cast<std::size_t>(nn) +
                                              static_cast<std::size_t>(b);
                        part.s1[q] += v;
                        part.s2[q] += v * v;
                    }
            }
        },
        [](Partial& a, const Partial& b) {
            for (std::size_t k = 0; k < a.s1.size(); ++k) {
                a.s1[k] += b.s1[k];
                a.s2[k] += b.s2[k];
            }
        });

    out.entries.assign(static_cast<std::size_t>(nn) * static_cast<std::size_t>(nn), {});
    out.oracle.assign(out.entries.size(), 0.0);
    for (int a = 0; a < nn; ++a)
        for (int b = a; b < nn; ++b) {
            const std::size_t q =
                static_cast<std::size_t>(a) * static_cast<std::size_t>(nn) + static_cast<std::size_t>(b);
            const std::size_t qt =
                static_cast<std::size_t>(b) * static_cast<std::size_t>(nn) + static_cast<std::size_t>(a);
            const Estimate e = estimate_from_sums(acc.s1[q], acc.s2[q], n_paths);
            out.entries[q] = e;
            out.entries[qt] = e;
            const double oa = simplex_inner_product(
                unit_simplex_function(out.indices[static_cast<std::size_t>(a)]),
                unit_simplex_function(out.indices[static_cast<std::size_t>(b)]), model);
            out.oracle[q] = oa;
            out.oracle[qt] = oa;
        }
    return out;
}

TruncationReport chaos_truncation_cv(const LevyModel& model, const TimeGrid& grid,
                                     const ExponentParams& params, int trunc_order,
                                     int cv_max_order, int n_paths, std::uint64_t master,
                                     bool hermite) {
    if (trunc_order < 1 || cv_max_order < trunc_order || cv_max_order > 12)
        throw Error("truncation orders must satisfy 1 <= N <= M <= 12");
    const int N = trunc_order, M = cv_max_order;

    const auto& marks = model.mark_nodes();
    auto eg = [g = params.g](double t, double z) { return g ? std::expm1(g(t, z)) : 0.0; };
    double rate_u = 0.0;
    bool have_rate = false;
    if (params.g_time_independent || !params.g) {
        for (const auto& q : marks) rate_u += q.w * eg(0.0, q.z);
        have_rate = true;
    }

    struct Partial {
        std::vector<double> e1, e2;  // per order 1..M
        double y1 = 0.0, y2 = 0.0, r1 = 0.0, r2 = 0.0, z1 = 0.0, z2 = 0.0;
    };
    Partial init;
    init.e1.assign(static_cast<std::size_t>(M), 0.0);
    init.e2.assign(static_cast<std::size_t>(M), 0.0);

    Partial acc = block_map_reduce(
        n_paths, kDefaultBlock, init,
        [&](std::int64_t i0, std::int64_t i1, Partial& part) {
            std::vector<double> B(static_cast<std::size_t>(M) + 1);
            for (std::int64_t i = i0; i < i1; ++i) {
                const SamplePath p =
                    simulate_path(model, grid, master, static_cast<std::uint64_t>(i));
                B.assign(static_cast<std::size_t>(M) + 1, 0.0);
                B[0] = 1.0;
                for (int j = 0; j + 1 < p.size(); ++j) {
                    const std::size_t ju = static_cast<std::size_t>(j);
                    const double tj = p.t[ju];
                    const double hj = params.h ? params.h(tj) : 0.0;
                    const double dt = p.t[ju + 1] - tj;
                    double inc = hj * (p.w[ju + 1] - p.w[ju]);
                    double atom = 0.0;
                    if (!marks.empty()) {
                        double rate = rate_u;
                        if (!have_rate) {
                            rate = 0.0;
                            for (const auto& q : marks) rate += q.w * eg(tj, q.z);
                        }
                        inc -= dt * rate;
                        const int jn = p.jump_idx[ju + 1];
                        if (jn >= 0)
                            atom = eg(p.t[ju + 1], p.jumps[static_cast<std::size_t>(jn)].size);
                        inc += atom;
                    }
                    if (hermite) {
                        // exact second-order factor of the cell exponential:
                        // Hermite diagonal plus all within-cell cross terms,
                        // minus the impossible repeated-atom square.
                        const double inc2 = 0.5 * (inc * inc - hj * hj * dt - atom * atom);
                        for (int k = M; k >= 1; --k) {
                            double v = B[static_cast<std::size_t>(k) - 1] * inc;
                            if (k >= 2) v += B[static_cast<std::size_t>(k) - 2] * inc2;
                            B[static_cast<std::size_t>(k)] += v;
                        }
                    } else {
                        for (int k = M; k >= 1; --k)
                            B[static_cast<std::size_t>(k)] +=
                                B[static_cast<std::size_t>(k) - 1] * inc;
                    }
                }
                double series = 1.0;
                for (int n = 1; n <= N; ++n) series += B[static_cast<std::size_t>(n)];
                const double z = doleans_exponential(p, params, model).back();
                const double rr = (z - series) * (z - series);
                double tail_sum = 0.0;
                for (int n = N + 1; n <= M; ++n) tail_sum += B[static_cast<std::size_t>(n)];
                const double ycv = rr - tail_sum * tail_sum;
                part.y1 += ycv;
                part.y2 += ycv * ycv;
                part.r1 += rr;
                part.r2 += rr * rr;
                part.z1 += z;
                part.z2 += z * z;
                for (int n = 1; n <= M; ++n) {
                    const double q = B[static_cast<std::size_t>(n)] * B[static_cast<std::size_t>(n)];
                    part.e1[static_cast<std::size_t>(n) - 1] += q;
                    part.e2[static_cast<std::size_t>(n) - 1] += q * q;
                }
            }
        },
        [](Partial& a, const Partial& b) {
            for (std::size_t k = 0; k < a.e1.size(); ++k) {
                a.e1[k] += b.e1[k];
                a.e2[k] += b.e2[k];
            }
            a.y1 += b.y1;
            a.y2 += b.y2;
            a.r1 += b.r1;
            a.r2 += b.r2;
            a.z1 += b.z1;
            a.z2 += b.z2;
        });

    TruncationReport rep;
    rep.s_total = params.s_total();
    rep.trunc_order = N;
    rep.cv_max_order = M;
    double term = 1.0, partial_exp = 1.0, cv_analytic = 0.0;
    for (int n = 1; n <= M; ++n) {
        term *= rep.s_total / n;
        if (n <= N) partial_exp += term;
        if (n > N) cv_analytic += term;
        ChaosOrderRow row;
        row.order = n;
        row.energy = estimate_from_sums(acc.e1[static_cast<std::size_t>(n) - 1],
                                        acc.e2[static_cast<std::size_t>(n) - 1], n_paths);
        row.analytic = term;
        rep.orders.push_back(std::move(row));
    }
    const Estimate ycv = estimate_from_sums(acc.y1, acc.y2, n_paths);
    rep.trunc_l2sq = {ycv.value + cv_analytic, ycv.se};
    rep.raw_l2sq = estimate_from_sums(acc.r1, acc.r2, n_paths);
    rep.analytic_tail = std::exp(rep.s_total) - partial_exp;
    rep.mean_z = estimate_from_sums(acc.z1, acc.z2, n_paths);
    return rep;
}

FirstOrderCoeffs first_order_coefficients(const LevyModel& model, const TerminalFunctional& F,
                                          double tol) {
    if (!F.fhat) throw Error("first_order_coefficients requires the transform of f");
    const double T = model.horizon();
    const double sigma = model.sigma();
    auto fhat = F.fhat;
    auto cf = [model, T](double y) { return std::exp(model.characteristic_exponent(y) * T); };

    // Support search: find y_max past which the damped transform (times the
    // largest weight growth, which is linear) is negligible.
    auto envelope = [&](double y) {
        return std::abs(fhat(y)) * std::abs(cf(y)) * (3.0 + sigma * std::abs(y));
    };
    double base = 0.0;
    for (double y : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) base = std::max(base, envelope(y));
    if (!(base > 0.0)) throw FourierTailTooHeavy("transform vanishes on the probe set");
    double ymax = 1.0;
    int doublings = 0;
    while (envelope(ymax) > 1e-16 * base || envelope(0.75 * ymax) > 1e-16 * base) {
        ymax *= 2.0;
        if (++doublings > 60) throw FourierTailTooHeavy("no integrable tail found");
    }

    // Real f makes the integrand Hermitian, so int over R = 2 Re int over R+.
    const double norm = std::sqrt(2.0 * M_PI);
    auto transform_integral = [fhat, cf, ymax, tol, norm](
                                  const std::function<std::complex<double>(double)>& weight) {
        const std::complex<double> val = adaptive_simpson(
            [&](double y) { return fhat(y) * cf(y) * weight(y); }, 0.0, ymax, tol);
        return 2.0 * val.real() / norm;
    };

    FirstOrderCoeffs out;
    out.y_max = ymax;
    out.n0 = transform_integral([](double) { return std::complex<double>(1.0, 0.0); });
    out.f1 = transform_integral([sigma](double y) { return std::complex<double>(0.0, sigma * y); });
    out.f2 = [fhat, cf, ymax, tol, norm](double z) {
        const std::complex<double> val = adaptive_simpson(
            [&](double y) {
                const std::complex<double> w =
                    std::exp(std::complex<double>(0.0, z * y)) - 1.0;
                return fhat(y) * cf(y) * w;
            },
            0.0, ymax, tol);
        return 2.0 * val.real() / norm;
    };
    return out;
}

}  // namespace levym
