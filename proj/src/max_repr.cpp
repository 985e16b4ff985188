#include "levym/max_repr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>

#include "levym/errors.hpp"
#include "levym/parallel.hpp"
#include "levym/rng.hpp"

namespace levym {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline std::size_t sz(int i) { return static_cast<std::size_t>(i); }
}  // namespace

RunningMax running_max(const SamplePath& p) {
    RunningMax r{p.x[0], p.t[0], 0};
    const int m = p.size();
    if (p.has_cell_max()) {
        for (int k = 0; k + 1 < m; ++k) {
            if (p.cell_max[sz(k)] > r.value) {
                r.value = p.cell_max[sz(k)];
                r.argmax_time = p.t[sz(k)];
                r.argmax_cell = k;
            }
            if (p.x[sz(k) + 1] > r.value) {
                r.value = p.x[sz(k) + 1];
                r.argmax_time = p.t[sz(k) + 1];
                r.argmax_cell = k + 1;
            }
        }
    } else {
        for (int k = 1; k < m; ++k) {
            const double xl = p.x_left(k);
            if (xl > r.value) {
                r.value = xl;
                r.argmax_time = p.t[sz(k)];
                r.argmax_cell = k;
            }
            if (p.x[sz(k)] > r.value) {
                r.value = p.x[sz(k)];
                r.argmax_time = p.t[sz(k)];
                r.argmax_cell = k;
            }
        }
    }
    return r;
}

MaxPrefix running_max_prefix(const SamplePath& p) {
    const int m = p.size();
    MaxPrefix mp;
    mp.at_node.resize(sz(m));
    mp.at_left.resize(sz(m));
    double run = p.x[0];
    mp.at_node[0] = run;
    mp.at_left[0] = run;
    for (int k = 1; k < m; ++k) {
        const double cellm = p.has_cell_max()
                                 ? p.cell_max[sz(k) - 1]
                                 : std::max(p.x[sz(k) - 1], p.x_left(k));
        const double left = std::max(run, cellm);
        mp.at_left[sz(k)] = left;
        run = std::max(left, p.x[sz(k)]);
        mp.at_node[sz(k)] = run;
    }
    return mp;
}

std::vector<double> running_max_suffix(const SamplePath& p) {
    const int m = p.size();
    std::vector<double> s(sz(m));
    s[sz(m) - 1] = kNegInf;
    for (int k = m - 2; k >= 0; --k) {
        const double cellm = p.has_cell_max()
                                 ? p.cell_max[sz(k)]
                                 : p.x_left(k + 1);
        s[sz(k)] = std::max({s[sz(k) + 1], cellm, p.x[sz(k) + 1]});
    }
    return s;
}

// --- TailTable queries ---

int TailTable::s_index(double s_query, double tol) const {
    if (s.size() < 2) throw Error("tail table has no horizon rows");
    const double ds = s[1] - s[0];
    const long i = std::lround(s_query / ds);
    if (i < 0 || i >= static_cast<long>(s.size()) ||
        std::abs(s[static_cast<std::size_t>(i)] - s_query) > tol * std::max(1.0, T))
        throw TNotOnGrid(s_query);
    return static_cast<int>(i);
}

namespace {

// Row-local linear interpolation of fbar; 1 left of zero, throws past z_max.
double row_fbar(const std::vector<double>& z, const double* row, double zz) {
    if (zz < z.front()) return 1.0;
    if (zz > z.back())
        throw ExtrapolationBeyondTable("level " + std::to_string(zz) + " above table z-max " +
                                       std::to_string(z.back()));
    const double dz = z[1] - z[0];
    std::size_t j = std::min(z.size() - 2, static_cast<std::size_t>(std::max(0.0, (zz - z[0]) / dz)));
    const double f = (zz - z[j]) / dz;
    return row[j] * (1.0 - f) + row[j + 1] * f;
}

// Exact integral of the interpolated row from a to z_max given the
// precomputed node tail integrals `irow`.
double row_iint(const std::vector<double>& z, const double* frow, const double* irow, double a) {
    if (a < z.front()) return irow[0] + (z.front() - a);  // fbar = 1 left of 0
    if (a > z.back())
        throw ExtrapolationBeyondTable("gap " + std::to_string(a) + " above table z-max " +
                                       std::to_string(z.back()));
    const double dz = z[1] - z[0];
    std::size_t j = std::min(z.size() - 2, static_cast<std::size_t>(std::max(0.0, (a - z[0]) / dz)));
    const double f = (a - z[j]) / dz;
    const double fa = frow[j] * (1.0 - f) + frow[j + 1] * f;
    return irow[j + 1] + 0.5 * (fa + frow[j + 1]) * (z[j + 1] - a);
}

}  // namespace

double TailTable::fbar_at(double s_query, double zz) const {
    if (s_query < -1e-12 || s_query > T * (1.0 + 1e-12))
        throw ExtrapolationBeyondTable("horizon " + std::to_string(s_query));
    const double ds = s[1] - s[0];
    const double pos = std::clamp(s_query / ds, 0.0, static_cast<double>(s.size() - 1));
    const std::size_t i = std::min(s.size() - 2, static_cast<std::size_t>(pos));
    const double f = pos - static_cast<double>(i);
    const std::size_t nz = z.size();
    const double lo = row_fbar(z, &fbar[i * nz], zz);
    const double hi = row_fbar(z, &fbar[(i + 1) * nz], zz);
    return lo * (1.0 - f) + hi * f;
}

double TailTable::i_at(double s_query, double a) const {
    if (s_query < -1e-12 || s_query > T * (1.0 + 1e-12))
        throw ExtrapolationBeyondTable("horizon " + std::to_string(s_query));
    const double ds = s[1] - s[0];
    const double pos = std::clamp(s_query / ds, 0.0, static_cast<double>(s.size() - 1));
    const std::size_t i = std::min(s.size() - 2, static_cast<std::size_t>(pos));
    const double f = pos - static_cast<double>(i);
    const std::size_t nz = z.size();
    const double lo = row_iint(z, &fbar[i * nz], &iint[i * nz], a);
    const double hi = row_iint(z, &fbar[(i + 1) * nz], &iint[(i + 1) * nz], a);
    return lo * (1.0 - f) + hi * f;
}

double TailTable::em_at(double s_query) const { return i_at(s_query, 0.0); }

double TailTable::i_se_at(double s_query, double a) const {
    const int i = s_index(s_query);
    const std::size_t nz = z.size();
    const double* se = &fbar_se[sz(i) * nz];
    const double aa = std::max(a, z.front());
    if (aa > z.back()) return 0.0;
    const double dz = z[1] - z[0];
    std::size_t j = std::min(z.size() - 2, static_cast<std::size_t>(std::max(0.0, (aa - z[0]) / dz)));
    double acc = 0.5 * (se[j] + se[j + 1]) * (z[j + 1] - aa);
    for (std::size_t q = j + 1; q + 1 < nz; ++q) acc += 0.5 * (se[q] + se[q + 1]) * dz;
    return acc;
}

double TailTable::excess_m2(double s_query, double a) const {
    const int i = s_index(s_query);
    const std::size_t nz = z.size();
    const double* ii = &iint[sz(i) * nz];
    double acc = 0.0;  // int_{max(a, 0)}^{z_max} I du, trapezoid on the nodes
    const double aa = std::max(a, z.front());
    if (aa <= z.back()) {
        const double dz = z[1] - z[0];
        const std::size_t j =
            std::min(nz - 2, static_cast<std::size_t>(std::max(0.0, (aa - z[0]) / dz)));
        const double f = (aa - z[j]) / (z[j + 1] - z[j]);
        const double ia = ii[j] * (1.0 - f) + ii[j + 1] * f;
        acc = 0.5 * (ia + ii[j + 1]) * (z[j + 1] - aa);
        for (std::size_t q = j + 1; q + 1 < nz; ++q) acc += 0.5 * (ii[q] + ii[q + 1]) * dz;
    }
    if (a < z.front()) {  // slope -1 extension of I below the grid
        const double d = z.front() - a;
        acc += ii[0] * d + 0.5 * d * d;
    }
    return 2.0 * acc;
}

double TailTable::eplus_at(double s_query, double c_shift) const {
    if (c_shift >= 0.0) return em_at(s_query) + c_shift;
    return i_at(s_query, -c_shift);
}

double TailTable::psi(double s_query, double a, double zz) const {
    const double gap = std::max(a, 0.0);
    const double c = zz - gap;
    if (c >= 0.0) return em_at(s_query) + c - i_at(s_query, gap);
    return i_at(s_query, gap - zz) - i_at(s_query, gap);
}

double TailTable::phi(double s_query, double a, double sigma) const {
    return sigma * fbar_at(s_query, std::max(a, 0.0));
}

// --- build ---

double pilot_z_max(const LevyModel& model, const TimeGrid& grid, int n_pilot,
                   std::uint64_t master) {
    std::uint64_t st = master ^ rngchan::pilot;
    const std::uint64_t pm = splitmix64(st);
    double worst = 0.0;
    SimOptions opts;
    opts.cell_maxima = true;
    for (int i = 0; i < n_pilot; ++i) {
        const SamplePath p = simulate_path(model, grid, pm, static_cast<std::uint64_t>(i), opts);
        const MaxPrefix mp = running_max_prefix(p);
        for (int k = 0; k < p.size(); ++k) {
            worst = std::max(worst, mp.at_node[sz(k)] - p.x[sz(k)]);
            worst = std::max(worst, mp.at_node[sz(k)]);
        }
    }
    double jspan = 0.0;
    if (model.has_jumps())
        jspan = std::max(std::abs(model.jump_quantile(1e-6)), std::abs(model.jump_quantile(1.0 - 1e-6)));
    return 1.5 * worst + 1.05 * jspan;
}

TailTable build_tail_table(const LevyModel& model, const TimeGrid& grid, int n_z, double z_max,
                           std::int64_t n_paths, std::uint64_t master) {
    if (n_z < 2 || z_max <= 0.0) throw Error("tail table needs n_z >= 2 and z_max > 0");
    const int m = grid.steps;
    const std::size_t ns = sz(m) + 1, nz = sz(n_z);
    TailTable tab;
    tab.T = grid.T;
    tab.n_paths = n_paths;
    tab.seed = master;
    tab.s.resize(ns);
    for (int k = 0; k <= m; ++k) tab.s[sz(k)] = grid.node(k);
    tab.z.resize(nz);
    for (int j = 0; j < n_z; ++j) tab.z[sz(j)] = z_max * static_cast<double>(j) / (n_z - 1);
    for (int r : {m / 4, m / 2, 3 * m / 4, m})
        if (r > 0 && (tab.check_rows.empty() || tab.check_rows.back() != r))
            tab.check_rows.push_back(r);
    const double cfrac[] = {0.01, 0.02, 0.04, 0.07, 0.12, 0.18, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75};
    for (double f : cfrac) tab.c.push_back(-f * z_max);
    const std::size_t nr = tab.check_rows.size(), nc = tab.c.size();

    // Integer first-crossing counts merge order-free; double sums go to
    // per-block slots folded in block order.
    std::vector<std::int64_t> cross(ns * nz, 0);
    std::mutex cross_mu;
    const std::int64_t nblocks = (n_paths + kDefaultBlock - 1) / kDefaultBlock;
    std::vector<double> em_slot(static_cast<std::size_t>(nblocks) * ns, 0.0);
    std::vector<double> em2_slot(static_cast<std::size_t>(nblocks) * ns, 0.0);
    std::vector<double> ep_slot(static_cast<std::size_t>(nblocks) * nr * nc, 0.0);
    std::vector<double> ep2_slot(static_cast<std::size_t>(nblocks) * nr * nc, 0.0);

    SimOptions opts;
    opts.cell_maxima = true;
    const double tol = 1e-9 * std::max(1.0, grid.T);
    parallel_blocks(n_paths, kDefaultBlock, [&](std::int64_t i0, std::int64_t i1, std::int64_t b) {
        std::vector<std::int32_t> diff(ns * nz, 0);
        std::vector<double> mk(ns);
        double* ems = &em_slot[static_cast<std::size_t>(b) * ns];
        double* em2s = &em2_slot[static_cast<std::size_t>(b) * ns];
        double* eps = &ep_slot[static_cast<std::size_t>(b) * nr * nc];
        double* ep2s = &ep2_slot[static_cast<std::size_t>(b) * nr * nc];
        for (std::int64_t i = i0; i < i1; ++i) {
            const SamplePath p =
                simulate_path(model, grid, master, static_cast<std::uint64_t>(i), opts);
            const MaxPrefix mp = running_max_prefix(p);
            int nb = 0;
            for (int j = 0; j < p.size() && nb <= m; ++j)
                if (std::abs(p.t[sz(j)] - grid.node(nb)) <= tol) mk[sz(nb++)] = mp.at_node[sz(j)];
            if (nb != m + 1) throw Error("base grid nodes missing from union path");
            std::size_t jc = 0;
            for (std::size_t k = 0; k < ns; ++k) {
                while (jc < nz && mk[k] > tab.z[jc]) {
                    ++diff[k * nz + jc];
                    ++jc;
                }
                ems[k] += mk[k];
                em2s[k] += mk[k] * mk[k];
            }
            for (std::size_t r = 0; r < nr; ++r)
                for (std::size_t ci = 0; ci < nc; ++ci) {
                    const double v = std::max(mk[sz(tab.check_rows[r])] + tab.c[ci], 0.0);
                    eps[r * nc + ci] += v;
                    ep2s[r * nc + ci] += v * v;
                }
        }
        std::lock_guard<std::mutex> lock(cross_mu);
        for (std::size_t q = 0; q < ns * nz; ++q) cross[q] += diff[q];
    });

    // Suffix structure: count{M_{s_k} > z_j} = sum of first crossings at rows <= k.
    tab.fbar.assign(ns * nz, 0.0);
    tab.fbar_se.assign(ns * nz, 0.0);
    const double dn = static_cast<double>(n_paths);
    for (std::size_t j = 0; j < nz; ++j) {
        std::int64_t acc = 0;
        for (std::size_t k = 0; k < ns; ++k) {
            acc += cross[k * nz + j];
            const double pb = static_cast<double>(acc) / dn;
            tab.fbar[k * nz + j] = pb;
            tab.fbar_se[k * nz + j] = std::sqrt(std::max(pb * (1.0 - pb), 0.0) / dn);
        }
    }

    // Isotonic audit: the counting scheme is monotone by construction; any
    // violation would indicate a defect, so projections are counted.
    tab.isotonic_fixes = 0;
    for (std::size_t k = 0; k < ns; ++k)
        for (std::size_t j = 0; j + 1 < nz; ++j)
            if (tab.fbar[k * nz + j + 1] > tab.fbar[k * nz + j]) {
                tab.fbar[k * nz + j + 1] = tab.fbar[k * nz + j];
                ++tab.isotonic_fixes;
            }
    for (std::size_t j = 0; j < nz; ++j)
        for (std::size_t k = 0; k + 1 < ns; ++k)
            if (tab.fbar[(k + 1) * nz + j] < tab.fbar[k * nz + j]) {
                tab.fbar[(k + 1) * nz + j] = tab.fbar[k * nz + j];
                ++tab.isotonic_fixes;
            }

    tab.iint.assign(ns * nz, 0.0);
    const double dz = tab.z[1] - tab.z[0];
    for (std::size_t k = 0; k < ns; ++k)
        for (std::size_t j = nz - 1; j-- > 0;)
            tab.iint[k * nz + j] =
                tab.iint[k * nz + j + 1] + 0.5 * (tab.fbar[k * nz + j] + tab.fbar[k * nz + j + 1]) * dz;

    tab.em.resize(ns);
    tab.em_direct.resize(ns);
    tab.em_direct_se.resize(ns);
    for (std::size_t k = 0; k < ns; ++k) {
        tab.em[k] = tab.iint[k * nz];
        double s1 = 0.0, s2 = 0.0;
        for (std::int64_t b = 0; b < nblocks; ++b) {
            s1 += em_slot[static_cast<std::size_t>(b) * ns + k];
            s2 += em2_slot[static_cast<std::size_t>(b) * ns + k];
        }
        const double mean = s1 / dn;
        tab.em_direct[k] = mean;
        tab.em_direct_se[k] = std::sqrt(std::max(s2 / dn - mean * mean, 0.0) / dn);
    }

    tab.eplus.resize(nr * nc);
    tab.eplus_se.resize(nr * nc);
    for (std::size_t q = 0; q < nr * nc; ++q) {
        double s1 = 0.0, s2 = 0.0;
        for (std::int64_t b = 0; b < nblocks; ++b) {
            s1 += ep_slot[static_cast<std::size_t>(b) * nr * nc + q];
            s2 += ep2_slot[static_cast<std::size_t>(b) * nr * nc + q];
        }
        const double mean = s1 / dn;
        tab.eplus[q] = mean;
        tab.eplus_se[q] = std::sqrt(std::max(s2 / dn - mean * mean, 0.0) / dn);
    }
    return tab;
}

// --- persistence ---

namespace {
constexpr std::uint64_t kTableMagic = 0x4c56594d41585431ull;  // "LVYMAXT1"

template <typename T>
void put(std::ofstream& os, const std::vector<T>& v) {
    const std::uint64_t n = v.size();
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
}

template <typename T>
void get(std::ifstream& is, std::vector<T>& v) {
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!is || n > (1ull << 32)) throw Error("corrupt tail-table file");
    v.resize(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!is) throw Error("truncated tail-table file");
}
}  // namespace

void save_tail_table(const TailTable& tab, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os.write(reinterpret_cast<const char*>(&kTableMagic), sizeof kTableMagic);
    os.write(reinterpret_cast<const char*>(&tab.T), sizeof tab.T);
    os.write(reinterpret_cast<const char*>(&tab.n_paths), sizeof tab.n_paths);
    os.write(reinterpret_cast<const char*>(&tab.seed), sizeof tab.seed);
    const std::int64_t fixes = tab.isotonic_fixes;
    os.write(reinterpret_cast<const char*>(&fixes), sizeof fixes);
    put(os, tab.s);
    put(os, tab.z);
    put(os, tab.fbar);
    put(os, tab.fbar_se);
    put(os, tab.iint);
    put(os, tab.em);
    put(os, tab.em_direct);
    put(os, tab.em_direct_se);
    put(os, tab.check_rows);
    put(os, tab.c);
    put(os, tab.eplus);
    put(os, tab.eplus_se);
    if (!os) throw Error("failed writing " + path);
}

TailTable load_tail_table(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path);
    std::uint64_t magic = 0;
    is.read(reinterpret_cast<char*>(&magic), sizeof magic);
    if (!is || magic != kTableMagic) throw Error("not a tail-table file: " + path);
    TailTable tab;
    is.read(reinterpret_cast<char*>(&tab.T), sizeof tab.T);
    is.read(reinterpret_cast<char*>(&tab.n_paths), sizeof tab.n_paths);
    is.read(reinterpret_cast<char*>(&tab.seed), sizeof tab.seed);
    std::int64_t fixes = 0;
    is.read(reinterpret_cast<char*>(&fixes), sizeof fixes);
    tab.isotonic_fixes = static_cast<int>(fixes);
    get(is, tab.s);
    get(is, tab.z);
    get(is, tab.fbar);
    get(is, tab.fbar_se);
    get(is, tab.iint);
    get(is, tab.em);
    get(is, tab.em_direct);
    get(is, tab.em_direct_se);
    get(is, tab.check_rows);
    get(is, tab.c);
    get(is, tab.eplus);
    get(is, tab.eplus_se);
    if (tab.fbar.size() != tab.s.size() * tab.z.size()) throw Error("inconsistent tail-table file");
    return tab;
}

void write_tail_table_csv(const TailTable& tab, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fprintf(f, "section,s,z,value,se\n");
    const std::size_t nz = tab.z.size();
    for (std::size_t k = 0; k < tab.s.size(); ++k)
        for (std::size_t j = 0; j < nz; ++j)
            std::fprintf(f, "fbar,%.17g,%.17g,%.17g,%.17g\n", tab.s[k], tab.z[j],
                         tab.fbar[k * nz + j], tab.fbar_se[k * nz + j]);
    for (std::size_t k = 0; k < tab.s.size(); ++k)
        std::fprintf(f, "em,%.17g,,%.17g,%.17g\n", tab.s[k], tab.em_direct[k],
                     tab.em_direct_se[k]);
    for (std::size_t r = 0; r < tab.check_rows.size(); ++r)
        for (std::size_t ci = 0; ci < tab.c.size(); ++ci)
            std::fprintf(f, "eplus,%.17g,%.17g,%.17g,%.17g\n", tab.s[sz(tab.check_rows[r])],
                         tab.c[ci], tab.eplus[r * tab.c.size() + ci],
                         tab.eplus_se[r * tab.c.size() + ci]);
    std::fclose(f);
}

// --- queries on paths ---

double shiryaev_yor(const SamplePath& p, double t, const TailTable& tab) {
    const int k = p.index_at(t);
    const MaxPrefix mp = running_max_prefix(p);
    const double mt = mp.at_node[sz(k)];
    const double a = std::max(mt - p.x[sz(k)], 0.0);
    return mt + tab.i_at(p.T - t, a);
}

IntegrandPair max_integrands_for_path(const SamplePath& p, const LevyModel& model,
                                      const TailTable& tab) {
    auto mp = std::make_shared<MaxPrefix>(running_max_prefix(p));
    const TailTable* tb = &tab;
    const double sigma = model.sigma();
    const double T = p.T;
    IntegrandPair pair;
    pair.phi = [mp, tb, sigma, T](double t, const SamplePath& q, int k) {
        const double a = mp->at_node[sz(k)] - q.x[sz(k)];
        return tb->phi(T - t, a, sigma);
    };
    pair.psi = [mp, tb, T](double t, double zz, const SamplePath& q, int k, bool atom) {
        const double a = atom ? mp->at_left[sz(k)] - q.x_left(k) : mp->at_node[sz(k)] - q.x[sz(k)];
        return tb->psi(T - t, a, zz);
    };
    return pair;
}

MaxReport verify_max_representation(const LevyModel& model, const std::vector<int>& ladder,
                                    const TailTable& tab, int n_paths, std::uint64_t master) {
    MaxReport rep;
    const double mean_f = tab.em_at(model.horizon());
    const double sigma = model.sigma();
    SimOptions opts;
    opts.cell_maxima = true;
    int finest = 0;
    for (int ssteps : ladder) finest = std::max(finest, ssteps);
    for (int ssteps : ladder) {
        const TimeGrid grid = TimeGrid::uniform(model.horizon(), ssteps);
        struct Partial {
            double r2 = 0.0, r4 = 0.0, m1 = 0.0, m2 = 0.0, worst = 0.0;
            std::int64_t phiv = 0, psiv = 0, nodes = 0;
        };
        Partial acc = block_map_reduce(
            n_paths, kDefaultBlock, Partial{},
            [&](std::int64_t i0, std::int64_t i1, Partial& part) {
                for (std::int64_t i = i0; i < i1; ++i) {
                    const SamplePath p =
                        simulate_path(model, grid, master, static_cast<std::uint64_t>(i), opts);
                    const IntegrandPair pr = max_integrands_for_path(p, model, tab);
                    const double mt = running_max(p).value;
                    const double rec =
                        mean_f + ito_integral_w(p, pr.phi) + integral_ntilde(p, pr.psi, model);
                    const double r = mt - rec;
                    part.r2 += r * r;
                    part.r4 += r * r * r * r;
                    part.m1 += mt;
                    part.m2 += mt * mt;
                    for (int k = 0; k + 1 < p.size(); ++k) {
                        const double v = pr.phi(p.t[sz(k)], p, k);
                        if (v < -1e-12 || v > sigma + 1e-12) ++part.phiv;
                        ++part.nodes;
                        for (const auto& q : model.mark_nodes()) {
                            const double w = pr.psi(p.t[sz(k)], q.z, p, k, false);
                            const double ex = std::abs(w) - std::abs(q.z);
                            if (ex > 1e-9) {
                                ++part.psiv;
                                part.worst = std::max(part.worst, ex);
                            }
                            ++part.nodes;
                        }
                    }
                    for (const Jump& j : p.jumps) {
                        const double w = pr.psi(j.time, j.size, p, j.union_index, true);
                        const double ex = std::abs(w) - std::abs(j.size);
                        if (ex > 1e-9) {
                            ++part.psiv;
                            part.worst = std::max(part.worst, ex);
                        }
                        ++part.nodes;
                    }
                }
            },
            [](Partial& a, const Partial& b) {
                a.r2 += b.r2;
                a.r4 += b.r4;
                a.m1 += b.m1;
                a.m2 += b.m2;
                a.worst = std::max(a.worst, b.worst);
                a.phiv += b.phiv;
                a.psiv += b.psiv;
                a.nodes += b.nodes;
            });
        const double dn = static_cast<double>(n_paths);
        const double mr2 = acc.r2 / dn;
        const double se_r2 = std::sqrt(std::max(acc.r4 / dn - mr2 * mr2, 0.0) / dn);
        const double l2 = std::sqrt(mr2);
        const double mm = acc.m1 / dn;
        const double sd_m = std::sqrt(std::max(acc.m2 / dn - mm * mm, 0.0));
        MaxLadderRow row;
        row.steps = ssteps;
        row.delta = grid.dt();
        row.resid_l2 = l2;
        row.rel_resid = sd_m > 0.0 ? l2 / sd_m : INFINITY;
        row.se = l2 > 0.0 ? se_r2 / (2.0 * l2) : 0.0;
        rep.ladder.push_back(row);
        rep.phi_violations += acc.phiv;
        rep.psi_violations += acc.psiv;
        rep.nodes_checked += acc.nodes;
        rep.worst_psi_excess = std::max(rep.worst_psi_excess, acc.worst);
        if (ssteps == finest) {
            const double se_m = std::sqrt(std::max(acc.m2 / dn - mm * mm, 0.0) / dn);
            rep.mean_max = {mm, se_m};
        }
    }
    return rep;
}

}  // namespace levym
