#include "levym/model.hpp"

#include <cmath>

#include "levym/quadrature.hpp"
#include "levym/stats.hpp"

namespace levym {

namespace {
constexpr double kGaussSupport = 8.5;  // +-8.5 sd keeps truncated mass < 1e-12
constexpr int kMarkQuadOrder = 64;

void validate_jump(const JumpSpec& j) {
    if (j.intensity < 0.0) throw NegativeIntensity(j.intensity);
    if (j.intensity == 0.0) return;
    switch (j.law) {
        case JumpLaw::none:
            throw BadLawParams("positive intensity requires a jump law");
        case JumpLaw::two_point:
            if (j.p1 < 0.0 || j.p2 < 0.0 || std::abs(j.p1 + j.p2 - 1.0) > 1e-12)
                throw BadLawParams("two_point probabilities must be >= 0 and sum to 1");
            if (j.z1 == 0.0 || j.z2 == 0.0) throw MassAtZero();
            break;
        case JumpLaw::gaussian:
            if (!(j.sd > 0.0)) throw BadLawParams("gaussian law requires sd > 0");
            break;
        case JumpLaw::uniform:
            if (!(j.hi > j.lo)) throw BadLawParams("uniform law requires hi > lo");
            break;
    }
}

std::vector<MarkNode> build_mark_nodes(const JumpSpec& j) {
    std::vector<MarkNode> nodes;
    if (j.intensity <= 0.0) return nodes;
    switch (j.law) {
        case JumpLaw::two_point:
            nodes.push_back({j.z1, j.intensity * j.p1});
            nodes.push_back({j.z2, j.intensity * j.p2});
            break;
        case JumpLaw::gaussian: {
            const double a = j.mean - kGaussSupport * j.sd, b = j.mean + kGaussSupport * j.sd;
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (const auto& q : gauss_legendre(kMarkQuadOrder)) {
                const double z = mid + half * q.x;
                const double dens = std::exp(-0.5 * (z - j.mean) * (z - j.mean) / (j.sd * j.sd)) /
                                    (j.sd * std::sqrt(2.0 * M_PI));
                nodes.push_back({z, j.intensity * dens * q.w * half});
            }
            break;
        }
        case JumpLaw::uniform: {
            const double mid = 0.5 * (j.lo + j.hi), half = 0.5 * (j.hi - j.lo);
            for (const auto& q : gauss_legendre(kMarkQuadOrder))
                nodes.push_back({mid + half * q.x, j.intensity * q.w / 2.0});
            break;
        }
        case JumpLaw::none:
            break;
    }
    return nodes;
}
}  // namespace

LevyModel::LevyModel(double mu, double sigma, double horizon, JumpSpec jump)
    : mu_(mu), sigma_(sigma), horizon_(horizon), jump_(jump) {
    if (!(sigma_ > 0.0)) throw SigmaNotPositive(sigma_);
    if (!(horizon_ > 0.0)) throw BadLawParams("horizon must be > 0");
    validate_jump(jump_);
    mark_nodes_ = build_mark_nodes(jump_);
}

LevyModel validate_model(double mu, double sigma, double horizon, const JumpSpec& jump) {
    return LevyModel(mu, sigma, horizon, jump);
}

double LevyModel::mean_jump() const {
    if (!has_jumps()) return 0.0;
    switch (jump_.law) {
        case JumpLaw::two_point: return jump_.p1 * jump_.z1 + jump_.p2 * jump_.z2;
        case JumpLaw::gaussian: return jump_.mean;
        case JumpLaw::uniform: return 0.5 * (jump_.lo + jump_.hi);
        case JumpLaw::none: return 0.0;
    }
    return 0.0;
}

double LevyModel::mean_jump_sq() const {
    if (!has_jumps()) return 0.0;
    switch (jump_.law) {
        case JumpLaw::two_point: return jump_.p1 * jump_.z1 * jump_.z1 + jump_.p2 * jump_.z2 * jump_.z2;
        case JumpLaw::gaussian: return jump_.mean * jump_.mean + jump_.sd * jump_.sd;
        case JumpLaw::uniform: {
            const double a = jump_.lo, b = jump_.hi;
            return (a * a + a * b + b * b) / 3.0;
        }
        case JumpLaw::none: return 0.0;
    }
    return 0.0;
}

double LevyModel::nu_integral(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (const auto& n : mark_nodes_) s += n.w * f(n.z);
    return s;
}

std::complex<double> LevyModel::nu_integral_c(
    const std::function<std::complex<double>(double)>& f) const {
    std::complex<double> s = 0.0;
    for (const auto& n : mark_nodes_) s += n.w * f(n.z);
    return s;
}

double LevyModel::jump_quantile(double q) const {
    switch (jump_.law) {
        case JumpLaw::two_point: {
            const bool first_low = jump_.z1 < jump_.z2;
            const double lo = first_low ? jump_.z1 : jump_.z2;
            const double hi = first_low ? jump_.z2 : jump_.z1;
            const double plo = first_low ? jump_.p1 : jump_.p2;
            return q <= plo ? lo : hi;
        }
        case JumpLaw::gaussian: return jump_.mean + jump_.sd * normal_ppf(q);
        case JumpLaw::uniform: return jump_.lo + q * (jump_.hi - jump_.lo);
        case JumpLaw::none: break;
    }
    throw UnsupportedVariant("jump_quantile without a jump law");
}

double LevyModel::sample_jump(std::mt19937_64& rng) const {
    switch (jump_.law) {
        case JumpLaw::two_point: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            return u(rng) < jump_.p1 ? jump_.z1 : jump_.z2;
        }
        case JumpLaw::gaussian: {
            std::normal_distribution<double> n(jump_.mean, jump_.sd);
            return n(rng);
        }
        case JumpLaw::uniform: {
            std::uniform_real_distribution<double> u(jump_.lo, jump_.hi);
            return u(rng);
        }
        case JumpLaw::none: break;
    }
    throw UnsupportedVariant("sample_jump without a jump law");
}

double LevyModel::variance_rate() const {
    return sigma_ * sigma_ + jump_.intensity * mean_jump_sq();
}

double LevyModel::alpha() const {
    if (!has_jumps()) return mu_;
    return mu_ - nu_integral([](double z) { return std::abs(z) >= 1.0 ? z : 0.0; });
}

std::complex<double> LevyModel::characteristic_exponent(double y) const {
    const std::complex<double> i(0.0, 1.0);
    std::complex<double> psi = i * mu_ * y - 0.5 * sigma_ * sigma_ * y * y;
    if (has_jumps())
        psi += nu_integral_c([&](double z) { return std::exp(i * y * z) - 1.0 - i * y * z; });
    return psi;
}

double gamma_map(double z) { return z < 0.0 ? std::expm1(z) : -std::expm1(-z); }

}  // namespace levym
