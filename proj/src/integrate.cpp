#include "levym/integrate.hpp"

namespace levym {

double ito_integral_w(const SamplePath& p, const Integrand1& f) {
    double s = 0.0;
    for (int k = 0; k + 1 < p.size(); ++k)
        s += f(p.t[static_cast<std::size_t>(k)], p, k) *
             (p.w[static_cast<std::size_t>(k) + 1] - p.w[static_cast<std::size_t>(k)]);
    return s;
}

double compensator(const SamplePath& p, const Integrand2& f, const LevyModel& model) {
    if (!model.has_jumps()) return 0.0;
    const auto& nodes = model.mark_nodes();
    double s = 0.0;
    for (int k = 0; k + 1 < p.size(); ++k) {
        const double tk = p.t[static_cast<std::size_t>(k)];
        const double dt = p.t[static_cast<std::size_t>(k) + 1] - tk;
        double m = 0.0;
        for (const auto& q : nodes) m += q.w * f(tk, q.z, p, k, false);
        s += dt * m;
    }
    return s;
}

double integral_ntilde(const SamplePath& p, const Integrand2& f, const LevyModel& model) {
    if (!model.has_jumps()) return 0.0;
    double atoms = 0.0;
    for (const Jump& j : p.jumps) atoms += f(j.time, j.size, p, j.union_index, true);
    return atoms - compensator(p, f, model);
}

}  // namespace levym
