#include <cmath>

#include "cforge/errors.hpp"
#include "cforge/perturb.hpp"
#include "perturb_detail.hpp"

namespace cforge {

namespace detail {

PerturbationPath extend_path_ambient(const CyclicCocycle& ambient,
                                     const std::vector<Subspace>& f,
                                     const PerturbationPath& sub, BlockSlot which) {
    PerturbationPath out;
    out.base = ambient;
    out.eps_bound = sub.eps_bound;
    out.samples.reserve(sub.samples.size() + 1);
    out.samples.push_back(ambient);
    for (const auto& s : sub.samples)
        out.samples.push_back(extend_over_ambient(ambient, f, s, which));
    return out;
}

std::vector<Subspace> bundle_of(const InvariantSplitting& s, int b) {
    std::vector<Subspace> out(s.cocycle_period);
    for (int j = 0; j < s.cocycle_period; ++j) out[j] = s.bundles[j][b];
    return out;
}

std::vector<Subspace> slow_bundles(const SpectralData& sd, int k) {
    std::vector<Subspace> out(sd.period);
    for (int j = 0; j < sd.period; ++j) out[j] = sd.slow_bundle(j, k);
    return out;
}

std::vector<Subspace> fast_bundles(const SpectralData& sd, int k) {
    std::vector<Subspace> out(sd.period);
    for (int j = 0; j < sd.period; ++j) out[j] = sd.fast_bundle(j, k);
    return out;
}

} // namespace detail

namespace {

// Discriminant of the scaled period product of a 2-D cocycle whose maps are
// the originals composed with a uniform rotation of angle `theta`.
double rotated_discriminant(const CyclicCocycle& c, double theta) {
    std::vector<Matrix> maps(c.period());
    const Matrix r = rotation2(theta);
    for (int j = 0; j < c.period(); ++j) maps[j] = r * c.map(j);
    const ScaledMatrix p = CyclicCocycle(2, std::move(maps)).window_product(0, c.period());
    const double tr = p.m.trace();
    return tr * tr - 4.0 * p.m.determinant();
}

CyclicCocycle rotated_cocycle(const CyclicCocycle& c, double theta) {
    std::vector<Matrix> maps(c.period());
    const Matrix r = rotation2(theta);
    for (int j = 0; j < c.period(); ++j) maps[j] = r * c.map(j);
    return CyclicCocycle(2, std::move(maps));
}

PerturbationPath constant_path(const CyclicCocycle& c, double eps) {
    PerturbationPath out;
    out.base = c;
    out.samples = {c};
    out.eps_bound = eps;
    return out;
}

// 2-D core: compose every map with R_{t * theta_cap} and stop at the first t
// where the discriminant of the period product vanishes.  While the
// eigenvalues are complex their common modulus is sqrt(det), so the graph is
// constant along the path; the endpoint has a double real eigenvalue.
PerturbationPath realify_2d(const CyclicCocycle& c, double eps) {
    const double k = c.bound();
    const double theta_cap = 0.98 * eps / k;

    const int coarse = 512;
    double best_residual = -1e300;
    double best_t = 0.0, best_cap = theta_cap;
    for (int dir : {+1, -1}) {
        const double cap = dir * theta_cap;
        double prev_t = 0.0;
        double found = -1.0;
        for (int s = 1; s <= coarse; ++s) {
            const double t = static_cast<double>(s) / coarse;
            const double g = rotated_discriminant(c, t * cap);
            if (g > best_residual) {
                best_residual = g;
                best_t = t;
                best_cap = cap;
            }
            if (g >= 0.0) {
                // bisect the first crossing inside (prev_t, t]
                double lo = prev_t, hi = t;
                for (int it = 0; it < 80 && hi - lo > 1e-16; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (rotated_discriminant(c, mid * cap) >= 0.0) hi = mid;
                    else lo = mid;
                }
                found = hi;
                break;
            }
            prev_t = t;
        }
        if (found >= 0.0) {
            detail::PathAccum acc(c, eps);
            const double stop = found * cap;
            acc.append_family([&](double t) { return rotated_cocycle(c, t * stop); });
            return acc.finish();
        }
    }
    // tangential touch: accept the argmax when the residual is negligible
    if (best_residual >= -1e-12) {
        detail::PathAccum acc(c, eps);
        const double stop = best_t * best_cap;
        acc.append_family([&](double t) { return rotated_cocycle(c, t * stop); });
        return acc.finish();
    }
    throw capability_error(
        "realify: rotation budget exhausted before the discriminant vanished; residual "
        "discriminant " +
        std::to_string(best_residual));
}

int pick_invariant_cut(const SpectralData& sd) {
    for (int k = 1; k < sd.dim; ++k)
        if (sd.flag_cut_ok[k]) return k;
    return 0;
}

} // namespace

PerturbationPath make_eigenvalues_real(const CyclicCocycle& c, double eps) {
    if (eps <= 0) throw argument_error("make_eigenvalues_real: eps must be positive");
    const SpectralData sd = analyze(c);
    if (sd.real_spectrum()) return constant_path(c, eps);
    const int d = c.dim();
    if (d == 2) return realify_2d(c, eps);

    const int k = pick_invariant_cut(sd);
    if (k == 0)
        throw capability_error("realify: no transportable invariant subbundle found");

    const auto f = detail::slow_bundles(sd, k);
    auto [restricted, quotient] = restrict_and_quotient(c, f);

    detail::PathAccum acc(c, eps);

    if (!analyze(restricted).real_spectrum()) {
        PerturbationPath sub = make_eigenvalues_real(restricted, eps / 2);
        PerturbationPath lifted =
            detail::extend_path_ambient(acc.current(), f, sub, BlockSlot::restricted);
        acc.append_point(lifted.samples[1]); // frame-projection jump, tiny
        for (size_t s = 2; s < lifted.samples.size(); ++s)
            acc.samples.push_back(lifted.samples[s]);
    }

    if (!analyze(quotient).real_spectrum()) {
        PerturbationPath sub = make_eigenvalues_real(quotient, eps / 2);
        PerturbationPath lifted =
            detail::extend_path_ambient(acc.current(), f, sub, BlockSlot::quotient);
        acc.append_point(lifted.samples[1]);
        for (size_t s = 2; s < lifted.samples.size(); ++s)
            acc.samples.push_back(lifted.samples[s]);
    }

    PerturbationPath out = acc.finish();
    if (out.max_deviation() > eps)
        throw capability_error("realify: measured deviation " +
                               std::to_string(out.max_deviation()) + " exceeds eps");
    if (!analyze(out.endpoint()).real_spectrum())
        throw capability_error("realify: endpoint still has complex eigenvalues");
    return out;
}

} // namespace cforge
