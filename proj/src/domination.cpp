#include "cforge/domination.hpp"

#include <algorithm>
#include <cmath>

#include "cforge/errors.hpp"

namespace cforge {

namespace {
constexpr double kInvarianceTol = 1e-8;
constexpr double kHalfLog = -0.6931471805599453; // log(1/2)

std::vector<Matrix> restricted_maps(const CyclicCocycle& c, const std::vector<Subspace>& f) {
    const int n = c.period();
    std::vector<Matrix> maps(n);
    for (int j = 0; j < n; ++j)
        maps[j] = f[(j + 1) % n].basis.transpose() * c.map(j) * f[j].basis;
    return maps;
}

double bundle_invariance_residual(const CyclicCocycle& c, const std::vector<Subspace>& f) {
    double worst = 0.0;
    const int n = c.period();
    for (int j = 0; j < n; ++j) {
        const Subspace image(orthonormalize(c.map(j) * f[j].basis));
        worst = std::max(worst, subspace_distance(image, f[(j + 1) % n]));
    }
    return worst;
}

} // namespace

double InvariantSplitting::invariance_residual(const CyclicCocycle& c) const {
    double worst = 0.0;
    for (int b = 0; b < num_bundles(); ++b) {
        std::vector<Subspace> f(cocycle_period);
        for (int j = 0; j < cocycle_period; ++j) f[j] = bundles[j][b];
        worst = std::max(worst, bundle_invariance_residual(c, f));
    }
    return worst;
}

std::optional<InvariantSplitting> candidate_splitting(const CyclicCocycle& c, int i) {
    return candidate_splitting(c, analyze(c), i);
}

std::optional<InvariantSplitting> candidate_splitting(const CyclicCocycle& c,
                                                      const SpectralData& sd, int i) {
    if (i <= 0 || i >= c.dim()) throw argument_error("candidate_splitting: need 0 < i < d");
    if (!sd.is_cluster_boundary(i)) return std::nullopt;

    InvariantSplitting out;
    out.cocycle_period = c.period();
    out.indices = {i};
    out.bundles.resize(c.period());
    const int cmid = sd.cluster_of_slot(i);
    for (int j = 0; j < c.period(); ++j) {
        out.bundles[j].push_back(sd.cluster_span(j, 0, cmid));
        out.bundles[j].push_back(
            sd.cluster_span(j, cmid, static_cast<int>(sd.clusters.size())));
    }
    return out;
}

std::pair<double, int> worst_domination_log_ratio(const CyclicCocycle& c,
                                                  const std::vector<Subspace>& f,
                                                  const std::vector<Subspace>& g, int ell) {
    const int n = c.period();
    CyclicCocycle cf(f.front().dim(), restricted_maps(c, f));
    CyclicCocycle cg(g.front().dim(), restricted_maps(c, g));
    double worst = -1e300;
    int at = 0;
    for (int j = 0; j < n; ++j) {
        const double log_norm_f = cf.window_product(j, ell).log_norm();
        const double log_conorm_g = -cg.window_product_inverse(j, ell).log_norm();
        const double r = log_norm_f - log_conorm_g;
        if (r > worst) {
            worst = r;
            at = j;
        }
    }
    return {worst, at};
}

DominationReport check_domination(const CyclicCocycle& c, int i, int ell) {
    return check_domination(c, analyze(c), i, ell);
}

DominationReport check_domination(const CyclicCocycle& c, const SpectralData& sd, int i,
                                  int ell) {
    if (ell < 1 || (ell & (ell - 1)) != 0)
        throw argument_error("check_domination: ell must be a power of two");
    DominationReport rep;
    rep.index = i;
    rep.ell = ell;

    auto split = candidate_splitting(c, sd, i);
    if (!split) {
        rep.dominated = false;
        rep.reason = "no_invariant_splitting";
        rep.worst_log_ratio = 0.0;
        rep.worst_ratio = 1.0;
        return rep;
    }

    std::vector<Subspace> f(c.period()), g(c.period());
    for (int j = 0; j < c.period(); ++j) {
        f[j] = split->bundles[j][0];
        g[j] = split->bundles[j][1];
    }
    auto [worst, phase] = worst_domination_log_ratio(c, f, g, ell);
    rep.worst_log_ratio = worst;
    rep.worst_ratio = std::exp(worst);
    rep.worst_phase = phase;
    rep.dominated = worst < kHalfLog;
    return rep;
}

InvariantSplitting finest_splitting(const CyclicCocycle& c, int ell) {
    const SpectralData sd = analyze(c);
    const int d = c.dim();
    std::vector<int> cuts;
    for (int i = 1; i < d; ++i)
        if (sd.is_cluster_boundary(i) && check_domination(c, sd, i, ell).dominated)
            cuts.push_back(i);

    InvariantSplitting out;
    out.cocycle_period = c.period();
    out.indices = cuts;
    out.bundles.resize(c.period());

    std::vector<int> stops = cuts;
    stops.push_back(d);
    for (int j = 0; j < c.period(); ++j) {
        int lo = 0;
        for (int hi : stops) {
            const int c0 = sd.cluster_of_slot(lo);
            const int c1 = (hi == d) ? static_cast<int>(sd.clusters.size())
                                      : sd.cluster_of_slot(hi);
            out.bundles[j].push_back(sd.cluster_span(j, c0, c1));
            lo = hi;
        }
    }
    return out;
}

std::pair<CyclicCocycle, CyclicCocycle> restrict_and_quotient(const CyclicCocycle& c,
                                                              const std::vector<Subspace>& f) {
    const int n = c.period();
    if (static_cast<int>(f.size()) != n)
        throw argument_error("restrict_and_quotient: one subspace per phase required");
    const double res = bundle_invariance_residual(c, f);
    if (res > kInvarianceTol)
        throw invariance_error("restrict_and_quotient: subbundle not invariant, residual " +
                               std::to_string(res));

    std::vector<Subspace> w(n);
    for (int j = 0; j < n; ++j) w[j] = f[j].complement();

    CyclicCocycle restricted(f.front().dim(), restricted_maps(c, f));
    CyclicCocycle quotient(w.front().dim(), restricted_maps(c, w));
    return {std::move(restricted), std::move(quotient)};
}

namespace {

CyclicCocycle extend_over_impl(const CyclicCocycle& c, const std::vector<Subspace>& f,
                               const CyclicCocycle& replacement, BlockSlot which,
                               bool ambient) {
    const int n = c.period();
    const int d = c.dim();
    if (static_cast<int>(f.size()) != n)
        throw argument_error("extend_over: one subspace per phase required");
    const int k = f.front().dim();
    if (replacement.period() != n) throw argument_error("extend_over: period mismatch");
    const int want = (which == BlockSlot::restricted) ? k : d - k;
    if (replacement.dim() != want) throw argument_error("extend_over: block dimension mismatch");
    const double res = bundle_invariance_residual(c, f);
    if (res > kInvarianceTol)
        throw invariance_error("extend_over: subbundle not invariant, residual " +
                               std::to_string(res));

    std::vector<Matrix> out(n);
    for (int j = 0; j < n; ++j) {
        const int jn = (j + 1) % n;
        Matrix u_from(d, d), u_to(d, d);
        u_from << f[j].basis, f[j].complement().basis;
        u_to << f[jn].basis, f[jn].complement().basis;
        Matrix adapted = u_to.transpose() * c.map(j) * u_from;
        adapted.bottomLeftCorner(d - k, k).setZero();
        if (which == BlockSlot::restricted)
            adapted.topLeftCorner(k, k) = replacement.map(j);
        else
            adapted.bottomRightCorner(d - k, d - k) = replacement.map(j);
        out[j] = ambient ? Matrix(u_to * adapted * u_from.transpose()) : adapted;
    }
    return CyclicCocycle(d, std::move(out));
}

} // namespace

CyclicCocycle extend_over(const CyclicCocycle& c, const std::vector<Subspace>& f,
                          const CyclicCocycle& replacement, BlockSlot which) {
    return extend_over_impl(c, f, replacement, which, false);
}

CyclicCocycle extend_over_ambient(const CyclicCocycle& c, const std::vector<Subspace>& f,
                                  const CyclicCocycle& replacement, BlockSlot which) {
    return extend_over_impl(c, f, replacement, which, true);
}

} // namespace cforge
