#include "cforge/majorization.hpp"

#include <algorithm>
#include <cmath>

#include "cforge/errors.hpp"

namespace cforge {

namespace {
constexpr double kCmpTol = 1e-12;
constexpr double kContactTol = 1e-12;
} // namespace

MajorizationOrder majorization_cmp(const LyapunovGraph& a, const LyapunovGraph& b) {
    if (a.dim() != b.dim()) throw argument_error("majorization_cmp: dimension mismatch");
    const int d = a.dim();
    if (std::abs(a.sigma[d] - b.sigma[d]) > kCmpTol) return MajorizationOrder::endpoint_mismatch;
    bool below = true, above = true;
    for (int i = 1; i < d; ++i) {
        if (a.sigma[i] > b.sigma[i] + kCmpTol) below = false;
        if (b.sigma[i] > a.sigma[i] + kCmpTol) above = false;
    }
    if (below && above) return MajorizationOrder::equal;
    if (below) return MajorizationOrder::a_below;
    if (above) return MajorizationOrder::a_above;
    return MajorizationOrder::incomparable;
}

std::optional<int> graph_index(const LyapunovGraph& s) {
    const int d = s.dim();
    int p = 0;
    for (int i = 1; i <= d; ++i)
        if (s.sigma[i] < s.sigma[p]) p = i;
    for (int i = 0; i <= d; ++i)
        if (i != p && !(s.sigma[i] > s.sigma[p])) return std::nullopt;
    return p;
}

namespace {

double segment_area(const std::vector<double>& cur, const std::vector<double>& dst, int lo,
                    int hi) {
    double a = 0.0;
    for (int i = lo + 1; i < hi; ++i) a += dst[i] - cur[i];
    return a;
}

// Largest convex minorant of the points (i, h_i), evaluated at the integers.
std::vector<double> lower_convex_hull(const std::vector<double>& h) {
    const int n = static_cast<int>(h.size());
    std::vector<int> hull; // indices of hull vertices
    for (int i = 0; i < n; ++i) {
        while (hull.size() >= 2) {
            const int a = hull[hull.size() - 2], b = hull[hull.size() - 1];
            // drop b if it lies on or above chord a--i
            if ((h[b] - h[a]) * (i - a) >= (h[i] - h[a]) * (b - a)) hull.pop_back();
            else break;
        }
        hull.push_back(i);
    }
    std::vector<double> out(n);
    for (size_t v = 0; v + 1 < hull.size(); ++v) {
        const int a = hull[v], b = hull[v + 1];
        for (int i = a; i <= b; ++i)
            out[i] = h[a] + (h[b] - h[a]) * static_cast<double>(i - a) / (b - a);
    }
    out[n - 1] = h[n - 1];
    return out;
}

struct ZigzagDriver {
    std::vector<double> cur;
    GraphPathPlan& plan;

    void record(int moved, double before, double after, bool contact, int lo, int hi) {
        plan.vertices.push_back(LyapunovGraph(cur));
        plan.moved_index.push_back(moved);
        plan.steps.push_back({moved, before, after, contact, lo, hi});
    }

    // Zigzag the segment [lo, hi] (endpoints already on target) until every
    // interior gap is at most delta.  Splits on exact contact.
    void run_segment(const std::vector<double>& dst, int lo, int hi, double delta) {
        if (hi - lo < 2) return;
        for (;;) {
            double max_gap = 0.0;
            for (int i = lo + 1; i < hi; ++i) max_gap = std::max(max_gap, dst[i] - cur[i]);
            if (max_gap <= delta) return;

            double dmax = -1.0;
            int at = -1;
            for (int i = lo + 1; i < hi; ++i) {
                const double d2 = cur[i - 1] - 2.0 * cur[i] + cur[i + 1];
                if (d2 > dmax + kContactTol) {
                    dmax = d2;
                    at = i;
                }
            }
            if (at < 0 || dmax <= kContactTol) return; // affine remainder: gaps are zero

            const double mid = 0.5 * (cur[at - 1] + cur[at + 1]);
            const double before = segment_area(cur, dst, lo, hi);
            if (mid >= dst[at] - kContactTol) {
                cur[at] = dst[at];
                record(at, before, segment_area(cur, dst, lo, hi), true, lo, hi);
                run_segment(dst, lo, at, delta);
                run_segment(dst, at, hi, delta);
                return;
            }
            cur[at] = mid;
            record(at, before, segment_area(cur, dst, lo, hi), false, lo, hi);
        }
    }
};

void zigzag_index_preserving(ZigzagDriver& z, const std::vector<double>& dst, int p,
                             double delta) {
    const int d = static_cast<int>(z.cur.size()) - 1;
    const long cap = 64 + 64 * static_cast<long>(
                              std::ceil(std::log(std::max(1.0, (dst[p] - z.cur[p]) / delta + 2)) /
                                        -std::log1p(-0.9 / (1.1 * d))));

    for (long iter = 0;; ++iter) {
        if (iter > cap) throw numerical_error("index-preserving zigzag failed to converge");

        // maximal convex graph <= dst pinned to the current value at p
        std::vector<double> pinned(dst);
        pinned[p] = z.cur[p];
        const std::vector<double> sbar = lower_convex_hull(pinned);

        z.run_segment(sbar, 0, p, delta / 4);
        z.run_segment(sbar, p, d, delta / 4);

        const double gap = dst[p] - z.cur[p];
        double side_gap = 0.0;
        for (int i = 1; i < d; ++i)
            if (i != p) side_gap = std::max(side_gap, dst[i] - z.cur[i]);
        if (gap <= delta && side_gap <= delta) return;

        const double excess = std::min(z.cur[p - 1], z.cur[p + 1]) - z.cur[p];
        if (!(excess > 0)) throw numerical_error("index-preserving zigzag lost its index");

        const double before = segment_area(z.cur, dst, 0, d);
        if (z.cur[p] + 0.9 * excess >= dst[p] - kContactTol) {
            z.cur[p] = dst[p];
            z.record(p, before, segment_area(z.cur, dst, 0, d), true, 0, d);
            z.run_segment(dst, 0, p, delta);
            z.run_segment(dst, p, d, delta);
            return;
        }
        z.cur[p] += 0.9 * excess;
        z.record(p, before, segment_area(z.cur, dst, 0, d), false, 0, d);
    }
}

} // namespace

GraphPathPlan zigzag_path(const LyapunovGraph& src, const LyapunovGraph& dst, double delta,
                          bool preserve_index) {
    src.validate();
    dst.validate();
    if (delta <= 0) throw argument_error("zigzag_path: delta must be positive");
    const auto order = majorization_cmp(src, dst);
    if (order == MajorizationOrder::endpoint_mismatch)
        throw order_error("zigzag_path: endpoint sigma_d mismatch");
    if (order != MajorizationOrder::a_below && order != MajorizationOrder::equal)
        throw order_error("zigzag_path: source does not precede target");

    GraphPathPlan plan;
    plan.vertices.push_back(src);
    if (order == MajorizationOrder::equal) return plan;

    ZigzagDriver z{src.sigma, plan};
    if (preserve_index) {
        const auto pi = graph_index(src), qi = graph_index(dst);
        if (!pi || !qi || *pi != *qi)
            throw index_error("zigzag_path: index mismatch between source and target");
        const int p = *pi;
        if (p <= 0 || p >= src.dim())
            throw index_error("zigzag_path: preserve_index needs an interior index");
        zigzag_index_preserving(z, dst.sigma, p, delta);
    } else {
        z.run_segment(dst.sigma, 0, src.dim(), delta);
    }
    return plan;
}

long max_plan_length(int d, double c, double delta, bool preserve_index) {
    const double a0 = std::max(2.0 * c * d * (d - 1), delta);
    const double rate = -std::log1p(-2.0 / (d * d * d));
    const long per_segment = 1 + static_cast<long>(std::ceil(std::log(a0 / delta) / rate));
    long n = (d - 1) * (per_segment + 1);
    if (preserve_index) {
        const double prate = -std::log1p(-0.9 / (1.1 * d));
        const long outer = 2 + static_cast<long>(std::ceil(std::log(a0 / delta) / prate));
        n = outer * (2 * n + 1);
    }
    return n;
}

std::pair<double, double> nearly_affine_bound(const std::vector<double>& y) {
    const int k = static_cast<int>(y.size()) - 1;
    if (k < 1) throw argument_error("nearly_affine_bound: need at least two points");
    double gamma = 0.0;
    for (int i = 0; i + 2 <= k; ++i) {
        const double d2 = y[i + 2] - 2.0 * y[i + 1] + y[i];
        if (d2 < -1e-12) throw argument_error("nearly_affine_bound: input is not convex");
        gamma = std::max(gamma, d2);
    }
    double dev = 0.0;
    for (int i = 0; i <= k; ++i) {
        const double chord = y[0] + (y[k] - y[0]) * static_cast<double>(i) / k;
        dev = std::max(dev, chord - y[i]);
    }
    const double bound = 0.25 * k * k * gamma;
    if (dev > bound + 1e-12)
        throw numerical_error("nearly_affine_bound: deviation exceeds the certified bound");
    return {dev, bound};
}

IndexInterval admissible_indices(const LyapunovGraph& s, std::vector<int> splitting_indices) {
    const int d = s.dim();
    splitting_indices.push_back(0);
    splitting_indices.push_back(d);
    std::sort(splitting_indices.begin(), splitting_indices.end());
    splitting_indices.erase(std::unique(splitting_indices.begin(), splitting_indices.end()),
                            splitting_indices.end());
    for (int i : splitting_indices)
        if (i < 0 || i > d) throw argument_error("admissible_indices: index outside 0..d");

    double smin = s.sigma[splitting_indices.front()];
    for (int i : splitting_indices) smin = std::min(smin, s.sigma[i]);

    std::vector<int> ks;
    for (int k = 0; k <= d; ++k)
        if (s.sigma[k] <= smin + kCmpTol) ks.push_back(k);

    for (size_t i = 0; i + 1 < ks.size(); ++i)
        if (ks[i + 1] != ks[i] + 1)
            throw numerical_error("admissible_indices: selected set is not an interval");

    const IndexInterval out{ks.front(), ks.back()};
    // contained in one slab [i_{j-1}, i_j]
    bool contained = false;
    for (size_t j = 0; j + 1 < splitting_indices.size(); ++j)
        contained |= (out.lo >= splitting_indices[j] && out.hi <= splitting_indices[j + 1]);
    if (!contained)
        throw numerical_error("admissible_indices: interval straddles a splitting index");
    return out;
}

} // namespace cforge
