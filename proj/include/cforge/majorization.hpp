#ifndef CFORGE_MAJORIZATION_HPP
#define CFORGE_MAJORIZATION_HPP

#include <optional>
#include <utility>
#include <vector>

#include "cforge/graph.hpp"

namespace cforge {

enum class MajorizationOrder { a_below, a_above, equal, incomparable, endpoint_mismatch };

// Partial order on convex graphs with equal endpoints: a_below means
// a_i <= b_i for all i with a_d = b_d, within 1e-12.
MajorizationOrder majorization_cmp(const LyapunovGraph& a, const LyapunovGraph& b);

// Index of a graph: the unique strict minimizer p of sigma, if it exists
// (equivalently lambda_p < 0 < lambda_{p+1}); "none" otherwise.
std::optional<int> graph_index(const LyapunovGraph& s);

// Piecewise single-coordinate monotone path of convex graphs from src toward
// dst.  Steps move one interior coordinate up to min(dst, midpoint of its
// neighbors); exact contact with dst splits the problem into independent
// segments.
struct GraphPathPlan {
    struct Step {
        int moved_index;
        double area_before;  // area of the active segment, before the move
        double area_after;
        bool contact;        // the coordinate was pinned to dst (segment split)
        int seg_lo, seg_hi;  // active segment at the time of the move
    };

    std::vector<LyapunovGraph> vertices; // size steps + 1; vertices[0] = src
    std::vector<int> moved_index;        // size steps
    std::vector<Step> steps;             // bookkeeping for the contraction checks

    bool empty() const { return moved_index.empty(); }
    const LyapunovGraph& back() const { return vertices.back(); }
};

GraphPathPlan zigzag_path(const LyapunovGraph& src, const LyapunovGraph& dst, double delta,
                          bool preserve_index = false);

// Derived a-priori bound on the plan length for inputs with |src_i| <= c*i,
// from the per-step area contraction 1 - 2/d^3 plus splitting overhead.
long max_plan_length(int d, double c, double delta, bool preserve_index = false);

// For convex y with second differences in [0, gamma]: the largest deviation
// of y below its chord, and the certified bound k^2 gamma / 4.
std::pair<double, double> nearly_affine_bound(const std::vector<double>& y);

// { k : sigma_k <= min_j sigma_{i_j} } for a nested index set
// {0 = i_0 < ... < i_m = d}; always a contiguous interval [lo, hi].
struct IndexInterval {
    int lo, hi;
    bool contains(int k) const { return k >= lo && k <= hi; }
    int size() const { return hi - lo + 1; }
};
IndexInterval admissible_indices(const LyapunovGraph& s, std::vector<int> splitting_indices);

} // namespace cforge

#endif
