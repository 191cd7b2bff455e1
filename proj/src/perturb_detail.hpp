#ifndef CFORGE_PERTURB_DETAIL_HPP
#define CFORGE_PERTURB_DETAIL_HPP

#include <functional>
#include <utility>
#include <vector>

#include "cforge/cocycle.hpp"
#include "cforge/domination.hpp"
#include "cforge/errors.hpp"
#include "cforge/perturb.hpp"

namespace cforge::detail {

// Sample accumulator enforcing the discretization contract (consecutive
// samples at most eps/16 apart per phase).
struct PathAccum {
    CyclicCocycle base;
    double eps;
    std::vector<CyclicCocycle> samples;

    PathAccum(CyclicCocycle b, double e) : base(std::move(b)), eps(e) {
        samples.push_back(base);
    }

    const CyclicCocycle& current() const { return samples.back(); }

    double used() const { return current().deviation(base); }

    // f(0) must equal current(); appends f over (0, 1], subdividing until
    // consecutive samples respect the step bound.
    void append_family(const std::function<CyclicCocycle(double)>& f) {
        append_segment(f, 0.0, 1.0, current(), f(1.0), 0);
    }

    // Straight-line matrix interpolation toward `next`.
    void append_point(const CyclicCocycle& next) {
        const CyclicCocycle from = current();
        append_family([&from, &next](double t) {
            std::vector<Matrix> maps(from.period());
            for (int j = 0; j < from.period(); ++j)
                maps[j] = (1.0 - t) * from.map(j) + t * next.map(j);
            return CyclicCocycle(from.dim(), std::move(maps));
        });
    }

    // p must start at current(); its samples are appended.
    void append_path(const PerturbationPath& p) {
        for (size_t k = 1; k < p.samples.size(); ++k) samples.push_back(p.samples[k]);
    }

    PerturbationPath finish() const {
        PerturbationPath out;
        out.base = base;
        out.samples = samples;
        out.eps_bound = eps;
        return out;
    }

private:
    void append_segment(const std::function<CyclicCocycle(double)>& f, double t0, double t1,
                        const CyclicCocycle& c0, const CyclicCocycle& c1, int depth) {
        if (c0.deviation(c1) <= eps / 16.0 || depth > 40) {
            samples.push_back(c1);
            return;
        }
        const double tm = 0.5 * (t0 + t1);
        const CyclicCocycle cm = f(tm);
        append_segment(f, t0, tm, c0, cm, depth + 1);
        append_segment(f, tm, t1, cm, c1, depth + 1);
    }
};

// Lift a sub-path living on an invariant block back to the ambient space.
PerturbationPath extend_path_ambient(const CyclicCocycle& ambient,
                                     const std::vector<Subspace>& f,
                                     const PerturbationPath& sub, BlockSlot which);

// Per-phase bundle columns of a splitting's b-th bundle.
std::vector<Subspace> bundle_of(const InvariantSplitting& s, int b);

// Per-phase slow flag bundle at cut k.
std::vector<Subspace> slow_bundles(const SpectralData& sd, int k);

// Invariant fast complement at a cluster boundary k.
std::vector<Subspace> fast_bundles(const SpectralData& sd, int k);

} // namespace cforge::detail

#endif
