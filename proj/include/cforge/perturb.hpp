#ifndef CFORGE_PERTURB_HPP
#define CFORGE_PERTURB_HPP

#include <functional>
#include <optional>
#include <vector>

#include "cforge/cocycle.hpp"
#include "cforge/graph.hpp"
#include "cforge/majorization.hpp"
#include "cforge/spectral.hpp"

namespace cforge {

// Discretized path of cocycles A_t starting at `base`.  Every sample stays
// within eps_bound of the base and consecutive samples differ by at most
// eps_bound/16 per phase.
struct PerturbationPath {
    CyclicCocycle base;
    std::vector<CyclicCocycle> samples; // samples[0] = base
    double eps_bound = 0.0;
    std::vector<LyapunovGraph> graphs;  // one per sample, filled by finalize

    const CyclicCocycle& endpoint() const { return samples.back(); }
    double max_deviation() const;           // measured against base
    double max_consecutive_deviation() const;

    void compute_graphs();
    // Checks the eps bound, the discretization contract and graph count.
    void validate() const;
};

// Rungs of the adaptive schedule actually used by a raise_graph run: the
// eps split, the domination scale certified before each move, and the
// stability margin observed after it.
struct EngineSchedule {
    struct Rung {
        int moved_index = 0;
        double eps_alloc = 0.0;
        int ell = 1;
        double pre_log_ratio = 0.0;   // non-domination margin before the move
        double post_log_ratio = 0.0;  // at ell after the move
        bool eta_ok = false;          // move kept index non-dominated at ell
    };
    std::vector<Rung> rungs;
};

// --- operations ------------------------------------------------------------

// Path of constant Lyapunov spectrum ending at a cocycle whose period
// product has only real eigenvalues.  Rotations are composed with the
// original maps and stopped at the first parameter where the relevant
// discriminant vanishes; for d > 2 the construction recurses over an
// invariant subbundle and its quotient.
PerturbationPath make_eigenvalues_real(const CyclicCocycle& c, double eps);

// For a real-spectrum cocycle, multiply triangular frames by diagonal
// factors realizing the affine interpolation from the current graph to
// `target` (which may change sigma_d).  Eigenvalues stay real.
PerturbationPath adjust_spectrum(const CyclicCocycle& c, const LyapunovGraph& target,
                                 double eps);

// Robin Hood move on exponents i, i+1 (1-based pair; `i` is the sigma
// coordinate raised): eps-short, graph-monotone, sigma_j fixed for j != i,
// endpoint sigma_i at the midpoint of its neighbors.  Requires real
// spectrum and no dominated splitting of index i.
PerturbationPath mix_two_exponents(const CyclicCocycle& c, int i, double eps);

// Same construction stopped once sigma_i reaches `sigma_target` (which must
// not exceed the midpoint).
PerturbationPath mix_two_exponents_until(const CyclicCocycle& c, int i, double eps,
                                         double sigma_target);

struct RaiseOptions {
    std::optional<int> respect_finest; // pin the finest splitting at this ell
    bool preserve_index = false;
};

struct RaiseResult {
    PerturbationPath path;
    EngineSchedule schedule;
};

// Full pipeline: realify, zigzag plan, repeated mixing stopped at each plan
// vertex, final spectrum adjustment.
RaiseResult raise_graph(const CyclicCocycle& c, const LyapunovGraph& target, double eps,
                        const RaiseOptions& opts = {});

// Perturb a unit-modulus-spectrum matrix to a diagonalizable one whose
// eigenvalues are roots of unity of a common order, so that matrix^order is
// the identity.
struct FiniteOrderResult {
    Matrix matrix;
    long order = 1;
};
FiniteOrderResult finite_order_perturbation(const Matrix& l, double eps);

// --- exposed internals (useful on their own and in the verification suites)

// Direction and angle of the rotation that equalizes the eigenvalue moduli
// of a 2x2 matrix with real eigenvalues of distinct moduli: the spectral
// radius of R_{s theta} b is decreasing on [0, beta] and the endpoint has
// equal moduli.
struct RotationMix {
    int sign = 1;      // s
    double beta = 0.0; // first equal-moduli angle
};
RotationMix rotation_to_equal_moduli(const Matrix& b);

// Largest power of two ell <= cap with no dominated splitting of index i
// (non-domination at ell propagates to every smaller scale); 0 if the
// index is dominated at every tested scale.
int strongest_nondominated_scale(const CyclicCocycle& c, const SpectralData& sd, int i,
                                 int cap);

} // namespace cforge

#endif
