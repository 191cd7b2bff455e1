#ifndef CFORGE_DOMINATION_HPP
#define CFORGE_DOMINATION_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cforge/cocycle.hpp"
#include "cforge/spectral.hpp"

namespace cforge {

// Invariant direct-sum decomposition, one ordered list of orthonormal bases
// per phase, plus the cumulative dimensions i_1 < ... < i_{m-1}.
struct InvariantSplitting {
    int cocycle_period = 0;
    std::vector<std::vector<Subspace>> bundles; // [phase][bundle]
    std::vector<int> indices;

    int num_bundles() const {
        return bundles.empty() ? 0 : static_cast<int>(bundles.front().size());
    }
    bool trivial() const { return num_bundles() <= 1; }

    // max over phases and bundles of dist(A_j F(x_j), F(x_{j+1})).
    double invariance_residual(const CyclicCocycle& c) const;
};

struct DominationReport {
    int index = 0;
    int ell = 1;
    double worst_log_ratio = 0.0; // max over phases of log(||A^l|F|| / m(A^l|G))
    double worst_ratio = 0.0;     // exp of the above (may flush to 0 or inf)
    int worst_phase = 0;
    bool dominated = false;       // worst ratio < 1/2 strictly at every phase
    std::string reason;           // "no_invariant_splitting" when no candidate exists
};

// The invariant index-i splitting spanned by the generalized eigenspaces of
// the i smallest eigenvalue moduli of A^n, transported along the orbit;
// empty if the cut falls strictly inside a modulus cluster (in particular
// inside a complex-conjugate pair).
std::optional<InvariantSplitting> candidate_splitting(const CyclicCocycle& c, int i);
std::optional<InvariantSplitting> candidate_splitting(const CyclicCocycle& c,
                                                      const SpectralData& sd, int i);

// Definitional ratio at every phase over ell cyclic steps (ell may exceed
// the period), evaluated on restricted blocks in orthonormal bases.
DominationReport check_domination(const CyclicCocycle& c, int i, int ell);
DominationReport check_domination(const CyclicCocycle& c, const SpectralData& sd, int i, int ell);

// Worst log of ||A^ell restricted to F|| / m(A^ell restricted to G) over all
// phases, for arbitrary per-phase invariant bundles F, G.
std::pair<double, int> worst_domination_log_ratio(const CyclicCocycle& c,
                                                  const std::vector<Subspace>& f,
                                                  const std::vector<Subspace>& g, int ell);

// Bundles cut at exactly { i : check_domination(c, i, ell).dominated };
// trivial (m = 1) when that set is empty.
InvariantSplitting finest_splitting(const CyclicCocycle& c, int ell);

// Restriction to an invariant subbundle and the quotient by it, both in
// orthonormal coordinates (the quotient on the orthogonal complement, with
// the representative-orthogonal-to-F norm convention).
std::pair<CyclicCocycle, CyclicCocycle> restrict_and_quotient(const CyclicCocycle& c,
                                                              const std::vector<Subspace>& f);

enum class BlockSlot { restricted, quotient };

// Replace one diagonal block in the F + F-perp frame, keeping the
// off-diagonal coupling; returned in the adapted frame.
CyclicCocycle extend_over(const CyclicCocycle& c, const std::vector<Subspace>& f,
                          const CyclicCocycle& replacement, BlockSlot which);

// Same replacement conjugated back to ambient coordinates, so the output is
// directly comparable with (and a perturbation of) the input cocycle.
CyclicCocycle extend_over_ambient(const CyclicCocycle& c, const std::vector<Subspace>& f,
                                  const CyclicCocycle& replacement, BlockSlot which);

} // namespace cforge

#endif
