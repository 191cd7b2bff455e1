#ifndef CFORGE_SEPARATION_HPP
#define CFORGE_SEPARATION_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cforge/cocycle.hpp"
#include "cforge/graph.hpp"
#include "cforge/linalg.hpp"

namespace cforge {

// Finite-scale functionals Z_i(y) = (1/n) sum_p log ||wedge^i A^m(T^{pm} y)||
// over the strided windows starting at phase y, plus the good-phase
// selection by the pigeonhole rule (bad-phase fraction below 1/d per i).
struct ZScoreTable {
    int scale = 1;                       // m
    std::vector<std::vector<double>> z;  // [phase][i-1], i = 1..d
    std::vector<double> finite_avg;      // phase average of Z_i, per i
    int good_phase = 0;
    double slack = 0.0;                  // tightest slack that still selects
    std::vector<double> rho;             // bad-phase fraction per i at `slack`
};

ZScoreTable z_scores(const CyclicCocycle& c, int m);

// Orthogonal R with ||R - Id|| < eps making R F_i uniformly transverse to
// G_{d-i} for every i, by randomized restarts plus local ascent on the
// worst principal angle.  alpha is the certified worst angle.
struct FlagAlignment {
    Matrix r;
    double alpha = 0.0;
};
FlagAlignment align_flags(const Flag& f, const Flag& g, double eps, std::uint64_t seed = 1);

// Orthogonal R with ||R - Id|| < eps such that the spectral radius of
// wedge^i (R m) is within a factor c_emp of ||wedge^i m|| for every i;
// aligns the image of the top singular flag away from its orthogonal
// complement flag.
struct RadiusConversion {
    Matrix r;
    double c_emp = 1.0; // max over i of ||wedge^i m|| / rad(wedge^i R m)
};
RadiusConversion norm_to_radius(const Matrix& m, double eps, std::uint64_t seed = 1);

// Insert at most q+1 orthogonal corrections along the orbit so that the
// finite-scale growth at the good phase is realized as eigenvalue growth at
// the period: (1/n) log rad(wedge^i of the new period product) reaches
// Z_i(good) - slack_emp for every i.  |det| is preserved exactly.
struct SeparationReport {
    int good_phase = 0;
    double slack_emp = 0.0;
    double alpha_min = 0.0; // worst alignment angle accepted
    double c_emp = 1.0;     // norm-to-radius constant of the closing rotation
    int insertions = 0;
};
std::pair<CyclicCocycle, SeparationReport> separate_exponents(const CyclicCocycle& c, int m,
                                                              double eps,
                                                              std::uint64_t seed = 1);

// separate_exponents followed by raise_graph with the finest splitting
// pinned; the final graph matches `target` within 1e-5.
CyclicCocycle realize_graph(const CyclicCocycle& c, const LyapunovGraph& target, int m,
                            double eps, std::optional<int> pin_ell = std::nullopt,
                            std::uint64_t seed = 1);

} // namespace cforge

#endif
