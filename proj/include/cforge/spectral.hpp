#ifndef CFORGE_SPECTRAL_HPP
#define CFORGE_SPECTRAL_HPP

#include <vector>

#include "cforge/cocycle.hpp"
#include "cforge/graph.hpp"
#include "cforge/linalg.hpp"

namespace cforge {

// Spectral data of the period product, organized by eigenvalue modulus.
//
// Long products are never formed densely: the product is split recursively
// at resolvable modulus gaps, bundles are transported around the orbit
// (slow ones backward, fast ones forward), and exponents are read off as
// per-phase log-determinant sums of the restricted blocks.  Moduli within
// relative tolerance `kTieTol` at the period are clustered and treated as
// equal.
struct SpectralData {
    static constexpr double kTieTol = 1e-8;

    struct Cluster {
        int begin;        // cumulative slot, ascending modulus order
        int size;
        double exponent;  // per-step exponent (1/n) log|mu|, common in cluster
        bool has_complex; // contains at least one complex-conjugate pair
    };

    int dim = 0;
    int period = 0;
    std::vector<double> exponents;   // ascending, size dim
    std::vector<Cluster> clusters;
    std::vector<char> complex_slot;  // slot i sits inside a complex 2x2 pair

    // frames[j]: d x d orthonormal; the leading k columns span the k-th
    // flag subspace over phase j whenever flag_cut_ok[k].
    std::vector<Matrix> frames;
    std::vector<char> flag_cut_ok;   // size dim+1; cuts 0 and dim always ok

    // bundles[j][c]: orthonormal basis over phase j of cluster c's
    // generalized eigenbundle (transported around the orbit).
    std::vector<std::vector<Matrix>> bundles;

    double max_residual = 0.0;       // worst transport wrap residual

    bool real_spectrum() const;
    bool is_cluster_boundary(int k) const; // k in 0..dim
    int cluster_of_slot(int slot) const;

    Subspace slow_bundle(int phase, int k) const;  // flag部 leading k columns
    // Invariant complement at a cluster boundary k: span of the clusters above.
    Subspace fast_bundle(int phase, int k) const;
    // Span of clusters [c0, c1).
    Subspace cluster_span(int phase, int c0, int c1) const;

    LyapunovGraph graph() const;
};

SpectralData analyze(const CyclicCocycle& c);

// sigma_i = (1/n) * sum of the i smallest log-moduli of eigenvalues of A^n;
// sigma_d matches (1/n) sum_j log|det maps[j]| by construction.
LyapunovGraph lyapunov_graph(const CyclicCocycle& c);

// Finite-scale top sums: entry i (1-based) is the phase average of
// (1/m) log ||wedge^i A^m(x)||; entry 0 is 0.  Dominates the asymptotic
// top sums by submultiplicativity.
std::vector<double> finite_time_graph(const CyclicCocycle& c, int m);

// log ||wedge^i B|| for a log-scaled matrix (sum of the top i log singular
// values of the scaled part, plus i times the scale).
double log_wedge_norm(const ScaledMatrix& p, int i);

} // namespace cforge

#endif
