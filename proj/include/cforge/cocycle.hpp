#ifndef CFORGE_COCYCLE_HPP
#define CFORGE_COCYCLE_HPP

#include <vector>

#include "cforge/linalg.hpp"

namespace cforge {

// A matrix together with a separately carried log scale: value = e^s * m.
// Keeps long products representable for any period.
struct ScaledMatrix {
    Matrix m;
    double log_scale = 0.0;

    // Pull the magnitude of m into the scale so entries stay O(1).
    void renormalize();
    double log_norm() const;    // log ||e^s m||
    double log_conorm() const;  // log m(e^s m)
};

// Multiply on the left by a (plain) matrix and renormalize.
ScaledMatrix scaled_mul(const Matrix& a, const ScaledMatrix& p);

// Cocycle over a cyclic orbit x_0 -> x_1 -> ... -> x_{n-1} -> x_0.
// maps[j] sends the fiber over x_j to the fiber over x_{j+1 mod n}.
class CyclicCocycle {
public:
    CyclicCocycle() = default;
    CyclicCocycle(int dim, std::vector<Matrix> maps);

    int dim() const { return dim_; }
    int period() const { return static_cast<int>(maps_.size()); }
    const Matrix& map(int j) const { return maps_[j]; }
    const std::vector<Matrix>& maps() const { return maps_; }
    Matrix& mutable_map(int j) { return maps_[j]; }

    // K = max over maps of max(||A||, 1/m(A)); finite for valid cocycles.
    double bound() const;

    // Maps reversed and inverted: the cocycle of T^{-1}.
    CyclicCocycle inverse() const;

    // max over phases of ||A(x_j) - other.A(x_j)|| (operator norm).
    double deviation(const CyclicCocycle& other) const;

    // Product of `len` maps starting at phase `start` (cyclic), log-scaled.
    ScaledMatrix window_product(int start, int len) const;

    // Same for the inverse maps, i.e. (A^len(x_start))^{-1}, log-scaled.
    ScaledMatrix window_product_inverse(int start, int len) const;

private:
    int dim_ = 0;
    std::vector<Matrix> maps_;
};

// Overflow-safe full-period product at a phase, reported as
// e^{log_scale} * q * r with q orthogonal and r upper triangular.
struct PeriodProduct {
    Matrix q;
    Matrix r;
    double log_scale = 0.0;

    // The raw matrix; throws if the scale is not representable in doubles.
    Matrix dense() const;
};

PeriodProduct period_product(const CyclicCocycle& c, int phase);

} // namespace cforge

#endif
