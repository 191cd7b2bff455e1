#ifndef CFORGE_GRAPH_HPP
#define CFORGE_GRAPH_HPP

#include <vector>

namespace cforge {

// Convex graph (0, sigma_1, ..., sigma_d) of partial sums of ordered
// Lyapunov exponents, exponents ascending.
struct LyapunovGraph {
    std::vector<double> sigma;

    LyapunovGraph() = default;
    explicit LyapunovGraph(std::vector<double> s) : sigma(std::move(s)) {}

    int dim() const { return static_cast<int>(sigma.size()) - 1; }
    double lambda(int i) const { return sigma[i] - sigma[i - 1]; } // i in 1..d

    static LyapunovGraph from_exponents(const std::vector<double>& ascending);
    std::vector<double> exponents() const;

    // sigma[0] == 0 and convexity within `tol` (second differences >= -tol).
    void validate(double tol = 1e-9) const;

    double sup_distance(const LyapunovGraph& other) const;
};

} // namespace cforge

#endif
