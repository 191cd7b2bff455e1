#include "cforge/graph.hpp"

#include <algorithm>
#include <cmath>

#include "cforge/errors.hpp"

namespace cforge {

LyapunovGraph LyapunovGraph::from_exponents(const std::vector<double>& ascending) {
    LyapunovGraph g;
    g.sigma.resize(ascending.size() + 1);
    g.sigma[0] = 0.0;
    for (size_t i = 0; i < ascending.size(); ++i) g.sigma[i + 1] = g.sigma[i] + ascending[i];
    return g;
}

std::vector<double> LyapunovGraph::exponents() const {
    std::vector<double> lam(dim());
    for (int i = 1; i <= dim(); ++i) lam[i - 1] = sigma[i] - sigma[i - 1];
    return lam;
}

void LyapunovGraph::validate(double tol) const {
    if (sigma.size() < 2) throw argument_error("graph needs dimension >= 1");
    if (std::abs(sigma[0]) > 0.0) throw argument_error("graph must start at sigma_0 = 0");
    for (size_t i = 0; i + 2 < sigma.size(); ++i) {
        const double d2 = sigma[i + 2] - 2.0 * sigma[i + 1] + sigma[i];
        if (d2 < -tol) throw argument_error("graph is not convex");
    }
    for (double v : sigma)
        if (!std::isfinite(v)) throw argument_error("graph has non-finite entries");
}

double LyapunovGraph::sup_distance(const LyapunovGraph& other) const {
    if (other.sigma.size() != sigma.size()) throw argument_error("graph dimension mismatch");
    double m = 0.0;
    for (size_t i = 0; i < sigma.size(); ++i) m = std::max(m, std::abs(sigma[i] - other.sigma[i]));
    return m;
}

} // namespace cforge
