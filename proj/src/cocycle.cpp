#include "cforge/cocycle.hpp"

#include <cmath>

#include "cforge/errors.hpp"

namespace cforge {

void ScaledMatrix::renormalize() {
    const double a = m.cwiseAbs().maxCoeff();
    if (a == 0.0 || !std::isfinite(a)) throw numerical_error("scaled product degenerated");
    m /= a;
    log_scale += std::log(a);
}

double ScaledMatrix::log_norm() const { return std::log(opnorm(m)) + log_scale; }

double ScaledMatrix::log_conorm() const {
    const double c = conorm(m);
    if (c == 0.0) throw numerical_error("scaled product numerically singular");
    return std::log(c) + log_scale;
}

ScaledMatrix scaled_mul(const Matrix& a, const ScaledMatrix& p) {
    ScaledMatrix out{a * p.m, p.log_scale};
    out.renormalize();
    return out;
}

CyclicCocycle::CyclicCocycle(int dim, std::vector<Matrix> maps)
    : dim_(dim), maps_(std::move(maps)) {
    if (dim_ < 1) throw argument_error("cocycle dimension must be positive");
    if (maps_.empty()) throw argument_error("cocycle period must be at least 1");
    for (const auto& m : maps_) {
        if (m.rows() != dim_ || m.cols() != dim_)
            throw argument_error("cocycle map has wrong shape");
        if (!m.allFinite()) throw argument_error("cocycle map has non-finite entries");
        const double cn = conorm(m);
        if (!(cn > 1e-300)) throw argument_error("cocycle map is not invertible");
    }
}

double CyclicCocycle::bound() const {
    double k = 1.0;
    for (const auto& m : maps_) {
        k = std::max(k, opnorm(m));
        k = std::max(k, 1.0 / conorm(m));
    }
    return k;
}

CyclicCocycle CyclicCocycle::inverse() const {
    std::vector<Matrix> inv(maps_.size());
    const int n = period();
    for (int j = 0; j < n; ++j) inv[j] = maps_[n - 1 - j].inverse();
    return CyclicCocycle(dim_, std::move(inv));
}

double CyclicCocycle::deviation(const CyclicCocycle& other) const {
    if (other.dim() != dim_ || other.period() != period())
        throw argument_error("deviation: shape mismatch");
    double dev = 0.0;
    for (int j = 0; j < period(); ++j) dev = std::max(dev, opnorm(maps_[j] - other.maps_[j]));
    return dev;
}

ScaledMatrix CyclicCocycle::window_product(int start, int len) const {
    const int n = period();
    ScaledMatrix p{Matrix::Identity(dim_, dim_), 0.0};
    for (int k = 0; k < len; ++k) p = scaled_mul(maps_[(start + k) % n], p);
    return p;
}

ScaledMatrix CyclicCocycle::window_product_inverse(int start, int len) const {
    const int n = period();
    ScaledMatrix p{Matrix::Identity(dim_, dim_), 0.0};
    // (A^len(x_start))^{-1} = A(x_start)^{-1} ... A(x_{start+len-1})^{-1}
    for (int k = len - 1; k >= 0; --k) {
        const Matrix inv = maps_[(start + k) % n].inverse();
        p.m = p.m * inv;
        p.renormalize();
    }
    return p;
}

Matrix PeriodProduct::dense() const {
    const double extra = std::log(std::max(r.cwiseAbs().maxCoeff(), 1.0));
    if (log_scale + extra > 700.0)
        throw std::range_error("period product overflows doubles; keep the factored form");
    return std::exp(log_scale) * q * r;
}

PeriodProduct period_product(const CyclicCocycle& c, int phase) {
    if (phase < 0 || phase >= c.period()) throw argument_error("period_product: bad phase");
    const int d = c.dim();
    Matrix q = Matrix::Identity(d, d);
    Matrix r = Matrix::Identity(d, d);
    double scale = 0.0;
    for (int k = 0; k < c.period(); ++k) {
        const Matrix b = c.map((phase + k) % c.period()) * q;
        Eigen::HouseholderQR<Matrix> qr(b);
        q = qr.householderQ();
        Matrix rk = qr.matrixQR().triangularView<Eigen::Upper>();
        // positive-diagonal convention keeps the factorization unique
        for (int i = 0; i < d; ++i)
            if (rk(i, i) < 0) {
                rk.row(i) = -rk.row(i);
                q.col(i) = -q.col(i);
            }
        r = rk * r;
        const double a = r.cwiseAbs().maxCoeff();
        if (a > 1e100 || a < 1e-100) {
            r /= a;
            scale += std::log(a);
        }
    }
    const double a = r.cwiseAbs().maxCoeff();
    return PeriodProduct{q, r / a, scale + std::log(a)};
}

} // namespace cforge
