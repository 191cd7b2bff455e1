#include "cforge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <lapacke.h>

#include "cforge/errors.hpp"

namespace cforge {

double conorm(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().minCoeff();
}

double opnorm(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().maxCoeff();
}

Matrix rotation2(double theta) {
    Matrix r(2, 2);
    const double c = std::cos(theta), s = std::sin(theta);
    r << c, -s, s, c;
    return r;
}

Matrix plane_rotation(int d, int i, int j, double theta) {
    Matrix r = Matrix::Identity(d, d);
    const double c = std::cos(theta), s = std::sin(theta);
    r(i, i) = c;
    r(j, j) = c;
    r(i, j) = -s;
    r(j, i) = s;
    return r;
}

Matrix random_orthogonal(int d, Rng& rng) {
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = rng.gaussian();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i)
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    return q;
}

Matrix orthonormalize(const Matrix& basis) {
    Eigen::HouseholderQR<Matrix> qr(basis);
    Matrix q = Matrix(qr.householderQ()).leftCols(basis.cols());
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < basis.cols(); ++i)
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    return q;
}

Subspace::Subspace(Matrix b) : basis(std::move(b)) {
    if (basis.cols() == 0 || basis.rows() < basis.cols())
        throw argument_error("subspace basis must have 1..d independent columns");
    if (orthonormality_defect() > 1e-10) basis = orthonormalize(basis);
}

Subspace Subspace::complement() const {
    const int d = ambient_dim(), k = dim();
    if (k == d) throw argument_error("complement of the full space is zero");
    Eigen::HouseholderQR<Matrix> qr(basis);
    Matrix q = qr.householderQ();
    return Subspace(q.rightCols(d - k));
}

double Subspace::orthonormality_defect() const {
    Matrix gram = basis.transpose() * basis;
    return (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
}

std::vector<double> principal_angles(const Subspace& f, const Subspace& g) {
    if (f.ambient_dim() != g.ambient_dim())
        throw argument_error("principal_angles: ambient dimension mismatch");
    Eigen::JacobiSVD<Matrix> svd(f.basis.transpose() * g.basis);
    const auto& s = svd.singularValues();
    std::vector<double> out(s.size());
    // descending cosines -> ascending angles
    for (int i = 0; i < s.size(); ++i) out[i] = std::acos(std::min(1.0, std::max(-1.0, s(i))));
    return out;
}

double principal_angle(const Subspace& f, const Subspace& g) {
    if (f.dim() == 0 || g.dim() == 0) throw argument_error("principal_angle: zero subspace");
    return principal_angles(f, g).front();
}

double vector_angle(const Vector& v, const Subspace& f) {
    const double n = v.norm();
    if (n == 0.0) throw argument_error("vector_angle: zero vector");
    const double c = (f.basis.transpose() * (v / n)).norm();
    return std::acos(std::min(1.0, c));
}

double subspace_distance(const Subspace& f, const Subspace& g) {
    if (f.dim() != g.dim()) throw argument_error("subspace_distance: dimension mismatch");
    Eigen::JacobiSVD<Matrix> svd(f.basis.transpose() * g.basis);
    const double c = svd.singularValues().minCoeff();
    return std::sqrt(std::max(0.0, 1.0 - c * c));
}

Flag complement_flag(const Flag& f) {
    const int d = f.dim();
    Flag out;
    out.basis = Matrix(d, d);
    for (int i = 0; i < d; ++i) out.basis.col(i) = f.basis.col(d - 1 - i);
    return out;
}

Flag top_singular_flag(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    Flag f;
    f.basis = svd.matrixV();
    return f;
}

double log_abs_det(const Matrix& m) {
    Eigen::PartialPivLU<Matrix> lu(m);
    const Matrix& u = lu.matrixLU();
    double s = 0.0;
    for (int i = 0; i < m.rows(); ++i) {
        const double p = std::abs(u(i, i));
        if (p == 0.0 || !std::isfinite(p)) throw numerical_error("log_abs_det: singular matrix");
        s += std::log(p);
    }
    return s;
}

namespace {

double block_log_modulus_at(const Matrix& t, int i, int size) {
    if (size == 1) {
        const double v = std::abs(t(i, i));
        return v > 0 ? std::log(v) : -1e300;
    }
    // complex pair: modulus^2 = det of the 2x2 block
    const double det = t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i);
    return 0.5 * std::log(std::abs(det));
}

double block_angle_at(const Matrix& t, int i, int size) {
    if (size == 1) return t(i, i) >= 0 ? 0.0 : 3.14159265358979323846;
    const double det = t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i);
    const double rho = std::sqrt(std::abs(det));
    const double c = 0.5 * (t(i, i) + t(i + 1, i + 1)) / (rho > 0 ? rho : 1.0);
    return std::acos(std::min(1.0, std::max(-1.0, c)));
}

} // namespace

OrderedSchur ordered_real_schur(const Matrix& m, bool ascending) {
    return ordered_real_schur(
        m, ascending ? SchurOrder::modulus_ascending : SchurOrder::modulus_descending);
}

OrderedSchur ordered_real_schur(const Matrix& m, SchurOrder order) {
    const int d = static_cast<int>(m.rows());
    if (m.cols() != d) throw argument_error("ordered_real_schur: square matrix required");

    OrderedSchur out;
    out.t = m;
    out.q = Matrix::Identity(d, d);
    std::vector<double> wr(d), wi(d);
    lapack_int sdim = 0;
    lapack_int info = LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, d,
                                    out.t.data(), d, &sdim, wr.data(), wi.data(),
                                    out.q.data(), d);
    if (info != 0) throw numerical_error("dgees failed, info=" + std::to_string(info));

    // Selection sort of diagonal blocks by ascending modulus, moving blocks
    // with dtrexc.  Block starts are re-read from the subdiagonal each pass.
    auto block_starts = [&]() {
        std::vector<int> starts;
        int i = 0;
        while (i < d) {
            starts.push_back(i);
            const bool pair = (i + 1 < d) && (out.t(i + 1, i) != 0.0);
            i += pair ? 2 : 1;
        }
        return starts;
    };

    auto key = [&](int i, int s) {
        if (order == SchurOrder::angle_ascending) return block_angle_at(out.t, i, s);
        const double v = block_log_modulus_at(out.t, i, s);
        return order == SchurOrder::modulus_ascending ? v : -v;
    };

    for (bool moved = true; moved;) {
        moved = false;
        auto starts = block_starts();
        for (size_t b = 0; b + 1 < starts.size(); ++b) {
            const int i = starts[b];
            const int j = starts[b + 1];
            const int si = j - i;
            const int sj = (b + 2 < starts.size() ? starts[b + 2] : d) - j;
            if (key(j, sj) < key(i, si) - 1e-12) {
                // move block at j in front of block at i
                lapack_int ifst = j + 1, ilst = i + 1;
                info = LAPACKE_dtrexc(LAPACK_COL_MAJOR, 'V', d, out.t.data(), d,
                                      out.q.data(), d, &ifst, &ilst);
                if (info != 0)
                    throw numerical_error("dtrexc failed, info=" + std::to_string(info));
                moved = true;
                break; // block layout changed; rescan
            }
        }
    }

    auto starts = block_starts();
    for (size_t b = 0; b < starts.size(); ++b) {
        const int i = starts[b];
        const int s = (b + 1 < starts.size() ? starts[b + 1] : d) - i;
        out.block_sizes.push_back(s);
        out.block_log_modulus.push_back(block_log_modulus_at(out.t, i, s));
    }
    return out;
}

} // namespace cforge
