#ifndef CFORGE_LINALG_HPP
#define CFORGE_LINALG_HPP

#include <Eigen/Dense>
#include <vector>

#include "cforge/rng.hpp"

namespace cforge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Smallest singular value ("conorm"), the minimum expansion factor.
double conorm(const Matrix& m);

// Operator 2-norm.
double opnorm(const Matrix& m);

// 2x2 rotation by angle theta.
Matrix rotation2(double theta);

// Embeds a rotation by theta in the (i,j) coordinate plane of dimension d.
Matrix plane_rotation(int d, int i, int j, double theta);

// Haar-ish random orthogonal matrix (QR of a Gaussian sample with the
// diagonal sign fix); deterministic per rng state.
Matrix random_orthogonal(int d, Rng& rng);

// Columns orthonormalized by Householder QR, keeping the span and order.
Matrix orthonormalize(const Matrix& basis);

// A linear subspace of R^d carried as an orthonormal column basis.
struct Subspace {
    Matrix basis; // d x k, orthonormal columns

    Subspace() = default;
    explicit Subspace(Matrix b);

    int ambient_dim() const { return static_cast<int>(basis.rows()); }
    int dim() const { return static_cast<int>(basis.cols()); }

    // Orthonormal basis of the orthogonal complement.
    Subspace complement() const;

    // max_i |1 - s_i(B^T B)| style orthonormality defect, used as an invariant.
    double orthonormality_defect() const;
};

// Smallest principal angle between two subspaces, in [0, pi/2].
// Zero iff the subspaces intersect nontrivially.
double principal_angle(const Subspace& f, const Subspace& g);

// All principal angles, ascending.
std::vector<double> principal_angles(const Subspace& f, const Subspace& g);

// Angle between a vector and a subspace.
double vector_angle(const Vector& v, const Subspace& f);

// Distance between equal-dimension subspaces: sin of the largest principal
// angle (operator norm of the projector difference).
double subspace_distance(const Subspace& f, const Subspace& g);

// A complete flag F_1 subset ... subset F_{d-1}: column j of `basis` extends
// the span; F_i = span of the first i columns.
struct Flag {
    Matrix basis; // d x d orthogonal

    int dim() const { return static_cast<int>(basis.rows()); }
    Subspace part(int i) const { return Subspace(basis.leftCols(i)); }
};

// Flag of nested orthogonal complements: part(i) = part(d-i) of `f`, complemented.
Flag complement_flag(const Flag& f);

// Right singular-vector flag of m, ordered by descending singular value
// (part(i) maximizes the i-volume expansion of m).
Flag top_singular_flag(const Matrix& m);

// Real Schur decomposition m = Q T Q^T with the diagonal blocks sorted
// (2x2 complex-pair blocks move as units); the leading k columns of q then
// span the invariant subspace of the k extreme blocks.  Implemented with
// LAPACK dgees + dtrexc.
struct OrderedSchur {
    Matrix q;               // orthogonal
    Matrix t;               // quasi upper triangular
    std::vector<int> block_sizes; // 1 or 2, in sort order
    std::vector<double> block_log_modulus; // per block, log |eigenvalue|
};
enum class SchurOrder { modulus_ascending, modulus_descending, angle_ascending };
OrderedSchur ordered_real_schur(const Matrix& m, bool ascending = true);
OrderedSchur ordered_real_schur(const Matrix& m, SchurOrder order);

// log |det m| summed in a sign-safe way; m must be invertible.
double log_abs_det(const Matrix& m);

} // namespace cforge

#endif
