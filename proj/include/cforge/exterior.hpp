#ifndef CFORGE_EXTERIOR_HPP
#define CFORGE_EXTERIOR_HPP

#include <vector>

#include "cforge/linalg.hpp"

namespace cforge {

// Index tuples 0 <= j_1 < ... < j_i < d in lexicographic order; the wedge
// basis e_{j_1} ^ ... ^ e_{j_i} is enumerated in this order.
std::vector<std::vector<int>> wedge_index_tuples(int d, int i);

// Induced map on the i-th exterior power, a C(d,i) x C(d,i) matrix of
// i x i minors.  Singular values are all i-fold products of those of m.
Matrix exterior_power(const Matrix& m, int i);

} // namespace cforge

#endif
