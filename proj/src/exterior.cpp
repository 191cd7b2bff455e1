#include "cforge/exterior.hpp"

#include "cforge/errors.hpp"

namespace cforge {

std::vector<std::vector<int>> wedge_index_tuples(int d, int i) {
    std::vector<std::vector<int>> tuples;
    std::vector<int> cur(i);
    for (int k = 0; k < i; ++k) cur[k] = k;
    while (true) {
        tuples.push_back(cur);
        int pos = i - 1;
        while (pos >= 0 && cur[pos] == d - i + pos) --pos;
        if (pos < 0) break;
        ++cur[pos];
        for (int k = pos + 1; k < i; ++k) cur[k] = cur[k - 1] + 1;
    }
    return tuples;
}

Matrix exterior_power(const Matrix& m, int i) {
    const int d = static_cast<int>(m.rows());
    if (m.cols() != d) throw argument_error("exterior_power: square matrix required");
    if (i < 1 || i > d) throw argument_error("exterior_power: order out of range");
    const auto tuples = wedge_index_tuples(d, i);
    const int nd = static_cast<int>(tuples.size());
    Matrix out(nd, nd);
    Matrix minor(i, i);
    for (int r = 0; r < nd; ++r)
        for (int c = 0; c < nd; ++c) {
            for (int a = 0; a < i; ++a)
                for (int b = 0; b < i; ++b) minor(a, b) = m(tuples[r][a], tuples[c][b]);
            out(r, c) = minor.determinant();
        }
    return out;
}

} // namespace cforge
