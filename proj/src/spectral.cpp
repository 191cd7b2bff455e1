#include "cforge/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "cforge/errors.hpp"
#include "cforge/exterior.hpp"

namespace cforge {

bool SpectralData::real_spectrum() const {
    for (char c : complex_slot)
        if (c) return false;
    return true;
}

bool SpectralData::is_cluster_boundary(int k) const {
    if (k == 0 || k == dim) return true;
    for (const auto& cl : clusters)
        if (cl.begin == k) return true;
    return false;
}

int SpectralData::cluster_of_slot(int slot) const {
    for (size_t c = 0; c < clusters.size(); ++c)
        if (slot >= clusters[c].begin && slot < clusters[c].begin + clusters[c].size)
            return static_cast<int>(c);
    throw argument_error("cluster_of_slot: slot out of range");
}

Subspace SpectralData::slow_bundle(int phase, int k) const {
    if (k < 1 || k > dim) throw argument_error("slow_bundle: bad cut");
    return Subspace(frames[phase].leftCols(k));
}

Subspace SpectralData::fast_bundle(int phase, int k) const {
    if (!is_cluster_boundary(k) || k >= dim) throw argument_error("fast_bundle: bad cut");
    const int c0 = cluster_of_slot(k);
    return cluster_span(phase, c0, static_cast<int>(clusters.size()));
}

Subspace SpectralData::cluster_span(int phase, int c0, int c1) const {
    int cols = 0;
    for (int c = c0; c < c1; ++c) cols += clusters[c].size;
    Matrix b(dim, cols);
    int at = 0;
    for (int c = c0; c < c1; ++c) {
        b.middleCols(at, clusters[c].size) = bundles[phase][c];
        at += clusters[c].size;
    }
    return Subspace(orthonormalize(b));
}

LyapunovGraph SpectralData::graph() const {
    return LyapunovGraph::from_exponents(exponents);
}

namespace {

constexpr double kNoiseFloorLog = -69.0; // ~ log(1e-30): below this, phase-0 moduli are noise

struct RecResult {
    std::vector<double> exponents;
    std::vector<SpectralData::Cluster> clusters;
    std::vector<char> complex_slot;
    std::vector<Matrix> frames;              // per phase, d_sub x d_sub
    std::vector<char> flag_cut_ok;
    std::vector<std::vector<Matrix>> bundles; // [phase][cluster], d_sub x size
    double max_residual = 0.0;
};

double det_log_sum(const CyclicCocycle& c) {
    double s = 0.0;
    for (int j = 0; j < c.period(); ++j) s += log_abs_det(c.map(j));
    return s;
}

// Forward transport of a full basis, QR-orthonormalized each step so the
// leading spans stay nested.
std::vector<Matrix> transport_flag_forward(const CyclicCocycle& c, const Matrix& q0) {
    const int n = c.period();
    std::vector<Matrix> f(n);
    f[0] = q0;
    for (int j = 0; j + 1 < n; ++j) f[j + 1] = orthonormalize(c.map(j) * f[j]);
    return f;
}

RecResult analyze_rec(const CyclicCocycle& c);

RecResult make_leaf(const CyclicCocycle& c, const OrderedSchur& schur) {
    const int d = c.dim();
    const int n = c.period();
    RecResult out;

    const double lam = det_log_sum(c) / (n * d);
    out.exponents.assign(d, lam);

    bool complex = false;
    for (int s : schur.block_sizes) complex |= (s == 2);
    out.clusters.push_back({0, d, lam, complex});

    out.complex_slot.assign(d, 0);
    {
        int at = 0;
        for (int s : schur.block_sizes) {
            if (s == 2) {
                out.complex_slot[at] = 1;
                out.complex_slot[at + 1] = 1;
            }
            at += s;
        }
    }

    out.frames = transport_flag_forward(c, schur.q);
    out.bundles.assign(n, {Matrix::Identity(d, d)});

    // wrap residuals per interior cut decide which flag cuts survive
    out.flag_cut_ok.assign(d + 1, 0);
    out.flag_cut_ok[0] = out.flag_cut_ok[d] = 1;
    if (d > 1) {
        const Matrix wrap = orthonormalize(c.map(n - 1) * out.frames[n - 1]);
        std::vector<char> splits_pair(d + 1, 0);
        int at = 0;
        for (int s : schur.block_sizes) {
            if (s == 2) splits_pair[at + 1] = 1;
            at += s;
        }
        for (int k = 1; k < d; ++k) {
            if (splits_pair[k]) continue;
            const double r =
                subspace_distance(Subspace(wrap.leftCols(k)), Subspace(out.frames[0].leftCols(k)));
            if (r <= 1e-8) {
                out.flag_cut_ok[k] = 1;
                out.max_residual = std::max(out.max_residual, r);
            }
        }
    }
    return out;
}

RecResult analyze_rec(const CyclicCocycle& c) {
    const int d = c.dim();
    const int n = c.period();

    const ScaledMatrix prod = c.window_product(0, n);
    OrderedSchur schur;
    try {
        schur = ordered_real_schur(prod.m);
    } catch (const numerical_error& e) {
        throw numerical_error(std::string("period-product eigensolve failed (dim ") +
                              std::to_string(d) + ", max|entry| " +
                              std::to_string(prod.m.cwiseAbs().maxCoeff()) + "): " + e.what());
    }

    const auto& blm = schur.block_log_modulus;
    const int nblocks = static_cast<int>(blm.size());
    const double top = blm.back();

    if (d == 1 || top - blm.front() <= SpectralData::kTieTol) return make_leaf(c, schur);

    // cut at the widest gap whose fast side is above the noise floor
    int best_boundary = -1;
    double best_gap = -1.0;
    int cum = 0;
    for (int t = 0; t + 1 < nblocks; ++t) {
        cum += schur.block_sizes[t];
        if (blm[t + 1] < top + kNoiseFloorLog) continue;
        double gap = blm[t + 1] - blm[t];
        if (!std::isfinite(gap)) gap = 1e300;
        if (gap > best_gap) {
            best_gap = gap;
            best_boundary = cum;
        }
    }
    if (best_boundary < 1) return make_leaf(c, schur); // no usable gap; treat as one cluster

    const int ks = best_boundary; // slow dimension
    const int kf = d - ks;

    // slow invariant subspace at phase 0: leading columns of ascending Schur;
    // fast invariant subspace: leading columns of descending Schur
    const Matrix v0 = schur.q.leftCols(ks);
    OrderedSchur desc = ordered_real_schur(prod.m, /*ascending=*/false);
    const Matrix w0 = desc.q.leftCols(kf);

    // transport: slow backward (stable), fast forward (stable)
    std::vector<Matrix> v(n), w(n);
    v[0] = v0;
    for (int j = n - 1; j >= 1; --j) {
        const int jn = (j + 1) % n;
        v[j] = orthonormalize(c.map(j).inverse() * v[jn]);
    }
    w[0] = w0;
    for (int j = 0; j + 1 < n; ++j) w[j + 1] = orthonormalize(c.map(j) * w[j]);

    const double wrap_v =
        subspace_distance(Subspace(orthonormalize(c.map(0).inverse() * v[1 % n])), Subspace(v[0]));
    const double wrap_w =
        subspace_distance(Subspace(orthonormalize(c.map(n - 1) * w[n - 1])), Subspace(w[0]));

    std::vector<Matrix> slow_maps(n), fast_maps(n);
    for (int j = 0; j < n; ++j) {
        const int jn = (j + 1) % n;
        slow_maps[j] = v[jn].transpose() * c.map(j) * v[j];
        fast_maps[j] = w[jn].transpose() * c.map(j) * w[j];
    }

    RecResult rs = analyze_rec(CyclicCocycle(ks, std::move(slow_maps)));
    RecResult rf = analyze_rec(CyclicCocycle(kf, std::move(fast_maps)));

    RecResult out;
    out.max_residual = std::max({rs.max_residual, rf.max_residual, wrap_v, wrap_w});

    out.exponents = rs.exponents;
    out.exponents.insert(out.exponents.end(), rf.exponents.begin(), rf.exponents.end());

    out.clusters = rs.clusters;
    for (auto cl : rf.clusters) {
        cl.begin += ks;
        out.clusters.push_back(cl);
    }

    out.complex_slot = rs.complex_slot;
    out.complex_slot.insert(out.complex_slot.end(), rf.complex_slot.begin(),
                            rf.complex_slot.end());

    out.flag_cut_ok.assign(d + 1, 0);
    for (int k = 0; k <= ks; ++k) out.flag_cut_ok[k] = rs.flag_cut_ok[k];
    for (int k = 0; k <= kf; ++k)
        if (rf.flag_cut_ok[k]) out.flag_cut_ok[ks + k] = 1;

    out.frames.resize(n);
    out.bundles.resize(n);
    for (int j = 0; j < n; ++j) {
        Matrix fr(d, d);
        fr.leftCols(ks) = v[j] * rs.frames[j];
        // complete with the fast flag, projected so leading spans nest
        for (int k = 0; k < kf; ++k) {
            Vector col = w[j] * rf.frames[j].col(k);
            const int have = ks + k;
            col -= fr.leftCols(have) * (fr.leftCols(have).transpose() * col);
            const double nn = col.norm();
            if (nn < 1e-12)
                throw numerical_error("flag assembly degenerated: bundles nearly tangent");
            fr.col(have) = col / nn;
        }
        out.frames[j] = fr;

        auto& bl = out.bundles[j];
        for (const auto& b : rs.bundles[j]) bl.push_back(v[j] * b);
        for (const auto& b : rf.bundles[j]) bl.push_back(w[j] * b);
    }
    return out;
}

} // namespace

SpectralData analyze(const CyclicCocycle& c) {
    RecResult r = analyze_rec(c);
    SpectralData out;
    out.dim = c.dim();
    out.period = c.period();
    out.exponents = std::move(r.exponents);
    out.clusters = std::move(r.clusters);
    out.complex_slot = std::move(r.complex_slot);
    out.frames = std::move(r.frames);
    out.flag_cut_ok = std::move(r.flag_cut_ok);
    out.bundles = std::move(r.bundles);
    out.max_residual = r.max_residual;
    return out;
}

LyapunovGraph lyapunov_graph(const CyclicCocycle& c) {
    SpectralData sd = analyze(c);
    LyapunovGraph g = sd.graph();
    // pin the endpoint to the determinant route, which is exact
    const double sd_exact = det_log_sum(c) / c.period();
    g.sigma[c.dim()] = sd_exact;
    return g;
}

double log_wedge_norm(const ScaledMatrix& p, int i) {
    const int d = static_cast<int>(p.m.rows());
    if (i < 1 || i > d) throw argument_error("log_wedge_norm: order out of range");
    if (i == d) return log_abs_det(p.m) + d * p.log_scale;
    const Matrix wm = exterior_power(p.m, i);
    const double n1 = opnorm(wm);
    if (n1 == 0.0) throw numerical_error("wedge power numerically zero");
    return std::log(n1) + i * p.log_scale;
}

std::vector<double> finite_time_graph(const CyclicCocycle& c, int m) {
    const int d = c.dim();
    const int n = c.period();
    if (m < 1 || m > n) throw argument_error("finite_time_graph: need 1 <= m <= period");
    std::vector<double> acc(d + 1, 0.0);
    for (int j = 0; j < n; ++j) {
        const ScaledMatrix p = c.window_product(j, m);
        for (int i = 1; i <= d; ++i) acc[i] += log_wedge_norm(p, i);
    }
    for (int i = 1; i <= d; ++i) acc[i] /= static_cast<double>(m) * n;
    return acc;
}

} // namespace cforge
