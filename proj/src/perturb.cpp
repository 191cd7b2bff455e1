#include "cforge/perturb.hpp"

#include <cmath>
#include <complex>

#include "cforge/errors.hpp"
#include "perturb_detail.hpp"

namespace cforge {

double PerturbationPath::max_deviation() const {
    double dev = 0.0;
    for (const auto& s : samples) dev = std::max(dev, s.deviation(base));
    return dev;
}

double PerturbationPath::max_consecutive_deviation() const {
    double dev = 0.0;
    for (size_t k = 1; k < samples.size(); ++k)
        dev = std::max(dev, samples[k].deviation(samples[k - 1]));
    return dev;
}

void PerturbationPath::compute_graphs() {
    graphs.clear();
    graphs.reserve(samples.size());
    for (const auto& s : samples) graphs.push_back(lyapunov_graph(s));
}

void PerturbationPath::validate() const {
    if (samples.empty() || samples.front().deviation(base) != 0.0)
        throw argument_error("path must start at its base");
    if (max_deviation() > eps_bound)
        throw argument_error("path exceeds its eps bound");
    if (max_consecutive_deviation() > eps_bound / 16.0 + 1e-15)
        throw argument_error("path violates the discretization contract");
    if (!graphs.empty() && graphs.size() != samples.size())
        throw argument_error("graph count does not match sample count");
}

// --- adjust_spectrum --------------------------------------------------------

PerturbationPath adjust_spectrum(const CyclicCocycle& c, const LyapunovGraph& target,
                                 double eps) {
    const int d = c.dim();
    const int n = c.period();
    if (target.dim() != d) throw argument_error("adjust_spectrum: target dimension mismatch");
    target.validate();
    if (eps <= 0) throw argument_error("adjust_spectrum: eps must be positive");

    SpectralData sd = analyze(c);
    if (!sd.real_spectrum())
        throw precondition_error("adjust_spectrum: cocycle must have only real eigenvalues");
    for (int k = 1; k < d; ++k)
        if (!sd.flag_cut_ok[k])
            throw numerical_error(
                "adjust_spectrum: invariant flag not transportable (near-defective product)");

    const LyapunovGraph g0 = sd.graph();
    std::vector<double> delta(d);
    double max_shift = 0.0;
    for (int i = 1; i <= d; ++i) {
        delta[i - 1] = target.lambda(i) - g0.lambda(i);
        max_shift = std::max(max_shift, std::abs(delta[i - 1]));
    }
    const double k_bound = c.bound();
    if (k_bound * std::expm1(max_shift) > 0.99 * eps)
        throw std::range_error("adjust_spectrum: target too far for the eps budget");

    // triangular representation in the flag frames; the projection jump is
    // within the jitter tolerance
    std::vector<Matrix> tri(n);
    double jump = 0.0;
    for (int j = 0; j < n; ++j) {
        const int jn = (j + 1) % n;
        Matrix t = sd.frames[jn].transpose() * c.map(j) * sd.frames[j];
        Matrix strict = t.triangularView<Eigen::Upper>();
        jump = std::max(jump, opnorm(t - strict));
        tri[j] = strict;
    }
    if (jump > std::min(1e-6, eps / 4))
        throw numerical_error("adjust_spectrum: triangular projection jump too large: " +
                              std::to_string(jump));

    const CyclicCocycle base = c;
    const SpectralData frames = sd;
    const std::vector<Matrix> tri_c = tri;
    const std::vector<double> delta_c = delta;

    detail::PathAccum acc(c, eps);
    acc.append_family([&base, &frames, &tri_c, &delta_c](double t) {
        const int nn = base.period();
        const int dd = base.dim();
        Vector diag(dd);
        for (int i = 0; i < dd; ++i) diag(i) = std::exp(t * delta_c[i]);
        std::vector<Matrix> maps(nn);
        for (int j = 0; j < nn; ++j) {
            const int jn = (j + 1) % nn;
            maps[j] = frames.frames[jn] * (tri_c[j] * diag.asDiagonal()) *
                      frames.frames[j].transpose();
        }
        return CyclicCocycle(dd, std::move(maps));
    });
    PerturbationPath out = acc.finish();
    out.compute_graphs();

    if (out.graphs.back().sup_distance(target) > 1e-9)
        throw numerical_error("adjust_spectrum: endpoint graph missed the target");
    return out;
}

// --- raise_graph -------------------------------------------------------------

namespace {

void check_pins(const LyapunovGraph& current, const LyapunovGraph& target,
                const std::vector<int>& pins, double tol) {
    for (int i : pins)
        if (std::abs(current.sigma[i] - target.sigma[i]) > tol)
            throw pinning_error("raise_graph: target moves pinned coordinate " +
                                std::to_string(i));
}

RaiseResult raise_within(const CyclicCocycle& c, const LyapunovGraph& target, double eps,
                         bool preserve_index) {
    const int d = c.dim();
    const int n = c.period();
    RaiseResult res;

    const LyapunovGraph g0 = lyapunov_graph(c);
    const auto order = majorization_cmp(g0, target);
    if (order == MajorizationOrder::endpoint_mismatch)
        throw order_error("raise_graph: target changes sigma_d");
    if (order != MajorizationOrder::a_below && order != MajorizationOrder::equal)
        throw order_error("raise_graph: target does not majorize the current graph");

    if (preserve_index) {
        const auto p0 = graph_index(g0), p1 = graph_index(target);
        if (!p0 || !p1 || *p0 != *p1)
            throw index_error("raise_graph: preserve_index needs matching indices");
    }

    detail::PathAccum acc(c, eps);

    if (order == MajorizationOrder::equal) {
        res.path = acc.finish();
        res.path.compute_graphs();
        return res;
    }

    // budget split: realify / mixing / final adjustment
    const double eps_realify = eps / 4;
    const double eps_adjust = eps / 4;

    {
        PerturbationPath real = make_eigenvalues_real(c, eps_realify);
        acc.append_path(real);
    }

    // plan resolution tied to what the final adjustment can absorb
    const double k_after = acc.current().bound() + eps;
    const double delta = std::min(1e-3, 0.2 * std::log1p(eps_adjust / k_after));
    GraphPathPlan plan =
        zigzag_path(lyapunov_graph(acc.current()), target, delta, preserve_index);

    for (size_t step = 0; step < plan.moved_index.size(); ++step) {
        const int i = plan.moved_index[step];
        const double v = plan.vertices[step + 1].sigma[i];
        const CyclicCocycle cur = acc.current();
        const LyapunovGraph gc = lyapunov_graph(cur);
        if (gc.sigma[i] >= v - 1e-11) continue;

        const SpectralData sd = analyze(cur);
        EngineSchedule::Rung rung;
        rung.moved_index = i;
        rung.ell = strongest_nondominated_scale(cur, sd, i, std::max(2, n / 2));
        if (rung.ell == 0)
            throw domination_error(
                "raise_graph: a dominated splitting obstructs moving coordinate " +
                std::to_string(i));
        rung.pre_log_ratio = check_domination(cur, sd, i, rung.ell).worst_log_ratio;

        const double remaining = eps - eps_adjust - acc.used();
        if (remaining <= eps / 64)
            throw capability_error("raise_graph: eps budget exhausted after " +
                                   std::to_string(step) + " of " +
                                   std::to_string(plan.moved_index.size()) + " plan steps");
        rung.eps_alloc = 0.6 * remaining;

        PerturbationPath mixed = mix_two_exponents_until(cur, i, rung.eps_alloc, v);
        acc.append_path(mixed);

        const SpectralData sd_after = analyze(acc.current());
        const auto post = check_domination(acc.current(), sd_after, i, rung.ell);
        rung.post_log_ratio = post.worst_log_ratio;
        rung.eta_ok = !post.dominated;
        res.schedule.rungs.push_back(rung);
    }

    {
        const double left = eps - acc.used();
        PerturbationPath adj = adjust_spectrum(acc.current(), target, std::min(eps_adjust, left));
        acc.append_path(adj);
    }

    res.path = acc.finish();
    res.path.compute_graphs();
    if (res.path.graphs.back().sup_distance(target) > 1e-6)
        throw capability_error("raise_graph: endpoint missed the target by " +
                               std::to_string(res.path.graphs.back().sup_distance(target)));
    return res;
}

} // namespace

RaiseResult raise_graph(const CyclicCocycle& c, const LyapunovGraph& target, double eps,
                        const RaiseOptions& opts) {
    const int d = c.dim();
    if (target.dim() != d) throw argument_error("raise_graph: target dimension mismatch");
    target.validate();
    if (eps <= 0) throw argument_error("raise_graph: eps must be positive");

    if (!opts.respect_finest) return raise_within(c, target, eps, opts.preserve_index);

    // bundle-by-bundle through the finest splitting, pinned at its indices
    const int ell = *opts.respect_finest;
    const InvariantSplitting fs = finest_splitting(c, ell);
    const LyapunovGraph g0 = lyapunov_graph(c);
    check_pins(g0, target, fs.indices, 1e-9);

    std::vector<int> stops = fs.indices;
    stops.push_back(d);

    RaiseResult res;
    detail::PathAccum acc(c, eps);

    int lo = 0;
    for (size_t b = 0; b < stops.size(); ++b) {
        const int hi = stops[b];
        const int dim_b = hi - lo;
        if (dim_b >= 2) {
            // restricted graph target, rebased at sigma_lo
            const CyclicCocycle cur = acc.current();
            const InvariantSplitting fs_cur = finest_splitting(cur, ell);
            if (fs_cur.indices != fs.indices)
                throw capability_error("raise_graph: finest splitting drifted during the run");
            const auto bundle = detail::bundle_of(fs_cur, static_cast<int>(b));
            auto [restricted, quotient] = restrict_and_quotient(cur, bundle);
            (void)quotient;

            const LyapunovGraph gr = lyapunov_graph(restricted);
            LyapunovGraph tr;
            tr.sigma.resize(dim_b + 1);
            for (int i = 0; i <= dim_b; ++i)
                tr.sigma[i] = target.sigma[lo + i] - target.sigma[lo];
            if (LyapunovGraph(tr).sup_distance(gr) > 1e-12) {
                RaiseResult sub = raise_within(restricted, tr, 0.9 * (eps - acc.used()),
                                               opts.preserve_index && false);
                // lift the sub-path through the block-diagonal frame
                for (size_t s = 1; s < sub.path.samples.size(); ++s) {
                    const CyclicCocycle lift = extend_over_ambient(
                        cur, bundle, sub.path.samples[s], BlockSlot::restricted);
                    if (s == 1) acc.append_point(lift);
                    else acc.samples.push_back(lift);
                }
                for (const auto& r : sub.schedule.rungs) res.schedule.rungs.push_back(r);
            }
        }
        lo = hi;
    }

    res.path = acc.finish();
    res.path.compute_graphs();
    if (res.path.graphs.back().sup_distance(target) > 1e-6)
        throw capability_error("raise_graph: endpoint missed the pinned target");
    return res;
}

// --- finite_order_perturbation ----------------------------------------------

namespace {

constexpr double kPi = 3.14159265358979323846;

// 2x2 block with eigenvalues exactly e^{+-i phi}, as close as possible to b.
// For a well-bent complex pair, rescale inside the plane spanned by I and
// the block's own rotation generator; near-real blocks use a symmetric-trace
// form that keeps the larger off-diagonal entry.
Matrix snap_pair_block(const Matrix& b, double phi) {
    const double det = b.determinant();
    const double rho = std::sqrt(std::abs(det));
    const double cosb = 0.5 * b.trace() / rho;
    const double sinb2 = 1.0 - cosb * cosb;
    if (sinb2 > 0.01) {
        // b / rho = cos(old) I + sin(old) J with J^2 = -I
        const Matrix j = (b / rho - cosb * Matrix::Identity(2, 2)) / std::sqrt(sinb2);
        return std::cos(phi) * Matrix::Identity(2, 2) + std::sin(phi) * j;
    }
    Matrix out = b;
    const double tau = std::cos(phi);
    out(0, 0) = tau;
    out(1, 1) = tau;
    if (std::abs(out(0, 1)) >= std::abs(out(1, 0))) {
        if (std::abs(out(0, 1)) < 0.25 * std::sin(phi)) out(0, 1) = std::sin(phi);
        out(1, 0) = (tau * tau - 1.0) / out(0, 1);
    } else {
        if (std::abs(out(1, 0)) < 0.25 * std::sin(phi)) out(1, 0) = -std::sin(phi);
        out(0, 1) = (tau * tau - 1.0) / out(1, 0);
    }
    return out;
}

// Jordan-style pairing of two coupled equal real eigenvalues: replace the
// principal 2x2 by a block with eigenvalues exactly v e^{+-i phi}.
Matrix pair_real_block(double v, double coupling, double phi) {
    Matrix out(2, 2);
    const double tau = v * std::cos(phi);
    double beta = coupling;
    if (std::abs(beta) < std::abs(v) * std::sin(phi))
        beta = (beta >= 0 ? 1.0 : -1.0) * std::abs(v) * std::sin(phi);
    out << tau, beta, -(v * v * std::sin(phi) * std::sin(phi)) / beta, tau;
    return out;
}

double unit_circle_defect(const Matrix& l) {
    Eigen::EigenSolver<Matrix> es(l);
    double worst = 0.0;
    for (int i = 0; i < l.rows(); ++i)
        worst = std::max(worst, std::abs(std::abs(es.eigenvalues()(i)) - 1.0));
    return worst;
}

Matrix matrix_power(Matrix m, long q) {
    const int d = static_cast<int>(m.rows());
    Matrix acc = Matrix::Identity(d, d);
    while (q > 0) {
        if (q & 1) acc = acc * m;
        m = m * m;
        q >>= 1;
    }
    return acc;
}

// Snap the angle-sorted Schur form so every eigenvalue lands on the grid
// 2 pi k / q, all diagonal blocks get pairwise distinct spectra (except
// fully decoupled repeats of +-1), and coupled equal real eigenvalues are
// bent into rotation pairs.
Matrix snap_to_roots_of_unity(const Matrix& l, long q) {
    const int d = static_cast<int>(l.rows());
    OrderedSchur schur = ordered_real_schur(l, SchurOrder::angle_ascending);
    Matrix t = schur.t;

    std::vector<int> start;   // block starts
    std::vector<int> size;    // 1 or 2
    {
        int at = 0;
        while (at < d) {
            const bool pair = (at + 1 < d) && (t(at + 1, at) != 0.0);
            start.push_back(at);
            size.push_back(pair ? 2 : 1);
            at += pair ? 2 : 1;
        }
    }
    const int nblocks = static_cast<int>(start.size());
    std::vector<char> handled(nblocks, 0);
    std::vector<char> used(q, 0); // grid steps taken by a pair block

    auto take_step = [&](long want) {
        long k = std::max<long>(1, std::min<long>(q / 2 - 1, want));
        while (k < q / 2 - 1 && used[k]) ++k;
        while (k > 1 && used[k]) --k;
        used[k] = 1;
        return k;
    };

    // runs of equal 1x1 eigenvalues: any internal coupling makes the repeat
    // defective, so bend adjacent pairs into rotations
    for (int b = 0; b < nblocks;) {
        if (size[b] != 1) {
            ++b;
            continue;
        }
        const double v = t(start[b], start[b]) >= 0 ? 1.0 : -1.0;
        int e = b;
        while (e + 1 < nblocks && size[e + 1] == 1 &&
               ((t(start[e + 1], start[e + 1]) >= 0 ? 1.0 : -1.0) == v))
            ++e;
        // internal coupling of the run [b, e]
        double coupling = 0.0;
        for (int x = b; x <= e; ++x)
            for (int y = x + 1; y <= e; ++y)
                coupling = std::max(coupling, std::abs(t(start[x], start[y])));
        if (e > b && coupling > 1e-12) {
            for (int x = b; x + 1 <= e; x += 2) {
                const int p = start[x];
                const long k = take_step(1);
                t.block(p, p, 2, 2) = pair_real_block(v, t(p, p + 1), 2.0 * kPi * k / q);
                handled[x] = handled[x + 1] = 1;
            }
        }
        for (int x = b; x <= e; ++x)
            if (!handled[x]) {
                t(start[x], start[x]) = v;
                handled[x] = 1;
            }
        b = e + 1;
    }

    // complex-pair blocks: snap onto distinct grid angles
    for (int b = 0; b < nblocks; ++b) {
        if (handled[b] || size[b] != 2) continue;
        const int p = start[b];
        const Matrix blk = t.block(p, p, 2, 2);
        const double rho = std::sqrt(std::abs(blk.determinant()));
        const double cphi = std::min(1.0, std::max(-1.0, 0.5 * blk.trace() / rho));
        const long k = take_step(std::lround(std::acos(cphi) * q / (2.0 * kPi)));
        t.block(p, p, 2, 2) = snap_pair_block(blk, 2.0 * kPi * k / q);
        handled[b] = 1;
    }

    return schur.q * t * schur.q.transpose();
}

} // namespace

FiniteOrderResult finite_order_perturbation(const Matrix& l, double eps) {
    const int d = static_cast<int>(l.rows());
    if (l.cols() != d) throw argument_error("finite_order_perturbation: square matrix required");
    if (eps <= 0) throw argument_error("finite_order_perturbation: eps must be positive");
    if (unit_circle_defect(l) > 1e-8)
        throw precondition_error("finite_order_perturbation: spectrum off the unit circle");

    // common even order q; grow until the construction fits the budget and
    // the power check passes
    long q = std::max<long>(8, 2 * std::lround(std::ceil(2.0 * kPi / eps)));
    double best_dev = 1e300;
    for (int attempt = 0; attempt < 16; ++attempt, q *= 2) {
        const Matrix cand = snap_to_roots_of_unity(l, q);
        const double dev = opnorm(cand - l);
        best_dev = std::min(best_dev, dev);
        if (dev > eps) continue;
        if (opnorm(matrix_power(cand, q) - Matrix::Identity(d, d)) <= 1e-8)
            return FiniteOrderResult{cand, q};
    }
    throw capability_error("finite_order_perturbation: could not certify a finite order "
                           "(best deviation " +
                           std::to_string(best_dev) + ")");
}

} // namespace cforge
