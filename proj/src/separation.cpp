#include "cforge/separation.hpp"

#include <algorithm>
#include <cmath>

#include "cforge/domination.hpp"
#include "cforge/errors.hpp"
#include "cforge/exterior.hpp"
#include "cforge/perturb.hpp"
#include "cforge/rng.hpp"
#include "cforge/spectral.hpp"

namespace cforge {

ZScoreTable z_scores(const CyclicCocycle& c, int m) {
    const int d = c.dim();
    const int n = c.period();
    if (m < 1 || 2 * m > n) throw argument_error("z_scores: need 1 <= m <= period/2");
    const int q = n / m;

    // one m-window per phase, wedge norms in log space
    std::vector<std::vector<double>> lw(n, std::vector<double>(d));
    for (int j = 0; j < n; ++j) {
        const ScaledMatrix w = c.window_product(j, m);
        for (int i = 1; i <= d; ++i) lw[j][i - 1] = log_wedge_norm(w, i);
    }

    ZScoreTable tab;
    tab.scale = m;
    tab.z.assign(n, std::vector<double>(d, 0.0));
    tab.finite_avg.assign(d, 0.0);
    for (int y = 0; y < n; ++y)
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int p = 0; p < q; ++p) s += lw[(y + p * m) % n][i];
            tab.z[y][i] = s / n;
            tab.finite_avg[i] += tab.z[y][i] / n;
        }

    // tighten the slack while the pigeonhole rule still certifies a
    // simultaneous good phase; stop on uniqueness or at the floor
    auto good_set = [&](double s) {
        std::vector<int> good;
        for (int y = 0; y < n; ++y) {
            bool ok = true;
            for (int i = 0; i < d && ok; ++i)
                ok = tab.z[y][i] >= tab.finite_avg[i] - s;
            if (ok) good.push_back(y);
        }
        return good;
    };
    auto rho_at = [&](double s) {
        std::vector<double> rho(d, 0.0);
        for (int i = 0; i < d; ++i) {
            int bad = 0;
            for (int y = 0; y < n; ++y)
                if (tab.z[y][i] < tab.finite_avg[i] - s) ++bad;
            rho[i] = static_cast<double>(bad) / n;
        }
        return rho;
    };

    double slack = 0.0;
    for (int i = 0; i < d; ++i)
        for (int y = 0; y < n; ++y)
            slack = std::max(slack, tab.finite_avg[i] - tab.z[y][i]);
    slack = std::max(slack, 1e-9);

    for (;;) {
        const double next = slack / 2;
        if (next < 1e-9) break;
        const auto rho = rho_at(next);
        if (*std::max_element(rho.begin(), rho.end()) >= 1.0 / d) break;
        if (good_set(next).empty()) break;
        slack = next;
        if (good_set(slack).size() == 1) break;
    }

    tab.slack = slack;
    tab.rho = rho_at(slack);
    const auto good = good_set(slack);
    if (good.empty()) throw numerical_error("z_scores: no simultaneously good phase");
    tab.good_phase = good.front();
    return tab;
}

namespace {

double flag_alignment_angle(const Matrix& r, const Flag& f, const Flag& g) {
    const int d = f.dim();
    double worst = 1e300;
    for (int i = 1; i < d; ++i) {
        const Subspace rf(r * f.basis.leftCols(i));
        const Subspace gz(g.basis.leftCols(d - i));
        worst = std::min(worst, principal_angle(rf, gz));
    }
    return worst;
}

Matrix rotation_from_angles(int d, const std::vector<double>& theta) {
    Matrix r = Matrix::Identity(d, d);
    int at = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) r = plane_rotation(d, i, j, theta[at++]) * r;
    return r;
}

} // namespace

FlagAlignment align_flags(const Flag& f, const Flag& g, double eps, std::uint64_t seed) {
    const int d = f.dim();
    if (g.dim() != d) throw argument_error("align_flags: flag dimension mismatch");
    if (eps <= 0) throw argument_error("align_flags: eps must be positive");
    const int npar = d * (d - 1) / 2;
    Rng rng(seed, 0x414c49ULL);

    const double id_angle = flag_alignment_angle(Matrix::Identity(d, d), f, g);

    std::vector<double> best_theta(npar, 0.0);
    double best = id_angle;

    for (int restart = 0; restart < 24; ++restart) {
        std::vector<double> theta(npar);
        const double radius = (restart == 0) ? 0.0 : 0.8 * eps * rng.uniform();
        for (double& t : theta) t = radius * (2.0 * rng.uniform() - 1.0) / npar;
        Matrix r = rotation_from_angles(d, theta);
        if (opnorm(r - Matrix::Identity(d, d)) >= eps) continue;
        double val = flag_alignment_angle(r, f, g);

        double step = 0.25 * eps;
        for (int iter = 0; iter < 120; ++iter) {
            std::vector<double> cand = theta;
            for (double& t : cand) t += step * (2.0 * rng.uniform() - 1.0);
            const Matrix rc = rotation_from_angles(d, cand);
            if (opnorm(rc - Matrix::Identity(d, d)) < 0.98 * eps) {
                const double vc = flag_alignment_angle(rc, f, g);
                if (vc > val) {
                    val = vc;
                    theta = cand;
                }
            }
            if (iter % 20 == 19) step *= 0.6;
        }
        if (val > best) {
            best = val;
            best_theta = theta;
        }
    }

    if (best < 1e-4)
        throw capability_error("align_flags: eps too small to clear the angle floor 1e-4");

    // prefer no rotation when the flags are already essentially transverse
    if (id_angle >= 0.75 * best) return FlagAlignment{Matrix::Identity(d, d), id_angle};
    return FlagAlignment{rotation_from_angles(d, best_theta), best};
}

namespace {

double log_wedge_radius(const Matrix& m_unit, double log_scale, int i) {
    const Matrix w = exterior_power(m_unit, i);
    Eigen::EigenSolver<Matrix> es(w);
    double top = 0.0;
    for (int k = 0; k < w.rows(); ++k) top = std::max(top, std::abs(es.eigenvalues()(k)));
    if (top == 0.0) throw numerical_error("wedge spectral radius vanished");
    return std::log(top) + i * log_scale;
}

} // namespace

RadiusConversion norm_to_radius(const Matrix& m, double eps, std::uint64_t seed) {
    const int d = static_cast<int>(m.rows());
    if (m.cols() != d) throw argument_error("norm_to_radius: square matrix required");

    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Flag image;  // M F_i = span of the leading left singular vectors
    image.basis = svd.matrixU();
    Flag comp;   // G_k = F_{d-k}^perp = span of the trailing right singular vectors
    comp.basis = Matrix(d, d);
    for (int i = 0; i < d; ++i) comp.basis.col(i) = svd.matrixV().col(d - 1 - i);

    const FlagAlignment al = align_flags(image, comp, eps, seed);

    ScaledMatrix sm{m, 0.0};
    sm.renormalize();
    const Matrix rm_unit = al.r * sm.m;
    RadiusConversion out;
    out.r = al.r;
    out.c_emp = 1.0;
    for (int i = 1; i <= d; ++i) {
        const double log_norm = log_wedge_norm(sm, i);
        const double log_rad = log_wedge_radius(rm_unit, sm.log_scale, i);
        out.c_emp = std::max(out.c_emp, std::exp(log_norm - log_rad));
    }
    return out;
}

std::pair<CyclicCocycle, SeparationReport> separate_exponents(const CyclicCocycle& c, int m,
                                                              double eps,
                                                              std::uint64_t seed) {
    const int d = c.dim();
    const int n = c.period();
    if (m < 1 || 2 * m > n) throw argument_error("separate_exponents: need 1 <= m <= period/2");
    if (eps <= 0) throw argument_error("separate_exponents: eps must be positive");

    const ZScoreTable tab = z_scores(c, m);
    const int y = tab.good_phase;
    const int q = n / m;
    const double k_bound = c.bound();

    SeparationReport rep;
    rep.good_phase = y;
    rep.alpha_min = 1e300;

    // nothing to do when the period product already realizes the Z scores
    {
        const LyapunovGraph g = lyapunov_graph(c);
        double deficit = 0.0;
        for (int i = 1; i <= d; ++i) {
            const double li = g.sigma[d] - g.sigma[d - i];
            deficit = std::max(deficit, tab.z[y][i - 1] - li);
        }
        if (deficit <= 1e-12) {
            rep.slack_emp = std::max(deficit, 0.0);
            rep.alpha_min = 0.0;
            return {c, rep};
        }
    }

    const double eps_rot = 0.45 * eps / k_bound; // two factors may land on one map

    // windows and their bottom/top singular flags
    std::vector<ScaledMatrix> w(q);
    for (int p = 0; p < q; ++p) w[p] = c.window_product((y + p * m) % n, m);

    auto bottom_flag = [&](const Matrix& mat) {
        Eigen::JacobiSVD<Matrix> svd(mat, Eigen::ComputeFullV);
        Flag f;
        f.basis = Matrix(d, d);
        for (int i = 0; i < d; ++i) f.basis.col(i) = svd.matrixV().col(d - 1 - i);
        return f;
    };

    // left and right rotation factors absorbed into the cocycle maps
    std::vector<Matrix> left(n, Matrix::Identity(d, d));
    std::vector<Matrix> right(n, Matrix::Identity(d, d));

    Flag g_cur; // G^{(0)}: top right-singular flag of the first window
    {
        Eigen::JacobiSVD<Matrix> svd(w[0].m, Eigen::ComputeFullV);
        g_cur.basis = svd.matrixV();
    }

    for (int p = 1; p <= q; ++p) {
        // transport the flag through the previous window
        Flag image;
        image.basis = orthonormalize(w[p - 1].m * g_cur.basis);
        Matrix r = Matrix::Identity(d, d);
        if (p < q) {
            const Flag fp = bottom_flag(w[p].m);
            const FlagAlignment al = align_flags(image, fp, eps_rot, seed + p);
            rep.alpha_min = std::min(rep.alpha_min, al.alpha);
            r = al.r;
        } else if (n > q * m) {
            const ScaledMatrix leftover = c.window_product((y + q * m) % n, n - q * m);
            const Flag fp = bottom_flag(leftover.m);
            const FlagAlignment al = align_flags(image, fp, eps_rot, seed + p);
            rep.alpha_min = std::min(rep.alpha_min, al.alpha);
            r = al.r;
        }
        const int idx = (y + p * m - 1 + n) % n;
        left[idx] = r * left[idx];
        g_cur.basis = r * image.basis;
        ++rep.insertions;
    }

    // closing rotation from the norm-to-radius conversion of the full
    // modified product
    {
        std::vector<Matrix> maps = c.maps();
        for (int j = 0; j < n; ++j) maps[j] = left[j] * maps[j] * right[j];
        const ScaledMatrix full = CyclicCocycle(d, maps).window_product(y, n);
        Matrix dense_dir = full.m; // unit scale
        const RadiusConversion conv = norm_to_radius(dense_dir, eps_rot, seed + q + 1);
        rep.c_emp = conv.c_emp;
        right[y] = right[y] * conv.r;
        ++rep.insertions;
    }

    std::vector<Matrix> maps = c.maps();
    for (int j = 0; j < n; ++j) maps[j] = left[j] * maps[j] * right[j];
    CyclicCocycle out(d, std::move(maps));

    const LyapunovGraph g = lyapunov_graph(out);
    double slack = 0.0;
    for (int i = 1; i <= d; ++i) {
        const double li = g.sigma[d] - g.sigma[d - i];
        slack = std::max(slack, tab.z[y][i - 1] - li);
    }
    rep.slack_emp = slack;
    return {std::move(out), rep};
}

CyclicCocycle realize_graph(const CyclicCocycle& c, const LyapunovGraph& target, int m,
                            double eps, std::optional<int> pin_ell, std::uint64_t seed) {
    const int d = c.dim();
    if (target.dim() != d) throw argument_error("realize_graph: target dimension mismatch");
    target.validate();
    const LyapunovGraph g0 = lyapunov_graph(c);
    if (std::abs(target.sigma[d] - g0.sigma[d]) > 1e-9)
        throw order_error("realize_graph: target changes sigma_d");

    std::vector<int> pins;
    if (pin_ell) {
        const InvariantSplitting fs = finest_splitting(c, *pin_ell);
        pins = fs.indices;
        for (int i : pins)
            if (std::abs(target.sigma[i] - g0.sigma[i]) > 1e-9)
                throw pinning_error("realize_graph: target moves pinned coordinate " +
                                    std::to_string(i));
    }

    CyclicCocycle cur = c;
    if (!pin_ell) {
        auto [sep, rep] = separate_exponents(cur, m, eps / 2, seed);
        (void)rep;
        cur = std::move(sep);
    } else {
        // anti-cancellation inside each finest bundle keeps the pinned sums
        // exactly (block rotations do not mix bundles)
        const InvariantSplitting fs = finest_splitting(cur, *pin_ell);
        std::vector<int> stops = fs.indices;
        stops.push_back(d);
        int lo = 0;
        for (size_t b = 0; b < stops.size(); ++b) {
            const int dim_b = stops[b] - lo;
            if (dim_b >= 2) {
                std::vector<Subspace> bundle(cur.period());
                for (int j = 0; j < cur.period(); ++j) bundle[j] = fs.bundles[j][b];
                auto [restricted, quotient] = restrict_and_quotient(cur, bundle);
                (void)quotient;
                auto [sep, rep] = separate_exponents(restricted, m, eps / 2, seed + b);
                (void)rep;
                cur = extend_over_ambient(cur, bundle, sep, BlockSlot::restricted);
            }
            lo = stops[b];
        }
    }

    const LyapunovGraph g_sep = lyapunov_graph(cur);
    const auto order = majorization_cmp(g_sep, target);
    if (order != MajorizationOrder::a_below && order != MajorizationOrder::equal)
        throw order_error("realize_graph: target not above the separated graph");

    RaiseOptions opts;
    opts.respect_finest = pin_ell;
    RaiseResult raised = raise_graph(cur, target, eps / 2, opts);
    return raised.path.endpoint();
}

} // namespace cforge
