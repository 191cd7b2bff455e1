#include <cmath>
#include <functional>

#include "cforge/errors.hpp"
#include "cforge/perturb.hpp"
#include "perturb_detail.hpp"

namespace cforge {

namespace {

constexpr double kEqualTol = 2e-12; // exponents closer than this need no mixing

double spectral_radius_2x2(const Matrix& b) {
    const double tr = b.trace();
    const double det = b.determinant();
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) return 0.5 * (std::abs(tr) + std::sqrt(disc));
    return std::sqrt(std::abs(det));
}

} // namespace

RotationMix rotation_to_equal_moduli(const Matrix& b) {
    if (b.rows() != 2 || b.cols() != 2)
        throw argument_error("rotation_to_equal_moduli: 2x2 matrix required");
    const double det = b.determinant();
    const double tr = b.trace();
    const double disc = tr * tr - 4.0 * det;
    if (disc <= 0.0)
        throw argument_error("rotation_to_equal_moduli: eigenvalues not real and distinct");

    // equal moduli: det > 0 -> discriminant vanishes; det < 0 -> trace vanishes
    auto defect = [&](double theta) {
        const Matrix m = rotation2(theta) * b;
        if (det > 0.0) {
            const double t = m.trace();
            return t * t - 4.0 * det;
        }
        return m.trace();
    };

    const double rho0 = spectral_radius_2x2(b);
    for (int s : {+1, -1}) {
        const double g0 = defect(0.0);
        const int grid = 4096;
        double beta = -1.0;
        for (int k = 1; k <= grid; ++k) {
            const double theta = 3.14159265358979323846 * k / grid;
            if (defect(s * theta) * g0 <= 0.0) {
                double lo = 3.14159265358979323846 * (k - 1) / grid, hi = theta;
                for (int it = 0; it < 80 && hi - lo > 1e-16; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (defect(s * mid) * g0 <= 0.0 ? hi : lo) = mid;
                }
                beta = hi;
                break;
            }
        }
        if (beta < 0.0) continue;
        const double rho_probe = spectral_radius_2x2(rotation2(s * beta * 1e-3) * b);
        if (rho_probe <= rho0 * (1.0 + 1e-14)) return RotationMix{s, beta};
    }
    throw numerical_error("rotation_to_equal_moduli: no decreasing direction found");
}

int strongest_nondominated_scale(const CyclicCocycle& c, const SpectralData& sd, int i,
                                 int cap) {
    int ell = 1;
    while (2 * ell <= cap) ell *= 2;
    for (; ell >= 1; ell /= 2)
        if (!check_domination(c, sd, i, ell).dominated) return ell;
    return 0;
}

namespace {

using detail::PathAccum;

// --- 2-D machinery ---------------------------------------------------------

struct LineData {
    std::vector<Vector> f, h;      // unit slow / fast directions per phase
    std::vector<double> lf, lh;    // per-step log |restricted scalar|
    double mu_ratio_log;           // n (lambda_1 - lambda_2)
    double mu_ratio_sign;
};

LineData extract_lines(const CyclicCocycle& c, const SpectralData& sd) {
    const int n = c.period();
    LineData ld;
    ld.f.resize(n);
    ld.h.resize(n);
    ld.lf.resize(n);
    ld.lh.resize(n);
    double sign = 1.0;
    ld.mu_ratio_log = 0.0;
    for (int j = 0; j < n; ++j) {
        ld.f[j] = sd.bundles[j][0].col(0);
        ld.h[j] = sd.bundles[j].back().col(0);
    }
    for (int j = 0; j < n; ++j) {
        const int jn = (j + 1) % n;
        const double sf = ld.f[jn].dot(c.map(j) * ld.f[j]);
        const double sh = ld.h[jn].dot(c.map(j) * ld.h[j]);
        ld.lf[j] = std::log(std::abs(sf));
        ld.lh[j] = std::log(std::abs(sh));
        ld.mu_ratio_log += ld.lf[j] - ld.lh[j];
        sign *= (sf < 0 ? -1.0 : 1.0) * (sh < 0 ? -1.0 : 1.0);
    }
    ld.mu_ratio_sign = sign;
    return ld;
}

double min_line_angle(const LineData& ld, int* at = nullptr) {
    double best = 1e300;
    for (size_t j = 0; j < ld.f.size(); ++j) {
        const double a = std::acos(std::min(1.0, std::abs(ld.f[j].dot(ld.h[j]))));
        if (a < best) {
            best = a;
            if (at) *at = static_cast<int>(j);
        }
    }
    return best;
}

// Strongest finite-window expansion imbalance between the slow and fast
// lines: max over (z, k) of log ||A^k along f|| - log m(A^k along h).
struct WindowRatio {
    int z = 0, k = 1;
    double value = -1e300;
};
WindowRatio best_window_ratio(const LineData& ld) {
    const int n = static_cast<int>(ld.lf.size());
    std::vector<double> pre(2 * n + 1, 0.0);
    for (int j = 0; j < 2 * n; ++j) pre[j + 1] = pre[j] + ld.lf[j % n] - ld.lh[j % n];
    WindowRatio best;
    for (int z = 0; z < n; ++z)
        for (int k = 1; k < n; ++k) {
            const double v = pre[z + k] - pre[z];
            if (v > best.value) best = {z, k, v};
        }
    return best;
}

// Closing shear pair at phase z: fixes the slow line, sends h to h + tau f,
// and corrects the map into z so the fast line still closes up with the
// same multiplier.  Eigenvalues are untouched.
CyclicCocycle apply_closing_shear(const CyclicCocycle& c, const LineData& ld, int z,
                                  double tau) {
    const int n = c.period();
    const Vector& f = ld.f[z];
    const Vector& h = ld.h[z];
    Vector w(2);
    w << -f(1), f(0); // unit normal to f
    const double wh = w.dot(h);
    if (std::abs(wh) < 1e-14) throw numerical_error("closing shear: bundles collapsed");
    const Vector psi = w / wh;
    const double rho =
        ld.mu_ratio_sign * std::exp(std::min(0.0, ld.mu_ratio_log)); // |mu_f/mu_h| <= 1

    Matrix s = Matrix::Identity(2, 2) + tau * f * psi.transpose();
    Matrix u = Matrix::Identity(2, 2) - tau * rho * f * psi.transpose();

    std::vector<Matrix> maps = c.maps();
    maps[z] = maps[z] * s;
    maps[(z - 1 + n) % n] = u * maps[(z - 1 + n) % n];
    return CyclicCocycle(2, std::move(maps));
}

// Determinant-one pumping over an even window: expand along f and contract
// along h on the first half, reversed on the second half.  Exponents are
// exactly preserved; the finite-window imbalance at z grows by gamma * w.
CyclicCocycle apply_pump(const CyclicCocycle& c, const LineData& ld, int z, int window,
                         double gamma) {
    const int n = c.period();
    std::vector<Matrix> maps = c.maps();
    for (int s = 0; s < window; ++s) {
        const int j = (z + s) % n;
        const double g = (s < window / 2) ? gamma : -gamma;
        Matrix v(2, 2);
        v << ld.f[j], ld.h[j];
        Matrix p = v * Eigen::Vector2d(std::exp(g), std::exp(-g)).asDiagonal() * v.inverse();
        maps[j] = maps[j] * p;
    }
    return CyclicCocycle(2, std::move(maps));
}

double phase_deviation(const CyclicCocycle& a, const CyclicCocycle& base, int j) {
    return opnorm(a.map(j) - base.map(j));
}

// Mane stage: drive the angle between the invariant lines below alpha_target
// somewhere along the orbit, keeping the eigenvalues fixed.  Alternates
// closing shears (when a strong finite-window imbalance exists) with
// determinant-one pumping that builds such an imbalance.
void mane_2d(PathAccum& acc, double stage_eps, double alpha_target, int ell_sched) {
    double spent_floor = acc.used();
    const auto chunk_left = [&] { return stage_eps - (acc.used() - spent_floor); };

    for (int round = 0; round < 24; ++round) {
        const CyclicCocycle cur = acc.current();
        const SpectralData sd = analyze(cur);
        const LineData ld = extract_lines(cur, sd);
        if (min_line_angle(ld) <= alpha_target) return;
        if (chunk_left() < stage_eps / 64)
            throw capability_error("mixing: angle-shrink budget exhausted");

        const double k_cur = cur.bound();
        const WindowRatio wr = best_window_ratio(ld);

        // shear feasibility: predicted angle after riding the window
        const double angle_z = std::acos(std::min(1.0, std::abs(ld.f[wr.z].dot(ld.h[wr.z]))));
        const double tau_cap = 0.45 * chunk_left() * std::sin(angle_z) / k_cur;
        const double predicted = std::exp(-wr.value) / std::max(tau_cap, 1e-300);

        if (tau_cap > 0 && predicted < 0.5 * min_line_angle(ld)) {
            const CyclicCocycle before = cur;
            const LineData ld_copy = ld;
            const int z = wr.z;
            acc.append_family([&before, &ld_copy, z, tau_cap](double t) {
                return apply_closing_shear(before, ld_copy, z, t * tau_cap);
            });
            continue;
        }

        // pump the imbalance at the strongest non-dominated window
        const int window = std::max(2, ell_sched) & ~1;
        double gamma = 0.5;
        CyclicCocycle pumped = apply_pump(cur, ld, wr.z, window, gamma);
        for (int shrink = 0; shrink < 60; ++shrink) {
            double dev = 0.0;
            for (int s = 0; s < window; ++s) {
                const int j = (wr.z + s) % cur.period();
                dev = std::max(dev, phase_deviation(pumped, cur, j));
            }
            if (dev <= 0.45 * chunk_left()) break;
            gamma *= 0.5;
            pumped = apply_pump(cur, ld, wr.z, window, gamma);
        }
        const CyclicCocycle before = cur;
        const LineData ld_copy = ld;
        const int z = wr.z;
        const double g_final = gamma;
        acc.append_family([&before, &ld_copy, z, window, g_final](double t) {
            return apply_pump(before, ld_copy, z, window, t * g_final);
        });
    }
    throw capability_error("mixing: angle-shrink did not converge");
}

// sigma_1 of the 2-D cocycle after composing the map into phase x0 with a
// rotation by theta (cheap: only the fast exponent moves).
double sigma1_after_rotation(const CyclicCocycle& c, int x0, double theta, double sigma2) {
    const ScaledMatrix b = c.window_product(x0, c.period());
    const Matrix m = rotation2(theta) * b.m;
    const double lam2 = (std::log(spectral_radius_2x2(m)) + b.log_scale) / c.period();
    return sigma2 - lam2;
}

void mix_2d_until(PathAccum& acc, double eps, double sigma_target) {
    for (int round = 0; round < 40; ++round) {
        const CyclicCocycle cur = acc.current();
        const SpectralData sd = analyze(cur);
        const LyapunovGraph g = lyapunov_graph(cur);
        if (g.sigma[1] >= sigma_target - 1e-11) return;
        if (sd.exponents[1] - sd.exponents[0] <= kEqualTol) return;

        const LineData ld = extract_lines(cur, sd);
        int x0 = 0;
        min_line_angle(ld, &x0);

        const ScaledMatrix hol = cur.window_product(x0, cur.period());
        const RotationMix rot = rotation_to_equal_moduli(hol.m);

        const int jm = (x0 - 1 + cur.period()) % cur.period();
        // rotation budget at the map into x0, measured against the path base
        double theta_allow = rot.beta;
        {
            double lo = 0.0, hi = rot.beta;
            const Matrix base_map = acc.base.map(jm);
            auto dev = [&](double th) {
                return opnorm(rotation2(rot.sign * th) * cur.map(jm) - base_map);
            };
            if (dev(rot.beta) > 0.97 * eps) {
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (dev(mid) > 0.97 * eps ? hi : lo) = mid;
                }
                theta_allow = lo;
            }
        }

        const double sigma2 = g.sigma[2];
        if (theta_allow > 0 &&
            sigma1_after_rotation(cur, x0, rot.sign * theta_allow, sigma2) >=
                sigma_target - 1e-12) {
            // bisect the stopping angle
            double lo = 0.0, hi = theta_allow;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (sigma1_after_rotation(cur, x0, rot.sign * mid, sigma2) >= sigma_target ? hi
                                                                                        : lo) =
                    mid;
            }
            const double theta_stop = hi;
            const CyclicCocycle before = cur;
            acc.append_family([&before, jm, &rot, theta_stop](double t) {
                std::vector<Matrix> maps = before.maps();
                maps[jm] = rotation2(rot.sign * theta_stop * t) * maps[jm];
                return CyclicCocycle(2, std::move(maps));
            });
            return;
        }

        // the needed rotation exceeds the budget: shrink the angle first
        const int ell = strongest_nondominated_scale(cur, sd, 1,
                                                     std::max(2, cur.period() / 2));
        if (ell == 0)
            throw domination_error("mixing: index 1 is dominated at every scale");
        const double alpha_target =
            std::max(0.45 * std::min(theta_allow > 0 ? theta_allow : eps, eps), 1e-9);
        mane_2d(acc, 0.5 * (eps - acc.used()), alpha_target, ell);
    }
    throw capability_error("mixing: 2-D stage did not reach its target");
}

// --- induction over the dimension -------------------------------------------

PerturbationPath mix_until_impl(const CyclicCocycle& c, int i, double eps,
                                double sigma_target, int depth);

PerturbationPath constant_path_of(const CyclicCocycle& c, double eps) {
    PerturbationPath p;
    p.base = c;
    p.samples = {c};
    p.eps_bound = eps;
    return p;
}

// Append an ambient lift of a sub-path computed on an invariant block.
void append_lifted(PathAccum& acc, const std::vector<Subspace>& f, const PerturbationPath& sub,
                   BlockSlot slot) {
    const PerturbationPath lifted = detail::extend_path_ambient(acc.current(), f, sub, slot);
    acc.append_point(lifted.samples[1]); // frame-projection jump, tiny
    for (size_t s = 2; s < lifted.samples.size(); ++s) acc.samples.push_back(lifted.samples[s]);
}

std::vector<Subspace> concat_bundles(const SpectralData& sd, int phase_count,
                                     const std::vector<int>& clusters_sel) {
    std::vector<Subspace> out(phase_count);
    for (int j = 0; j < phase_count; ++j) {
        int cols = 0;
        for (int cidx : clusters_sel) cols += sd.clusters[cidx].size;
        Matrix b(sd.dim, cols);
        int at = 0;
        for (int cidx : clusters_sel) {
            b.middleCols(at, sd.clusters[cidx].size) = sd.bundles[j][cidx];
            at += sd.clusters[cidx].size;
        }
        out[j] = Subspace(orthonormalize(b));
    }
    return out;
}

// One-dimensional invariant line of the top modulus cluster (real spectrum).
std::vector<Subspace> top_line_bundle(const CyclicCocycle& c, const SpectralData& sd) {
    const int n = c.period();
    const auto& topc = sd.clusters.back();
    if (topc.size == 1) {
        std::vector<Subspace> out(n);
        for (int j = 0; j < n; ++j) out[j] = Subspace(sd.bundles[j].back());
        return out;
    }
    // restrict to the top cluster and take its leading invariant line
    std::vector<Subspace> cluster(n);
    for (int j = 0; j < n; ++j) cluster[j] = Subspace(sd.bundles[j].back());
    std::vector<Matrix> maps(n);
    for (int j = 0; j < n; ++j)
        maps[j] = cluster[(j + 1) % n].basis.transpose() * c.map(j) * cluster[j].basis;
    const SpectralData rsd = analyze(CyclicCocycle(topc.size, std::move(maps)));
    if (!rsd.flag_cut_ok[1])
        throw numerical_error("mixing: no transportable line inside the top cluster");
    std::vector<Subspace> out(n);
    for (int j = 0; j < n; ++j)
        out[j] = Subspace(cluster[j].basis * rsd.frames[j].col(0));
    return out;
}

// l.main-style escalation for the simple-top case: perturb with constant
// eigenvalues until the slow bundle fails to dominate either the middle
// bundle or its quotient by the fast line.  Returns when a recheck by the
// caller makes sense.
void lmain_escalate(PathAccum& acc, int i, double chunk, int ell0);

PerturbationPath mix_until_impl(const CyclicCocycle& c, int i, double eps,
                                double sigma_target, int depth) {
    if (depth > 8) throw capability_error("mixing: recursion depth exceeded");
    const int d = c.dim();
    const int n = c.period();
    if (i < 1 || i > d - 1) throw argument_error("mixing: index out of range");
    if (eps <= 0) throw argument_error("mixing: eps must be positive");

    SpectralData sd = analyze(c);
    if (!sd.real_spectrum())
        throw precondition_error("mixing: cocycle must have only real eigenvalues");

    const LyapunovGraph g0 = lyapunov_graph(c);
    const double midpoint = 0.5 * (g0.sigma[i - 1] + g0.sigma[i + 1]);
    if (sigma_target > midpoint + 1e-9)
        throw argument_error("mixing: target above the midpoint of the neighbors");
    if (g0.sigma[i] >= sigma_target - 1e-11) return constant_path_of(c, eps);
    if (sd.exponents[i] - sd.exponents[i - 1] <= kEqualTol) return constant_path_of(c, eps);

    if (depth == 0 &&
        strongest_nondominated_scale(c, sd, i, std::max(2, n / 2)) == 0)
        throw precondition_error("mixing: a dominated splitting of the requested index exists");

    if (d == 2) {
        PathAccum acc(c, eps);
        mix_2d_until(acc, eps, sigma_target);
        return acc.finish();
    }

    if (i == d - 1) {
        // mirror through the inverse cocycle: index d-1 becomes index 1
        const double k = c.bound();
        const double vprime = sigma_target - g0.sigma[d];
        double eps_inv = eps / (k * k);
        for (int attempt = 0; attempt < 4; ++attempt) {
            PerturbationPath inv_path =
                mix_until_impl(c.inverse(), 1, eps_inv, vprime, depth + 1);
            PathAccum acc(c, eps);
            for (size_t s = 1; s < inv_path.samples.size(); ++s)
                acc.append_point(inv_path.samples[s].inverse());
            PerturbationPath out = acc.finish();
            if (out.max_deviation() <= eps) return out;
            eps_inv *= 0.5;
        }
        throw capability_error("mixing: inverse-route budget could not be met");
    }

    // 1 <= i <= d-2 from here on
    PathAccum acc(c, eps);
    for (int round = 0; round < 6; ++round) {
        const CyclicCocycle cur = acc.current();
        sd = analyze(cur);
        const LyapunovGraph g = lyapunov_graph(cur);
        if (g.sigma[i] >= sigma_target - 1e-11) break;

        if (!sd.is_cluster_boundary(i))
            throw numerical_error("mixing: exponent cut dissolved during the construction");

        const int top_cluster_size = sd.clusters.back().size;
        const double remaining = eps - acc.used();
        if (remaining < eps / 64) throw capability_error("mixing: eps budget exhausted");

        if (top_cluster_size >= 2) {
            // multiple top exponent: work on the quotient by a top line, or on
            // the subbundle omitting the rest of the top cluster
            const auto h = top_line_bundle(cur, sd);
            auto [restricted_h, quotient_h] = restrict_and_quotient(cur, h);
            (void)restricted_h;
            const SpectralData qsd = analyze(quotient_h);
            const int ell_q = strongest_nondominated_scale(quotient_h, qsd, i,
                                                           std::max(2, n / 2));
            if (ell_q > 0) {
                PerturbationPath sub =
                    mix_until_impl(quotient_h, i, 0.9 * remaining, sigma_target, depth + 1);
                append_lifted(acc, h, sub, BlockSlot::quotient);
                continue;
            }
            // subbundle: everything below the top cluster, plus the line h
            std::vector<int> sel;
            for (size_t cidx = 0; cidx + 1 < sd.clusters.size(); ++cidx)
                sel.push_back(static_cast<int>(cidx));
            std::vector<Subspace> sub_bundle(n);
            for (int j = 0; j < n; ++j) {
                const int keep = d - top_cluster_size;
                Matrix b(d, keep + 1);
                b.leftCols(keep) = sd.frames[j].leftCols(keep);
                b.col(keep) = h[j].basis.col(0);
                sub_bundle[j] = Subspace(orthonormalize(b));
            }
            auto [restricted, quotient] = restrict_and_quotient(cur, sub_bundle);
            (void)quotient;
            const SpectralData rsd = analyze(restricted);
            const int ell_r = strongest_nondominated_scale(restricted, rsd, i,
                                                           std::max(2, n / 2));
            if (ell_r == 0)
                throw domination_error(
                    "mixing: both reduction routes are dominated at the requested index");
            PerturbationPath sub =
                mix_until_impl(restricted, i, 0.9 * remaining, sigma_target, depth + 1);
            append_lifted(acc, sub_bundle, sub, BlockSlot::restricted);
            continue;
        }

        // simple top exponent: try the subbundle below the top line, then the
        // quotient by it, escalating with eigenvalue-preserving shears when
        // both routes are blocked
        const auto slowall = detail::slow_bundles(sd, d - 1); // F + G
        auto [below_top, quotient_top] = restrict_and_quotient(cur, slowall);
        const SpectralData bsd = analyze(below_top);
        const int ell_b =
            strongest_nondominated_scale(below_top, bsd, i, std::max(2, n / 2));
        if (ell_b > 0) {
            PerturbationPath sub =
                mix_until_impl(below_top, i, 0.9 * remaining, sigma_target, depth + 1);
            append_lifted(acc, slowall, sub, BlockSlot::restricted);
            continue;
        }
        const auto h = top_line_bundle(cur, sd);
        {
            auto [r2, quotient_h] = restrict_and_quotient(cur, h);
            (void)r2;
            const SpectralData qsd = analyze(quotient_h);
            const int ell_q =
                strongest_nondominated_scale(quotient_h, qsd, i, std::max(2, n / 2));
            if (ell_q > 0) {
                PerturbationPath sub =
                    mix_until_impl(quotient_h, i, 0.9 * remaining, sigma_target, depth + 1);
                append_lifted(acc, h, sub, BlockSlot::quotient);
                continue;
            }
        }
        const int ell0 = strongest_nondominated_scale(cur, sd, i, std::max(2, n / 2));
        if (ell0 == 0)
            throw domination_error("mixing: requested index is dominated at every scale");
        lmain_escalate(acc, i, 0.25 * remaining, ell0);
    }

    PerturbationPath out = acc.finish();
    const LyapunovGraph ge = lyapunov_graph(out.endpoint());
    if (ge.sigma[i] < sigma_target - 1e-6)
        throw capability_error("mixing: endpoint missed the target by " +
                               std::to_string(sigma_target - ge.sigma[i]));
    return out;
}

void lmain_escalate(PathAccum& acc, int i, double chunk, int ell0) {
    const CyclicCocycle cur = acc.current();
    const SpectralData sd = analyze(cur);
    const int d = cur.dim();
    const int n = cur.period();
    const double k_cur = cur.bound();

    // bundles: F (slow i), G (middle clusters), H (top line)
    const auto fb = detail::slow_bundles(sd, i);
    std::vector<Subspace> hb(n);
    for (int j = 0; j < n; ++j) hb[j] = Subspace(sd.bundles[j].back());
    const int cmid0 = sd.cluster_of_slot(i);
    std::vector<int> sel;
    for (int cidx = cmid0; cidx + 1 < static_cast<int>(sd.clusters.size()); ++cidx)
        sel.push_back(cidx);
    const std::vector<Subspace> gb = concat_bundles(sd, n, sel);

    // Part 1: shrink the angle between F and H inside the invariant F + H
    // subbundle, with constant eigenvalues (shear toward the most-expanded
    // direction of F at the strongest finite window).
    std::vector<Subspace> fh(n);
    for (int j = 0; j < n; ++j) {
        Matrix b(d, i + 1);
        b.leftCols(i) = fb[j].basis;
        b.col(i) = hb[j].basis.col(0);
        fh[j] = Subspace(orthonormalize(b));
    }

    CyclicCocycle cf(i, [&] {
        std::vector<Matrix> m(n);
        for (int j = 0; j < n; ++j)
            m[j] = fb[(j + 1) % n].basis.transpose() * cur.map(j) * fb[j].basis;
        return m;
    }());
    std::vector<double> lh(n);
    double sign_h = 1.0;
    for (int j = 0; j < n; ++j) {
        const int jn = (j + 1) % n;
        const double s = hb[jn].basis.col(0).dot(cur.map(j) * hb[j].basis.col(0));
        lh[j] = std::log(std::abs(s));
        if (s < 0) sign_h = -sign_h;
    }

    // strongest window imbalance of ||A^k|F|| against the fast line
    int best_z = 0, best_k = 1;
    double best_v = -1e300;
    std::vector<double> pre_h(2 * n + 1, 0.0);
    for (int j = 0; j < 2 * n; ++j) pre_h[j + 1] = pre_h[j] + lh[j % n];
    for (int z = 0; z < n; ++z) {
        ScaledMatrix p{Matrix::Identity(i, i), 0.0};
        for (int k = 1; k < n; ++k) {
            p = scaled_mul(cf.map((z + k - 1) % n), p);
            const double v = p.log_norm() - (pre_h[z + k] - pre_h[z]);
            if (v > best_v) {
                best_v = v;
                best_z = z;
                best_k = k;
            }
        }
    }

    // shear h toward the most expanded direction of F at (best_z, best_k)
    const ScaledMatrix pw = cf.window_product(best_z, best_k);
    Eigen::JacobiSVD<Matrix> svd(pw.m, Eigen::ComputeFullV);
    const Vector fdir = fb[best_z].basis * svd.matrixV().col(0);
    const Vector hvec = hb[best_z].basis.col(0);

    // dual of h vanishing on F + G
    Matrix fg(d, d - 1);
    fg.leftCols(i) = fb[best_z].basis;
    fg.rightCols(d - 1 - i) = gb[best_z].basis;
    const Subspace fg_space = Subspace(orthonormalize(fg));
    Vector w = hvec - fg_space.basis * (fg_space.basis.transpose() * hvec);
    const double wn = w.norm();
    if (wn < 1e-13) throw capability_error("mixing: fast line fell into the slow span");
    w /= wn;
    const Vector psi = w / w.dot(hvec);

    // image of fdir under the full period at best_z, relative to mu_h
    const ScaledMatrix full_f = cf.window_product(best_z, n);
    Vector q_dir = fb[best_z].basis * (full_f.m * svd.matrixV().col(0));
    double q_lognorm = std::log(std::max(q_dir.norm(), 1e-300)) + full_f.log_scale;
    q_dir.normalize();
    double mu_h_log = pre_h[best_z + n] - pre_h[best_z];
    const double rel = sign_h * std::exp(std::min(0.0, q_lognorm - mu_h_log));

    const double tau_cap = 0.45 * chunk * wn / std::max(1.0, k_cur);

    const CyclicCocycle before = acc.current();
    const int zq = best_z;
    const Vector fdir_c = fdir, psi_c = psi, qdir_c = q_dir;
    acc.append_family([&before, zq, &fdir_c, &psi_c, &qdir_c, rel, tau_cap](double t) {
        const int nn = before.period();
        std::vector<Matrix> maps = before.maps();
        const int dd = before.dim();
        Matrix s = Matrix::Identity(dd, dd) + (t * tau_cap) * fdir_c * psi_c.transpose();
        Matrix u = Matrix::Identity(dd, dd) - (t * tau_cap * rel) * qdir_c * psi_c.transpose();
        maps[zq] = maps[zq] * s;
        maps[(zq - 1 + nn) % nn] = u * maps[(zq - 1 + nn) % nn];
        return CyclicCocycle(dd, std::move(maps));
    });
    (void)ell0;
}

} // namespace

PerturbationPath mix_two_exponents_until(const CyclicCocycle& c, int i, double eps,
                                         double sigma_target) {
    PerturbationPath p = mix_until_impl(c, i, eps, sigma_target, 0);
    p.compute_graphs();
    return p;
}

PerturbationPath mix_two_exponents(const CyclicCocycle& c, int i, double eps) {
    const LyapunovGraph g = lyapunov_graph(c);
    const double midpoint = 0.5 * (g.sigma[i - 1] + g.sigma[i + 1]);
    return mix_two_exponents_until(c, i, eps, midpoint);
}

} // namespace cforge
