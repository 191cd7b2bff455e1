#include "cforge/generator.hpp"

#include <cmath>

#include "cforge/errors.hpp"
#include "cforge/rng.hpp"
#include "cforge/spectral.hpp"

namespace cforge {

CocycleKind kind_from_string(const std::string& s) {
    if (s == "random_bounded") return CocycleKind::random_bounded;
    if (s == "dominated") return CocycleKind::dominated;
    if (s == "cancellation") return CocycleKind::cancellation;
    if (s == "elliptic") return CocycleKind::elliptic;
    if (s == "near_isometry") return CocycleKind::near_isometry;
    throw argument_error("unknown cocycle kind: " + s);
}

std::string kind_to_string(CocycleKind k) {
    switch (k) {
        case CocycleKind::random_bounded: return "random_bounded";
        case CocycleKind::dominated: return "dominated";
        case CocycleKind::cancellation: return "cancellation";
        case CocycleKind::elliptic: return "elliptic";
        case CocycleKind::near_isometry: return "near_isometry";
    }
    return "?";
}

namespace {

Matrix bounded_map(int d, double k_eff, Rng& rng) {
    Matrix q1 = random_orthogonal(d, rng);
    Matrix q2 = random_orthogonal(d, rng);
    Vector s(d);
    const double lk = std::log(k_eff);
    for (int i = 0; i < d; ++i) s(i) = std::exp(rng.uniform(-lk, lk));
    return q1 * s.asDiagonal() * q2.transpose();
}

std::vector<Matrix> cancellation_maps(int d, int n, double k) {
    if (n % 2 != 0) throw argument_error("cancellation family needs an even period");
    // hyperbolic block alternated with its conjugate by the axis swap, so
    // every two steps cancel exactly
    Vector diag(d);
    diag(0) = k;
    for (int i = 1; i + 1 < d; ++i) diag(i) = 1.0;
    diag(d - 1) = 1.0 / k;
    Matrix h = diag.asDiagonal();

    Matrix r = Matrix::Identity(d, d); // swap axes 0 and d-1, orientation kept
    r(0, 0) = 0.0;
    r(d - 1, d - 1) = 0.0;
    r(0, d - 1) = 1.0;
    r(d - 1, 0) = 1.0;
    if (d >= 2) r(1, 1) = -1.0; // det +1
    if (d == 2) {
        r << 0.0, -1.0, 1.0, 0.0; // plain quarter turn
    }
    Matrix hc = r * h * r.transpose();

    std::vector<Matrix> maps(n);
    for (int j = 0; j < n; ++j) maps[j] = (j % 2 == 0) ? h : hc;
    return maps;
}

} // namespace

CyclicCocycle generate(const GeneratorSpec& spec) {
    const int d = spec.dim;
    const int n = spec.period;
    if (d < 1) throw argument_error("generate: dimension must be positive");
    if (n < 1) throw argument_error("generate: period must be positive");
    if (spec.bound <= 1.0) throw argument_error("generate: bound must exceed 1");
    Rng rng(spec.seed, static_cast<std::uint64_t>(spec.kind) + 11);

    switch (spec.kind) {
        case CocycleKind::random_bounded: {
            std::vector<Matrix> maps(n);
            for (int j = 0; j < n; ++j) maps[j] = bounded_map(d, std::pow(spec.bound, 0.9), rng);
            return CyclicCocycle(d, std::move(maps));
        }
        case CocycleKind::near_isometry: {
            std::vector<Matrix> maps(n);
            const double k_eff = std::min(spec.bound, 1.05);
            for (int j = 0; j < n; ++j) maps[j] = bounded_map(d, k_eff, rng);
            return CyclicCocycle(d, std::move(maps));
        }
        case CocycleKind::cancellation:
            return CyclicCocycle(d, cancellation_maps(d, n, spec.bound));
        case CocycleKind::dominated: {
            if (d < 2) throw argument_error("generate: dominated needs dim >= 2");
            const int ks = d / 2;
            const double kb = std::min(1.15, std::pow(spec.bound, 0.2));
            const double gap = std::log(spec.bound) * 0.5;
            std::vector<Matrix> frames(n);
            for (int j = 0; j < n; ++j) frames[j] = random_orthogonal(d, rng);
            std::vector<Matrix> maps(n);
            for (int j = 0; j < n; ++j) {
                Matrix block = Matrix::Zero(d, d);
                block.topLeftCorner(ks, ks) = std::exp(-gap) * bounded_map(ks, kb, rng);
                block.bottomRightCorner(d - ks, d - ks) =
                    std::exp(gap) * bounded_map(d - ks, kb, rng);
                maps[j] = frames[(j + 1) % n] * block * frames[j].transpose();
            }
            return CyclicCocycle(d, std::move(maps));
        }
        case CocycleKind::elliptic: {
            if (d < 2) throw argument_error("generate: elliptic needs dim >= 2");
            // rotation-rich 2-D core, mildly hyperbolic factors; retry with
            // weaker stretching until the product has a complex pair
            for (double stretch = 0.2 * std::log(spec.bound);; stretch *= 0.5) {
                Rng local = rng.fork(static_cast<std::uint64_t>(1e6 * stretch) + 1);
                std::vector<Matrix> maps(n);
                for (int j = 0; j < n; ++j) {
                    Matrix core =
                        rotation2(local.uniform(0.2, 2.9)) *
                        Eigen::Vector2d(std::exp(local.uniform(-stretch, stretch)),
                                        std::exp(local.uniform(-stretch, stretch)))
                            .asDiagonal();
                    Matrix full = Matrix::Identity(d, d);
                    full.topLeftCorner(2, 2) = core;
                    for (int i = 2; i < d; ++i) full(i, i) = std::exp(local.uniform(-0.05, 0.05));
                    maps[j] = full;
                }
                CyclicCocycle c(d, std::move(maps));
                if (!analyze(c).real_spectrum()) return c;
                if (stretch < 1e-6)
                    return c; // pure rotations at this point; caller beware
            }
        }
    }
    throw argument_error("generate: unhandled kind");
}

GenerationResult generate_certified(const GeneratorSpec& spec) {
    GenerationResult out{generate(spec), std::nullopt};
    if (spec.kind == CocycleKind::dominated) {
        const int i = out.cocycle.dim() / 2;
        DominationReport rep = check_domination(out.cocycle, i, 1);
        if (!rep.dominated)
            throw numerical_error("generate: dominated kind failed its certification");
        out.domination = rep;
    }
    return out;
}

} // namespace cforge
