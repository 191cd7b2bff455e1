#ifndef CFORGE_GENERATOR_HPP
#define CFORGE_GENERATOR_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "cforge/cocycle.hpp"
#include "cforge/domination.hpp"

namespace cforge {

enum class CocycleKind { random_bounded, dominated, cancellation, elliptic, near_isometry };

CocycleKind kind_from_string(const std::string& s);
std::string kind_to_string(CocycleKind k);

struct GeneratorSpec {
    CocycleKind kind = CocycleKind::random_bounded;
    int dim = 2;
    int period = 8;
    double bound = 2.0; // K
    std::uint64_t seed = 1;
};

// Deterministic per seed; every output satisfies the cocycle invariants and
// the requested bound.
CyclicCocycle generate(const GeneratorSpec& spec);

// Same, with the certification the kind promises (a domination report for
// kind=dominated, the exact graph for kind=cancellation).
struct GenerationResult {
    CyclicCocycle cocycle;
    std::optional<DominationReport> domination;
};
GenerationResult generate_certified(const GeneratorSpec& spec);

} // namespace cforge

#endif
