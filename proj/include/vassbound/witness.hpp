#pragma once

#include "vassbound/analyzer.hpp"
#include "vassbound/exact_lp.hpp"
#include "vassbound/vass.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vassbound
{

struct MultiCycle
{
    std::vector<Path> cycles;

    [[nodiscard]] IntVector value( const Vass& vass ) const;
    [[nodiscard]] std::vector<std::uint64_t> instances( const Vass& vass ) const;
};

/// Eulerian decomposition of `mu` (indexed like `transitions`). One cycle
/// per connected component of the support, starting at its least state.
MultiCycle multicycle_from_solution( const Vass& vass, std::span<const TransitionId> transitions,
                                     const IntVector& mu );

/// A cycle from the least state that uses every transition at least once.
/// Requires a connected VASS.
Path covering_cycle( const Vass& vass );

struct NodeCycle
{
    std::size_t node = 0;
    std::size_t layer = 0;
    Path cycle;
};

/// cycle(eta) for every node occupying `layer`: the covering cycle at layer
/// 0, otherwise an Euler circuit of the archived solution restricted to the
/// node.
std::vector<NodeCycle> node_cycles( const Vass& vass, const Analysis& analysis, std::size_t layer );

/// Value, lowest running sum and instance counts of a transition sequence;
/// enough to reason about repetitions without materialising them.
struct PrePathSummary
{
    IntVector value;
    IntVector min_prefix; // <= 0, the empty prefix counts
    std::vector<Integer> instances;
    Integer length = 0;

    static PrePathSummary empty( const Vass& vass );
    static PrePathSummary of( const Vass& vass, std::span<const TransitionId> steps );

    [[nodiscard]] PrePathSummary then( const PrePathSummary& next ) const;
    [[nodiscard]] PrePathSummary repeat( const Integer& times ) const;
    /// Pointwise least valuation the sequence executes from.
    [[nodiscard]] IntVector min_initial() const;
};

/// Summaries of the per-layer pre-paths: index 0 is the covering cycle
/// repeated N times, index l >= 1 nests N-fold repetitions of the layer-l
/// node cycles along the tree.
std::vector<PrePathSummary> layer_pre_paths( const Vass& vass, const Analysis& analysis, std::uint64_t n );

/// Smallest k >= 1 such that every layer pre-path l >= 1 executes from
/// k * N^min(vExp(x), l). Entry 0 of `tau` is ignored.
Integer choose_k( const std::vector<Exponent>& vexp, std::span<const PrePathSummary> tau, std::uint64_t n );

struct WitnessPath
{
    std::uint64_t n = 0;
    Integer k = 1;
    Path path;
    Valuation initial;
    /// Valuation obtained from the per-layer bounds; initial never exceeds it.
    IntVector envelope;
    std::vector<std::uint64_t> instances;
    Valuation final_valuation;
};

WitnessPath build_witness( const Vass& vass, const Analysis& analysis, std::uint64_t n );

struct WitnessCheck
{
    std::string name;
    bool passed = false;
    std::string detail;
};

struct WitnessVerification
{
    std::vector<WitnessCheck> checks;
    /// ||initial|| / N
    Rational init_ratio = 0;

    [[nodiscard]] bool passed() const;
};

WitnessVerification verify_witness( const Vass& vass, const WitnessPath& w, const BoundsReport& bounds,
                                    std::uint64_t n );

struct ExponentialCertificate
{
    std::vector<Path> cycles;
    std::vector<VarId> u; // variables kept non-negative by every cycle
    std::vector<VarId> w; // variables strictly increased by the sum
};

/// Checks the partition and both growth conditions; on failure writes the
/// reason to `why` if given.
bool certificate_holds( const Vass& vass, const ExponentialCertificate& cert, std::string* why = nullptr );

ExponentialCertificate exponential_certificate( const Vass& vass, const Analysis& analysis );

} // namespace vassbound
