#pragma once

#include "vassbound/vass.hpp"

#include <cstdint>
#include <string>

namespace vassbound
{

constexpr std::uint64_t default_oracle_budget = 10'000'000;

struct OracleOptions
{
    /// Maximal number of distinct configurations explored.
    std::uint64_t budget = default_oracle_budget;
};

class OracleBudgetExceeded : public Error
{
public:
    explicit OracleBudgetExceeded( std::uint64_t budget );
};

struct OracleValue
{
    bool nonterminating = false;
    std::int64_t value = 0;

    [[nodiscard]] std::string to_string() const;
    bool operator==( const OracleValue& ) const = default;
};

/// What a sweep measures: trace length, final value of a variable, or
/// number of uses of a transition.
struct Metric
{
    enum class Kind
    {
        Longest,
        Variable,
        Transition,
    };
    Kind kind = Kind::Longest;
    std::uint32_t index = 0;

    /// "longest", "var:<name>" or "trans:<id>".
    static Metric parse( const Vass& vass, const std::string& text );
    [[nodiscard]] std::string name( const Vass& vass ) const;
};

/// Supremum of trace lengths over all initial states and valuations with
/// norm <= n. A configuration cycle makes the answer NONTERMINATING.
OracleValue longest_trace( const Vass& vass, std::uint64_t n, OracleOptions options = {} );

/// Longest trace from the single configuration (state, start).
OracleValue longest_trace_from( const Vass& vass, StateId state, const Valuation& start, OracleOptions options = {} );

/// Largest value of x in any configuration reachable from the same roots.
/// Configuration cycles do not matter here, so this never reports
/// NONTERMINATING; an infinite reachable set exhausts the budget.
OracleValue max_reachable( const Vass& vass, std::uint64_t n, VarId x, OracleOptions options = {} );

/// Largest number of uses of t along a trace from the same roots.
OracleValue max_instances( const Vass& vass, std::uint64_t n, TransitionId t, OracleOptions options = {} );

OracleValue evaluate( const Vass& vass, std::uint64_t n, const Metric& metric, OracleOptions options = {} );

/// "N,metric,value" header plus one row per n in [from, to].
std::string sweep_csv( const Vass& vass, std::uint64_t from, std::uint64_t to, const Metric& metric,
                       OracleOptions options = {} );

} // namespace vassbound
