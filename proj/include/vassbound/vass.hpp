#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vassbound
{

using Integer = mpz_class;
using IntVector = std::vector<Integer>;
using StateId = std::uint32_t;
using TransitionId = std::uint32_t;
using VarId = std::uint32_t;

/// Base class of all errors raised by the toolkit.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error
{
public:
    ParseError( std::size_t line, std::size_t column, const std::string& message );

    [[nodiscard]] std::size_t line() const { return _line; }
    [[nodiscard]] std::size_t column() const { return _column; }

private:
    std::size_t _line;
    std::size_t _column;
};

/// Raised when a structural invariant of a model or of an internal
/// computation does not hold. Seeing one of these means a bug.
class InvariantError : public Error
{
public:
    using Error::Error;
};

struct Transition
{
    TransitionId id;
    StateId source;
    IntVector update;
    StateId target;

    [[nodiscard]] bool is_self_loop() const { return source == target; }
};

/// A vector addition system with states. States are kept sorted by name so
/// that state ids are canonical; transition ids follow insertion order.
class Vass
{
public:
    struct NamedTransition
    {
        std::string source;
        IntVector update;
        std::string target;
    };

    Vass() = default;

    /// Builds a VASS, checking all structural invariants. States are the
    /// names mentioned by the transitions plus `extra_states`.
    Vass( std::vector<std::string> variables, std::vector<NamedTransition> transitions,
          std::vector<std::string> extra_states = {} );

    [[nodiscard]] std::size_t dimension() const { return _variables.size(); }
    [[nodiscard]] const std::vector<std::string>& variables() const { return _variables; }
    [[nodiscard]] const std::vector<std::string>& states() const { return _states; }
    [[nodiscard]] const std::vector<Transition>& transitions() const { return _transitions; }
    [[nodiscard]] const Transition& transition( TransitionId id ) const { return _transitions.at( id ); }
    [[nodiscard]] std::size_t state_count() const { return _states.size(); }
    [[nodiscard]] std::size_t transition_count() const { return _transitions.size(); }

    [[nodiscard]] std::optional<StateId> find_state( std::string_view name ) const;
    [[nodiscard]] std::optional<VarId> find_variable( std::string_view name ) const;
    [[nodiscard]] const std::string& state_name( StateId s ) const { return _states.at( s ); }
    [[nodiscard]] const std::string& variable_name( VarId x ) const { return _variables.at( x ); }

    /// "src->dst", used in human readable output.
    [[nodiscard]] std::string transition_label( TransitionId id ) const;

    /// Ids of the transitions leaving each state, ascending.
    [[nodiscard]] const std::vector<std::vector<TransitionId>>& outgoing() const { return _outgoing; }

private:
    std::vector<std::string> _variables;
    std::vector<std::string> _states;
    std::vector<Transition> _transitions;
    std::vector<std::vector<TransitionId>> _outgoing;
};

/// Non-negative integer vector indexed by the variables of a VASS.
class Valuation
{
public:
    Valuation() = default;
    explicit Valuation( std::size_t dimension ) : _entries( dimension, 0 ) {}
    explicit Valuation( IntVector entries );

    [[nodiscard]] std::size_t size() const { return _entries.size(); }
    [[nodiscard]] const Integer& operator[]( std::size_t i ) const { return _entries[i]; }
    [[nodiscard]] const IntVector& entries() const { return _entries; }
    /// Maximum entry, 0 for the empty valuation.
    [[nodiscard]] Integer norm() const;

    bool operator==( const Valuation& ) const = default;

private:
    IntVector _entries;
};

/// A sequence of transitions without any adjacency requirement.
struct PrePath
{
    std::vector<TransitionId> steps;

    [[nodiscard]] std::size_t length() const { return steps.size(); }
};

/// A sequence of transitions where each step starts in the state the
/// previous one ended in.
class Path
{
public:
    Path() = default;
    /// Throws InvariantError if consecutive steps are not state-adjacent.
    Path( const Vass& vass, std::vector<TransitionId> steps );

    [[nodiscard]] std::size_t length() const { return _steps.size(); }
    [[nodiscard]] bool empty() const { return _steps.empty(); }
    [[nodiscard]] const std::vector<TransitionId>& steps() const { return _steps; }
    [[nodiscard]] std::span<const TransitionId> view() const { return _steps; }
    [[nodiscard]] PrePath as_pre_path() const { return PrePath{ _steps }; }

    [[nodiscard]] StateId first_state( const Vass& vass ) const;
    [[nodiscard]] StateId last_state( const Vass& vass ) const;
    [[nodiscard]] bool is_cycle( const Vass& vass ) const;

private:
    std::vector<TransitionId> _steps;
};

struct IntegerMatrix
{
    std::vector<std::string> row_labels;
    std::vector<std::string> column_labels;
    std::vector<IntVector> entries; // row-major

    [[nodiscard]] std::size_t rows() const { return row_labels.size(); }
    [[nodiscard]] std::size_t columns() const { return column_labels.size(); }
    [[nodiscard]] const Integer& at( std::size_t r, std::size_t c ) const { return entries[r][c]; }
};

/// States and transitions of a sub-VASS; both lists ascending.
struct SubVass
{
    std::vector<StateId> states;
    std::vector<TransitionId> transitions;

    bool operator==( const SubVass& ) const = default;
};

Vass parse_vass( std::string_view text );
/// vars line, then transitions sorted by (source, target, update).
std::string serialize_vass( const Vass& vass );

bool validate_connected( const Vass& vass );
/// Some ordered pair (s, s') with no path from s to s', if one exists.
std::optional<std::pair<StateId, StateId>> find_unreachable_pair( const Vass& vass );

IntegerMatrix update_matrix( const Vass& vass );
IntegerMatrix flow_matrix( const Vass& vass );

/// Maximal strongly connected sub-VASSs with at least one transition, of the
/// graph (states, transitions). Ordered by smallest contained state.
std::vector<SubVass> scc_decompose( const Vass& vass, std::span<const StateId> states,
                                    std::span<const TransitionId> transitions );

/// Sum of the updates along the steps.
IntVector path_value( const Vass& vass, std::span<const TransitionId> steps );
/// Number of occurrences of every transition.
std::vector<std::uint64_t> instance_counts( const Vass& vass, std::span<const TransitionId> steps );

std::optional<Valuation> execute_path( const Vass& vass, const Valuation& start,
                                       std::span<const TransitionId> steps );
Valuation min_initial_valuation( const Vass& vass, std::span<const TransitionId> steps );

} // namespace vassbound
