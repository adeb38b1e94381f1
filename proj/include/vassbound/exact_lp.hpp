#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace vassbound
{

using Rational = mpq_class;

enum class Sign
{
    Free,
    NonNegative,
};

enum class Relation
{
    GreaterEqual,
    Equal,
};

struct LpRow
{
    std::vector<Rational> coeffs;
    Relation rel = Relation::GreaterEqual;
    Rational rhs = 0;
};

struct LpProblem
{
    std::vector<std::string> symbols;
    std::vector<Sign> signs;
    std::vector<LpRow> rows;
    /// Indices into `rows`; each must be a >= row.
    std::vector<std::size_t> strict_candidates;

    std::size_t add_symbol( std::string name, Sign sign );
    std::size_t add_row( std::vector<Rational> coeffs, Relation rel, Rational rhs = 0 );
    /// Throws InvariantError on arity or candidate mismatches.
    void validate() const;
};

struct LpSolution
{
    std::vector<Rational> assignment;
    /// Candidate rows satisfied with slack >= 1, ascending.
    std::vector<std::size_t> strict_set;
};

/// Left-hand side minus right-hand side of a row under an assignment.
Rational row_slack( const LpRow& row, const std::vector<Rational>& assignment );
/// True iff every row and every sign constraint holds exactly.
bool satisfies( const LpProblem& p, const std::vector<Rational>& assignment );

/// Phase-one simplex with Bland's rule. Returns some feasible assignment.
std::optional<LpSolution> lp_feasible( const LpProblem& p );

/// Solution whose strict set is the maximal set of candidate rows that can
/// hold with slack >= 1 simultaneously. Requires the feasible set to be a
/// cone (closed under addition and positive scaling).
LpSolution max_strict_set( const LpProblem& p );

/// Copy of `p` where candidate row `row` must hold with slack >= 1.
LpProblem tighten( const LpProblem& p, std::size_t row );

/// Multiplies by the lcm of all denominators.
LpSolution scale_to_integer( const LpSolution& sol );

/// Plain-text rendering for bug reports.
std::string dump_problem( const LpProblem& p );

} // namespace vassbound
