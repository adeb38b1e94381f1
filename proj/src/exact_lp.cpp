#include "vassbound/exact_lp.hpp"

#include "vassbound/vass.hpp"

#include <algorithm>
#include <sstream>

namespace vassbound
{

std::size_t LpProblem::add_symbol( std::string name, Sign sign )
{
    symbols.push_back( std::move( name ) );
    signs.push_back( sign );
    for ( auto& r : rows )
        r.coeffs.emplace_back( 0 );
    return symbols.size() - 1;
}

std::size_t LpProblem::add_row( std::vector<Rational> coeffs, Relation rel, Rational rhs )
{
    rows.push_back( LpRow{ std::move( coeffs ), rel, std::move( rhs ) } );
    return rows.size() - 1;
}

void LpProblem::validate() const
{
    if ( signs.size() != symbols.size() )
        throw InvariantError( "lp: sign flags do not match symbols" );
    for ( std::size_t i = 0; i < rows.size(); ++i )
        if ( rows[i].coeffs.size() != symbols.size() )
            throw InvariantError( "lp: row " + std::to_string( i ) + " has wrong arity" );
    for ( auto c : strict_candidates )
    {
        if ( c >= rows.size() )
            throw InvariantError( "lp: strict candidate out of range" );
        if ( rows[c].rel != Relation::GreaterEqual )
            throw InvariantError( "lp: strict candidate is an equality" );
    }
}

Rational row_slack( const LpRow& row, const std::vector<Rational>& assignment )
{
    Rational s = 0;
    for ( std::size_t j = 0; j < row.coeffs.size(); ++j )
        if ( sgn( row.coeffs[j] ) != 0 )
            s += row.coeffs[j] * assignment[j];
    return s - row.rhs;
}

bool satisfies( const LpProblem& p, const std::vector<Rational>& assignment )
{
    if ( assignment.size() != p.symbols.size() )
        return false;
    for ( std::size_t j = 0; j < assignment.size(); ++j )
        if ( p.signs[j] == Sign::NonNegative && sgn( assignment[j] ) < 0 )
            return false;
    for ( const auto& r : p.rows )
    {
        int s = sgn( row_slack( r, assignment ) );
        if ( s < 0 || ( r.rel == Relation::Equal && s != 0 ) )
            return false;
    }
    return true;
}

namespace
{

// Dense tableau over columns [structural | slack | artificial], one row per
// kept constraint, rhs kept non-negative.
class Tableau
{
public:
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    std::vector<std::size_t> basis;
    std::vector<Rational> cost; // reduced costs of the phase-one objective
    Rational objective = 0;     // current value of the sum of artificials
    std::size_t columns = 0;

    void pivot( std::size_t row, std::size_t col )
    {
        const Rational p = a[row][col];
        for ( auto& v : a[row] )
            if ( sgn( v ) != 0 )
                v /= p;
        b[row] /= p;
        for ( std::size_t i = 0; i < a.size(); ++i )
        {
            if ( i == row || sgn( a[i][col] ) == 0 )
                continue;
            const Rational f = a[i][col];
            for ( std::size_t j = 0; j < columns; ++j )
                if ( sgn( a[row][j] ) != 0 )
                    a[i][j] -= f * a[row][j];
            b[i] -= f * b[row];
        }
        if ( sgn( cost[col] ) != 0 )
        {
            const Rational f = cost[col];
            for ( std::size_t j = 0; j < columns; ++j )
                if ( sgn( a[row][j] ) != 0 )
                    cost[j] -= f * a[row][j];
            objective += f * b[row];
        }
        basis[row] = col;
    }

    // Bland's rule: lowest entering index; ties in the ratio test go to the
    // row whose basic column is lowest.
    void run()
    {
        for ( ;; )
        {
            std::size_t enter = columns;
            for ( std::size_t j = 0; j < columns; ++j )
                if ( sgn( cost[j] ) < 0 )
                {
                    enter = j;
                    break;
                }
            if ( enter == columns )
                return;
            std::size_t leave = a.size();
            Rational best;
            for ( std::size_t i = 0; i < a.size(); ++i )
            {
                if ( sgn( a[i][enter] ) <= 0 )
                    continue;
                Rational ratio = b[i] / a[i][enter];
                if ( leave == a.size() || ratio < best || ( ratio == best && basis[i] < basis[leave] ) )
                {
                    leave = i;
                    best = ratio;
                }
            }
            // phase one is bounded below by zero, so some row always blocks
            if ( leave == a.size() )
                throw InvariantError( "lp: phase-one objective unbounded" );
            pivot( leave, enter );
        }
    }
};

bool redundant_sign_row( const LpProblem& p, const LpRow& r )
{
    if ( sgn( r.rhs ) != 0 )
        return false;
    std::size_t nonzero = 0, where = 0;
    for ( std::size_t j = 0; j < r.coeffs.size(); ++j )
        if ( sgn( r.coeffs[j] ) != 0 )
        {
            ++nonzero;
            where = j;
        }
    if ( nonzero == 0 )
        return true;
    return r.rel == Relation::GreaterEqual && nonzero == 1 && sgn( r.coeffs[where] ) > 0
           && p.signs[where] == Sign::NonNegative;
}

} // namespace

std::optional<LpSolution> lp_feasible( const LpProblem& p )
{
    p.validate();
    const std::size_t n = p.symbols.size();

    // structural columns: x_j (or x_j^+) then x_j^- for free symbols
    std::vector<std::size_t> minus_col( n, 0 );
    std::size_t structural = n;
    for ( std::size_t j = 0; j < n; ++j )
        if ( p.signs[j] == Sign::Free )
            minus_col[j] = structural++;

    std::vector<const LpRow*> kept;
    for ( const auto& r : p.rows )
        if ( !redundant_sign_row( p, r ) )
            kept.push_back( &r );

    const std::size_t m = kept.size();
    std::size_t slacks = 0;
    for ( const auto* r : kept )
        if ( r->rel == Relation::GreaterEqual )
            ++slacks;

    Tableau t;
    t.a.assign( m, {} );
    t.b.assign( m, 0 );
    t.basis.assign( m, 0 );

    // first pass: fill structural and slack parts, decide which rows need an artificial
    std::vector<bool> needs_artificial( m, false );
    std::vector<std::size_t> slack_col( m, 0 );
    std::size_t next_slack = structural;
    std::size_t artificials = 0;
    for ( std::size_t i = 0; i < m; ++i )
    {
        const auto& r = *kept[i];
        std::vector<Rational> row( structural + slacks, 0 );
        for ( std::size_t j = 0; j < n; ++j )
        {
            row[j] = r.coeffs[j];
            if ( p.signs[j] == Sign::Free )
                row[minus_col[j]] = -r.coeffs[j];
        }
        Rational rhs = r.rhs;
        if ( r.rel == Relation::GreaterEqual )
        {
            slack_col[i] = next_slack++;
            row[slack_col[i]] = -1;
        }
        if ( sgn( rhs ) < 0 || ( sgn( rhs ) == 0 && r.rel == Relation::GreaterEqual ) )
        {
            for ( auto& v : row )
                v = -v;
            rhs = -rhs;
        }
        if ( r.rel == Relation::GreaterEqual && row[slack_col[i]] == 1 )
            t.basis[i] = slack_col[i];
        else
        {
            needs_artificial[i] = true;
            ++artificials;
        }
        t.a[i] = std::move( row );
        t.b[i] = rhs;
    }

    t.columns = structural + slacks + artificials;
    t.cost.assign( t.columns, 0 );
    std::size_t next_art = structural + slacks;
    for ( std::size_t i = 0; i < m; ++i )
    {
        t.a[i].resize( t.columns, 0 );
        if ( !needs_artificial[i] )
            continue;
        t.a[i][next_art] = 1;
        t.basis[i] = next_art;
        ++next_art;
        // reduced costs: c_j - sum over artificial rows
        for ( std::size_t j = 0; j < structural + slacks; ++j )
            t.cost[j] -= t.a[i][j];
        t.objective += t.b[i];
    }

    t.run();
    if ( sgn( t.objective ) != 0 )
        return std::nullopt;

    std::vector<Rational> column_value( t.columns, 0 );
    for ( std::size_t i = 0; i < m; ++i )
        column_value[t.basis[i]] = t.b[i];
    LpSolution sol;
    sol.assignment.assign( n, 0 );
    for ( std::size_t j = 0; j < n; ++j )
    {
        sol.assignment[j] = column_value[j];
        if ( p.signs[j] == Sign::Free )
            sol.assignment[j] -= column_value[minus_col[j]];
    }
    if ( !satisfies( p, sol.assignment ) )
        throw InvariantError( "lp: simplex returned an infeasible point\n" + dump_problem( p ) );
    return sol;
}

LpProblem tighten( const LpProblem& p, std::size_t row )
{
    LpProblem q = p;
    q.rows.at( row ).rhs += 1;
    q.strict_candidates.clear();
    return q;
}

LpSolution max_strict_set( const LpProblem& p )
{
    p.validate();
    std::vector<Rational> sum( p.symbols.size(), 0 );
    std::vector<std::size_t> candidates = p.strict_candidates;
    std::sort( candidates.begin(), candidates.end() );
    candidates.erase( std::unique( candidates.begin(), candidates.end() ), candidates.end() );

    for ( auto c : candidates )
    {
        if ( sgn( row_slack( p.rows[c], sum ) ) > 0 )
            continue;
        auto part = lp_feasible( tighten( p, c ) );
        if ( !part )
            continue;
        for ( std::size_t j = 0; j < sum.size(); ++j )
            sum[j] += part->assignment[j];
    }
    if ( !satisfies( p, sum ) )
        throw InvariantError( "lp: sum of partial solutions violates the problem; feasible set is not a cone\n"
                              + dump_problem( p ) );

    Rational smallest = 0;
    for ( auto c : candidates )
    {
        Rational s = row_slack( p.rows[c], sum );
        if ( sgn( s ) > 0 && ( sgn( smallest ) == 0 || s < smallest ) )
            smallest = s;
    }
    if ( sgn( smallest ) > 0 && smallest < 1 )
    {
        Rational factor = 1 / smallest;
        for ( auto& v : sum )
            v *= factor;
    }

    LpSolution sol;
    sol.assignment = std::move( sum );
    for ( auto c : candidates )
        if ( row_slack( p.rows[c], sol.assignment ) >= 1 )
            sol.strict_set.push_back( c );
    return sol;
}

LpSolution scale_to_integer( const LpSolution& sol )
{
    mpz_class l = 1;
    for ( const auto& v : sol.assignment )
        mpz_lcm( l.get_mpz_t(), l.get_mpz_t(), v.get_den_mpz_t() );
    LpSolution out = sol;
    for ( auto& v : out.assignment )
    {
        v *= l;
        v.canonicalize();
    }
    return out;
}

std::string dump_problem( const LpProblem& p )
{
    std::ostringstream out;
    out << "symbols:";
    for ( std::size_t j = 0; j < p.symbols.size(); ++j )
        out << ' ' << p.symbols[j] << ( p.signs[j] == Sign::NonNegative ? ">=0" : "" );
    out << "\nrows:\n";
    for ( std::size_t i = 0; i < p.rows.size(); ++i )
    {
        const auto& r = p.rows[i];
        out << "  " << i << ':';
        for ( const auto& c : r.coeffs )
            out << ' ' << c;
        out << ( r.rel == Relation::Equal ? " = " : " >= " ) << r.rhs;
        if ( std::find( p.strict_candidates.begin(), p.strict_candidates.end(), i ) != p.strict_candidates.end() )
            out << " *";
        out << '\n';
    }
    return out.str();
}

} // namespace vassbound
