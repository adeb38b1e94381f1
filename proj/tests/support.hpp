#pragma once

#include "vassbound/analyzer.hpp"
#include "vassbound/exact_lp.hpp"
#include "vassbound/vass.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing
{

using namespace vassbound;

inline std::string read_text( const std::string& path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw std::runtime_error( "cannot open " + path );
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Vass load_model( const std::string& name )
{
    return parse_vass( read_text( std::string( MODELS_DIR ) + "/" + name + ".vass" ) );
}

inline IntVector ints( std::initializer_list<long> values )
{
    IntVector v;
    for ( long x : values )
        v.emplace_back( x );
    return v;
}

inline std::vector<long> longs( const IntVector& v )
{
    std::vector<long> out;
    for ( const auto& x : v )
        out.push_back( x.get_si() );
    return out;
}

/// Transition id of the unique transition src -> dst.
inline TransitionId find_transition( const Vass& vass, const std::string& src, const std::string& dst )
{
    const auto s = vass.find_state( src ).value();
    const auto d = vass.find_state( dst ).value();
    for ( const auto& t : vass.transitions() )
        if ( t.source == s && t.target == d )
            return t.id;
    throw std::runtime_error( "no transition " + src + "->" + dst );
}

/// Connected VASS with at most `max_vars` variables and `max_transitions`
/// transitions, updates in [-bound, bound]. A random ring through all states
/// keeps it strongly connected.
inline Vass random_connected_vass( std::mt19937_64& rng, int max_vars = 3, int max_transitions = 6, int bound = 2 )
{
    auto pick = [&]( int lo, int hi ) { return std::uniform_int_distribution<int>( lo, hi )( rng ); };
    const int vars = pick( 1, max_vars );
    const int transitions = pick( 2, max_transitions );
    const int states = pick( 1, std::min( 4, transitions ) );

    std::vector<std::string> names;
    for ( int i = 0; i < vars; ++i )
        names.push_back( "x" + std::to_string( i ) );
    auto state = []( int i ) { return "q" + std::to_string( i ); };
    // Mix of update shapes: transfers (one counter down, another up),
    // plain decrements and uniform noise. Uniform noise alone almost never
    // produces the nested transfer loops that need higher exponents.
    auto update = [&] {
        IntVector u( vars, 0 );
        const int shape = pick( 0, 3 );
        if ( shape <= 1 && vars >= 2 )
        {
            const int from = pick( 0, vars - 1 );
            int to = pick( 0, vars - 2 );
            to += to >= from ? 1 : 0;
            u[from] = -pick( 1, bound );
            u[to] = pick( 1, bound );
        }
        else if ( shape == 2 )
            u[pick( 0, vars - 1 )] = -pick( 1, bound );
        else
            for ( auto& e : u )
                e = pick( -bound, bound );
        return u;
    };

    std::vector<Vass::NamedTransition> ts;
    if ( states > 1 )
        for ( int i = 0; i < states; ++i )
            ts.push_back( { state( i ), update(), state( ( i + 1 ) % states ) } );
    while ( static_cast<int>( ts.size() ) < transitions )
        ts.push_back( { state( pick( 0, states - 1 ) ), update(), state( pick( 0, states - 1 ) ) } );

    // the parser rejects duplicates; keep the model well formed the same way
    std::vector<Vass::NamedTransition> unique;
    for ( auto& t : ts )
    {
        bool seen = false;
        for ( const auto& u : unique )
            seen = seen || ( u.source == t.source && u.target == t.target && u.update == t.update );
        if ( !seen )
            unique.push_back( std::move( t ) );
    }
    return Vass( names, std::move( unique ) );
}

/// Homogeneous problem (all right-hand sides zero), so its feasible set is a
/// cone; every >= row is a strict candidate.
inline LpProblem random_homogeneous_lp( std::mt19937_64& rng )
{
    auto pick = [&]( int lo, int hi ) { return std::uniform_int_distribution<int>( lo, hi )( rng ); };
    LpProblem p;
    const int symbols = pick( 1, 6 );
    for ( int j = 0; j < symbols; ++j )
        p.add_symbol( "v" + std::to_string( j ), pick( 0, 3 ) == 0 ? Sign::Free : Sign::NonNegative );
    const int rows = pick( 1, 7 );
    for ( int i = 0; i < rows; ++i )
    {
        std::vector<Rational> c;
        for ( int j = 0; j < symbols; ++j )
            c.emplace_back( pick( -3, 3 ), pick( 1, 2 ) );
        for ( auto& v : c )
            v.canonicalize();
        const bool eq = pick( 0, 4 ) == 0;
        const auto id = p.add_row( std::move( c ), eq ? Relation::Equal : Relation::GreaterEqual );
        if ( !eq )
            p.strict_candidates.push_back( id );
    }
    for ( int j = 0; j < symbols; ++j )
        if ( p.signs[j] == Sign::NonNegative && pick( 0, 1 ) == 0 )
        {
            std::vector<Rational> c( symbols, 0 );
            c[j] = 1;
            p.strict_candidates.push_back( p.add_row( std::move( c ), Relation::GreaterEqual ) );
        }
    return p;
}

/// Independent re-check of one analyzer iteration: both solutions satisfy
/// their systems, the dichotomy holds row by row, and every row outside the
/// strict side is infeasible when tightened on its own. Returns "" or the
/// first problem found.
inline std::string audit_layer( const ExtendedSystem& sys, const LayerSolution& sol )
{
    const std::size_t rows = sys.rows.size();
    const std::size_t u = sys.transitions.size();
    const std::size_t states = sys.f_u.rows();

    LpProblem first;
    for ( std::size_t j = 0; j < u; ++j )
        first.add_symbol( "mu" + std::to_string( j ), Sign::NonNegative );
    for ( std::size_t i = 0; i < rows; ++i )
    {
        std::vector<Rational> c;
        for ( std::size_t j = 0; j < u; ++j )
            c.emplace_back( sys.d_ext.at( i, j ) );
        first.add_row( std::move( c ), Relation::GreaterEqual );
    }
    for ( std::size_t j = 0; j < u; ++j )
    {
        std::vector<Rational> c( u, 0 );
        c[j] = 1;
        first.add_row( std::move( c ), Relation::GreaterEqual );
    }
    for ( std::size_t s = 0; s < states; ++s )
    {
        std::vector<Rational> c;
        for ( std::size_t j = 0; j < u; ++j )
            c.emplace_back( sys.f_u.at( s, j ) );
        first.add_row( std::move( c ), Relation::Equal );
    }

    LpProblem second;
    for ( std::size_t i = 0; i < rows; ++i )
        second.add_symbol( "r" + std::to_string( i ), Sign::NonNegative );
    for ( std::size_t s = 0; s < states; ++s )
        second.add_symbol( "z" + std::to_string( s ), Sign::NonNegative );
    for ( std::size_t i = 0; i < rows; ++i )
    {
        std::vector<Rational> c( rows + states, 0 );
        c[i] = 1;
        second.add_row( std::move( c ), Relation::GreaterEqual );
    }
    for ( std::size_t j = 0; j < u; ++j )
    {
        std::vector<Rational> c( rows + states, 0 );
        for ( std::size_t i = 0; i < rows; ++i )
            c[i] = -Rational( sys.d_ext.at( i, j ) );
        for ( std::size_t s = 0; s < states; ++s )
            c[rows + s] = -Rational( sys.f_u.at( s, j ) );
        second.add_row( std::move( c ), Relation::GreaterEqual );
    }

    std::vector<Rational> mu( sol.mu.begin(), sol.mu.end() );
    std::vector<Rational> rz( sol.r.begin(), sol.r.end() );
    rz.insert( rz.end(), sol.z.begin(), sol.z.end() );
    if ( !satisfies( first, mu ) )
        return "mu violates system (I) in layer " + std::to_string( sys.layer );
    if ( !satisfies( second, rz ) )
        return "(r, z) violates system (II) in layer " + std::to_string( sys.layer );

    const std::string where = " in layer " + std::to_string( sys.layer );
    for ( std::size_t i = 0; i < rows; ++i )
    {
        const bool ranked = sgn( sol.r[i] ) > 0;
        const bool grows = sgn( row_slack( first.rows[i], mu ) ) > 0;
        if ( ranked == grows )
            return "row " + sys.d_ext.row_labels[i] + " breaks the dichotomy" + where;
        // the side that does not hold must be impossible, not just missed
        if ( !grows && lp_feasible( tighten( first, i ) ) )
            return "row " + sys.d_ext.row_labels[i] + " could grow but was not chosen" + where;
        if ( !ranked && lp_feasible( tighten( second, i ) ) )
            return "row " + sys.d_ext.row_labels[i] + " could be ranked but was not chosen" + where;
    }
    for ( std::size_t j = 0; j < u; ++j )
    {
        const bool used = sgn( sol.mu[j] ) > 0;
        const bool drops = sgn( row_slack( second.rows[rows + j], rz ) ) > 0;
        if ( used == drops )
            return "transition " + std::to_string( sys.transitions[j] ) + " breaks the dichotomy" + where;
        if ( !used && lp_feasible( tighten( first, rows + j ) ) )
            return "transition " + std::to_string( sys.transitions[j] ) + " could be used but was not" + where;
        if ( !drops && lp_feasible( tighten( second, rows + j ) ) )
            return "transition " + std::to_string( sys.transitions[j] ) + " could drop but does not" + where;
    }
    return "";
}

} // namespace testing
