#include "vassbound/analyzer.hpp"

#include "vassbound/exact_lp.hpp"

#include <algorithm>
#include <set>

namespace vassbound
{

LayerTree::LayerTree( SubVass root_label )
{
    TreeNode root;
    root.id = 0;
    root.label = std::move( root_label );
    _nodes.push_back( std::move( root ) );
}

std::vector<std::size_t> LayerTree::layer( std::size_t layer ) const
{
    std::vector<std::size_t> out;
    for ( const auto& n : _nodes )
        if ( n.covers( layer ) )
            out.push_back( n.id );
    return out;
}

std::optional<std::size_t> LayerTree::ancestor_at( std::size_t id, std::size_t layer ) const
{
    std::optional<std::size_t> cur = id;
    while ( cur )
    {
        const auto& n = _nodes.at( *cur );
        if ( n.covers( layer ) )
            return cur;
        if ( n.first_layer < layer )
            return std::nullopt;
        cur = n.parent;
    }
    return std::nullopt;
}

std::size_t LayerTree::depth() const
{
    std::size_t d = 0;
    for ( const auto& n : _nodes )
        d = std::max( d, n.last_layer );
    return d;
}

std::size_t LayerTree::add_child( std::size_t parent, SubVass label, std::size_t layer )
{
    TreeNode n;
    n.id = _nodes.size();
    n.label = std::move( label );
    n.parent = parent;
    n.first_layer = n.last_layer = layer;
    _nodes.at( parent ).children.push_back( n.id );
    _nodes.push_back( std::move( n ) );
    return _nodes.back().id;
}

void LayerTree::extend( std::size_t id, std::size_t last_layer )
{
    auto& n = _nodes.at( id );
    if ( last_layer < n.last_layer )
        throw InvariantError( "layer tree: span cannot shrink" );
    n.last_layer = last_layer;
}

NotConnectedError::NotConnectedError( std::string from, std::string to )
    : Error( "VASS is not connected: no path from state '" + from + "' to state '" + to + "'" ),
      _from( std::move( from ) ), _to( std::move( to ) )
{
}

const MuRecord& Analysis::mu_for_layer( std::size_t layer ) const
{
    const MuRecord* best = nullptr;
    for ( const auto& m : mu_archive )
        if ( m.layer <= layer )
            best = &m;
    if ( !best )
        throw InvariantError( "no solution archived for layer " + std::to_string( layer ) );
    return *best;
}

// ---------------------------------------------------------------------------

namespace
{

std::size_t source_layer( std::size_t layer, const Exponent& e )
{
    if ( !e.finite() )
        return 0;
    return layer - static_cast<std::size_t>( e.value() );
}

bool contains( const std::vector<TransitionId>& sorted, TransitionId t )
{
    return std::binary_search( sorted.begin(), sorted.end(), t );
}

} // namespace

ExtendedSystem build_extended_system( const Vass& vass, const LayerTree& tree, std::size_t layer,
                                      const std::vector<Exponent>& vexp )
{
    if ( layer == 0 )
        throw InvariantError( "extended system requested for layer 0" );
    ExtendedSystem sys;
    sys.layer = layer;
    for ( auto id : tree.layer( layer - 1 ) )
        for ( auto t : tree.node( id ).label.transitions )
            sys.transitions.push_back( t );
    std::sort( sys.transitions.begin(), sys.transitions.end() );

    struct Key
    {
        std::size_t layer;
        std::size_t node;
        VarId var;
    };
    std::vector<Key> keys;
    for ( VarId x = 0; x < vass.dimension(); ++x )
    {
        const auto& e = vexp.at( x );
        if ( e.finite() && e.value() > layer )
            throw InvariantError( "variable exponent exceeds current layer" );
        const std::size_t l = source_layer( layer, e );
        for ( auto id : tree.layer( l ) )
            keys.push_back( { l, id, x } );
    }
    std::sort( keys.begin(), keys.end(), []( const Key& a, const Key& b ) {
        if ( a.layer != b.layer )
            return a.layer > b.layer;
        if ( a.node != b.node )
            return a.node < b.node;
        return a.var < b.var;
    } );

    for ( const auto t : sys.transitions )
    {
        sys.d_ext.column_labels.push_back( "t" + std::to_string( t ) );
        sys.f_u.column_labels.push_back( "t" + std::to_string( t ) );
    }
    for ( const auto& k : keys )
    {
        sys.rows.push_back( { k.var, k.node } );
        sys.d_ext.row_labels.push_back( vass.variable_name( k.var ) + "@n" + std::to_string( k.node ) );
        const auto& node_trns = tree.node( k.node ).label.transitions;
        IntVector row;
        for ( const auto t : sys.transitions )
            row.push_back( contains( node_trns, t ) ? vass.transition( t ).update[k.var] : Integer( 0 ) );
        sys.d_ext.entries.push_back( std::move( row ) );
    }
    sys.f_u.row_labels = vass.states();
    sys.f_u.entries.assign( vass.state_count(), IntVector( sys.transitions.size(), 0 ) );
    for ( std::size_t c = 0; c < sys.transitions.size(); ++c )
    {
        const auto& t = vass.transition( sys.transitions[c] );
        if ( t.is_self_loop() )
            continue;
        sys.f_u.entries[t.source][c] -= 1;
        sys.f_u.entries[t.target][c] += 1;
    }
    return sys;
}

namespace
{

IntVector to_integers( const std::vector<Rational>& values, std::size_t from, std::size_t count )
{
    IntVector out;
    for ( std::size_t i = 0; i < count; ++i )
    {
        const auto& v = values[from + i];
        if ( v.get_den() != 1 )
            throw InvariantError( "expected an integral solution" );
        out.push_back( v.get_num() );
    }
    return out;
}

// (D_ext^T r + F_U^T z)(t) for every t in U
IntVector rank_change( const ExtendedSystem& sys, const IntVector& r, const IntVector& z )
{
    IntVector out( sys.transitions.size(), 0 );
    for ( std::size_t c = 0; c < sys.transitions.size(); ++c )
    {
        for ( std::size_t i = 0; i < sys.rows.size(); ++i )
            out[c] += sys.d_ext.entries[i][c] * r[i];
        for ( std::size_t s = 0; s < z.size(); ++s )
            out[c] += sys.f_u.entries[s][c] * z[s];
    }
    return out;
}

} // namespace

LayerSolution solve_layer( const Vass& vass, const ExtendedSystem& sys )
{
    const std::size_t u = sys.transitions.size();
    const std::size_t rows = sys.rows.size();
    const std::size_t states = vass.state_count();

    // (I): D_ext mu >= 0, mu >= 0, F_U mu = 0
    LpProblem first;
    for ( const auto t : sys.transitions )
        first.add_symbol( "mu_t" + std::to_string( t ), Sign::NonNegative );
    for ( std::size_t i = 0; i < rows; ++i )
    {
        std::vector<Rational> c( u );
        for ( std::size_t j = 0; j < u; ++j )
            c[j] = sys.d_ext.entries[i][j];
        first.strict_candidates.push_back( first.add_row( std::move( c ), Relation::GreaterEqual ) );
    }
    for ( std::size_t j = 0; j < u; ++j )
    {
        std::vector<Rational> c( u, 0 );
        c[j] = 1;
        first.strict_candidates.push_back( first.add_row( std::move( c ), Relation::GreaterEqual ) );
    }
    for ( std::size_t s = 0; s < states; ++s )
    {
        std::vector<Rational> c( u );
        for ( std::size_t j = 0; j < u; ++j )
            c[j] = sys.f_u.entries[s][j];
        first.add_row( std::move( c ), Relation::Equal );
    }

    // (II): r >= 0, z >= 0, -(D_ext^T r + F_U^T z) >= 0
    LpProblem second;
    for ( std::size_t i = 0; i < rows; ++i )
        second.add_symbol( "r_" + sys.d_ext.row_labels[i], Sign::NonNegative );
    for ( std::size_t s = 0; s < states; ++s )
        second.add_symbol( "z_" + vass.state_name( static_cast<StateId>( s ) ), Sign::NonNegative );
    const std::size_t width = rows + states;
    for ( std::size_t i = 0; i < rows; ++i )
    {
        std::vector<Rational> c( width, 0 );
        c[i] = 1;
        second.strict_candidates.push_back( second.add_row( std::move( c ), Relation::GreaterEqual ) );
    }
    for ( std::size_t j = 0; j < u; ++j )
    {
        std::vector<Rational> c( width, 0 );
        for ( std::size_t i = 0; i < rows; ++i )
            c[i] = -sys.d_ext.entries[i][j];
        for ( std::size_t s = 0; s < states; ++s )
            c[rows + s] = -sys.f_u.entries[s][j];
        second.strict_candidates.push_back( second.add_row( std::move( c ), Relation::GreaterEqual ) );
    }

    const auto mu_sol = scale_to_integer( max_strict_set( first ) );
    const auto rz_sol = scale_to_integer( max_strict_set( second ) );

    LayerSolution out;
    out.mu = to_integers( mu_sol.assignment, 0, u );
    out.r = to_integers( rz_sol.assignment, 0, rows );
    out.z = to_integers( rz_sol.assignment, rows, states );
    out.mu_strict = mu_sol.strict_set.size();
    out.rz_strict = rz_sol.strict_set.size();

    out.d_ext_mu.assign( rows, 0 );
    for ( std::size_t i = 0; i < rows; ++i )
        for ( std::size_t j = 0; j < u; ++j )
            out.d_ext_mu[i] += sys.d_ext.entries[i][j] * out.mu[j];
    const IntVector change = rank_change( sys, out.r, out.z );
    for ( std::size_t j = 0; j < u; ++j )
        if ( sgn( change[j] ) < 0 )
            out.decreasing.push_back( sys.transitions[j] );

    // dichotomy: exactly one side holds for every row and every transition
    for ( std::size_t i = 0; i < rows; ++i )
    {
        const bool ranked = sgn( out.r[i] ) > 0;
        const bool grows = out.d_ext_mu[i] >= 1;
        if ( ranked == grows )
            throw InvariantError( "dichotomy violated at row " + sys.d_ext.row_labels[i] + " in layer "
                                  + std::to_string( sys.layer ) + "\n" + dump_problem( first ) + dump_problem( second ) );
    }
    for ( std::size_t j = 0; j < u; ++j )
    {
        const bool ranked = sgn( change[j] ) < 0;
        const bool used = out.mu[j] >= 1;
        if ( ranked == used )
            throw InvariantError( "dichotomy violated at transition " + std::to_string( sys.transitions[j] )
                                  + " in layer " + std::to_string( sys.layer ) + "\n" + dump_problem( first )
                                  + dump_problem( second ) );
    }
    return out;
}

QuasiRankingCheck check_quasi_ranking( const Vass& vass, const ExtendedSystem& sys, const IntVector& r,
                                       const IntVector& z )
{
    QuasiRankingCheck out;
    if ( r.size() != sys.rows.size() || z.size() != vass.state_count() )
        return out;
    for ( const auto& v : r )
        if ( sgn( v ) < 0 )
            return out;
    for ( const auto& v : z )
        if ( sgn( v ) < 0 )
            return out;
    const IntVector change = rank_change( sys, r, z );
    for ( std::size_t j = 0; j < change.size(); ++j )
    {
        if ( sgn( change[j] ) > 0 )
            return out;
        if ( sgn( change[j] ) < 0 )
            out.strict.push_back( sys.transitions[j] );
    }
    out.ok = true;
    return out;
}

std::optional<std::size_t> next_relevant_layer( const std::vector<Exponent>& vexp, const std::vector<Exponent>& texp,
                                                std::size_t layer )
{
    std::optional<std::size_t> best;
    for ( const auto& v : vexp )
        for ( const auto& t : texp )
        {
            if ( !v.finite() || !t.finite() )
                continue;
            const auto sum = static_cast<std::size_t>( v.value() + t.value() );
            if ( sum > layer && ( !best || sum < *best ) )
                best = sum;
        }
    return best;
}

bool exponential_check( const std::vector<Exponent>& vexp, const std::vector<Exponent>& texp, std::size_t layer )
{
    return !next_relevant_layer( vexp, texp, layer ).has_value();
}

namespace
{

bool all_finite( const std::vector<Exponent>& v )
{
    return std::all_of( v.begin(), v.end(), []( const Exponent& e ) { return e.finite(); } );
}

void check_exponent_cap( const Vass& vass, const BoundsReport& report )
{
    const std::size_t n = vass.dimension();
    const std::uint64_t cap = n >= 63 ? UINT64_MAX : ( std::uint64_t{ 1 } << n );
    auto check = [&]( const Exponent& e ) {
        if ( !e.finite() || e.value() < 1 || e.value() > cap )
            throw InvariantError( "exponent " + e.to_string() + " outside [1, 2^" + std::to_string( n ) + "]" );
    };
    for ( const auto& e : report.vexp )
        check( e );
    for ( const auto& e : report.texp )
        check( e );
}

} // namespace

Analysis analyze( const Vass& vass, AnalyzeOptions options )
{
    if ( auto pair = find_unreachable_pair( vass ) )
        throw NotConnectedError( vass.state_name( pair->first ), vass.state_name( pair->second ) );

    Analysis a;
    BoundsReport& rep = a.report;
    rep.vexp.assign( vass.dimension(), Exponent::infinite() );
    rep.texp.assign( vass.transition_count(), Exponent::infinite() );

    SubVass whole;
    for ( StateId s = 0; s < vass.state_count(); ++s )
        whole.states.push_back( s );
    for ( const auto& t : vass.transitions() )
        whole.transitions.push_back( t.id );
    a.tree = LayerTree( whole );

    if ( vass.transition_count() == 0 )
    {
        // no trace has a step, every variable keeps its initial value
        rep.status = Status::Polynomial;
        rep.vexp.assign( vass.dimension(), Exponent( 1 ) );
        rep.complexity_exponent = 0;
        return a;
    }

    // guards against a non-terminating loop; exponents never exceed 2^n
    const std::size_t n = vass.dimension();
    const std::size_t layer_limit = ( n >= 40 ? ( std::size_t{ 1 } << 40 ) : ( std::size_t{ 1 } << n ) ) + 1;

    std::size_t layer = 1;
    for ( ;; )
    {
        if ( layer > layer_limit )
            throw InvariantError( "analysis exceeded the maximal number of layers" );
        ++a.iterations;

        const ExtendedSystem sys = build_extended_system( vass, a.tree, layer, rep.vexp );
        const LayerSolution sol = solve_layer( vass, sys );
        if ( options.on_layer )
            options.on_layer( sys, sol );
        const auto ranking = check_quasi_ranking( vass, sys, sol.r, sol.z );
        if ( !ranking.ok || ranking.strict != sol.decreasing )
            throw InvariantError( "quasi-ranking check failed in layer " + std::to_string( layer ) );

        MuRecord record;
        record.layer = layer;
        record.mu.assign( vass.transition_count(), 0 );
        for ( std::size_t j = 0; j < sys.transitions.size(); ++j )
            record.mu[sys.transitions[j]] = sol.mu[j];
        a.mu_archive.push_back( std::move( record ) );

        LayerAudit audit;
        audit.layer = layer;
        audit.decreasing = sol.decreasing;
        audit.var_ext_size = sys.rows.size();
        audit.mu_strict = sol.mu_strict;
        audit.rz_strict = sol.rz_strict;

        for ( const auto t : sol.decreasing )
        {
            if ( rep.texp[t].finite() )
                throw InvariantError( "transition exponent assigned twice" );
            rep.texp[t] = Exponent( layer );
        }

        // next layer
        for ( const auto id : a.tree.layer( layer - 1 ) )
        {
            const SubVass label = a.tree.node( id ).label;
            std::vector<TransitionId> kept;
            for ( const auto t : label.transitions )
                if ( !std::binary_search( sol.decreasing.begin(), sol.decreasing.end(), t ) )
                    kept.push_back( t );
            auto parts = scc_decompose( vass, label.states, kept );
            if ( parts.size() == 1 && parts.front() == label )
                a.tree.extend( id, layer );
            else
                for ( auto& p : parts )
                    a.tree.add_child( id, std::move( p ), layer );
        }

        for ( std::size_t i = 0; i < sys.rows.size(); ++i )
        {
            const auto& row = sys.rows[i];
            if ( row.node != a.tree.root() || rep.vexp[row.var].finite() || sgn( sol.r[i] ) <= 0 )
                continue;
            rep.vexp[row.var] = Exponent( layer );
            audit.new_vars.push_back( row.var );
        }

        if ( !audit.decreasing.empty() || !audit.new_vars.empty() )
            rep.layers.push_back( std::move( audit ) );

        const auto next = next_relevant_layer( rep.vexp, rep.texp, layer );
        if ( !next )
        {
            rep.status = Status::Exponential;
            a.exponential_layer = layer;
            return a;
        }
        if ( all_finite( rep.vexp ) && all_finite( rep.texp ) )
            break;

        const std::size_t following = options.skip_optimization ? *next : layer + 1;
        for ( const auto id : a.tree.layer( layer ) )
            a.tree.extend( id, following - 1 );
        layer = following;
    }

    rep.status = Status::Polynomial;
    std::uint64_t top = 0;
    for ( const auto& e : rep.texp )
        top = std::max( top, e.value() );
    rep.complexity_exponent = top;
    check_exponent_cap( vass, rep );
    return a;
}

} // namespace vassbound
