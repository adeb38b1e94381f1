#include "vassbound/witness.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace vassbound
{

namespace
{

// instance loops below are explicit, keep them bounded
constexpr std::uint64_t max_steps = 200'000'000;

Integer power( std::uint64_t base, std::uint64_t exp )
{
    Integer r;
    mpz_ui_pow_ui( r.get_mpz_t(), base, exp );
    return r;
}

void append( std::vector<TransitionId>& out, const std::vector<TransitionId>& part, std::uint64_t times = 1 )
{
    for ( std::uint64_t i = 0; i < times; ++i )
        out.insert( out.end(), part.begin(), part.end() );
}

} // namespace

IntVector MultiCycle::value( const Vass& vass ) const
{
    IntVector v( vass.dimension(), 0 );
    for ( const auto& c : cycles )
    {
        auto cv = path_value( vass, c.view() );
        for ( std::size_t x = 0; x < v.size(); ++x )
            v[x] += cv[x];
    }
    return v;
}

std::vector<std::uint64_t> MultiCycle::instances( const Vass& vass ) const
{
    std::vector<std::uint64_t> counts( vass.transition_count(), 0 );
    for ( const auto& c : cycles )
        for ( auto t : c.steps() )
            ++counts[t];
    return counts;
}

MultiCycle multicycle_from_solution( const Vass& vass, std::span<const TransitionId> transitions, const IntVector& mu )
{
    if ( mu.size() != transitions.size() )
        throw InvariantError( "multi-cycle: solution size does not match the transition set" );

    std::vector<std::uint64_t> remaining( vass.transition_count(), 0 );
    std::vector<Integer> balance( vass.state_count(), 0 );
    Integer total = 0;
    for ( std::size_t j = 0; j < transitions.size(); ++j )
    {
        if ( sgn( mu[j] ) < 0 )
            throw InvariantError( "multi-cycle: negative instance count" );
        total += mu[j];
        if ( total > max_steps )
            throw Error( "multi-cycle: too many instances" );
        const auto& t = vass.transition( transitions[j] );
        remaining[t.id] += mu[j].get_ui();
        balance[t.source] -= mu[j];
        balance[t.target] += mu[j];
    }
    for ( StateId s = 0; s < vass.state_count(); ++s )
        if ( sgn( balance[s] ) != 0 )
            throw InvariantError( "multi-cycle: flow constraint violated at state " + vass.state_name( s ) );

    std::vector<std::vector<TransitionId>> out_edges( vass.state_count() );
    for ( auto id : transitions )
        if ( remaining[id] > 0 )
            out_edges[vass.transition( id ).source].push_back( id );
    for ( auto& e : out_edges )
        std::sort( e.begin(), e.end() );
    std::vector<std::size_t> cursor( vass.state_count(), 0 );

    auto next_edge = [&]( StateId s ) -> std::optional<TransitionId> {
        auto& c = cursor[s];
        while ( c < out_edges[s].size() && remaining[out_edges[s][c]] == 0 )
            ++c;
        if ( c == out_edges[s].size() )
            return std::nullopt;
        return out_edges[s][c];
    };

    MultiCycle mc;
    for ( StateId start = 0; start < vass.state_count(); ++start )
    {
        if ( !next_edge( start ) )
            continue;
        // iterative Hierholzer
        std::vector<std::pair<StateId, std::optional<TransitionId>>> stack{ { start, std::nullopt } };
        std::vector<TransitionId> circuit;
        while ( !stack.empty() )
        {
            const StateId v = stack.back().first;
            if ( auto e = next_edge( v ) )
            {
                --remaining[*e];
                stack.emplace_back( vass.transition( *e ).target, *e );
                continue;
            }
            if ( stack.back().second )
                circuit.push_back( *stack.back().second );
            stack.pop_back();
        }
        std::reverse( circuit.begin(), circuit.end() );
        mc.cycles.emplace_back( vass, std::move( circuit ) );
    }
    return mc;
}

namespace
{

// Shortest path by BFS; ties go to lower transition ids.
std::vector<TransitionId> shortest_path( const Vass& vass, StateId from, StateId to )
{
    if ( from == to )
        return {};
    std::vector<std::optional<TransitionId>> via( vass.state_count() );
    std::vector<bool> seen( vass.state_count(), false );
    std::deque<StateId> queue{ from };
    seen[from] = true;
    while ( !queue.empty() )
    {
        StateId s = queue.front();
        queue.pop_front();
        for ( auto id : vass.outgoing()[s] )
        {
            StateId d = vass.transition( id ).target;
            if ( seen[d] )
                continue;
            seen[d] = true;
            via[d] = id;
            if ( d == to )
            {
                std::vector<TransitionId> path;
                for ( StateId cur = to; cur != from; cur = vass.transition( *via[cur] ).source )
                    path.push_back( *via[cur] );
                std::reverse( path.begin(), path.end() );
                return path;
            }
            queue.push_back( d );
        }
    }
    throw NotConnectedError( vass.state_name( from ), vass.state_name( to ) );
}

} // namespace

Path covering_cycle( const Vass& vass )
{
    if ( vass.transition_count() == 0 )
        return Path();
    std::vector<bool> used( vass.transition_count(), false );
    std::vector<TransitionId> steps;
    const StateId start = 0;
    StateId at = start;
    auto take = [&]( TransitionId id ) {
        steps.push_back( id );
        used[id] = true;
        at = vass.transition( id ).target;
    };
    for ( const auto& t : vass.transitions() )
    {
        if ( used[t.id] )
            continue;
        for ( auto id : shortest_path( vass, at, t.source ) )
            take( id );
        take( t.id );
    }
    for ( auto id : shortest_path( vass, at, start ) )
        take( id );
    return Path( vass, std::move( steps ) );
}

namespace
{

// cycle(eta) for a node occupying `layer`
Path node_cycle( const Vass& vass, const Analysis& analysis, std::size_t node, std::size_t layer )
{
    if ( layer == 0 )
        return covering_cycle( vass );
    const auto& label = analysis.tree.node( node ).label;
    const auto& mu = analysis.mu_for_layer( layer ).mu;
    IntVector restricted;
    for ( auto t : label.transitions )
    {
        if ( mu[t] < 1 )
            throw InvariantError( "node " + std::to_string( node ) + " has an unused transition in layer "
                                  + std::to_string( layer ) );
        restricted.push_back( mu[t] );
    }
    auto mc = multicycle_from_solution( vass, label.transitions, restricted );
    if ( mc.cycles.size() != 1 )
        throw InvariantError( "node " + std::to_string( node ) + " does not yield a single cycle" );
    return std::move( mc.cycles.front() );
}

// Everything derived from the tree that the witness construction reuses.
class Construction
{
public:
    Construction( const Vass& vass, const Analysis& analysis, std::uint64_t n )
        : _vass( vass ), _analysis( analysis ), _n( n )
    {
    }

    [[nodiscard]] std::size_t depth() const { return _analysis.tree.depth(); }

    const Path& cycle( std::size_t node, std::size_t layer )
    {
        auto key = std::make_pair( node, layer );
        auto it = _cycles.find( key );
        if ( it == _cycles.end() )
            it = _cycles.emplace( key, node_cycle( _vass, _analysis, node, layer ) ).first;
        return it->second;
    }

    const PrePathSummary& cycle_summary( std::size_t node, std::size_t layer )
    {
        auto key = std::make_pair( node, layer );
        auto it = _cycle_summaries.find( key );
        if ( it == _cycle_summaries.end() )
            it = _cycle_summaries.emplace( key, PrePathSummary::of( _vass, cycle( node, layer ).view() ) ).first;
        return it->second;
    }

    // nodes occupying layer + 1 below `node`, ordered by first appearance of
    // their cycle's start state in cycle(node), with the split positions
    struct Decomposition
    {
        std::vector<std::size_t> children;
        std::vector<std::size_t> cuts; // cycle(node) split before these step indices
    };

    const Decomposition& decomposition( std::size_t node, std::size_t layer )
    {
        auto key = std::make_pair( node, layer );
        auto it = _decompositions.find( key );
        if ( it != _decompositions.end() )
            return it->second;

        const auto& tn = _analysis.tree.node( node );
        std::vector<std::size_t> below;
        if ( tn.last_layer > layer )
            below.push_back( node );
        else
            for ( auto c : tn.children )
                below.push_back( c );

        const auto& steps = cycle( node, layer ).steps();
        std::vector<std::pair<std::size_t, std::size_t>> placed; // (position, child)
        for ( auto c : below )
        {
            const auto& cc = cycle( c, layer + 1 );
            if ( cc.empty() )
                continue;
            const StateId s = cc.first_state( _vass );
            std::size_t pos = 0;
            while ( pos < steps.size() && _vass.transition( steps[pos] ).source != s )
                ++pos;
            if ( pos == steps.size() )
                throw InvariantError( "child cycle start not on parent cycle" );
            placed.emplace_back( pos, c );
        }
        std::sort( placed.begin(), placed.end() );
        Decomposition d;
        for ( auto& [pos, c] : placed )
        {
            d.cuts.push_back( pos );
            d.children.push_back( c );
        }
        return _decompositions.emplace( key, std::move( d ) ).first->second;
    }

    // sigma_l(node) for a node occupying `layer` <= l
    PrePathSummary sigma( std::size_t target, std::size_t node, std::size_t layer )
    {
        if ( layer == target )
            return cycle_summary( node, layer );
        PrePathSummary s = PrePathSummary::empty( _vass );
        for ( auto c : decomposition( node, layer ).children )
            s = s.then( sigma( target, c, layer + 1 ).repeat( _n ) );
        return s;
    }

    PrePathSummary tau( std::size_t layer )
    {
        if ( layer == 0 )
            return cycle_summary( _analysis.tree.root(), 0 ).repeat( _n );
        return sigma( layer, _analysis.tree.root(), 0 ).repeat( _n );
    }

    // alpha_l(node) as summary, used to bound the witness length before
    // materialising it
    PrePathSummary alpha_summary( std::size_t target, std::size_t node, std::size_t layer )
    {
        if ( layer == target )
            return cycle_summary( node, layer );
        const auto& d = decomposition( node, layer );
        const auto& steps = cycle( node, layer ).steps();
        PrePathSummary s = PrePathSummary::empty( _vass );
        std::size_t from = 0;
        for ( std::size_t j = 0; j < d.children.size(); ++j )
        {
            s = s.then( PrePathSummary::of(
                _vass, std::span<const TransitionId>( steps.data() + from, d.cuts[j] - from ) ) );
            s = s.then( alpha_summary( target, d.children[j], layer + 1 ).repeat( _n ) );
            from = d.cuts[j];
        }
        return s.then(
            PrePathSummary::of( _vass, std::span<const TransitionId>( steps.data() + from, steps.size() - from ) ) );
    }

    std::vector<TransitionId> alpha( std::size_t target, std::size_t node, std::size_t layer )
    {
        if ( layer == target )
            return cycle( node, layer ).steps();
        const auto& d = decomposition( node, layer );
        const auto steps = cycle( node, layer ).steps();
        std::vector<TransitionId> out;
        std::size_t from = 0;
        for ( std::size_t j = 0; j < d.children.size(); ++j )
        {
            out.insert( out.end(), steps.begin() + static_cast<std::ptrdiff_t>( from ),
                        steps.begin() + static_cast<std::ptrdiff_t>( d.cuts[j] ) );
            append( out, alpha( target, d.children[j], layer + 1 ), _n );
            from = d.cuts[j];
        }
        out.insert( out.end(), steps.begin() + static_cast<std::ptrdiff_t>( from ), steps.end() );
        return out;
    }

private:
    const Vass& _vass;
    const Analysis& _analysis;
    std::uint64_t _n;
    std::map<std::pair<std::size_t, std::size_t>, Path> _cycles;
    std::map<std::pair<std::size_t, std::size_t>, PrePathSummary> _cycle_summaries;
    std::map<std::pair<std::size_t, std::size_t>, Decomposition> _decompositions;
};

} // namespace

std::vector<NodeCycle> node_cycles( const Vass& vass, const Analysis& analysis, std::size_t layer )
{
    std::vector<NodeCycle> out;
    for ( auto id : analysis.tree.layer( layer ) )
        out.push_back( { id, layer, node_cycle( vass, analysis, id, layer ) } );
    return out;
}

// ---------------------------------------------------------------------------

PrePathSummary PrePathSummary::empty( const Vass& vass )
{
    PrePathSummary s;
    s.value.assign( vass.dimension(), 0 );
    s.min_prefix.assign( vass.dimension(), 0 );
    s.instances.assign( vass.transition_count(), 0 );
    return s;
}

PrePathSummary PrePathSummary::of( const Vass& vass, std::span<const TransitionId> steps )
{
    PrePathSummary s = empty( vass );
    for ( auto id : steps )
    {
        const auto& u = vass.transition( id ).update;
        for ( std::size_t x = 0; x < u.size(); ++x )
        {
            s.value[x] += u[x];
            if ( s.value[x] < s.min_prefix[x] )
                s.min_prefix[x] = s.value[x];
        }
        s.instances[id] += 1;
    }
    s.length = static_cast<unsigned long>( steps.size() );
    return s;
}

PrePathSummary PrePathSummary::then( const PrePathSummary& next ) const
{
    PrePathSummary s = *this;
    for ( std::size_t x = 0; x < value.size(); ++x )
    {
        Integer reach = value[x] + next.min_prefix[x];
        if ( reach < s.min_prefix[x] )
            s.min_prefix[x] = reach;
        s.value[x] += next.value[x];
    }
    for ( std::size_t t = 0; t < instances.size(); ++t )
        s.instances[t] += next.instances[t];
    s.length += next.length;
    return s;
}

PrePathSummary PrePathSummary::repeat( const Integer& times ) const
{
    PrePathSummary s = *this;
    if ( sgn( times ) == 0 )
    {
        for ( auto& v : s.value )
            v = 0;
        for ( auto& v : s.min_prefix )
            v = 0;
        for ( auto& v : s.instances )
            v = 0;
        s.length = 0;
        return s;
    }
    const Integer extra = times - 1;
    for ( std::size_t x = 0; x < value.size(); ++x )
    {
        // the lowest point is reached in the first copy if the value is
        // non-negative, otherwise in the last one
        Integer drift = extra * value[x];
        if ( sgn( drift ) < 0 )
            s.min_prefix[x] += drift;
        s.value[x] *= times;
    }
    for ( auto& v : s.instances )
        v *= times;
    s.length *= times;
    return s;
}

IntVector PrePathSummary::min_initial() const
{
    IntVector out;
    for ( const auto& m : min_prefix )
        out.push_back( -m );
    return out;
}

std::vector<PrePathSummary> layer_pre_paths( const Vass& vass, const Analysis& analysis, std::uint64_t n )
{
    if ( analysis.report.status != Status::Polynomial )
        throw Error( "layer pre-paths need a polynomial analysis" );
    std::vector<PrePathSummary> out;
    if ( vass.transition_count() == 0 )
        return out;
    Construction c( vass, analysis, n );
    for ( std::size_t l = 0; l <= c.depth(); ++l )
        out.push_back( c.tau( l ) );
    return out;
}

Integer choose_k( const std::vector<Exponent>& vexp, std::span<const PrePathSummary> tau, std::uint64_t n )
{
    Integer k = 1;
    for ( std::size_t l = 1; l < tau.size(); ++l )
    {
        const IntVector need = tau[l].min_initial();
        for ( std::size_t x = 0; x < need.size(); ++x )
        {
            const std::uint64_t e = std::min<std::uint64_t>( vexp.at( x ).finite() ? vexp[x].value() : l, l );
            const Integer scale = power( n, e );
            Integer q;
            mpz_cdiv_q( q.get_mpz_t(), need[x].get_mpz_t(), scale.get_mpz_t() );
            if ( q > k )
                k = q;
        }
    }
    return k;
}

WitnessPath build_witness( const Vass& vass, const Analysis& analysis, std::uint64_t n )
{
    if ( analysis.report.status != Status::Polynomial )
        throw Error( "witness requested for a VASS without polynomial bounds" );
    if ( n < 1 )
        throw Error( "witness needs N >= 1" );
    const auto& vexp = analysis.report.vexp;

    WitnessPath w;
    w.n = n;
    std::vector<TransitionId> steps;
    IntVector envelope( vass.dimension(), 0 );

    if ( vass.transition_count() > 0 )
    {
        Construction c( vass, analysis, n );
        const std::size_t depth = c.depth();
        std::vector<PrePathSummary> tau;
        for ( std::size_t l = 0; l <= depth; ++l )
            tau.push_back( c.tau( l ) );
        w.k = choose_k( vexp, tau, n );

        // each rho_l = tau_0^k ... tau_l^k runs from its least valuation; the
        // witness is a shuffle of all of them, so it runs from the sum
        PrePathSummary rho = PrePathSummary::empty( vass );
        for ( std::size_t l = 0; l <= depth; ++l )
        {
            rho = rho.then( tau[l].repeat( w.k ) );
            const auto need = rho.min_initial();
            for ( std::size_t x = 0; x < envelope.size(); ++x )
                envelope[x] += need[x];
        }

        std::vector<PrePathSummary> beta;
        Integer length = 0;
        for ( std::size_t l = 0; l <= depth; ++l )
        {
            beta.push_back( c.alpha_summary( l, analysis.tree.root(), 0 ).repeat( n ) );
            length += beta.back().length * w.k;
        }
        if ( length > max_steps )
            throw Error( "witness for N=" + std::to_string( n ) + " would have " + length.get_str() + " steps" );

        const std::uint64_t k = w.k.get_ui();
        for ( std::size_t l = 0; l <= depth; ++l )
        {
            const auto a = c.alpha( l, analysis.tree.root(), 0 );
            std::vector<TransitionId> b;
            append( b, a, n );
            append( steps, b, k );
        }
    }

    const IntVector value = path_value( vass, steps );
    const Valuation least = min_initial_valuation( vass, steps );
    IntVector init = least.entries();
    for ( std::size_t x = 0; x < init.size(); ++x )
    {
        const Integer threshold = power( n, vexp[x].value() );
        const Integer deficit = threshold - value[x];
        if ( deficit > init[x] )
            init[x] = deficit;
        if ( deficit > envelope[x] )
            envelope[x] = deficit;
    }

    w.path = Path( vass, std::move( steps ) );
    w.initial = Valuation( std::move( init ) );
    w.envelope = std::move( envelope );
    w.instances = instance_counts( vass, w.path.view() );
    auto final_valuation = execute_path( vass, w.initial, w.path.view() );
    if ( !final_valuation )
        throw InvariantError( "constructed witness is not executable from its initial valuation" );
    w.final_valuation = std::move( *final_valuation );
    return w;
}

bool WitnessVerification::passed() const
{
    return std::all_of( checks.begin(), checks.end(), []( const WitnessCheck& c ) { return c.passed; } );
}

WitnessVerification verify_witness( const Vass& vass, const WitnessPath& w, const BoundsReport& bounds,
                                    std::uint64_t n )
{
    WitnessVerification out;
    if ( bounds.status != Status::Polynomial )
    {
        out.checks.push_back( { "status", false, "bounds are not polynomial" } );
        return out;
    }

    const auto reached = execute_path( vass, w.initial, w.path.view() );
    out.checks.push_back( { "executable", reached.has_value(),
                            reached ? "path runs from the initial valuation" : "a counter drops below zero" } );

    {
        WitnessCheck c{ "instances", true, "" };
        const auto counts = instance_counts( vass, w.path.view() );
        for ( const auto& t : vass.transitions() )
        {
            const Integer need = power( n, bounds.texp[t.id].value() );
            if ( Integer( static_cast<unsigned long>( counts[t.id] ) ) < need )
            {
                c.passed = false;
                std::ostringstream msg;
                msg << "t" << t.id << " (" << vass.transition_label( t.id ) << ") used " << counts[t.id]
                    << " times, need " << need << "; ";
                c.detail += msg.str();
            }
        }
        out.checks.push_back( std::move( c ) );
    }

    {
        WitnessCheck c{ "final", reached.has_value(), reached ? "" : "not executable" };
        if ( reached )
            for ( VarId x = 0; x < vass.dimension(); ++x )
            {
                const Integer need = power( n, bounds.vexp[x].value() );
                if ( ( *reached )[x] < need )
                {
                    c.passed = false;
                    std::ostringstream msg;
                    msg << vass.variable_name( x ) << " ends at " << ( *reached )[x] << ", need " << need << "; ";
                    c.detail += msg.str();
                }
            }
        out.checks.push_back( std::move( c ) );
    }

    {
        Integer env = 0;
        for ( const auto& e : w.envelope )
            env = std::max( env, e );
        const Integer norm = w.initial.norm();
        std::ostringstream msg;
        msg << "||init|| = " << norm << ", envelope = " << env;
        out.checks.push_back( { "envelope", norm <= env && w.envelope.size() == vass.dimension(), msg.str() } );
        out.init_ratio = Rational( norm, n );
        out.init_ratio.canonicalize();
    }
    return out;
}

// ---------------------------------------------------------------------------

bool certificate_holds( const Vass& vass, const ExponentialCertificate& cert, std::string* why )
{
    auto fail = [&]( const std::string& msg ) {
        if ( why )
            *why = msg;
        return false;
    };
    std::vector<int> side( vass.dimension(), 0 );
    for ( auto x : cert.u )
    {
        if ( x >= vass.dimension() || side[x] != 0 )
            return fail( "U and W do not partition the variables" );
        side[x] = 1;
    }
    for ( auto x : cert.w )
    {
        if ( x >= vass.dimension() || side[x] != 0 )
            return fail( "U and W do not partition the variables" );
        side[x] = 2;
    }
    if ( std::find( side.begin(), side.end(), 0 ) != side.end() )
        return fail( "U and W do not cover all variables" );

    IntVector sum( vass.dimension(), 0 );
    bool any_step = false;
    for ( std::size_t i = 0; i < cert.cycles.size(); ++i )
    {
        const auto& c = cert.cycles[i];
        if ( !c.is_cycle( vass ) )
            return fail( "entry " + std::to_string( i ) + " is not a cycle" );
        any_step = any_step || !c.empty();
        const auto v = path_value( vass, c.view() );
        for ( auto x : cert.u )
            if ( sgn( v[x] ) < 0 )
                return fail( "cycle " + std::to_string( i ) + " decreases " + vass.variable_name( x ) );
        for ( std::size_t x = 0; x < sum.size(); ++x )
            sum[x] += v[x];
    }
    for ( auto x : cert.w )
        if ( sum[x] < 1 )
            return fail( "cycles do not increase " + vass.variable_name( x ) );
    if ( cert.w.empty() && !any_step )
        return fail( "W is empty and there is no non-empty cycle" );
    return true;
}

ExponentialCertificate exponential_certificate( const Vass& vass, const Analysis& analysis )
{
    if ( analysis.report.status != Status::Exponential || !analysis.exponential_layer )
        throw Error( "certificate requested for a VASS without exponential status" );
    const std::size_t layer = *analysis.exponential_layer;
    ExponentialCertificate cert;
    for ( auto& nc : node_cycles( vass, analysis, layer ) )
        if ( !nc.cycle.empty() )
            cert.cycles.push_back( std::move( nc.cycle ) );
    for ( VarId x = 0; x < vass.dimension(); ++x )
    {
        const auto& e = analysis.report.vexp[x];
        if ( e.finite() && e.value() <= layer )
            cert.u.push_back( x );
        else
            cert.w.push_back( x );
    }
    std::string why;
    if ( !certificate_holds( vass, cert, &why ) )
        throw InvariantError( "exponential certificate check failed: " + why );
    return cert;
}

} // namespace vassbound
