#include "vassbound/oracle.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace vassbound
{

OracleBudgetExceeded::OracleBudgetExceeded( std::uint64_t budget )
    : Error( "oracle explored more than " + std::to_string( budget ) + " configurations" )
{
}

std::string OracleValue::to_string() const
{
    return nonterminating ? "NONTERMINATING" : std::to_string( value );
}

Metric Metric::parse( const Vass& vass, const std::string& text )
{
    Metric m;
    if ( text == "longest" )
        return m;
    if ( text.rfind( "var:", 0 ) == 0 )
    {
        auto x = vass.find_variable( text.substr( 4 ) );
        if ( !x )
            throw Error( "unknown variable in metric '" + text + "'" );
        m.kind = Kind::Variable;
        m.index = *x;
        return m;
    }
    if ( text.rfind( "trans:", 0 ) == 0 )
    {
        const std::string id = text.substr( 6 );
        if ( id.empty() || !std::all_of( id.begin(), id.end(), []( char c ) { return c >= '0' && c <= '9'; } ) )
            throw Error( "transition metric needs a numeric id: '" + text + "'" );
        const auto value = std::stoull( id );
        if ( value >= vass.transition_count() )
            throw Error( "unknown transition in metric '" + text + "'" );
        m.kind = Kind::Transition;
        m.index = static_cast<std::uint32_t>( value );
        return m;
    }
    throw Error( "unknown metric '" + text + "' (expected longest, var:<name> or trans:<id>)" );
}

std::string Metric::name( const Vass& vass ) const
{
    switch ( kind )
    {
    case Kind::Longest:
        return "longest";
    case Kind::Variable:
        return "var:" + vass.variable_name( index );
    case Kind::Transition:
        return "trans:" + std::to_string( index );
    }
    return "";
}

namespace
{

using Config = std::vector<std::int64_t>; // state, then counters

struct ConfigHash
{
    std::size_t operator()( const Config& c ) const
    {
        std::size_t h = 1469598103934665603ull;
        for ( auto v : c )
        {
            h ^= static_cast<std::size_t>( v ) + 0x9e3779b97f4a7c15ull + ( h << 6 ) + ( h >> 2 );
        }
        return h;
    }
};

class Space
{
public:
    Space( const Vass& vass, OracleOptions options ) : _vass( vass ), _options( options )
    {
        for ( const auto& t : vass.transitions() )
        {
            std::vector<std::int64_t> u;
            for ( const auto& e : t.update )
            {
                if ( !e.fits_slong_p() )
                    throw Error( "oracle: update entry out of range" );
                u.push_back( e.get_si() );
            }
            _updates.push_back( std::move( u ) );
        }
    }

    // id of a configuration, creating it if needed
    std::uint32_t intern( const Config& c )
    {
        auto [it, inserted] = _ids.try_emplace( c, static_cast<std::uint32_t>( _configs.size() ) );
        if ( inserted )
        {
            if ( _configs.size() >= _options.budget )
                throw OracleBudgetExceeded( _options.budget );
            _configs.push_back( c );
        }
        return it->second;
    }

    [[nodiscard]] const Config& config( std::uint32_t id ) const { return _configs[id]; }
    [[nodiscard]] std::size_t size() const { return _configs.size(); }

    // successor of `c` by transition `t`, if enabled
    std::optional<Config> step( const Config& c, TransitionId t ) const
    {
        const auto& tr = _vass.transition( t );
        Config next = c;
        next[0] = tr.target;
        const auto& u = _updates[t];
        for ( std::size_t x = 0; x < u.size(); ++x )
        {
            if ( __builtin_add_overflow( next[x + 1], u[x], &next[x + 1] ) )
                throw Error( "oracle: counter overflow" );
            if ( next[x + 1] < 0 )
                return std::nullopt;
        }
        return next;
    }

    template <typename F>
    void for_each_root( std::uint64_t n, F&& visit )
    {
        const std::size_t dim = _vass.dimension();
        for ( StateId s = 0; s < _vass.state_count(); ++s )
        {
            Config c( dim + 1, 0 );
            c[0] = s;
            for ( ;; )
            {
                visit( c );
                std::size_t x = 0;
                while ( x < dim && c[x + 1] == static_cast<std::int64_t>( n ) )
                    c[++x] = 0;
                if ( x == dim )
                    break;
                ++c[x + 1];
            }
        }
    }

    const Vass& vass() const { return _vass; }

private:
    const Vass& _vass;
    OracleOptions _options;
    std::vector<std::vector<std::int64_t>> _updates;
    std::unordered_map<Config, std::uint32_t, ConfigHash> _ids;
    std::vector<Config> _configs;
};

// Longest weighted path over the configuration graph; weight(t) is added
// for every step through t. `roots(space, visit)` calls visit once per
// initial configuration.
template <typename Roots, typename Weight>
OracleValue longest_weighted( const Vass& vass, OracleOptions options, Roots roots, Weight weight )
{
    enum Color : std::uint8_t
    {
        White,
        Gray,
        Black,
    };
    Space space( vass, options );
    std::vector<Color> color;
    std::vector<std::int64_t> best;
    auto ensure = [&]( std::uint32_t id ) {
        if ( id >= color.size() )
        {
            color.resize( id + 1, White );
            best.resize( id + 1, 0 );
        }
    };

    struct Frame
    {
        std::uint32_t id;
        std::size_t next;
        std::int64_t pending_weight;
    };
    std::int64_t answer = 0;
    bool cyclic = false;

    roots( space, [&]( const Config& root ) {
        if ( cyclic )
            return;
        const auto rid = space.intern( root );
        ensure( rid );
        if ( color[rid] == White )
        {
            std::vector<Frame> stack{ { rid, 0, 0 } };
            color[rid] = Gray;
            while ( !stack.empty() && !cyclic )
            {
                auto& f = stack.back();
                const Config here = space.config( f.id );
                const auto& out = vass.outgoing()[static_cast<StateId>( here[0] )];
                if ( f.next < out.size() )
                {
                    const TransitionId t = out[f.next++];
                    auto succ = space.step( here, t );
                    if ( !succ )
                        continue;
                    const auto sid = space.intern( *succ );
                    ensure( sid );
                    const std::int64_t w = weight( t );
                    if ( color[sid] == Gray )
                    {
                        cyclic = true;
                        break;
                    }
                    if ( color[sid] == Black )
                    {
                        best[f.id] = std::max( best[f.id], w + best[sid] );
                        continue;
                    }
                    f.pending_weight = w;
                    color[sid] = Gray;
                    stack.push_back( { sid, 0, 0 } );
                    continue;
                }
                color[f.id] = Black;
                const auto done = f.id;
                stack.pop_back();
                if ( !stack.empty() )
                {
                    auto& parent = stack.back();
                    best[parent.id] = std::max( best[parent.id], parent.pending_weight + best[done] );
                }
            }
        }
        if ( !cyclic )
            answer = std::max( answer, best[rid] );
    } );
    if ( cyclic )
        return { true, 0 };
    return { false, answer };
}

auto box_roots( std::uint64_t n )
{
    return [n]( Space& space, auto&& visit ) { space.for_each_root( n, visit ); };
}

std::int64_t unit_weight( TransitionId )
{
    return 1;
}

} // namespace

OracleValue longest_trace( const Vass& vass, std::uint64_t n, OracleOptions options )
{
    return longest_weighted( vass, options, box_roots( n ), unit_weight );
}

OracleValue longest_trace_from( const Vass& vass, StateId state, const Valuation& start, OracleOptions options )
{
    if ( state >= vass.state_count() || start.size() != vass.dimension() )
        throw Error( "oracle: start configuration does not fit the VASS" );
    Config root{ static_cast<std::int64_t>( state ) };
    for ( const auto& v : start.entries() )
    {
        if ( !v.fits_slong_p() )
            throw Error( "oracle: start value out of range" );
        root.push_back( v.get_si() );
    }
    return longest_weighted(
        vass, options, [&root]( Space&, auto&& visit ) { visit( root ); }, unit_weight );
}

OracleValue max_instances( const Vass& vass, std::uint64_t n, TransitionId t, OracleOptions options )
{
    if ( t >= vass.transition_count() )
        throw Error( "unknown transition id " + std::to_string( t ) );
    return longest_weighted( vass, options, box_roots( n ), [t]( TransitionId u ) { return std::int64_t{ u == t ? 1 : 0 }; } );
}

OracleValue max_reachable( const Vass& vass, std::uint64_t n, VarId x, OracleOptions options )
{
    if ( x >= vass.dimension() )
        throw Error( "unknown variable index " + std::to_string( x ) );
    Space space( vass, options );
    std::vector<bool> seen;
    std::int64_t answer = 0;
    std::deque<std::uint32_t> queue;
    auto visit = [&]( const Config& c ) {
        const auto id = space.intern( c );
        if ( id < seen.size() && seen[id] )
            return;
        if ( id >= seen.size() )
            seen.resize( id + 1, false );
        seen[id] = true;
        answer = std::max( answer, c[x + 1] );
        queue.push_back( id );
    };
    space.for_each_root( n, [&]( const Config& root ) {
        visit( root );
        while ( !queue.empty() )
        {
            const Config here = space.config( queue.front() );
            queue.pop_front();
            for ( auto t : vass.outgoing()[static_cast<StateId>( here[0] )] )
                if ( auto succ = space.step( here, t ) )
                    visit( *succ );
        }
    } );
    return { false, answer };
}

OracleValue evaluate( const Vass& vass, std::uint64_t n, const Metric& metric, OracleOptions options )
{
    switch ( metric.kind )
    {
    case Metric::Kind::Longest:
        return longest_trace( vass, n, options );
    case Metric::Kind::Variable:
        return max_reachable( vass, n, metric.index, options );
    case Metric::Kind::Transition:
        return max_instances( vass, n, metric.index, options );
    }
    return {};
}

std::string sweep_csv( const Vass& vass, std::uint64_t from, std::uint64_t to, const Metric& metric,
                       OracleOptions options )
{
    std::ostringstream out;
    out << "N,metric,value\n";
    for ( std::uint64_t n = from; n <= to; ++n )
        out << n << ',' << metric.name( vass ) << ',' << evaluate( vass, n, metric, options ).to_string() << '\n';
    return out.str();
}

} // namespace vassbound
