#include "vassbound/vass.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace vassbound
{

ParseError::ParseError( std::size_t line, std::size_t column, const std::string& message )
    : Error( "line " + std::to_string( line ) + ", column " + std::to_string( column ) + ": " + message ),
      _line( line ), _column( column )
{
}

Vass::Vass( std::vector<std::string> variables, std::vector<NamedTransition> transitions,
            std::vector<std::string> extra_states )
    : _variables( std::move( variables ) )
{
    std::set<std::string> seen_vars;
    for ( const auto& v : _variables )
        if ( !seen_vars.insert( v ).second )
            throw InvariantError( "duplicate variable '" + v + "'" );

    std::set<std::string> names( extra_states.begin(), extra_states.end() );
    for ( const auto& t : transitions )
    {
        names.insert( t.source );
        names.insert( t.target );
    }
    _states.assign( names.begin(), names.end() );

    std::set<std::tuple<std::string, std::string, IntVector>> triples;
    _outgoing.resize( _states.size() );
    for ( auto& t : transitions )
    {
        if ( t.update.size() != _variables.size() )
            throw InvariantError( "transition " + t.source + " -> " + t.target + " has "
                                  + std::to_string( t.update.size() ) + " update entries, expected "
                                  + std::to_string( _variables.size() ) );
        if ( !triples.emplace( t.source, t.target, t.update ).second )
            throw InvariantError( "duplicate transition " + t.source + " -> " + t.target );
        const auto id = static_cast<TransitionId>( _transitions.size() );
        const StateId src = *find_state( t.source );
        const StateId dst = *find_state( t.target );
        _transitions.push_back( Transition{ id, src, std::move( t.update ), dst } );
        _outgoing[src].push_back( id );
    }
}

std::optional<StateId> Vass::find_state( std::string_view name ) const
{
    auto it = std::lower_bound( _states.begin(), _states.end(), name );
    if ( it == _states.end() || *it != name )
        return std::nullopt;
    return static_cast<StateId>( it - _states.begin() );
}

std::optional<VarId> Vass::find_variable( std::string_view name ) const
{
    auto it = std::find( _variables.begin(), _variables.end(), name );
    if ( it == _variables.end() )
        return std::nullopt;
    return static_cast<VarId>( it - _variables.begin() );
}

std::string Vass::transition_label( TransitionId id ) const
{
    const auto& t = transition( id );
    return _states[t.source] + "->" + _states[t.target];
}

Valuation::Valuation( IntVector entries ) : _entries( std::move( entries ) )
{
    for ( const auto& e : _entries )
        if ( sgn( e ) < 0 )
            throw InvariantError( "valuation entry is negative" );
}

Integer Valuation::norm() const
{
    Integer m = 0;
    for ( const auto& e : _entries )
        if ( e > m )
            m = e;
    return m;
}

Path::Path( const Vass& vass, std::vector<TransitionId> steps ) : _steps( std::move( steps ) )
{
    for ( std::size_t i = 0; i < _steps.size(); ++i )
    {
        if ( _steps[i] >= vass.transition_count() )
            throw InvariantError( "path references unknown transition " + std::to_string( _steps[i] ) );
        if ( i > 0 && vass.transition( _steps[i - 1] ).target != vass.transition( _steps[i] ).source )
            throw InvariantError( "path steps " + std::to_string( i - 1 ) + " and " + std::to_string( i )
                                  + " are not adjacent" );
    }
}

StateId Path::first_state( const Vass& vass ) const
{
    return vass.transition( _steps.front() ).source;
}

StateId Path::last_state( const Vass& vass ) const
{
    return vass.transition( _steps.back() ).target;
}

bool Path::is_cycle( const Vass& vass ) const
{
    return _steps.empty() || first_state( vass ) == last_state( vass );
}

// ---------------------------------------------------------------------------
// parsing

namespace
{

struct Token
{
    std::string text;
    std::size_t column; // 1-based
};

std::vector<Token> tokenize( std::string_view line )
{
    std::vector<Token> out;
    std::size_t i = 0;
    while ( i < line.size() )
    {
        const auto c = static_cast<unsigned char>( line[i] );
        if ( std::isspace( c ) )
        {
            ++i;
            continue;
        }
        // "->" and ":" are tokens of their own even without surrounding blanks
        if ( line.compare( i, 2, "->" ) == 0 )
        {
            out.push_back( { "->", i + 1 } );
            i += 2;
            continue;
        }
        if ( line[i] == ':' )
        {
            out.push_back( { ":", i + 1 } );
            ++i;
            continue;
        }
        std::size_t j = i;
        while ( j < line.size() && !std::isspace( static_cast<unsigned char>( line[j] ) ) && line[j] != ':'
                && line.compare( j, 2, "->" ) != 0 )
            ++j;
        out.push_back( { std::string( line.substr( i, j - i ) ), i + 1 } );
        i = j;
    }
    return out;
}

bool is_identifier( const std::string& s )
{
    if ( s.empty() || !( std::isalpha( static_cast<unsigned char>( s[0] ) ) || s[0] == '_' ) )
        return false;
    return std::all_of( s.begin(), s.end(),
                        []( char c ) { return std::isalnum( static_cast<unsigned char>( c ) ) || c == '_'; } );
}

bool is_integer( const std::string& s )
{
    std::size_t start = ( !s.empty() && s[0] == '-' ) ? 1 : 0;
    if ( start == s.size() )
        return false;
    return std::all_of( s.begin() + static_cast<std::ptrdiff_t>( start ), s.end(),
                        []( char c ) { return std::isdigit( static_cast<unsigned char>( c ) ); } );
}

} // namespace

Vass parse_vass( std::string_view text )
{
    std::vector<std::string> vars;
    bool have_vars = false;
    std::vector<Vass::NamedTransition> transitions;
    std::set<std::tuple<std::string, std::string, IntVector>> triples;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while ( pos <= text.size() )
    {
        std::size_t end = text.find( '\n', pos );
        if ( end == std::string_view::npos )
            end = text.size();
        std::string_view line = text.substr( pos, end - pos );
        pos = end + 1;
        ++line_no;
        if ( auto hash = line.find( '#' ); hash != std::string_view::npos )
            line = line.substr( 0, hash );
        if ( !line.empty() && line.back() == '\r' )
            line.remove_suffix( 1 );

        auto tokens = tokenize( line );
        if ( tokens.empty() )
        {
            if ( end == text.size() )
                break;
            continue;
        }

        if ( !have_vars )
        {
            if ( tokens[0].text != "vars" )
                throw ParseError( line_no, tokens[0].column, "expected 'vars' declaration" );
            if ( tokens.size() < 2 )
                throw ParseError( line_no, tokens[0].column + 4, "'vars' needs at least one name" );
            std::set<std::string> seen;
            for ( std::size_t i = 1; i < tokens.size(); ++i )
            {
                if ( !is_identifier( tokens[i].text ) )
                    throw ParseError( line_no, tokens[i].column, "invalid variable name '" + tokens[i].text + "'" );
                if ( !seen.insert( tokens[i].text ).second )
                    throw ParseError( line_no, tokens[i].column, "duplicate variable '" + tokens[i].text + "'" );
                vars.push_back( tokens[i].text );
            }
            have_vars = true;
        }
        else
        {
            if ( !is_identifier( tokens[0].text ) )
                throw ParseError( line_no, tokens[0].column, "invalid state name '" + tokens[0].text + "'" );
            if ( tokens.size() < 2 )
                throw ParseError( line_no, tokens[0].column + tokens[0].text.size(), "expected '->'" );
            if ( tokens[1].text != "->" )
                throw ParseError( line_no, tokens[1].column, "unknown relation '" + tokens[1].text + "'" );
            if ( tokens.size() < 3 || !is_identifier( tokens[2].text ) )
                throw ParseError( line_no, tokens.size() < 3 ? line.size() + 1 : tokens[2].column,
                                  "expected target state" );
            if ( tokens.size() < 4 || tokens[3].text != ":" )
                throw ParseError( line_no, tokens.size() < 4 ? line.size() + 1 : tokens[3].column, "expected ':'" );
            IntVector update;
            for ( std::size_t i = 4; i < tokens.size(); ++i )
            {
                if ( !is_integer( tokens[i].text ) )
                    throw ParseError( line_no, tokens[i].column, "invalid integer '" + tokens[i].text + "'" );
                update.emplace_back( tokens[i].text, 10 );
            }
            if ( update.size() != vars.size() )
                throw ParseError( line_no, tokens[0].column,
                                  "update has " + std::to_string( update.size() ) + " entries, expected "
                                      + std::to_string( vars.size() ) );
            if ( !triples.emplace( tokens[0].text, tokens[2].text, update ).second )
                throw ParseError( line_no, tokens[0].column,
                                  "duplicate transition " + tokens[0].text + " -> " + tokens[2].text );
            transitions.push_back( { tokens[0].text, std::move( update ), tokens[2].text } );
        }
        if ( end == text.size() )
            break;
    }
    if ( !have_vars )
        throw ParseError( line_no == 0 ? 1 : line_no, 1, "missing 'vars' declaration" );
    return Vass( std::move( vars ), std::move( transitions ) );
}

std::string serialize_vass( const Vass& vass )
{
    std::ostringstream out;
    out << "vars";
    for ( const auto& v : vass.variables() )
        out << ' ' << v;
    out << '\n';

    std::vector<const Transition*> order;
    for ( const auto& t : vass.transitions() )
        order.push_back( &t );
    std::sort( order.begin(), order.end(), [&]( const Transition* a, const Transition* b ) {
        const auto& as = vass.state_name( a->source );
        const auto& bs = vass.state_name( b->source );
        if ( as != bs )
            return as < bs;
        const auto& at = vass.state_name( a->target );
        const auto& bt = vass.state_name( b->target );
        if ( at != bt )
            return at < bt;
        return a->update < b->update;
    } );
    for ( const auto* t : order )
    {
        out << vass.state_name( t->source ) << " -> " << vass.state_name( t->target ) << " :";
        for ( const auto& u : t->update )
            out << ' ' << u;
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// graph structure

namespace
{

std::vector<bool> reachable_from( const Vass& vass, StateId s )
{
    std::vector<bool> seen( vass.state_count(), false );
    std::vector<StateId> stack{ s };
    seen[s] = true;
    while ( !stack.empty() )
    {
        StateId u = stack.back();
        stack.pop_back();
        for ( auto id : vass.outgoing()[u] )
        {
            StateId w = vass.transition( id ).target;
            if ( !seen[w] )
            {
                seen[w] = true;
                stack.push_back( w );
            }
        }
    }
    return seen;
}

} // namespace

std::optional<std::pair<StateId, StateId>> find_unreachable_pair( const Vass& vass )
{
    for ( StateId s = 0; s < vass.state_count(); ++s )
    {
        auto seen = reachable_from( vass, s );
        for ( StateId t = 0; t < vass.state_count(); ++t )
            if ( !seen[t] )
                return std::make_pair( s, t );
    }
    return std::nullopt;
}

bool validate_connected( const Vass& vass )
{
    return !find_unreachable_pair( vass ).has_value();
}

IntegerMatrix update_matrix( const Vass& vass )
{
    IntegerMatrix m;
    m.row_labels = vass.variables();
    for ( const auto& t : vass.transitions() )
        m.column_labels.push_back( "t" + std::to_string( t.id ) );
    m.entries.assign( vass.dimension(), IntVector( vass.transition_count(), 0 ) );
    for ( const auto& t : vass.transitions() )
        for ( std::size_t x = 0; x < vass.dimension(); ++x )
            m.entries[x][t.id] = t.update[x];
    return m;
}

IntegerMatrix flow_matrix( const Vass& vass )
{
    IntegerMatrix m;
    m.row_labels = vass.states();
    for ( const auto& t : vass.transitions() )
        m.column_labels.push_back( "t" + std::to_string( t.id ) );
    m.entries.assign( vass.state_count(), IntVector( vass.transition_count(), 0 ) );
    for ( const auto& t : vass.transitions() )
    {
        if ( t.is_self_loop() )
            continue;
        m.entries[t.source][t.id] -= 1;
        m.entries[t.target][t.id] += 1;
    }
    return m;
}

std::vector<SubVass> scc_decompose( const Vass& vass, std::span<const StateId> states,
                                    std::span<const TransitionId> transitions )
{
    // local graph over the given states
    std::vector<StateId> local( states.begin(), states.end() );
    std::sort( local.begin(), local.end() );
    local.erase( std::unique( local.begin(), local.end() ), local.end() );
    std::map<StateId, std::size_t> index_of;
    for ( std::size_t i = 0; i < local.size(); ++i )
        index_of[local[i]] = i;

    std::vector<std::vector<std::size_t>> succ( local.size() );
    for ( auto id : transitions )
    {
        const auto& t = vass.transition( id );
        auto s = index_of.find( t.source );
        auto d = index_of.find( t.target );
        if ( s == index_of.end() || d == index_of.end() )
            throw InvariantError( "transition " + std::to_string( id ) + " leaves the given state set" );
        succ[s->second].push_back( d->second );
    }

    // iterative Tarjan
    constexpr std::size_t unvisited = static_cast<std::size_t>( -1 );
    std::vector<std::size_t> index( local.size(), unvisited ), low( local.size(), 0 ), component( local.size(), 0 );
    std::vector<bool> on_stack( local.size(), false );
    std::vector<std::size_t> stack;
    std::size_t counter = 0, components = 0;
    struct Frame
    {
        std::size_t v;
        std::size_t next;
    };
    for ( std::size_t root = 0; root < local.size(); ++root )
    {
        if ( index[root] != unvisited )
            continue;
        std::vector<Frame> call{ { root, 0 } };
        index[root] = low[root] = counter++;
        stack.push_back( root );
        on_stack[root] = true;
        while ( !call.empty() )
        {
            auto& f = call.back();
            if ( f.next < succ[f.v].size() )
            {
                std::size_t w = succ[f.v][f.next++];
                if ( index[w] == unvisited )
                {
                    index[w] = low[w] = counter++;
                    stack.push_back( w );
                    on_stack[w] = true;
                    call.push_back( { w, 0 } );
                }
                else if ( on_stack[w] )
                    low[f.v] = std::min( low[f.v], index[w] );
                continue;
            }
            std::size_t v = f.v;
            call.pop_back();
            if ( !call.empty() )
                low[call.back().v] = std::min( low[call.back().v], low[v] );
            if ( low[v] == index[v] )
            {
                std::size_t w;
                do
                {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    component[w] = components;
                } while ( w != v );
                ++components;
            }
        }
    }

    std::vector<SubVass> parts( components );
    for ( std::size_t i = 0; i < local.size(); ++i )
        parts[component[i]].states.push_back( local[i] );
    for ( auto id : transitions )
    {
        const auto& t = vass.transition( id );
        std::size_t c = component[index_of[t.source]];
        if ( c == component[index_of[t.target]] )
            parts[c].transitions.push_back( id );
    }
    std::vector<SubVass> out;
    for ( auto& p : parts )
    {
        if ( p.transitions.empty() )
            continue;
        std::sort( p.transitions.begin(), p.transitions.end() );
        out.push_back( std::move( p ) );
    }
    // states are ids sorted by name, so the smallest id is the smallest name
    std::sort( out.begin(), out.end(),
               []( const SubVass& a, const SubVass& b ) { return a.states.front() < b.states.front(); } );
    return out;
}

// ---------------------------------------------------------------------------
// execution

IntVector path_value( const Vass& vass, std::span<const TransitionId> steps )
{
    IntVector v( vass.dimension(), 0 );
    for ( auto id : steps )
    {
        const auto& u = vass.transition( id ).update;
        for ( std::size_t x = 0; x < v.size(); ++x )
            v[x] += u[x];
    }
    return v;
}

std::vector<std::uint64_t> instance_counts( const Vass& vass, std::span<const TransitionId> steps )
{
    std::vector<std::uint64_t> counts( vass.transition_count(), 0 );
    for ( auto id : steps )
        ++counts.at( id );
    return counts;
}

std::optional<Valuation> execute_path( const Vass& vass, const Valuation& start,
                                       std::span<const TransitionId> steps )
{
    if ( start.size() != vass.dimension() )
        throw InvariantError( "valuation dimension mismatch" );
    IntVector v = start.entries();
    for ( auto id : steps )
    {
        const auto& u = vass.transition( id ).update;
        for ( std::size_t x = 0; x < v.size(); ++x )
        {
            v[x] += u[x];
            if ( sgn( v[x] ) < 0 )
                return std::nullopt;
        }
    }
    return Valuation( std::move( v ) );
}

Valuation min_initial_valuation( const Vass& vass, std::span<const TransitionId> steps )
{
    IntVector running( vass.dimension(), 0 );
    IntVector lowest( vass.dimension(), 0 );
    for ( auto id : steps )
    {
        const auto& u = vass.transition( id ).update;
        for ( std::size_t x = 0; x < running.size(); ++x )
        {
            running[x] += u[x];
            if ( running[x] < lowest[x] )
                lowest[x] = running[x];
        }
    }
    for ( auto& e : lowest )
        e = -e;
    return Valuation( std::move( lowest ) );
}

} // namespace vassbound
