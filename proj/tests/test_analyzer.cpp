#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include "vassbound/report.hpp"

using namespace testing;

namespace
{

std::vector<std::vector<long>> to_longs( const IntegerMatrix& m )
{
    std::vector<std::vector<long>> out;
    for ( const auto& row : m.entries )
        out.push_back( longs( row ) );
    return out;
}

std::vector<TransitionId> ids( const Vass& v, std::initializer_list<std::pair<const char*, const char*>> edges )
{
    std::vector<TransitionId> out;
    for ( const auto& [s, d] : edges )
        out.push_back( find_transition( v, s, d ) );
    std::sort( out.begin(), out.end() );
    return out;
}

std::vector<Exponent> exps( std::initializer_list<long> values )
{
    std::vector<Exponent> out;
    for ( long v : values )
        out.push_back( v < 0 ? Exponent::infinite() : Exponent( static_cast<std::uint64_t>( v ) ) );
    return out;
}

std::vector<std::string> state_names( const Vass& v, const SubVass& s )
{
    std::vector<std::string> out;
    for ( auto id : s.states )
        out.push_back( v.state_name( id ) );
    return out;
}

} // namespace

TEST_CASE( "running example bounds" )
{
    const Vass v = load_model( "v_run" );
    const Analysis a = analyze( v );
    const auto& r = a.report;
    REQUIRE( r.status == Status::Polynomial );
    CHECK( r.vexp == exps( { 1, 1, 2 } ) );
    CHECK( r.complexity_exponent == std::optional<std::uint64_t>( 3 ) );
    for ( auto t : ids( v, { { "s1", "s3" }, { "s4", "s2" } } ) )
        CHECK( r.texp[t] == Exponent( 1 ) );
    for ( auto t : ids( v, { { "s1", "s2" }, { "s2", "s1" }, { "s3", "s4" }, { "s4", "s3" } } ) )
        CHECK( r.texp[t] == Exponent( 2 ) );
    for ( auto t : ids( v, { { "s1", "s1" }, { "s2", "s2" }, { "s3", "s3" }, { "s4", "s4" } } ) )
        CHECK( r.texp[t] == Exponent( 3 ) );
}

TEST_CASE( "running example iterations" )
{
    const Vass v = load_model( "v_run" );
    std::vector<ExtendedSystem> systems;
    std::vector<LayerSolution> solutions;
    AnalyzeOptions opts;
    opts.on_layer = [&]( const ExtendedSystem& sys, const LayerSolution& sol ) {
        systems.push_back( sys );
        solutions.push_back( sol );
    };
    const Analysis a = analyze( v, opts );
    REQUIRE( systems.size() == 3 );
    CHECK( a.iterations == 3 );

    SUBCASE( "decreasing transitions and new bounds per layer" )
    {
        CHECK( solutions[0].decreasing == ids( v, { { "s1", "s3" }, { "s4", "s2" } } ) );
        CHECK( solutions[1].decreasing
               == ids( v, { { "s1", "s2" }, { "s2", "s1" }, { "s3", "s4" }, { "s4", "s3" } } ) );
        CHECK( solutions[2].decreasing
               == ids( v, { { "s1", "s1" }, { "s2", "s2" }, { "s3", "s3" }, { "s4", "s4" } } ) );
        REQUIRE( a.report.layers.size() == 3 );
        CHECK( a.report.layers[0].new_vars == std::vector<VarId>{ 0, 1 } );
        CHECK( a.report.layers[1].new_vars == std::vector<VarId>{ 2 } );
        CHECK( a.report.layers[2].new_vars.empty() );
    }
    SUBCASE( "first layer uses the plain update matrix" )
    {
        CHECK( systems[0].d_ext.row_labels.size() == 3 );
        CHECK( to_longs( systems[0].d_ext ) == to_longs( update_matrix( v ) ) );
        // mu grows z only and uses everything but the connectors
        const auto& sol = solutions[0];
        CHECK( sgn( sol.d_ext_mu[0] ) == 0 );
        CHECK( sgn( sol.d_ext_mu[1] ) == 0 );
        CHECK( sol.d_ext_mu[2] >= 1 );
        for ( std::size_t j = 0; j < systems[0].transitions.size(); ++j )
        {
            const auto t = systems[0].transitions[j];
            const bool connector = t == find_transition( v, "s1", "s3" ) || t == find_transition( v, "s4", "s2" );
            CHECK( ( sgn( sol.mu[j] ) > 0 ) == !connector );
        }
    }
    SUBCASE( "second layer matrix" )
    {
        const auto& sys = systems[1];
        CHECK( sys.transitions
               == ids( v, { { "s1", "s1" }, { "s2", "s2" }, { "s3", "s3" }, { "s4", "s4" }, { "s2", "s1" },
                            { "s1", "s2" }, { "s4", "s3" }, { "s3", "s4" } } ) );
        const std::vector<std::vector<long>> reference{
            { -1, 1, 0, 0, 0, 0, 0, 0 },         { 1, -1, 0, 0, 0, 0, 0, 0 }, { 0, 0, -1, 1, 0, 0, 0, 0 },
            { 0, 0, 1, -1, 0, 0, 0, 0 },         { -1, 1, 1, -1, -1, -1, -1, -1 },
        };
        CHECK( to_longs( sys.d_ext ) == reference );
        CHECK( sys.rows.size() == 5 );
        // (x, A), (y, A), (x, B), (y, B), (z, root)
        CHECK( sys.rows[0].var == 0 );
        CHECK( sys.rows[1].var == 1 );
        CHECK( sys.rows[2].node == sys.rows[3].node );
        CHECK( sys.rows[0].node != sys.rows[2].node );
        CHECK( sys.rows[4] == ExtendedRow{ 2, 0 } );
    }
    SUBCASE( "third layer matrix" )
    {
        const auto& sys = systems[2];
        CHECK( sys.transitions == ids( v, { { "s1", "s1" }, { "s2", "s2" }, { "s3", "s3" }, { "s4", "s4" } } ) );
        const std::vector<std::vector<long>> reference{
            { -1, 0, 0, 0 }, { 1, 0, 0, 0 }, { 0, 1, 0, 0 }, { 0, -1, 0, 0 }, { 0, 0, -1, 0 },
            { 0, 0, 1, 0 },  { 0, 0, 0, 1 }, { 0, 0, 0, -1 }, { -1, 1, 0, 0 }, { 0, 0, 1, -1 },
        };
        CHECK( to_longs( sys.d_ext ) == reference );
        for ( const auto& m : solutions[2].mu )
            CHECK( sgn( m ) == 0 );
    }
    SUBCASE( "known ranking functions rank the same transitions" )
    {
        const std::vector<std::pair<IntVector, IntVector>> reference{
            { ints( { 2, 2, 0 } ), ints( { 0, 0, 1, 1 } ) },
            { ints( { 1, 2, 2, 1, 1 } ), ints( { 0, 0, 0, 0 } ) },
            { ints( { 1, 1, 1, 3, 3, 1, 1, 1, 1, 1 } ), ints( { 0, 0, 0, 0 } ) },
        };
        for ( std::size_t l = 0; l < 3; ++l )
        {
            const auto check = check_quasi_ranking( v, systems[l], reference[l].first, reference[l].second );
            CHECK( check.ok );
            CHECK( check.strict == solutions[l].decreasing );
            const auto ours = check_quasi_ranking( v, systems[l], solutions[l].r, solutions[l].z );
            CHECK( ours.ok );
            CHECK( ours.strict == solutions[l].decreasing );
        }
        // the reference layer-3 coefficients also rank every variable copy
        for ( const auto& r : reference[2].first )
            CHECK( sgn( r ) > 0 );
    }
    SUBCASE( "every iteration passes the independent audit" )
    {
        for ( std::size_t l = 0; l < 3; ++l )
            CHECK( audit_layer( systems[l], solutions[l] ) == "" );
    }
}

TEST_CASE( "running example layer tree" )
{
    const Vass v = load_model( "v_run" );
    const Analysis a = analyze( v );
    const auto& tree = a.tree;
    const auto root = tree.node( tree.root() );
    REQUIRE( root.children.size() == 2 );
    CHECK( state_names( v, tree.node( root.children[0] ).label ) == std::vector<std::string>{ "s1", "s2" } );
    CHECK( state_names( v, tree.node( root.children[1] ).label ) == std::vector<std::string>{ "s3", "s4" } );
    CHECK( tree.layer( 2 ).size() == 4 );
    for ( auto id : tree.layer( 2 ) )
    {
        CHECK( tree.node( id ).label.states.size() == 1 );
        CHECK( tree.node( id ).label.transitions.size() == 1 );
    }
    CHECK( tree.layer( 3 ).empty() );
    CHECK( tree.depth() == 2 );
    CHECK( tree.ancestor_at( tree.layer( 2 )[0], 1 ) == root.children[0] );
    CHECK( tree.ancestor_at( tree.layer( 2 )[3], 0 ) == tree.root() );

    // tExp(t) = l iff t lives in a node at layer l-1 and in none at layer l
    auto lives = [&]( TransitionId t, std::size_t layer ) {
        for ( auto id : tree.layer( layer ) )
        {
            const auto& ts = tree.node( id ).label.transitions;
            if ( std::find( ts.begin(), ts.end(), t ) != ts.end() )
                return true;
        }
        return false;
    };
    for ( TransitionId t = 0; t < v.transition_count(); ++t )
    {
        const auto l = a.report.texp[t].value();
        CHECK( lives( t, l - 1 ) );
        CHECK_FALSE( lives( t, l ) );
    }
}

TEST_CASE( "extended system from the final tree" )
{
    const Vass v = load_model( "v_run" );
    const Analysis a = analyze( v );
    const auto sys = build_extended_system( v, a.tree, 2, a.report.vexp );
    CHECK( sys.rows.size() == 5 );
    CHECK( sys.d_ext.row_labels.back() == "z@n0" );
    const auto deeper = build_extended_system( v, a.tree, 3, a.report.vexp );
    CHECK( deeper.rows.size() == 10 );
    CHECK( deeper.transitions.size() == 4 );
    CHECK( to_longs( deeper.f_u ) == std::vector<std::vector<long>>( 4, std::vector<long>( 4, 0 ) ) );
    // infinite exponents use the root copy
    const auto first = build_extended_system( v, a.tree, 1, exps( { -1, -1, -1 } ) );
    CHECK( first.rows.size() == 3 );
    for ( const auto& row : first.rows )
        CHECK( row.node == a.tree.root() );
}

TEST_CASE( "family bounds" )
{
    for ( int nu = 1; nu <= 3; ++nu )
    {
        const Vass v = load_model( "v_nu" + std::to_string( nu ) );
        const Analysis a = analyze( v );
        REQUIRE( a.report.status == Status::Polynomial );
        CHECK( a.report.complexity_exponent == std::optional<std::uint64_t>( std::uint64_t{ 1 } << nu ) );
        for ( int i = 1; i <= nu; ++i )
        {
            const std::uint64_t low = std::uint64_t{ 1 } << ( i - 1 );
            const std::string s1 = "s" + std::to_string( i ) + "1", s2 = "s" + std::to_string( i ) + "2";
            CHECK( a.report.vexp[v.find_variable( "x" + std::to_string( i ) + "1" ).value()] == Exponent( low ) );
            CHECK( a.report.vexp[v.find_variable( "x" + std::to_string( i ) + "2" ).value()] == Exponent( low ) );
            CHECK( a.report.texp[find_transition( v, s1, s1 )] == Exponent( 2 * low ) );
            CHECK( a.report.texp[find_transition( v, s2, s2 )] == Exponent( 2 * low ) );
            CHECK( a.report.texp[find_transition( v, s1, s2 )] == Exponent( low ) );
        }
    }
}

TEST_CASE( "skipping layers" )
{
    SUBCASE( "next relevant layer" )
    {
        CHECK( next_relevant_layer( exps( { 1 } ), exps( { 1 } ), 1 ) == std::optional<std::size_t>( 2 ) );
        CHECK( next_relevant_layer( exps( { 1, 4 } ), exps( { 4 } ), 4 ) == std::optional<std::size_t>( 5 ) );
        CHECK( next_relevant_layer( exps( { -1 } ), exps( { 3 } ), 1 ) == std::nullopt );
        CHECK( next_relevant_layer( exps( { 1 } ), exps( { 1, -1 } ), 2 ) == std::nullopt );
    }
    SUBCASE( "exponential check" )
    {
        // after the first iteration on the running example
        CHECK_FALSE( exponential_check( exps( { 1, 1, -1 } ), exps( { -1, -1, -1, -1, -1, -1, -1, -1, 1, 1 } ), 1 ) );
        CHECK( exponential_check( exps( { -1, -1 } ), exps( { -1, -1 } ), 1 ) );
        CHECK( exponential_check( exps( { 1 } ), exps( { 1 } ), 2 ) );
    }
    SUBCASE( "skipping does not change the results" )
    {
        for ( const char* name : { "v_run", "v_nu1", "v_nu2", "v_nu3", "doubling", "budget_doubling", "loop" } )
        {
            const Vass v = load_model( name );
            AnalyzeOptions off;
            off.skip_optimization = false;
            const Analysis with = analyze( v );
            const Analysis without = analyze( v, off );
            CHECK( report_json( v, with.report ) == report_json( v, without.report ) );
            CHECK( with.iterations <= without.iterations );
            CHECK( with.iterations <= v.dimension() * v.transition_count() );
        }
        // the third family member has exponents 1, 2, 4, 8: layers 5..7 are skipped
        const Vass v = load_model( "v_nu3" );
        AnalyzeOptions off;
        off.skip_optimization = false;
        CHECK( analyze( v ).iterations < analyze( v, off ).iterations );
    }
}

TEST_CASE( "exponential and degenerate inputs" )
{
    SUBCASE( "doubling" )
    {
        const Analysis a = analyze( load_model( "doubling" ) );
        CHECK( a.report.status == Status::Exponential );
        CHECK_FALSE( a.report.complexity_exponent );
        CHECK( a.exponential_layer.has_value() );
        for ( const auto& e : a.report.vexp )
            CHECK_FALSE( e.finite() );
    }
    SUBCASE( "bounded control counter next to doubling" )
    {
        const Vass v = load_model( "budget_doubling" );
        const Analysis a = analyze( v );
        CHECK( a.report.status == Status::Exponential );
        CHECK( a.report.vexp[v.find_variable( "c" ).value()] == Exponent( 1 ) );
        CHECK_FALSE( a.report.vexp[v.find_variable( "x" ).value()].finite() );
        CHECK( a.report.texp[find_transition( v, "s1", "s2" )] == Exponent( 1 ) );
    }
    SUBCASE( "zero loop never terminates" )
    {
        const Analysis a = analyze( load_model( "loop" ) );
        CHECK( a.report.status == Status::Exponential );
        CHECK_FALSE( a.report.texp[0].finite() );
    }
    SUBCASE( "no transitions" )
    {
        const Vass v( { "x", "y" }, {}, { "s" } );
        const Analysis a = analyze( v );
        CHECK( a.report.status == Status::Polynomial );
        CHECK( a.report.complexity_exponent == std::optional<std::uint64_t>( 0 ) );
        CHECK( a.report.vexp == exps( { 1, 1 } ) );
    }
    SUBCASE( "not connected" )
    {
        try
        {
            analyze( load_model( "disconnected" ) );
            FAIL( "expected NotConnectedError" );
        }
        catch ( const NotConnectedError& e )
        {
            CHECK( e.from() == "s2" );
            CHECK( e.to() == "s1" );
        }
    }
}

TEST_CASE( "archived solutions" )
{
    const Vass v = load_model( "v_nu3" );
    const Analysis a = analyze( v );
    REQUIRE( !a.mu_archive.empty() );
    for ( std::size_t i = 1; i < a.mu_archive.size(); ++i )
        CHECK( a.mu_archive[i - 1].layer < a.mu_archive[i].layer );
    // a skipped layer reuses the last executed iteration below it
    for ( std::size_t l = 1; l <= a.tree.depth() + 1; ++l )
    {
        const auto& rec = a.mu_for_layer( l );
        CHECK( rec.layer <= l );
        CHECK( rec.mu.size() == v.transition_count() );
    }
}

TEST_CASE( "random models satisfy the invariants" )
{
    std::mt19937_64 rng( 4242 );
    int checked = 0;
    while ( checked < 100 )
    {
        const Vass v = random_connected_vass( rng );
        if ( !validate_connected( v ) )
            continue;
        ++checked;
        AnalyzeOptions opts;
        opts.on_layer = [&]( const ExtendedSystem& sys, const LayerSolution& sol ) {
            CHECK( audit_layer( sys, sol ) == "" );
        };
        const Analysis a = analyze( v, opts );
        const std::uint64_t cap = std::uint64_t{ 1 } << v.dimension();
        for ( const auto& e : a.report.texp )
            if ( e.finite() )
                CHECK( e.value() <= cap );
        if ( a.report.status == Status::Polynomial )
        {
            std::uint64_t most = 0;
            for ( const auto& e : a.report.texp )
                most = std::max( most, e.value() );
            CHECK( a.report.complexity_exponent == std::optional<std::uint64_t>( most ) );
        }
    }
}
