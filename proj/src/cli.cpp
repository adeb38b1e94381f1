#include "vassbound/cli.hpp"

#include "vassbound/analyzer.hpp"
#include "vassbound/oracle.hpp"
#include "vassbound/report.hpp"
#include "vassbound/witness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace vassbound
{

namespace
{

struct RunConfig
{
    std::string input;
    bool json = false;
    std::string skip_opt = "on";
    std::string dot_path;
    std::uint64_t n = 1;
    bool check = false;
    std::string out_path;
    std::string metric = "longest";
    std::string sweep;
    std::uint64_t budget = 0; // 0: environment or default
};

class InputError : public Error
{
public:
    using Error::Error;
};

Vass load( const std::string& path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw InputError( "cannot read '" + path + "'" );
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_vass( buf.str() );
}

void write_file( const std::string& path, const std::string& text )
{
    std::ofstream out( path, std::ios::binary );
    if ( !out )
        throw InputError( "cannot write '" + path + "'" );
    out << text;
}

AnalyzeOptions analyze_options( const RunConfig& cfg )
{
    AnalyzeOptions o;
    o.skip_optimization = cfg.skip_opt != "off";
    return o;
}

OracleOptions oracle_options( const RunConfig& cfg )
{
    OracleOptions o;
    if ( const char* env = std::getenv( "VASSBOUND_ORACLE_BUDGET" ) )
    {
        try
        {
            o.budget = std::stoull( env );
        }
        catch ( const std::exception& )
        {
            throw InputError( "VASSBOUND_ORACLE_BUDGET is not a number" );
        }
    }
    if ( cfg.budget > 0 )
        o.budget = cfg.budget;
    return o;
}

int cmd_analyze( const RunConfig& cfg, std::ostream& out )
{
    const Vass vass = load( cfg.input );
    const Analysis a = analyze( vass, analyze_options( cfg ) );
    std::optional<ExponentialCertificate> cert;
    if ( a.report.status == Status::Exponential )
        cert = exponential_certificate( vass, a );
    out << ( cfg.json ? report_json( vass, a.report, cert ) : report_text( vass, a.report, cert ) );
    if ( !cfg.dot_path.empty() )
        write_file( cfg.dot_path, tree_dot( vass, a.tree ) );
    return exit_code::ok;
}

int cmd_witness( const RunConfig& cfg, std::ostream& out, std::ostream& err )
{
    const Vass vass = load( cfg.input );
    const Analysis a = analyze( vass, analyze_options( cfg ) );
    if ( a.report.status != Status::Polynomial )
    {
        err << "error: " << cfg.input << " has at least exponential complexity; no polynomial witness exists\n";
        return exit_code::exponential_input;
    }
    const WitnessPath w = build_witness( vass, a, cfg.n );
    const std::string dump = witness_dump( vass, w );
    if ( cfg.out_path.empty() )
        out << dump;
    else
        write_file( cfg.out_path, dump );
    if ( cfg.check )
    {
        const auto v = verify_witness( vass, w, a.report, cfg.n );
        err << verification_text( v );
        if ( !v.passed() )
            return exit_code::check_failed;
    }
    return exit_code::ok;
}

std::pair<std::uint64_t, std::uint64_t> parse_range( const std::string& text )
{
    const auto dots = text.find( ".." );
    if ( dots == std::string::npos )
        throw InputError( "sweep range must look like FROM..TO" );
    try
    {
        const auto from = std::stoull( text.substr( 0, dots ) );
        const auto to = std::stoull( text.substr( dots + 2 ) );
        if ( from > to )
            throw InputError( "empty sweep range" );
        return { from, to };
    }
    catch ( const std::logic_error& )
    {
        throw InputError( "sweep range must look like FROM..TO" );
    }
}

int cmd_oracle( const RunConfig& cfg, std::ostream& out )
{
    const Vass vass = load( cfg.input );
    const Metric metric = Metric::parse( vass, cfg.metric );
    std::uint64_t from = cfg.n, to = cfg.n;
    if ( !cfg.sweep.empty() )
        std::tie( from, to ) = parse_range( cfg.sweep );
    out << sweep_csv( vass, from, to, metric, oracle_options( cfg ) );
    return exit_code::ok;
}

int cmd_validate( const RunConfig& cfg, std::ostream& out )
{
    const Vass vass = load( cfg.input );
    if ( auto pair = find_unreachable_pair( vass ) )
        throw NotConnectedError( vass.state_name( pair->first ), vass.state_name( pair->second ) );
    out << "ok: " << vass.state_count() << " states, " << vass.transition_count() << " transitions, dimension "
        << vass.dimension() << '\n';
    return exit_code::ok;
}

} // namespace

int run_cli( int argc, const char* const* argv, std::ostream& out, std::ostream& err )
{
    CLI::App app{ "Asymptotic bound analysis for vector addition systems with states" };
    app.require_subcommand( 1 );
    RunConfig cfg;

    auto add_input = [&]( CLI::App* sub ) {
        sub->add_option( "input", cfg.input, "VASS file" )->required();
    };
    auto add_skip = [&]( CLI::App* sub ) {
        sub->add_option( "--skip-opt", cfg.skip_opt, "skip layers that cannot carry a bound (on/off)" )
            ->check( CLI::IsMember( { "on", "off" } ) );
    };

    auto* analyze_cmd = app.add_subcommand( "analyze", "compute variable and transition exponents" );
    add_input( analyze_cmd );
    analyze_cmd->add_flag( "--json", cfg.json, "print the JSON report" );
    add_skip( analyze_cmd );
    analyze_cmd->add_option( "--dot", cfg.dot_path, "write the layer tree in DOT format" );

    auto* witness_cmd = app.add_subcommand( "witness", "build a lower-bound witness path" );
    add_input( witness_cmd );
    witness_cmd->add_option( "--n", cfg.n, "scale parameter N" )->required()->check( CLI::PositiveNumber );
    witness_cmd->add_flag( "--check", cfg.check, "verify the witness, exit 6 on failure" );
    witness_cmd->add_option( "--out", cfg.out_path, "write the dump to a file" );
    add_skip( witness_cmd );

    auto* oracle_cmd = app.add_subcommand( "oracle", "exhaustive ground truth for small N" );
    add_input( oracle_cmd );
    auto* n_opt = oracle_cmd->add_option( "--n", cfg.n, "bound on the initial valuation" );
    auto* sweep_opt = oracle_cmd->add_option( "--sweep", cfg.sweep, "range FROM..TO of N" );
    n_opt->excludes( sweep_opt );
    oracle_cmd->add_option( "--metric", cfg.metric, "longest, var:<name> or trans:<id>" );
    oracle_cmd->add_option( "--budget", cfg.budget, "configuration budget (default 10^7, env VASSBOUND_ORACLE_BUDGET)" );

    auto* validate_cmd = app.add_subcommand( "validate", "parse and check connectivity" );
    add_input( validate_cmd );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError& e )
    {
        return app.exit( e, out, err );
    }

    try
    {
        if ( analyze_cmd->parsed() )
            return cmd_analyze( cfg, out );
        if ( witness_cmd->parsed() )
            return cmd_witness( cfg, out, err );
        if ( oracle_cmd->parsed() )
            return cmd_oracle( cfg, out );
        if ( validate_cmd->parsed() )
            return cmd_validate( cfg, out );
    }
    catch ( const ParseError& e )
    {
        err << "parse error: " << cfg.input << ": " << e.what() << '\n';
        return exit_code::parse_error;
    }
    catch ( const InputError& e )
    {
        err << "error: " << e.what() << '\n';
        return exit_code::parse_error;
    }
    catch ( const NotConnectedError& e )
    {
        err << "error: " << e.what() << '\n';
        return exit_code::not_connected;
    }
    catch ( const OracleBudgetExceeded& e )
    {
        err << "error: " << e.what() << '\n';
        return exit_code::oracle_budget;
    }
    catch ( const InvariantError& e )
    {
        err << "internal error: " << e.what() << '\n';
        return exit_code::internal_error;
    }
    catch ( const Error& e )
    {
        err << "error: " << e.what() << '\n';
        return exit_code::parse_error;
    }
    return exit_code::internal_error;
}

} // namespace vassbound
