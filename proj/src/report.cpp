#include "vassbound/report.hpp"

#include <json.hpp>

#include <sstream>

namespace vassbound
{

namespace
{

using Json = nlohmann::ordered_json;

Json integer_json( const Integer& v )
{
    if ( v.fits_slong_p() )
        return Json( v.get_si() );
    return Json( v.get_str() );
}

Json exponent_json( const Exponent& e )
{
    if ( e.finite() )
        return Json( e.value() );
    return Json( "inf" );
}

std::string cycle_text( const Vass& vass, const Path& p )
{
    if ( p.empty() )
        return "(empty)";
    std::ostringstream out;
    out << vass.state_name( p.first_state( vass ) );
    for ( auto id : p.steps() )
        out << " -t" << id << "-> " << vass.state_name( vass.transition( id ).target );
    return out.str();
}

} // namespace

std::string report_json( const Vass& vass, const BoundsReport& report,
                         const std::optional<ExponentialCertificate>& certificate )
{
    Json j;
    j["schema"] = 1;
    j["status"] = report.status == Status::Polynomial ? "polynomial" : "exponential";
    j["complexity_exponent"] =
        report.complexity_exponent ? Json( *report.complexity_exponent ) : Json( nullptr );

    Json vars = Json::object();
    for ( VarId x = 0; x < vass.dimension(); ++x )
        vars[vass.variable_name( x )] = exponent_json( report.vexp[x] );
    j["variables"] = vars;

    Json trns = Json::array();
    for ( const auto& t : vass.transitions() )
    {
        Json e;
        e["id"] = t.id;
        e["src"] = vass.state_name( t.source );
        e["dst"] = vass.state_name( t.target );
        Json u = Json::array();
        for ( const auto& v : t.update )
            u.push_back( integer_json( v ) );
        e["update"] = u;
        e["exp"] = exponent_json( report.texp[t.id] );
        trns.push_back( e );
    }
    j["transitions"] = trns;

    Json layers = Json::array();
    for ( const auto& l : report.layers )
    {
        Json e;
        e["layer"] = l.layer;
        e["decreasing"] = l.decreasing;
        Json nv = Json::array();
        for ( auto x : l.new_vars )
            nv.push_back( vass.variable_name( x ) );
        e["new_variables"] = nv;
        e["var_ext"] = l.var_ext_size;
        e["strict_mu"] = l.mu_strict;
        e["strict_rank"] = l.rz_strict;
        layers.push_back( e );
    }
    j["layers"] = layers;

    if ( certificate )
    {
        Json c;
        Json u = Json::array(), w = Json::array();
        for ( auto x : certificate->u )
            u.push_back( vass.variable_name( x ) );
        for ( auto x : certificate->w )
            w.push_back( vass.variable_name( x ) );
        c["U"] = u;
        c["W"] = w;
        Json cycles = Json::array();
        for ( const auto& p : certificate->cycles )
            cycles.push_back( p.steps() );
        c["cycles"] = cycles;
        j["certificate"] = c;
    }
    return j.dump( 2 ) + "\n";
}

std::string report_text( const Vass& vass, const BoundsReport& report,
                         const std::optional<ExponentialCertificate>& certificate )
{
    std::ostringstream out;
    out << "status: " << ( report.status == Status::Polynomial ? "polynomial" : "exponential" ) << '\n';
    if ( report.complexity_exponent )
        out << "complexity: N^" << *report.complexity_exponent << '\n';
    out << "variables:\n";
    for ( VarId x = 0; x < vass.dimension(); ++x )
        out << "  " << vass.variable_name( x ) << ": " << report.vexp[x].to_string() << '\n';
    out << "transitions:\n";
    for ( const auto& t : vass.transitions() )
    {
        out << "  t" << t.id << ' ' << vass.transition_label( t.id ) << " (";
        for ( std::size_t x = 0; x < t.update.size(); ++x )
            out << ( x ? " " : "" ) << t.update[x];
        out << "): " << report.texp[t.id].to_string() << '\n';
    }
    if ( certificate )
        out << certificate_dump( vass, *certificate );
    return out.str();
}

std::string tree_dot( const Vass& vass, const LayerTree& tree )
{
    std::ostringstream out;
    out << "digraph layer_tree {\n  node [shape=box];\n";
    for ( const auto& n : tree.nodes() )
    {
        out << "  n" << n.id << " [label=\"{";
        for ( std::size_t i = 0; i < n.label.states.size(); ++i )
            out << ( i ? "," : "" ) << vass.state_name( n.label.states[i] );
        out << "}\\nlayers " << n.first_layer << ".." << n.last_layer << "\"];\n";
    }
    for ( const auto& n : tree.nodes() )
        for ( auto c : n.children )
            out << "  n" << n.id << " -> n" << c << ";\n";
    out << "}\n";
    return out.str();
}

std::string witness_dump( const Vass& vass, const WitnessPath& w )
{
    std::ostringstream out;
    out << "witness N=" << w.n << " k=" << w.k << '\n';
    out << "init";
    for ( const auto& v : w.initial.entries() )
        out << ' ' << v;
    out << '\n';
    const auto& steps = w.path.steps();
    for ( std::size_t i = 0; i < steps.size(); )
    {
        std::size_t j = i;
        while ( j < steps.size() && steps[j] == steps[i] )
            ++j;
        out << steps[i];
        if ( j - i > 1 )
            out << " x" << ( j - i );
        out << '\n';
        i = j;
    }
    out << "instances";
    for ( const auto& t : vass.transitions() )
        out << " t" << t.id << '=' << w.instances[t.id];
    out << "\nfinal";
    for ( const auto& v : w.final_valuation.entries() )
        out << ' ' << v;
    out << '\n';
    return out.str();
}

std::string verification_text( const WitnessVerification& v )
{
    std::ostringstream out;
    for ( const auto& c : v.checks )
    {
        out << ( c.passed ? "ok   " : "FAIL " ) << c.name;
        if ( !c.detail.empty() )
            out << ": " << c.detail;
        out << '\n';
    }
    out << "init/N = " << v.init_ratio << '\n';
    return out.str();
}

std::string certificate_dump( const Vass& vass, const ExponentialCertificate& cert )
{
    std::ostringstream out;
    out << "exponential-certificate\nU:";
    for ( auto x : cert.u )
        out << ' ' << vass.variable_name( x );
    out << "\nW:";
    for ( auto x : cert.w )
        out << ' ' << vass.variable_name( x );
    out << '\n';
    for ( const auto& c : cert.cycles )
        out << "cycle: " << cycle_text( vass, c ) << '\n';
    return out.str();
}

} // namespace vassbound
