#pragma once

#include "vassbound/vass.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vassbound
{

/// A non-negative exponent or infinity (no polynomial bound known).
class Exponent
{
public:
    Exponent() = default; // infinite
    explicit Exponent( std::uint64_t value ) : _value( value ) {}

    static Exponent infinite() { return Exponent(); }

    [[nodiscard]] bool finite() const { return _value.has_value(); }
    [[nodiscard]] std::uint64_t value() const { return _value.value(); }
    [[nodiscard]] std::string to_string() const { return finite() ? std::to_string( *_value ) : "inf"; }

    bool operator==( const Exponent& ) const = default;

private:
    std::optional<std::uint64_t> _value;
};

struct TreeNode
{
    std::size_t id = 0;
    SubVass label;
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
    std::size_t first_layer = 0;
    std::size_t last_layer = 0;

    [[nodiscard]] bool covers( std::size_t layer ) const { return first_layer <= layer && layer <= last_layer; }
};

/// Tree of sub-VASSs. A node occupies the contiguous layers of its span;
/// consecutive layers whose node is unchanged share a single node.
class LayerTree
{
public:
    LayerTree() = default;
    explicit LayerTree( SubVass root_label );

    [[nodiscard]] const std::vector<TreeNode>& nodes() const { return _nodes; }
    [[nodiscard]] const TreeNode& node( std::size_t id ) const { return _nodes.at( id ); }
    [[nodiscard]] std::size_t root() const { return 0; }
    [[nodiscard]] bool empty() const { return _nodes.empty(); }

    /// Ids of the nodes occupying `layer`, ascending.
    [[nodiscard]] std::vector<std::size_t> layer( std::size_t layer ) const;
    /// Ancestor-or-self of `id` occupying `layer`.
    [[nodiscard]] std::optional<std::size_t> ancestor_at( std::size_t id, std::size_t layer ) const;
    /// Largest layer occupied by any node.
    [[nodiscard]] std::size_t depth() const;

    std::size_t add_child( std::size_t parent, SubVass label, std::size_t layer );
    void extend( std::size_t id, std::size_t last_layer );

private:
    std::vector<TreeNode> _nodes;
};

struct ExtendedRow
{
    VarId var;
    std::size_t node;

    bool operator==( const ExtendedRow& ) const = default;
};

struct ExtendedSystem
{
    std::size_t layer = 0;
    std::vector<TransitionId> transitions; // U, ascending
    std::vector<ExtendedRow> rows;         // Var_ext
    IntegerMatrix d_ext;                   // rows x U
    IntegerMatrix f_u;                     // all states x U
};

/// Var_ext lists the copies of deeper layers first, then by node id, then
/// by variable index.
ExtendedSystem build_extended_system( const Vass& vass, const LayerTree& tree, std::size_t layer,
                                      const std::vector<Exponent>& vexp );

struct LayerSolution
{
    IntVector mu; // indexed like sys.transitions
    IntVector r;  // indexed like sys.rows
    IntVector z;  // indexed by state
    IntVector d_ext_mu;
    std::vector<TransitionId> decreasing; // R
    std::size_t mu_strict = 0;            // strict rows achieved in (I)
    std::size_t rz_strict = 0;            // strict rows achieved in (II)
};

/// Solves both constraint systems with maximal strict sets and asserts that
/// exactly one side of the dichotomy holds for every row and transition.
LayerSolution solve_layer( const Vass& vass, const ExtendedSystem& sys );

struct QuasiRankingCheck
{
    bool ok = false;
    std::vector<TransitionId> strict; // transitions where the rank strictly drops
};

QuasiRankingCheck check_quasi_ranking( const Vass& vass, const ExtendedSystem& sys, const IntVector& r,
                                       const IntVector& z );

enum class Status
{
    Polynomial,
    Exponential,
};

struct LayerAudit
{
    std::size_t layer = 0;
    std::vector<TransitionId> decreasing;
    std::vector<VarId> new_vars;
    std::size_t var_ext_size = 0;
    std::size_t mu_strict = 0;
    std::size_t rz_strict = 0;
};

struct BoundsReport
{
    Status status = Status::Polynomial;
    std::vector<Exponent> vexp; // by variable index
    std::vector<Exponent> texp; // by transition id
    std::optional<std::uint64_t> complexity_exponent;
    std::vector<LayerAudit> layers; // iterations that assigned a bound
};

struct MuRecord
{
    std::size_t layer = 0;
    IntVector mu; // by transition id, zero outside U
};

struct AnalyzeOptions
{
    bool skip_optimization = true;
    /// Called after every iteration with the system and its solution.
    std::function<void( const ExtendedSystem&, const LayerSolution& )> on_layer;
};

class NotConnectedError : public Error
{
public:
    NotConnectedError( std::string from, std::string to );

    [[nodiscard]] const std::string& from() const { return _from; }
    [[nodiscard]] const std::string& to() const { return _to; }

private:
    std::string _from;
    std::string _to;
};

struct Analysis
{
    BoundsReport report;
    LayerTree tree;
    std::vector<MuRecord> mu_archive; // one per executed iteration, ascending
    std::size_t iterations = 0;
    std::optional<std::size_t> exponential_layer;

    /// mu of the greatest executed iteration <= layer.
    [[nodiscard]] const MuRecord& mu_for_layer( std::size_t layer ) const;
};

Analysis analyze( const Vass& vass, AnalyzeOptions options = {} );

/// Smallest finite vExp(x) + tExp(t) above `layer`.
std::optional<std::size_t> next_relevant_layer( const std::vector<Exponent>& vexp, const std::vector<Exponent>& texp,
                                                std::size_t layer );

/// True iff no x, t satisfy layer < vExp(x) + tExp(t) < inf.
bool exponential_check( const std::vector<Exponent>& vexp, const std::vector<Exponent>& texp, std::size_t layer );

} // namespace vassbound
