#pragma once

#include "vassbound/analyzer.hpp"
#include "vassbound/witness.hpp"

#include <optional>
#include <string>

namespace vassbound
{

/// Versioned JSON document; byte-identical for identical inputs.
std::string report_json( const Vass& vass, const BoundsReport& report,
                         const std::optional<ExponentialCertificate>& certificate = std::nullopt );

std::string report_text( const Vass& vass, const BoundsReport& report,
                         const std::optional<ExponentialCertificate>& certificate = std::nullopt );

std::string tree_dot( const Vass& vass, const LayerTree& tree );

/// Header, initial valuation, run-length encoded steps, then instance
/// counts and the final valuation.
std::string witness_dump( const Vass& vass, const WitnessPath& w );

std::string verification_text( const WitnessVerification& v );

std::string certificate_dump( const Vass& vass, const ExponentialCertificate& cert );

} // namespace vassbound
