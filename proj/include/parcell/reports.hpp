#pragma once

#include <string>

#include "parcell/observability.hpp"
#include "parcell/observer.hpp"

namespace parcell {

/// Pretty-printed JSON renderings of the analysis results. Complex numbers
/// are written as {"re": .., "im": ..}; non-finite values as null.
std::string to_json(const ObservabilityReport& report);
std::string to_json(const GainValidityReport& report);

}  // namespace parcell
