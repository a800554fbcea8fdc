#pragma once

#include "ivobs/io.hpp"
#include "ivobs/sim.hpp"
#include "ivobs/synthesis.hpp"

namespace ivobs {

/// Finite doubles as numbers, anything else as null (JSON has no infinities).
Json number_or_null(double v);

/*
 * Gains file:
 *
 *   { "n": 2, "qc": 1, "qd": 1, "dwell": {...}, "alpha": ..., "eps": ...,
 *     "delta_x": ..., "X": [[coeffs...]...], "Uc": ..., "Ud": [matrix...],
 *     "Ld": [matrix...] }
 *
 * X and Uc are polynomial matrices (ascending coefficients per entry).
 */
Json gains_to_json(const ObserverGains& gains);
/// Throws FormatError on missing fields or inconsistent shapes.
ObserverGains gains_from_json(const Json& j);

Json margins_to_json(const DesignMargins& m);
Json design_report_to_json(const DesignReport& rep);

Json spectral_to_json(const SpectralResult& res);
Json clock_to_json(const ClockResult& res);
Json positivity_to_json(const PositivityReport& rep);
Json framing_to_json(const FramingReport& rep);

}  // namespace ivobs
