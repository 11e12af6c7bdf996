#pragma once

#include <json.hpp>

#include "gglab/belief.hpp"
#include "gglab/engine.hpp"
#include "gglab/grid.hpp"
#include "gglab/threshold.hpp"
#include "gglab/verify.hpp"

namespace gglab {

// JSON views of the public artifacts. nlohmann::json keeps keys sorted and
// prints doubles with the shortest round-trip representation, so identical
// inputs serialize to identical bytes.

nlohmann::json coefficients_to_json(const BeliefCoefficients& coeffs);
nlohmann::json condition_report_to_json(const ConditionReport& report);

// wall time is volatile; artifact writers leave it out so reruns are
// byte-identical
nlohmann::json diagnostics_to_json(const SolveDiagnostics& diag,
                                   bool include_wall_time = false);

nlohmann::json grid_to_json(const GridFunction& g);
GridFunction grid_from_json(const nlohmann::json& j);

nlohmann::json solution_to_json(const GameParams& params,
                                const ThresholdFunction& tf);
std::pair<GameParams, ThresholdFunction> solution_from_json(const nlohmann::json& j);

nlohmann::json observation_to_json(const ObservationVector& y);
nlohmann::json best_response_to_json(const BestResponseReport& report);
nlohmann::json verification_to_json(const VerificationSummary& summary);
nlohmann::json witness_to_json(const WitnessResult& result);
nlohmann::json playout_to_json(const PlayoutResult& result);

}  // namespace gglab
