#pragma once

#include <string>

#include "json.hpp"
#include "orim/analysis.hpp"
#include "orim/config.hpp"
#include "orim/fit.hpp"
#include "orim/quenched.hpp"

namespace orim {

// ADL serializers so nlohmann::json(x) works for every report type.
void to_json(nlohmann::json& j, const LinearFit& x);
void to_json(nlohmann::json& j, const PressurePoint& x);
void to_json(nlohmann::json& j, const PressureCurve& x);
void to_json(nlohmann::json& j, const EscapeReport& x);
void to_json(nlohmann::json& j, const BisectionStep& x);
void to_json(nlohmann::json& j, const DimensionReport& x);
void to_json(nlohmann::json& j, const DecaySeries& x);
void to_json(nlohmann::json& j, const DecayReport& x);
void to_json(nlohmann::json& j, const ConditionalInvarianceRow& x);
void to_json(nlohmann::json& j, const LyConstants& x);
void to_json(nlohmann::json& j, const ConditionReport& x);
void to_json(nlohmann::json& j, const LambdaEstimate& x);
void to_json(nlohmann::json& j, const MeasureValue& x);
void to_json(nlohmann::json& j, const MeasureEstimate& x);
void to_json(nlohmann::json& j, const DensityEstimate& x);
void to_json(nlohmann::json& j, const RaccimEstimate& x);

// Standard output wrapper. Identical runs produce identical envelopes except
// for the wall_time field, which reproducibility checks strip.
nlohmann::json envelope(const RunConfig& cfg, double wall_seconds,
                        nlohmann::json result);

// CSV projections with printf("%.17g") formatting.
std::string pressure_csv(const PressureCurve& curve);
std::string decay_csv(const DecayReport& report);
std::string density_csv(const GridPtr& grid, const DensityEstimate& density);
std::string survivors_csv(const std::vector<double>& masses,
                          const std::vector<std::size_t>& components);

// Writes to the path, or to stdout when the path is empty. Paths ending in
// .csv must be written by the caller with the CSV projections.
void write_text(const std::string& path, const std::string& text);

}  // namespace orim
