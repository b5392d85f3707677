#pragma once

// JSON reports, loop polylines and static SVG plots.

#include <string>
#include <vector>

#include "json.hpp"

#include "gnglab/analysis.hpp"
#include "gnglab/flow.hpp"
#include "gnglab/pushforward.hpp"
#include "gnglab/rate_evolution.hpp"

namespace gnglab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Object with schema_version and kind set; callers add the payload.
Json report_header(const std::string& kind);

/// Two-space indented, newline terminated. Non-finite numbers become null.
std::string dump_json(const Json& j);

Json to_json(const ModelSpec& model);
Json to_json(const RateFunctionSpec& spec);
Json to_json(const IntegratorConfig& config);
Json to_json(const FlowResult& r);
Json to_json(const OverhangReport& rep);
Json to_json(const std::vector<NondiffPoint>& points);
Json to_json(const HeatingReport& rep);
Json to_json(const OrderRegion& region, const OrderCertificate& cert);
Json to_json(const Loop& loop);
Json to_json(const ScenarioTimeline& tl);

/// Nondiff points, certified subset and slope ranges of one profile.
Json profile_summary(const RateProfile& p, const std::vector<NondiffPoint>& certified);

/// CSV with columns side,x,p; the lower polyline first, both x-ascending.
std::string loop_csv(const Loop& loop);

/// Overlay of rate profiles sharing one x axis, one colour per profile.
std::string svg_rate_profiles(const std::vector<RateProfile>& profiles, const std::string& title);

/// Branches of one or more pushed graphs in the (x, p) plane with the
/// x-extent of every overhang region shaded.
std::string svg_pushforward(const std::vector<PushForward>& graphs, const std::string& title);

}  // namespace gnglab
