#pragma once

// nlohmann::json conversions for the domain types. Kept out of the public
// headers; callers outside the library use the string functions declared in
// camf/serialization.hpp.

#include <json.hpp>

#include "camf/gateway.hpp"
#include "camf/types.hpp"

namespace camf::detail {

using json = nlohmann::json;

/// Compact dump with sorted keys; invalid UTF-8 is replaced rather than thrown.
std::string dump_compact(const json& j);
std::string dump_pretty(const json& j);

json to_json(const LinguisticProfile& p);
LinguisticProfile profile_from_json(const json& j);

json to_json(const ProfileSet& s);
ProfileSet profile_set_from_json(const json& j);

json to_json(const ProbingTranscript& t);
ProbingTranscript transcript_from_json(const json& j);

json to_json(const Verdict& v);
Verdict verdict_from_json(const json& j);

json to_json(const SamplingParams& s);
SamplingParams sampling_from_json(const json& j);

json to_json(const PipelineConfig& c);
PipelineConfig config_from_json(const json& j);

json to_json(const DetectionResult& r);
DetectionResult detection_result_from_json(const json& j);

json to_json(const ChatRequest& r);  // canonical form, wire top_p
json to_json(const ChatResponse& r);
ChatResponse response_from_json(const json& j);

}  // namespace camf::detail
