#pragma once

// Canonical JSON documents for results and their parts. Output is UTF-8
// with sorted keys and LF line endings; parsing throws FormatError.

#include <string>
#include <string_view>

#include "camf/types.hpp"

namespace camf {

std::string to_json_string(const DetectionResult& result, int indent = 2);
std::string to_json_string(const ProfileSet& profiles, int indent = 2);
std::string to_json_string(const ProbingTranscript& transcript, int indent = 2);
std::string to_json_string(const PipelineConfig& config, int indent = 2);

DetectionResult detection_result_from_json(std::string_view text);
ProfileSet profile_set_from_json(std::string_view text);
ProbingTranscript transcript_from_json(std::string_view text);
PipelineConfig pipeline_config_from_json(std::string_view text);

}  // namespace camf
