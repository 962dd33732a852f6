// Internal JSON (de)serializers for the config structs. Kept out of the
// public headers so the json dependency stays private to the library.
#pragma once

#include "navmem/config.hpp"
#include "navmem/errors.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace navmem::cfgjson {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& path);

json to_json(const MergeConfig& c);
json to_json(const FeatureConfig& c);
json to_json(const LatencyModel& c);
json to_json(const GenConfig& c);
json to_json(const ProfileConfig& c);
json to_json(const RunConfig& c);

void from_json(const json& j, MergeConfig& c, const std::string& path);
void from_json(const json& j, FeatureConfig& c, const std::string& path);
void from_json(const json& j, LatencyModel& c, const std::string& path);
void from_json(const json& j, GenConfig& c, const std::string& path);
void from_json(const json& j, ProfileConfig& c, const std::string& path);
void from_json(const json& j, RunConfig& c, const std::string& path);

} // namespace navmem::cfgjson
