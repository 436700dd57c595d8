#pragma once

#include "config.hpp"

#include "rrdps/asymptotic.hpp"
#include "rrdps/finite.hpp"
#include "rrdps/simulator.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace rrdps::cli {

using nlohmann::json;

/// Everything needed to reproduce one command run, plus what it produced.
struct RunRecord {
    std::string command;
    Config config;
    json inputs = json::object(); ///< command-specific flags (seed, packets, ...)
    json outputs = json::object();
    std::string timestamp;        ///< UTC, ISO 8601
    std::string input_hash;       ///< see input_hash()

    friend bool operator==(const RunRecord &, const RunRecord &) = default;
};

/// Git blob SHA-1 of the canonical command, config and inputs text.
std::string input_hash(const std::string &command, const Config &config, const json &inputs);

/// Fills in the hash and the current time.
RunRecord make_record(std::string command, const Config &config, json inputs, json outputs);

json to_json(const RunRecord &record);
RunRecord record_from_json(const json &j);

/// Writes `<dir>/<input_hash>.json` and returns the path.
std::filesystem::path write_record(const std::filesystem::path &dir, const RunRecord &record);

json config_to_json(const Config &config);
Config config_from_json(const json &j);

json to_json(const RunStatistics &stats);
RunStatistics stats_from_json(const json &j);

json to_json(const AsymptoticResult &r);
json to_json(const ModelKeyRate &r);
json to_json(const FiniteKeyResult &r);

/// The reproducible part of a simulation report; the wall-clock time is left out.
json to_json(const SimReport &r);

} // namespace rrdps::cli
