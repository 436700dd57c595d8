#include "record.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/sha.h>

#include <chrono>
#include <fstream>

namespace rrdps::cli {

namespace {

json optional_number(const std::optional<double> &x) { return x ? json(*x) : json(nullptr); }

} // namespace

std::string input_hash(const std::string &command, const Config &config, const json &inputs) {
    const std::string body = fmt::format("command = {}\n{}inputs = {}\n", command, serialize_config(config),
                                         inputs.dump());
    const std::string blob = fmt::format("blob {}", body.size()) + '\0' + body;

    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char *>(blob.data()), blob.size(), digest);
    std::string hex;
    for (unsigned char byte : digest)
        hex += fmt::format("{:02x}", byte);
    return hex;
}

RunRecord make_record(std::string command, const Config &config, json inputs, json outputs) {
    RunRecord r;
    r.input_hash = input_hash(command, config, inputs);
    r.command = std::move(command);
    r.config = config;
    r.inputs = std::move(inputs);
    r.outputs = std::move(outputs);
    const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    r.timestamp = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
    return r;
}

json config_to_json(const Config &c) {
    json j;
    j["protocol.L"] = c.L;
    j["protocol.mu"] = optional_number(c.mu);
    j["protocol.nu_th"] = c.nu_th ? json(*c.nu_th) : json(nullptr);
    j["channel.system_loss_db"] = c.system_loss_db;
    j["channel.channel_loss_db"] = c.channel_loss_db;
    j["channel.dark_cps"] = c.dark_cps;
    j["channel.window_s"] = c.window_s;
    j["channel.e_sys"] = c.e_sys;
    j["channel.f_ec"] = c.f_ec;
    j["channel.setup"] = std::string(setup_name(c.setup));
    return j;
}

Config config_from_json(const json &j) {
    Config c;
    for (const auto &[key, value] : j.items()) {
        if (value.is_null()) {
            if (key != "protocol.mu" && key != "protocol.nu_th")
                throw ConfigError(key, "null value");
            continue;
        }
        c.set(key, value.is_string() ? value.get<std::string>() : value.dump());
    }
    c.validate();
    return c;
}

json to_json(const RunRecord &r) {
    return json{{"command", r.command}, {"config", config_to_json(r.config)}, {"inputs", r.inputs},
                {"outputs", r.outputs}, {"timestamp", r.timestamp}, {"input_hash", r.input_hash}};
}

RunRecord record_from_json(const json &j) {
    RunRecord r;
    r.command = j.at("command").get<std::string>();
    r.config = config_from_json(j.at("config"));
    r.inputs = j.at("inputs");
    r.outputs = j.at("outputs");
    r.timestamp = j.at("timestamp").get<std::string>();
    r.input_hash = j.at("input_hash").get<std::string>();
    return r;
}

std::filesystem::path write_record(const std::filesystem::path &dir, const RunRecord &record) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (record.input_hash + ".json");
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << to_json(record).dump(2) << '\n';
    return path;
}

json to_json(const RunStatistics &s) {
    return json{{"n_emitted", s.n_emitted},
                {"n_sifted", s.n_sifted},
                {"n_bit_errors", s.n_bit_errors},
                {"n_double_clicks", s.n_double_clicks}};
}

RunStatistics stats_from_json(const json &j) {
    RunStatistics s;
    s.n_emitted = j.at("n_emitted").get<std::uint64_t>();
    s.n_sifted = j.at("n_sifted").get<std::uint64_t>();
    s.n_bit_errors = j.at("n_bit_errors").get<std::uint64_t>();
    s.n_double_clicks = j.at("n_double_clicks").get<std::uint64_t>();
    return s;
}

json to_json(const AsymptoticResult &r) {
    return json{{"e_src", r.e_src},
                {"q_d", r.q_d},
                {"e_ph_prime", optional_number(r.e_ph_prime)},
                {"secure_length", r.secure_length},
                {"raw_secure_length", r.raw_secure_length},
                {"rate_per_pulse", r.rate_per_pulse},
                {"raw_rate_per_pulse", r.raw_rate_per_pulse},
                {"no_key_possible", r.no_key_possible}};
}

json to_json(const ModelKeyRate &r) {
    return json{{"Q", r.Q},
                {"e_bit", r.e_bit},
                {"p_d", r.p_d},
                {"e_src", r.e_src},
                {"q_d", r.q_d},
                {"e_ph_prime", optional_number(r.e_ph_prime)},
                {"G_over_N", r.g_over_n},
                {"rate_per_pulse", r.rate_per_pulse},
                {"no_key_possible", r.no_key_possible}};
}

json to_json(const FiniteKeyResult &r) {
    return json{{"nbar_d", r.nbar_d},
                {"nbar_mB", r.nbar_mB},
                {"nbar_mA", r.nbar_mA},
                {"nbar_ph", r.nbar_ph},
                {"s_x", r.s_x},
                {"s_z", r.s_z},
                {"n_prime", r.n_prime},
                {"n_double_prime", r.n_double_prime},
                {"e_src", r.e_src},
                {"g_f", r.g_f},
                {"raw_g_f", r.raw_g_f},
                {"log2_d", r.d_bound.log2()}};
}

json to_json(const SimReport &r) {
    return json{{"stats", to_json(r.stats)},
                {"per_delay_counts", r.per_delay_counts},
                {"per_delay_errors", r.per_delay_errors},
                {"n_discarded", r.n_discarded},
                {"seed", r.seed}};
}

} // namespace rrdps::cli
