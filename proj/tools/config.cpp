#include "config.hpp"

#include "rrdps/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

namespace rrdps::cli {

ConfigError::ConfigError(std::string key, const std::string &what)
    : std::runtime_error(fmt::format("{}: {}", key, what)), key_(std::move(key)) {}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T> T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty())
        throw ConfigError(std::string(key), fmt::format("cannot read '{}' as a number", text));
    return value;
}

std::string number(double x) { return fmt::format("{}", x); }

} // namespace

const std::vector<std::string> &config_keys() {
    static const std::vector<std::string> keys = {
        "protocol.L",       "protocol.mu",      "protocol.nu_th", "channel.system_loss_db",
        "channel.channel_loss_db", "channel.dark_cps", "channel.window_s", "channel.e_sys",
        "channel.f_ec",     "channel.setup",
    };
    return keys;
}

std::string_view setup_name(Setup s) { return s == Setup::active ? "active" : "passive"; }

void Config::set(std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "protocol.L")
        L = parse_number<int>(key, value);
    else if (key == "protocol.mu")
        mu = parse_number<double>(key, value);
    else if (key == "protocol.nu_th")
        nu_th = parse_number<int>(key, value);
    else if (key == "channel.system_loss_db")
        system_loss_db = parse_number<double>(key, value);
    else if (key == "channel.channel_loss_db")
        channel_loss_db = parse_number<double>(key, value);
    else if (key == "channel.dark_cps")
        dark_cps = parse_number<double>(key, value);
    else if (key == "channel.window_s")
        window_s = parse_number<double>(key, value);
    else if (key == "channel.e_sys")
        e_sys = parse_number<double>(key, value);
    else if (key == "channel.f_ec")
        f_ec = parse_number<double>(key, value);
    else if (key == "channel.setup") {
        if (value == "passive")
            setup = Setup::passive;
        else if (value == "active")
            setup = Setup::active;
        else
            throw ConfigError(std::string(key), fmt::format("expected passive or active, got '{}'", value));
    } else
        throw ConfigError(std::string(key), "unknown key");
}

ProtocolParams Config::params() const {
    ProtocolParams p;
    p.L = L;
    p.mu = mu.value_or(0.0);
    p.nu_th = nu_th.value_or(1);
    return p;
}

ChannelModel Config::channel() const {
    ChannelModel ch;
    ch.system_loss_db = system_loss_db;
    ch.channel_loss_db = channel_loss_db;
    ch.dark_prob = dark_probability(dark_cps, window_s);
    ch.e_sys = e_sys;
    ch.f_ec = f_ec;
    ch.setup = setup;
    return ch;
}

void Config::validate() const {
    auto check = [](bool ok, const char *key, const char *what) {
        if (!ok)
            throw ConfigError(key, what);
    };
    check(L >= 2, "protocol.L", "must be at least 2");
    check(!mu || *mu >= 0.0, "protocol.mu", "must be non-negative");
    check(!nu_th || *nu_th >= 1, "protocol.nu_th", "must be at least 1");
    check(system_loss_db >= 0.0, "channel.system_loss_db", "must be non-negative");
    check(channel_loss_db >= 0.0, "channel.channel_loss_db", "must be non-negative");
    check(dark_cps >= 0.0, "channel.dark_cps", "must be non-negative");
    check(window_s >= 0.0, "channel.window_s", "must be non-negative");
    check(e_sys >= 0.0 && e_sys <= 0.5, "channel.e_sys", "must lie in [0, 0.5]");
    check(f_ec >= 1.0, "channel.f_ec", "must be at least 1");
}

Config parse_config(std::istream &in) {
    Config config;
    std::unordered_set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#')
            continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(std::string(text), fmt::format("line {}: expected 'key = value'", line_no));
        const std::string key(trim(text.substr(0, eq)));
        if (!seen.insert(key).second)
            throw ConfigError(key, fmt::format("line {}: duplicate key", line_no));
        config.set(key, text.substr(eq + 1));
    }
    config.validate();
    return config;
}

Config parse_config_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_config(in);
}

Config load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path, "cannot open config file");
    return parse_config(in);
}

std::string serialize_config(const Config &c) {
    std::string out;
    auto line = [&out](std::string_view key, const std::string &value) {
        out += fmt::format("{} = {}\n", key, value);
    };
    line("protocol.L", std::to_string(c.L));
    if (c.mu)
        line("protocol.mu", number(*c.mu));
    if (c.nu_th)
        line("protocol.nu_th", std::to_string(*c.nu_th));
    line("channel.system_loss_db", number(c.system_loss_db));
    line("channel.channel_loss_db", number(c.channel_loss_db));
    line("channel.dark_cps", number(c.dark_cps));
    line("channel.window_s", number(c.window_s));
    line("channel.e_sys", number(c.e_sys));
    line("channel.f_ec", number(c.f_ec));
    line("channel.setup", std::string(setup_name(c.setup)));
    return out;
}

} // namespace rrdps::cli
