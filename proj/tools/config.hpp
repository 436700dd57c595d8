#pragma once

#include "rrdps/asymptotic.hpp"
#include "rrdps/protocol.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rrdps::cli {

/// Bad key or value in a config file or override flag.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string key, const std::string &what);
    [[nodiscard]] const std::string &key() const noexcept { return key_; }

  private:
    std::string key_;
};

/// Flat key = value run configuration.
///
///     protocol.L               packet length (pulses)
///     protocol.mu              mean photon number per pulse; optimised when absent
///     protocol.nu_th           photon-number threshold; optimised when absent
///     channel.system_loss_db
///     channel.channel_loss_db
///     channel.dark_cps         dark counts per second per detector
///     channel.window_s         detection window
///     channel.e_sys
///     channel.f_ec
///     channel.setup            passive | active
///
/// Blank lines and lines starting with '#' are ignored.
struct Config {
    int L = 5;
    std::optional<double> mu;
    std::optional<int> nu_th;
    double system_loss_db = 12.7;
    double channel_loss_db = 0.0;
    double dark_cps = 2.0;
    double window_s = 200e-12;
    double e_sys = 0.015;
    double f_ec = 1.1;
    Setup setup = Setup::passive;

    /// Sets one key from its text value.
    void set(std::string_view key, std::string_view value);

    /// Params with mu and nu_th filled in (0 and 1 when absent).
    [[nodiscard]] ProtocolParams params() const;
    [[nodiscard]] ChannelModel channel() const;

    /// Throws ConfigError naming the first key whose value is out of range.
    void validate() const;

    friend bool operator==(const Config &, const Config &) = default;
};

const std::vector<std::string> &config_keys();

Config parse_config(std::istream &in);
Config parse_config_text(std::string_view text);
Config load_config(const std::string &path);

/// Canonical text form: every present key in schema order, numbers in
/// shortest round-trip form.
std::string serialize_config(const Config &config);

std::string_view setup_name(Setup s);

} // namespace rrdps::cli
