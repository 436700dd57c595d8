#pragma once

#include "rrdps/protocol.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rrdps {

/// Receiver layout. `passive` is the splitter feeding L-1 fixed-delay
/// interferometers; `active` is one interferometer with a switched delay.
enum class Setup : std::uint8_t { passive, active };

struct ChannelModel {
    double system_loss_db = 12.7; ///< detector efficiency and receiver optics
    double channel_loss_db = 0.0;
    double dark_prob = 4e-10;     ///< per detector, per windowed slot
    double e_sys = 0.015;
    double f_ec = 1.1;
    Setup setup = Setup::passive;

    void validate() const;

    /// Overall transmittance 10^(-(system + channel loss)/10).
    [[nodiscard]] double transmittance() const;
};

/// Dark-click probability of one detector in one time window.
double dark_probability(double dark_counts_per_s, double window_s);

struct RunStatistics {
    std::uint64_t n_emitted = 0;       ///< packets sent
    std::uint64_t n_sifted = 0;        ///< sifted key length
    std::uint64_t n_bit_errors = 0;
    std::uint64_t n_double_clicks = 0;

    void validate() const;

    [[nodiscard]] double sifted_rate() const;
    [[nodiscard]] double bit_error_rate() const;

    RunStatistics &operator+=(const RunStatistics &other) noexcept;
    friend bool operator==(const RunStatistics &, const RunStatistics &) = default;
};

struct AsymptoticResult {
    double e_src = 0.0;
    double q_d = 0.0;
    std::optional<double> e_ph_prime; ///< unset when the source term alone exceeds 1
    double secure_length = 0.0;       ///< max(raw, 0)
    double raw_secure_length = 0.0;
    double rate_per_pulse = 0.0;      ///< secure_length / (L * N_em)
    double raw_rate_per_pulse = 0.0;
    bool no_key_possible = false;
};

/// The source-tagged fraction of the sifted key exceeds one.
class NoKeyPossible : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// h(x) = -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0.
double binary_entropy(double x);

/// Probability that a Poissonian packet of mean L*mu holds more than nu_th
/// photons.
double source_tail_esrc(const ProtocolParams &params);

/// 8 N_d / N clamped to [0, 1].
double double_click_fraction(const RunStatistics &stats);

/// Phase error rate bound for a source satisfying the e_src tail.
///
/// Throws NoKeyPossible when e_src / (Q (1 - q_d)) exceeds one.
double phase_error_rate(double e_src, double Q, double q_d, const ProtocolParams &params);

/// Secure key length G = N[1 - f h(e_bit) - q_d - (1 - q_d) h(e'_ph)] for
/// measured statistics.
AsymptoticResult asymptotic_key_length(const RunStatistics &stats, const ProtocolParams &params,
                                       double f_ec);

// ---------------------------------------------------------------------------
// Channel model

/// Expected sifted bits per packet.
double model_sifted_rate(const ProtocolParams &params, const ChannelModel &channel);

/// Expected bit error rate; throws DomainError when the sifted rate is zero.
double model_bit_error(const ProtocolParams &params, const ChannelModel &channel);

/// Expected double-click probability per packet, (L mu eta)^2 / 16.
double model_double_click(const ProtocolParams &params, const ChannelModel &channel);

/// Everything the key-rate table reports for one operating point.
struct ModelKeyRate {
    double Q = 0.0;
    double e_bit = 0.0;
    double p_d = 0.0;
    double e_src = 0.0;
    double q_d = 0.0;
    std::optional<double> e_ph_prime;
    double g_over_n = 0.0;       ///< raw, may be negative
    double rate_per_pulse = 0.0; ///< raw G / (L N_em), may be negative
    bool no_key_possible = false;
};

/// Expected asymptotic key rate under the channel model, with q_d = 8 p_d / Q.
ModelKeyRate model_key_rate(const ProtocolParams &params, const ChannelModel &channel);

/// Statistics a run of `n_sifted` sifted bits would show under the model,
/// rounded to whole counts.
RunStatistics synthesize_statistics(const ProtocolParams &params, const ChannelModel &channel,
                                    std::uint64_t n_sifted);

// ---------------------------------------------------------------------------
// Optimisation

struct MuSearch {
    double log10_mu_min = -8.0;
    double log10_mu_max = 0.0;
    int grid_points = 321;
    double rel_tolerance = 1e-3;
};

struct OptimizeResult {
    double mu = 0.0;
    int nu_th = 1;
    double rate_per_pulse = 0.0; ///< 0 when no positive key exists
    double raw_rate_per_pulse = 0.0;
    bool positive_key = false;
};

/// Default threshold candidates {1, ..., 10}.
std::vector<int> default_nu_th_candidates();

/// Maximises the modelled rate per pulse over mu and the candidate thresholds.
/// `params.mu` and `params.nu_th` are ignored.
OptimizeResult optimize_mu(const ProtocolParams &params, const ChannelModel &channel,
                           const std::vector<int> &nu_th_candidates = default_nu_th_candidates(),
                           const MuSearch &search = {});

/// Active-setup channel used for the tolerable-error table: 12.7 dB system,
/// 4.7 dB fibre, 2 cps dark counts in a 200 ps window, f = 1.1.
ChannelModel tolerable_error_channel();

/// Largest e_sys that still gives a positive optimised key rate, found by
/// bisection to `tolerance`.
double max_tolerable_esys(int L, const ChannelModel &channel_template = tolerable_error_channel(),
                          double tolerance = 1e-4);

} // namespace rrdps
