#pragma once

#include "rrdps/asymptotic.hpp"
#include "rrdps/protocol.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace rrdps {

/// Counter-based generator: every (seed, stream) pair gets its own
/// xoshiro256** state, so packets can be simulated in any order or on any
/// thread and still draw the same numbers.
class StreamRng {
  public:
    using result_type = std::uint64_t;

    StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on [0, n).
    std::uint64_t below(std::uint64_t n) noexcept;

  private:
    std::uint64_t s_[4];
};

struct RandomPhases {};
struct FixedPhases {
    PhasePattern pattern;
};
using PhaseSource = std::variant<RandomPhases, FixedPhases>;

struct SimConfig {
    ProtocolParams params;
    ChannelModel channel;
    std::uint64_t n_packets = 1;
    std::uint64_t seed = 0;
    PhaseSource phase_source = RandomPhases{};
    std::optional<DelayGroupMap> group_map; ///< DelayGroupMap::standard(L) when unset
    unsigned workers = 1;

    void validate() const;
};

struct SimReport {
    RunStatistics stats;
    std::vector<std::uint64_t> per_delay_counts; ///< sifted bits for delay M at index M-1
    std::vector<std::uint64_t> per_delay_errors;
    std::uint64_t n_discarded = 0;               ///< same-group multi-click packets
    std::uint64_t seed = 0;
    double elapsed_s = 0.0;                      ///< wall clock, not part of the outcome

    /// Equality of everything except the wall-clock time.
    [[nodiscard]] bool same_outcome(const SimReport &other) const;
};

/// Packet-level Monte Carlo of the channel model.
///
/// Photon number per packet is Poisson(L mu); each photon sits in a uniform
/// pulse, survives with the overall transmittance, and is routed to a uniform
/// delay and arm. Dark clicks hit each (delay, interference slot, port) cell
/// independently with the dark probability. A cell clicks if a photon or a
/// dark count lands in it.
SimReport simulate(const SimConfig &config);

/// Fraction of packets holding exactly `photons` received photons (no loss,
/// no dark counts) that produce clicks in both readout groups.
double forced_multiphoton_trial(const ProtocolParams &params, int photons, std::uint64_t n_trials,
                                std::uint64_t seed,
                                const std::optional<DelayGroupMap> &group_map = std::nullopt);

} // namespace rrdps
