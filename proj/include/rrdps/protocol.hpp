#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <variant>
#include <vector>

namespace rrdps {

/// Static configuration of one protocol instance.
struct ProtocolParams {
    int L = 5;           ///< pulses per packet
    double mu = 0.0;     ///< mean photon number per pulse
    int nu_th = 1;       ///< photon-number threshold of the source bound
    double pulse_interval_s = 0.5e-9;

    /// Throws PreconditionError unless L >= 2, nu_th >= 1 and mu >= 0.
    void validate() const;
};

/// Phase bits of one packet; bit k set means phase pi on pulse k.
class PhasePattern {
  public:
    PhasePattern() = default;
    explicit PhasePattern(std::vector<std::uint8_t> bits);
    PhasePattern(std::initializer_list<int> bits);

    [[nodiscard]] int size() const noexcept { return static_cast<int>(bits_.size()); }
    [[nodiscard]] std::uint8_t operator[](int k) const { return bits_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    friend bool operator==(const PhasePattern &, const PhasePattern &) = default;

  private:
    std::vector<std::uint8_t> bits_;
};

/// Which pair of multiplexed detectors a delay is read out on.
enum class ChannelGroup : std::uint8_t { A, B };

/// Assignment of each delay M in [1, L-1] to a readout group.
class DelayGroupMap {
  public:
    /// For L = 5 this is the {T,4T} -> A, {2T,3T} -> B multiplexing; for any
    /// other L odd delays go to A and even delays to B.
    static DelayGroupMap standard(int L);

    /// `groups[M - 1]` is the group of delay M.
    explicit DelayGroupMap(std::vector<ChannelGroup> groups);

    [[nodiscard]] int L() const noexcept { return static_cast<int>(groups_.size()) + 1; }
    [[nodiscard]] ChannelGroup group(int M) const;

  private:
    std::vector<ChannelGroup> groups_;
};

struct DetectionEvent {
    std::uint64_t packet_id = 0;
    int output_slot = 0; ///< within-packet slot, later-pulse convention
    int delay = 1;       ///< M
    std::uint8_t port = 0;
    ChannelGroup group = ChannelGroup::A;

    friend bool operator==(const DetectionEvent &, const DetectionEvent &) = default;
};

struct SiftedRecord {
    std::uint64_t packet_id = 0;
    int output_slot = 0;
    int delay = 1;
    std::uint8_t bob_bit = 0;
    std::uint8_t alice_bit = 0;

    [[nodiscard]] bool is_error() const noexcept { return bob_bit != alice_bit; }
    friend bool operator==(const SiftedRecord &, const SiftedRecord &) = default;
};

namespace sift {
struct NoClick {
    friend bool operator==(NoClick, NoClick) = default;
};
struct Sifted {
    SiftedRecord record;
    friend bool operator==(const Sifted &, const Sifted &) = default;
};
struct DoubleClick {
    friend bool operator==(DoubleClick, DoubleClick) = default;
};
struct Discard {
    friend bool operator==(Discard, Discard) = default;
};
} // namespace sift

using SiftOutcome = std::variant<sift::NoClick, sift::Sifted, sift::DoubleClick, sift::Discard>;

/// Bit read at output slot `s` of the delay-`M` interferometer: the XOR of the
/// phase bits of pulses s-M and s.
std::uint8_t interference_bit(const PhasePattern &pattern, int M, int s);

/// Output slots {M, ..., L-1} where both interfering pulses are in the packet.
std::vector<int> valid_slots(int L, int M);

/// Number of interference-slot exits (0, 1 or 2) available to a photon in the
/// 1-indexed pulse `k` behind the delay-`M` interferometer. The routing
/// probability is this count divided by 2(L-1).
int routing_weight(int L, int M, int k);

/// Probability that a photon in pulse `k` (1-indexed) goes to the delay-`M`
/// interferometer and exits in an interference slot.
double routing_probability(int L, int M, int k);

/// Classifies the interference-slot clicks of one packet.
///
/// Exactly one click yields a key bit. Several clicks spread over both readout
/// groups form a double click; several clicks confined to one group are
/// dropped without counting as a double click.
SiftOutcome sift_packet(std::span<const DetectionEvent> events, const PhasePattern &pattern);

} // namespace rrdps
