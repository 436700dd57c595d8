#include "rrdps/protocol.hpp"

#include "rrdps/errors.hpp"

#include <string>
#include <utility>

namespace rrdps {

using detail::require;

void ProtocolParams::validate() const {
    require(L >= 2, "ProtocolParams: L must be at least 2");
    require(nu_th >= 1, "ProtocolParams: nu_th must be at least 1");
    require(mu >= 0.0, "ProtocolParams: mu must be non-negative");
}

PhasePattern::PhasePattern(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_)
        require(b <= 1, "PhasePattern: bits must be 0 or 1");
}

PhasePattern::PhasePattern(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) {
        require(b == 0 || b == 1, "PhasePattern: bits must be 0 or 1");
        bits_.push_back(static_cast<std::uint8_t>(b));
    }
}

DelayGroupMap DelayGroupMap::standard(int L) {
    require(L >= 2, "DelayGroupMap: L must be at least 2");
    std::vector<ChannelGroup> groups(static_cast<std::size_t>(L - 1));
    if (L == 5) {
        groups = {ChannelGroup::A, ChannelGroup::B, ChannelGroup::B, ChannelGroup::A};
    } else {
        for (int M = 1; M < L; ++M)
            groups[static_cast<std::size_t>(M - 1)] = (M % 2 == 1) ? ChannelGroup::A : ChannelGroup::B;
    }
    return DelayGroupMap(std::move(groups));
}

DelayGroupMap::DelayGroupMap(std::vector<ChannelGroup> groups) : groups_(std::move(groups)) {
    require(!groups_.empty(), "DelayGroupMap: needs at least one delay");
}

ChannelGroup DelayGroupMap::group(int M) const {
    require(M >= 1 && M <= static_cast<int>(groups_.size()), "DelayGroupMap: delay out of range");
    return groups_[static_cast<std::size_t>(M - 1)];
}

std::uint8_t interference_bit(const PhasePattern &pattern, int M, int s) {
    const int L = pattern.size();
    require(M >= 1 && M <= L - 1, "interference_bit: delay out of range");
    require(s >= M && s <= L - 1, "interference_bit: slot is not an interference slot");
    return pattern[s - M] ^ pattern[s];
}

std::vector<int> valid_slots(int L, int M) {
    require(M >= 1 && M <= L - 1, "valid_slots: delay out of range");
    std::vector<int> slots;
    slots.reserve(static_cast<std::size_t>(L - M));
    for (int s = M; s < L; ++s)
        slots.push_back(s);
    return slots;
}

int routing_weight(int L, int M, int k) {
    require(M >= 1 && M <= L - 1, "routing_probability: delay out of range");
    require(k >= 1 && k <= L, "routing_probability: pulse index out of range");
    // short arm leaves in slot k-1, long arm in slot k-1+M (0-indexed)
    return (k > M ? 1 : 0) + (k <= L - M ? 1 : 0);
}

double routing_probability(int L, int M, int k) {
    return static_cast<double>(routing_weight(L, M, k)) / (2.0 * (L - 1));
}

SiftOutcome sift_packet(std::span<const DetectionEvent> events, const PhasePattern &pattern) {
    const int L = pattern.size();
    for (const auto &e : events) {
        require(e.packet_id == events.front().packet_id, "sift_packet: events span several packets");
        require(e.delay >= 1 && e.delay <= L - 1, "sift_packet: delay out of range");
        require(e.output_slot >= e.delay && e.output_slot <= L - 1,
                "sift_packet: event outside the interference slots");
        require(e.port <= 1, "sift_packet: port must be 0 or 1");
    }

    if (events.empty())
        return sift::NoClick{};

    if (events.size() == 1) {
        const auto &e = events.front();
        return sift::Sifted{SiftedRecord{
            .packet_id = e.packet_id,
            .output_slot = e.output_slot,
            .delay = e.delay,
            .bob_bit = e.port,
            .alice_bit = interference_bit(pattern, e.delay, e.output_slot),
        }};
    }

    for (const auto &e : events)
        if (e.group != events.front().group)
            return sift::DoubleClick{};
    return sift::Discard{};
}

} // namespace rrdps
