#include "rrdps/simulator.hpp"

#include "rrdps/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace rrdps {

using detail::require;

namespace {

std::uint64_t splitmix64(std::uint64_t &state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

__extension__ typedef unsigned __int128 uint128;

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

} // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t sm = seed;
    const std::uint64_t mixed = splitmix64(sm) ^ (stream * 0xd1b54a32d192ed03ULL);
    sm = mixed;
    for (auto &word : s_)
        word = splitmix64(sm);
}

StreamRng::result_type StreamRng::operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double StreamRng::uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t StreamRng::below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<uint128>((*this)()) * n) >> 64);
}

void SimConfig::validate() const {
    params.validate();
    channel.validate();
    require(n_packets >= 1, "SimConfig: n_packets must be at least 1");
    require(workers >= 1, "SimConfig: workers must be at least 1");
    if (const auto *fixed = std::get_if<FixedPhases>(&phase_source))
        require(fixed->pattern.size() == params.L, "SimConfig: fixed phase pattern must have L bits");
    if (group_map)
        require(group_map->L() == params.L, "SimConfig: group map does not match L");
}

bool SimReport::same_outcome(const SimReport &other) const {
    return stats == other.stats && per_delay_counts == other.per_delay_counts &&
           per_delay_errors == other.per_delay_errors && n_discarded == other.n_discarded && seed == other.seed;
}

namespace {

// Inverse-transform Poisson draw; the means used here are small.
std::uint64_t draw_poisson(StreamRng &rng, double mean) {
    if (mean <= 0.0)
        return 0;
    const double u = rng.uniform();
    double term = std::exp(-mean);
    double cdf = term;
    std::uint64_t k = 0;
    while (u >= cdf) {
        ++k;
        term *= mean / static_cast<double>(k);
        const double next = cdf + term;
        if (next == cdf)
            break;
        cdf = next;
    }
    return k;
}

// Inverse-transform binomial draw for small n.
std::uint64_t draw_binomial(StreamRng &rng, std::uint64_t n, double p) {
    if (p <= 0.0 || n == 0)
        return 0;
    if (p >= 1.0)
        return n;
    const double u = rng.uniform();
    const double ratio = p / (1.0 - p);
    double term = std::pow(1.0 - p, static_cast<double>(n));
    double cdf = term;
    std::uint64_t k = 0;
    while (u >= cdf && k < n) {
        term *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
        ++k;
        cdf += term;
    }
    return k;
}

struct Cell {
    int delay;
    int slot;
    std::uint8_t port;
};

// All (delay, interference slot, port) cells of one packet; L(L-1) of them.
std::vector<Cell> enumerate_cells(int L) {
    std::vector<Cell> cells;
    for (int M = 1; M < L; ++M)
        for (int s = M; s < L; ++s)
            for (std::uint8_t port : {std::uint8_t{0}, std::uint8_t{1}})
                cells.push_back({M, s, port});
    return cells;
}

PhasePattern random_pattern(StreamRng &rng, int L) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(L));
    std::uint64_t word = 0;
    for (int k = 0; k < L; ++k) {
        if (k % 64 == 0)
            word = rng();
        bits[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>((word >> (k % 64)) & 1U);
    }
    return PhasePattern(std::move(bits));
}

class PacketSimulator {
  public:
    explicit PacketSimulator(const SimConfig &config)
        : config_(config),
          groups_(config.group_map ? *config.group_map : DelayGroupMap::standard(config.params.L)),
          cells_(enumerate_cells(config.params.L)), eta_(config.channel.transmittance()),
          mean_photons_(config.params.L * config.params.mu) {}

    void run(std::uint64_t first, std::uint64_t last, SimReport &out) {
        const int L = config_.params.L;
        out.per_delay_counts.assign(static_cast<std::size_t>(L - 1), 0);
        out.per_delay_errors.assign(static_cast<std::size_t>(L - 1), 0);
        for (std::uint64_t id = first; id < last; ++id)
            packet(id, out);
    }

  private:
    void add_click(std::uint64_t id, int M, int slot, std::uint8_t port) {
        for (const auto &e : events_)
            if (e.delay == M && e.output_slot == slot && e.port == port)
                return;
        events_.push_back({id, slot, M, port, groups_.group(M)});
    }

    void packet(std::uint64_t id, SimReport &out) {
        const int L = config_.params.L;
        StreamRng rng(config_.seed, id);
        events_.clear();

        const auto *fixed = std::get_if<FixedPhases>(&config_.phase_source);
        if (!fixed)
            random_ = random_pattern(rng, L);
        const PhasePattern &pattern = fixed ? fixed->pattern : random_;

        const std::uint64_t photons = draw_poisson(rng, mean_photons_);
        for (std::uint64_t i = 0; i < photons; ++i) {
            if (rng.uniform() >= eta_)
                continue;
            const int pulse = static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
            const int M = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(L - 1)));
            const bool long_arm = (rng() >> 63) != 0;
            const int slot = long_arm ? pulse + M : pulse;
            if (slot < M || slot >= L)
                continue;
            auto port = interference_bit(pattern, M, slot);
            if (rng.uniform() < config_.channel.e_sys)
                port ^= 1U;
            add_click(id, M, slot, port);
        }

        const std::uint64_t darks = draw_binomial(rng, cells_.size(), config_.channel.dark_prob);
        if (darks > 0) {
            // distinct cells, uniformly without replacement
            std::vector<std::uint64_t> picked;
            while (picked.size() < darks) {
                const std::uint64_t c = rng.below(cells_.size());
                if (std::find(picked.begin(), picked.end(), c) == picked.end())
                    picked.push_back(c);
            }
            for (auto c : picked)
                add_click(id, cells_[c].delay, cells_[c].slot, cells_[c].port);
        }

        out.stats.n_emitted += 1;
        const auto outcome = sift_packet(events_, pattern);
        if (const auto *s = std::get_if<sift::Sifted>(&outcome)) {
            const auto idx = static_cast<std::size_t>(s->record.delay - 1);
            out.stats.n_sifted += 1;
            out.per_delay_counts[idx] += 1;
            if (s->record.is_error()) {
                out.stats.n_bit_errors += 1;
                out.per_delay_errors[idx] += 1;
            }
        } else if (std::holds_alternative<sift::DoubleClick>(outcome)) {
            out.stats.n_double_clicks += 1;
        } else if (std::holds_alternative<sift::Discard>(outcome)) {
            out.n_discarded += 1;
        }
    }

    const SimConfig &config_;
    DelayGroupMap groups_;
    std::vector<Cell> cells_;
    double eta_;
    double mean_photons_;
    std::vector<DetectionEvent> events_;
    PhasePattern random_;
};

void merge_into(SimReport &total, const SimReport &part) {
    total.stats += part.stats;
    total.n_discarded += part.n_discarded;
    for (std::size_t i = 0; i < total.per_delay_counts.size(); ++i) {
        total.per_delay_counts[i] += part.per_delay_counts[i];
        total.per_delay_errors[i] += part.per_delay_errors[i];
    }
}

} // namespace

SimReport simulate(const SimConfig &config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    const std::uint64_t workers = std::min<std::uint64_t>(config.workers, config.n_packets);
    std::vector<SimReport> parts(workers);
    const std::uint64_t chunk = config.n_packets / workers;
    const std::uint64_t extra = config.n_packets % workers;

    auto bounds = [&](std::uint64_t w) {
        const std::uint64_t first = w * chunk + std::min(w, extra);
        return std::pair{first, first + chunk + (w < extra ? 1 : 0)};
    };

    if (workers == 1) {
        PacketSimulator(config).run(0, config.n_packets, parts[0]);
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::uint64_t w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                const auto [first, last] = bounds(w);
                PacketSimulator(config).run(first, last, parts[w]);
            });
        }
    }

    SimReport report = std::move(parts[0]);
    for (std::uint64_t w = 1; w < workers; ++w)
        merge_into(report, parts[w]);
    report.seed = config.seed;
    report.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

double forced_multiphoton_trial(const ProtocolParams &params, int photons, std::uint64_t n_trials,
                                std::uint64_t seed, const std::optional<DelayGroupMap> &group_map) {
    params.validate();
    require(photons >= 0, "forced_multiphoton_trial: photon count must be non-negative");
    require(n_trials >= 100'000, "forced_multiphoton_trial: needs at least 1e5 trials");
    const int L = params.L;
    const DelayGroupMap groups = group_map ? *group_map : DelayGroupMap::standard(L);
    require(groups.L() == L, "forced_multiphoton_trial: group map does not match L");

    std::uint64_t coincidences = 0;
    for (std::uint64_t t = 0; t < n_trials; ++t) {
        StreamRng rng(seed, t);
        bool hit_a = false;
        bool hit_b = false;
        for (int i = 0; i < photons; ++i) {
            const int pulse = static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
            const int M = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(L - 1)));
            const int slot = (rng() >> 63) != 0 ? pulse + M : pulse;
            if (slot < M || slot >= L)
                continue;
            (groups.group(M) == ChannelGroup::A ? hit_a : hit_b) = true;
        }
        if (hit_a && hit_b)
            ++coincidences;
    }
    return static_cast<double>(coincidences) / static_cast<double>(n_trials);
}

} // namespace rrdps
