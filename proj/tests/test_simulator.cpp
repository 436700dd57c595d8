#include "rrdps/errors.hpp"
#include "rrdps/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace rrdps;

namespace {

SimConfig base_config(double mu, double dark, std::uint64_t packets, std::uint64_t seed = 1) {
    SimConfig cfg;
    cfg.params.L = 5;
    cfg.params.mu = mu;
    cfg.channel.system_loss_db = 0.0;
    cfg.channel.channel_loss_db = 0.0;
    cfg.channel.dark_prob = dark;
    cfg.channel.e_sys = 0.0;
    cfg.n_packets = packets;
    cfg.seed = seed;
    return cfg;
}

bool within_se(double observed, double expected, double se, double k = 5.0) {
    return std::abs(observed - expected) <= k * se;
}

} // namespace

TEST_SUITE("simulator") {

TEST_CASE("StreamRng streams are reproducible and distinct") {
    StreamRng a(9, 3);
    StreamRng b(9, 3);
    StreamRng c(9, 4);
    StreamRng d(10, 3);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
    StreamRng u(1, 1);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        CHECK((v >= 0.0 && v < 1.0));
        CHECK(u.below(7) < 7);
    }
}

TEST_CASE("no light and no noise gives empty statistics") {
    const auto r = simulate(base_config(0.0, 0.0, 10'000));
    CHECK(r.stats.n_emitted == 10'000);
    CHECK(r.stats.n_sifted == 0);
    CHECK(r.stats.n_bit_errors == 0);
    CHECK(r.stats.n_double_clicks == 0);
    CHECK(r.n_discarded == 0);
}

TEST_CASE("dark-count floor") {
    const double dark = 1e-4;
    const std::uint64_t n = 10'000'000;
    auto cfg = base_config(0.0, dark, n);
    cfg.workers = 4;
    const auto r = simulate(cfg);

    const double q_model = 20 * dark;
    const double q = r.stats.sifted_rate();
    CHECK(within_se(q, q_model, std::sqrt(q_model * (1 - q_model) / n)));
    const double e = r.stats.bit_error_rate();
    CHECK(within_se(e, 0.5, std::sqrt(0.25 / static_cast<double>(r.stats.n_sifted))));
}

TEST_CASE("same seed, any worker count, same outcome") {
    auto cfg = base_config(0.05, 1e-3, 200'003, 77);
    cfg.channel.system_loss_db = 3.0;
    cfg.channel.e_sys = 0.03;
    const auto one = simulate(cfg);
    for (unsigned w : {2U, 3U, 8U}) {
        cfg.workers = w;
        CHECK(simulate(cfg).same_outcome(one));
    }
    cfg.seed = 78;
    CHECK_FALSE(simulate(cfg).same_outcome(one));
}

TEST_CASE("sifted counts add up") {
    auto cfg = base_config(0.2, 1e-4, 300'000);
    cfg.channel.e_sys = 0.05;
    const auto r = simulate(cfg);
    CHECK(std::accumulate(r.per_delay_counts.begin(), r.per_delay_counts.end(), std::uint64_t{0}) == r.stats.n_sifted);
    CHECK(std::accumulate(r.per_delay_errors.begin(), r.per_delay_errors.end(), std::uint64_t{0}) ==
          r.stats.n_bit_errors);
    CHECK(r.stats.n_sifted + r.stats.n_double_clicks + r.n_discarded <= r.stats.n_emitted);
    CHECK(r.stats.n_double_clicks > 0);
    CHECK(r.n_discarded > 0);
}

TEST_CASE("noise-free runs have no bit errors") {
    auto cfg = base_config(0.3, 0.0, 200'000);
    const auto r = simulate(cfg);
    CHECK(r.stats.n_sifted > 0);
    CHECK(r.stats.n_bit_errors == 0);

    cfg.phase_source = FixedPhases{PhasePattern{0, 1, 0, 0, 0}};
    const auto fixed = simulate(cfg);
    CHECK(fixed.stats.n_sifted > 0);
    CHECK(fixed.stats.n_bit_errors == 0);
}

TEST_CASE("per-delay counts follow the routing law and balance the groups") {
    const std::uint64_t n = 2'000'000;
    auto cfg = base_config(0.02, 0.0, n);
    const auto r = simulate(cfg);
    const double total = static_cast<double>(r.stats.n_sifted);
    // delay M has 2(L - M) interference exits out of 2 * 10 in total
    for (int M = 1; M <= 4; ++M) {
        const double expected = total * (5 - M) / 10.0;
        const double observed = static_cast<double>(r.per_delay_counts[static_cast<std::size_t>(M - 1)]);
        CAPTURE(M);
        CHECK(within_se(observed, expected, std::sqrt(expected)));
    }
    const double a = static_cast<double>(r.per_delay_counts[0] + r.per_delay_counts[3]);
    const double b = static_cast<double>(r.per_delay_counts[1] + r.per_delay_counts[2]);
    CHECK(within_se(a, b, std::sqrt(a + b)));
}

TEST_CASE("double clicks need two readout groups") {
    CHECK(forced_multiphoton_trial(ProtocolParams{}, 1, 100'000, 5) == 0.0);
    const double two = forced_multiphoton_trial(ProtocolParams{}, 2, 1'000'000, 5);
    CHECK(std::abs(two - 0.125) <= 0.002);
    const double three = forced_multiphoton_trial(ProtocolParams{}, 3, 1'000'000, 6);
    CHECK(three >= 0.125 - 3.0 * std::sqrt(0.125 * 0.875 / 1e6));
    CHECK_THROWS_AS(forced_multiphoton_trial(ProtocolParams{}, 2, 1000, 5), PreconditionError);
}

TEST_CASE("configuration checks") {
    auto cfg = base_config(0.1, 0.0, 0);
    CHECK_THROWS_AS(simulate(cfg), PreconditionError);
    cfg.n_packets = 10;
    cfg.phase_source = FixedPhases{PhasePattern{0, 1}};
    CHECK_THROWS_AS(simulate(cfg), PreconditionError);
    cfg.phase_source = RandomPhases{};
    cfg.group_map = DelayGroupMap::standard(6);
    CHECK_THROWS_AS(simulate(cfg), PreconditionError);
}

}
