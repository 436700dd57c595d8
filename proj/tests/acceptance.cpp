// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "commands.hpp"
#include "fixtures.hpp"
#include "record.hpp"

#include "rrdps/asymptotic.hpp"
#include "rrdps/finite.hpp"
#include "rrdps/protocol.hpp"
#include "rrdps/simulator.hpp"

#include <fmt/format.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace rrdps;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit_s; ///< 0 for no limit
    std::function<Outcome()> check;
};

ChannelModel experimental_channel(double channel_loss_db = 0.0) {
    ChannelModel ch;
    ch.system_loss_db = 12.7;
    ch.channel_loss_db = channel_loss_db;
    ch.dark_prob = dark_probability(2.0, 200e-12);
    ch.e_sys = 0.015;
    ch.f_ec = 1.1;
    ch.setup = Setup::passive;
    return ch;
}

ProtocolParams l5() {
    ProtocolParams p;
    p.L = 5;
    return p;
}

// 1 ------------------------------------------------------------------------

Outcome tolerable_error_table() {
    const char *argv[] = {"rrdps", "table-s1"};
    std::ostringstream out;
    std::ostringstream err;
    if (cli::run(2, argv, out, err) != 0)
        return {false, "table-s1 failed: " + err.str()};

    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    bool pass = true;
    std::string detail;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        const int L = std::stoi(line.substr(0, comma));
        const double e = std::stod(line.substr(comma + 1));
        if (row >= fixtures::tolerable_esys.size() || fixtures::tolerable_esys[row].L != L)
            return {false, "unexpected row " + line};
        const double target = fixtures::tolerable_esys[row].e_sys_max;
        const bool ok = std::abs(e - target) <= 0.003;
        pass = pass && ok;
        detail += fmt::format("L={} {:.4f} (target {:.3f}){} ", L, e, target, ok ? "" : " OUT");
        ++row;
    }
    return {pass && row == fixtures::tolerable_esys.size(), detail};
}

// 2 ------------------------------------------------------------------------

Outcome loss_crossing() {
    auto rate = [](double loss) { return optimize_mu(l5(), experimental_channel(loss)).rate_per_pulse; };
    const double at_low = rate(8.2);
    const double at_high = rate(9.2);
    double lo = 8.2;
    double hi = 9.2;
    if (at_low > 0.0 && !(at_high > 0.0)) {
        while (hi - lo > 1e-3) {
            const double mid = 0.5 * (lo + hi);
            (rate(mid) > 0.0 ? lo : hi) = mid;
        }
    }
    return {at_low > 0.0 && !(at_high > 0.0),
            fmt::format("rate(8.2 dB) = {:.3g}, rate(9.2 dB) = {:.3g}, crossing near {:.3f} dB", at_low, at_high,
                        0.5 * (lo + hi))};
}

// 3 ------------------------------------------------------------------------

Outcome security_exponent() {
    const auto d = security_parameter(EpsilonBudget::defaults());
    const bool exact = d == LogProb::pow2(-50) && d.log2() == -50.0;
    return {exact, fmt::format("log2 d = {} (mantissa {}, exponent {})", d.log2(), d.mantissa(), d.exponent())};
}

// 4 ------------------------------------------------------------------------

Outcome finite_fractions() {
    struct Case {
        double loss;
        std::uint64_t n;
        double lo;
        double hi;
    };
    const Case cases[] = {{0.0, 420'000, 0.40, 0.60}, {0.0, 21'000'000, 0.90, 0.96}, {4.7, 5'100'000, 0.75, 0.85}};
    bool pass = true;
    std::string detail;
    for (const auto &c : cases) {
        const auto channel = experimental_channel(c.loss);
        const auto opt = optimize_mu(l5(), channel);
        auto params = l5();
        params.mu = opt.mu;
        params.nu_th = opt.nu_th;
        const auto stats = synthesize_statistics(params, channel, c.n);
        const auto fin = finite_key_length(stats, params, channel.f_ec, model_double_click(params, channel));
        const auto asym = asymptotic_key_length(stats, params, channel.f_ec);
        const double fraction = fin.g_f / asym.secure_length;
        const bool ok = fraction >= c.lo && fraction <= c.hi;
        pass = pass && ok;
        detail += fmt::format("{} dB N={:.2g}: {:.4f} in [{}, {}]{}; ", c.loss, static_cast<double>(c.n), fraction,
                              c.lo, c.hi, ok ? "" : " OUT");
    }
    return {pass, detail};
}

// 5 ------------------------------------------------------------------------

Outcome routing_table() {
    int matched = 0;
    for (int M = 1; M <= 4; ++M)
        for (int k = 1; k <= 5; ++k) {
            const double expected =
                fixtures::routing_eighths[static_cast<std::size_t>(M - 1)][static_cast<std::size_t>(k - 1)] / 8.0;
            if (std::abs(routing_probability(5, M, k) - expected) <= 1e-15)
                ++matched;
        }
    return {matched == 20, fmt::format("{}/20 cells", matched)};
}

// 6 ------------------------------------------------------------------------

Outcome interference_vectors() {
    int matched = 0;
    int total = 0;
    for (int packet = 0; packet < 3; ++packet) {
        std::vector<std::uint8_t> bits;
        for (int k = 0; k < 5; ++k)
            bits.push_back(static_cast<std::uint8_t>(fixtures::example_phases[static_cast<std::size_t>(5 * packet + k)]));
        const PhasePattern pattern(bits);
        for (int M = 1; M <= 4; ++M)
            for (int s = M; s < 5; ++s) {
                ++total;
                const int printed = fixtures::example_interference[static_cast<std::size_t>(M - 1)]
                                                               [static_cast<std::size_t>(5 * packet + s)];
                if (static_cast<int>(interference_bit(pattern, M, s)) == printed)
                    ++matched;
            }
    }
    return {matched == total && total == 30, fmt::format("{}/{} cells", matched, total)};
}

// 7 ------------------------------------------------------------------------

Outcome tail_oracle() {
    double worst = 0.0;
    int compared = 0;
    for (double p : {0.1, 0.25, 0.5}) {
        for (unsigned n = 0; n <= 20; ++n) {
            // count outcomes of every weight by walking all 2^n sequences
            std::vector<long double> pmf(n + 1, 0.0L);
            std::vector<std::uint64_t> count(n + 1, 0);
            for (std::uint32_t mask = 0; mask < (1U << n); ++mask)
                ++count[static_cast<std::size_t>(std::popcount(mask))];
            for (unsigned w = 0; w <= n; ++w)
                pmf[w] = static_cast<long double>(count[w]) * std::pow(static_cast<long double>(p), w) *
                         std::pow(1.0L - static_cast<long double>(p), n - w);
            for (unsigned k = 0; k <= n; ++k) {
                long double geq = 0.0L;
                long double leq = 0.0L;
                for (unsigned w = 0; w <= n; ++w)
                    (w >= k ? geq : leq) += pmf[w];
                leq += pmf[k];
                const double got_geq = tail_geq(k, n, p, TailMode::exact).linear();
                const double got_leq = tail_leq(k, n, p, TailMode::exact).linear();
                worst = std::max(worst, static_cast<double>(std::abs((got_geq - geq) / geq)));
                worst = std::max(worst, static_cast<double>(std::abs((got_leq - leq) / leq)));
                compared += 2;
            }
        }
    }
    const bool exact_ok = worst <= 1e-12;

    std::mt19937_64 rng(20260101);
    std::uniform_int_distribution<std::uint64_t> pick_n(9'000, exact_tail_limit);
    std::uniform_real_distribution<double> pick_p(0.01, 0.5);
    int bounded = 0;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t n = pick_n(rng);
        const double p = pick_p(rng);
        const auto mean = static_cast<std::uint64_t>(std::ceil(n * p));
        std::uniform_int_distribution<std::uint64_t> pick_k(mean, std::min<std::uint64_t>(n, mean + mean / 4 + 50));
        const std::uint64_t k = pick_k(rng);
        const bool geq_ok = tail_geq(k, n, p, TailMode::chernoff) >= tail_geq(k, n, p, TailMode::exact);
        const std::uint64_t k_low = 2 * mean > k ? 2 * mean - k : 0;
        const bool leq_ok = tail_leq(k_low, n, p, TailMode::chernoff) >= tail_leq(k_low, n, p, TailMode::exact);
        if (geq_ok && leq_ok)
            ++bounded;
    }
    return {exact_ok && bounded == 100,
            fmt::format("{} exact tails, worst relative error {:.2e}; Chernoff bounds exact in {}/100 cases",
                        compared, worst, bounded)};
}

// 8 ------------------------------------------------------------------------

Outcome monte_carlo() {
    const auto channel = experimental_channel();

    SimConfig cfg;
    cfg.params = l5();
    cfg.params.mu = 0.1;
    cfg.channel = channel;
    cfg.n_packets = 10'000'000;
    cfg.seed = 1;
    cfg.workers = std::max(1U, std::thread::hardware_concurrency());
    const auto r = simulate(cfg);

    const double n = static_cast<double>(r.stats.n_emitted);
    const double q_model = model_sifted_rate(cfg.params, channel);
    const double e_model = model_bit_error(cfg.params, channel);
    const double pd_model = model_double_click(cfg.params, channel);
    const double q = r.stats.sifted_rate();
    const double e = r.stats.bit_error_rate();
    const double pd = static_cast<double>(r.stats.n_double_clicks) / n;
    const double q_z = (q - q_model) / std::sqrt(q_model * (1 - q_model) / n);
    const double e_z = (e - e_model) / std::sqrt(e_model * (1 - e_model) / static_cast<double>(r.stats.n_sifted));
    const double pd_rel = (pd - pd_model) / pd_model;

    // q_d at the operating point the key-rate optimiser picks for this channel
    const auto opt = optimize_mu(l5(), channel);
    SimConfig at_opt = cfg;
    at_opt.params.mu = opt.mu;
    at_opt.params.nu_th = opt.nu_th;
    at_opt.seed = 2;
    const auto r_opt = simulate(at_opt);
    const double q_d = double_click_fraction(r_opt.stats);

    const bool pass = std::abs(q_z) <= 5.0 && std::abs(e_z) <= 5.0 && std::abs(pd_rel) <= 0.10 && q_d < 1e-3;
    return {pass, fmt::format("mu=0.1: Q {:.6g} vs {:.6g} ({:+.2f} SE), e_bit {:.5f} vs {:.5f} ({:+.2f} SE), "
                              "N_d/N_em {:.4g} vs {:.4g} ({:+.1f}%); mu={:.3g}: q_d {:.2e} ({} double clicks, {} sifted)",
                              q, q_model, q_z, e, e_model, e_z, pd, pd_model, 100 * pd_rel, opt.mu, q_d,
                              r_opt.stats.n_double_clicks, r_opt.stats.n_sifted)};
}

// 9 ------------------------------------------------------------------------

Outcome double_click_bound() {
    const double f = forced_multiphoton_trial(l5(), 2, 1'000'000, 9);
    return {std::abs(f - 0.125) <= 0.002, fmt::format("two-photon double-click frequency {:.5f}", f)};
}

// 10 -----------------------------------------------------------------------

Outcome determinism() {
    SimConfig cfg;
    cfg.params = l5();
    cfg.params.mu = 0.1;
    cfg.channel = experimental_channel();
    cfg.channel.system_loss_db = 3.0;
    cfg.channel.dark_prob = 1e-5;
    cfg.n_packets = 1'000'003;
    cfg.seed = 10;
    cfg.workers = 1;
    const std::string one = cli::to_json(simulate(cfg)).dump();
    bool identical = true;
    std::string detail = fmt::format("{} bytes; workers", one.size());
    for (unsigned w : {2U, 7U, 16U}) {
        cfg.workers = w;
        const bool same = cli::to_json(simulate(cfg)).dump() == one;
        identical = identical && same;
        detail += fmt::format(" {}:{}", w, same ? "same" : "DIFFERENT");
    }
    return {identical, detail};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "tolerable-error table", 60.0, tolerable_error_table},
        {2, "maximum-loss crossing", 10.0, loss_crossing},
        {3, "security-parameter composition", 0.0, security_exponent},
        {4, "finite-key fractions", 30.0, finite_fractions},
        {5, "routing table exactness", 0.0, routing_table},
        {6, "interference vectors", 0.0, interference_vectors},
        {7, "tail-function oracle equivalence", 0.0, tail_oracle},
        {8, "Monte Carlo convergence", 120.0, monte_carlo},
        {9, "double-click bound", 0.0, double_click_bound},
        {10, "determinism", 0.0, determinism},
    };

    int failed = 0;
    for (const auto &c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.time_limit_s <= 0.0 || elapsed < c.time_limit_s;
        const bool pass = o.pass && in_time;
        if (!pass)
            ++failed;
        const std::string limit = c.time_limit_s > 0.0 ? fmt::format(" (limit {:.0f} s)", c.time_limit_s) : "";
        fmt::print("{} {:2d} {}: {} [{:.2f} s{}{}]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail, elapsed, limit,
                   in_time ? "" : ", too slow");
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
