#include "rrdps/asymptotic.hpp"

#include "rrdps/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rrdps {

using detail::require;

namespace {

// Privacy-amplification cost of a phase error rate; at or above 1/2 the whole
// block is conceded.
double phase_entropy(double e) { return e >= 0.5 ? 1.0 : binary_entropy(e); }

// Error-correction cost of a bit error rate, treated the same way.
double bit_entropy(double e) { return e >= 0.5 ? 1.0 : binary_entropy(e); }

struct KeyFraction {
    double g_over_n;
    std::optional<double> e_ph_prime;
    bool no_key_possible;
};

KeyFraction key_fraction(double Q, double e_bit, double q_d, double e_src,
                         const ProtocolParams &params, double f_ec) {
    const double ec = f_ec * bit_entropy(e_bit);
    if (q_d >= 1.0)
        return {1.0 - ec - 1.0, std::nullopt, true};
    const double tagged = e_src / (Q * (1.0 - q_d));
    if (!(tagged <= 1.0))
        return {1.0 - ec - q_d - (1.0 - q_d), std::nullopt, true};
    const double e_ph = phase_error_rate(e_src, Q, q_d, params);
    return {1.0 - ec - q_d - (1.0 - q_d) * phase_entropy(e_ph), e_ph, false};
}

double dark_term(const ProtocolParams &params, const ChannelModel &channel) {
    const double L = params.L;
    // passive: L(L-1)/2 (delay, slot) cells times 2 ports
    return channel.setup == Setup::passive ? (L - 1.0) * L * channel.dark_prob : L * channel.dark_prob;
}

double signal_term(const ProtocolParams &params, const ChannelModel &channel) {
    return params.L * params.mu * channel.transmittance() / 2.0;
}

} // namespace

void ChannelModel::validate() const {
    require(system_loss_db >= 0.0 && channel_loss_db >= 0.0, "ChannelModel: losses must be non-negative");
    require(dark_prob >= 0.0 && dark_prob <= 1.0, "ChannelModel: dark_prob must lie in [0, 1]");
    require(e_sys >= 0.0 && e_sys <= 0.5, "ChannelModel: e_sys must lie in [0, 1/2]");
    require(f_ec >= 1.0, "ChannelModel: f_ec must be at least 1");
}

double ChannelModel::transmittance() const {
    return std::pow(10.0, -(system_loss_db + channel_loss_db) / 10.0);
}

double dark_probability(double dark_counts_per_s, double window_s) {
    require(dark_counts_per_s >= 0.0 && window_s >= 0.0, "dark_probability: negative input");
    return std::min(1.0, dark_counts_per_s * window_s);
}

void RunStatistics::validate() const {
    require(n_sifted <= n_emitted, "RunStatistics: more sifted bits than packets");
    require(n_bit_errors <= n_sifted, "RunStatistics: more bit errors than sifted bits");
}

double RunStatistics::sifted_rate() const {
    if (n_emitted == 0)
        throw DomainError("RunStatistics: no packets emitted");
    return static_cast<double>(n_sifted) / static_cast<double>(n_emitted);
}

double RunStatistics::bit_error_rate() const {
    if (n_sifted == 0)
        throw DomainError("RunStatistics: empty sifted key");
    return static_cast<double>(n_bit_errors) / static_cast<double>(n_sifted);
}

RunStatistics &RunStatistics::operator+=(const RunStatistics &other) noexcept {
    n_emitted += other.n_emitted;
    n_sifted += other.n_sifted;
    n_bit_errors += other.n_bit_errors;
    n_double_clicks += other.n_double_clicks;
    return *this;
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError("binary_entropy: argument outside [0, 1]");
    if (x == 0.0 || x == 1.0)
        return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double source_tail_esrc(const ProtocolParams &params) {
    params.validate();
    const double mean = params.L * params.mu;
    if (mean == 0.0)
        return 0.0;
    // P(nu > nu_th) is the regularised lower incomplete gamma P(nu_th + 1, L mu),
    // which keeps full relative precision deep in the tail.
    return boost::math::gamma_p(static_cast<double>(params.nu_th) + 1.0, mean);
}

double double_click_fraction(const RunStatistics &stats) {
    if (stats.n_sifted == 0)
        throw DomainError("double_click_fraction: empty sifted key");
    const double q = 8.0 * static_cast<double>(stats.n_double_clicks) / static_cast<double>(stats.n_sifted);
    return std::clamp(q, 0.0, 1.0);
}

double phase_error_rate(double e_src, double Q, double q_d, const ProtocolParams &params) {
    params.validate();
    require(Q > 0.0, "phase_error_rate: Q must be positive");
    require(q_d >= 0.0 && q_d < 1.0, "phase_error_rate: q_d must lie in [0, 1)");
    require(e_src >= 0.0 && e_src <= 1.0, "phase_error_rate: e_src must lie in [0, 1]");
    const double tagged = e_src / (Q * (1.0 - q_d));
    if (tagged > 1.0)
        throw NoKeyPossible("phase_error_rate: source tail exceeds the sifted fraction");
    const double single = static_cast<double>(params.nu_th) / (params.L - 1);
    return tagged + (1.0 - tagged) * single;
}

AsymptoticResult asymptotic_key_length(const RunStatistics &stats, const ProtocolParams &params,
                                       double f_ec) {
    stats.validate();
    params.validate();
    require(f_ec >= 1.0, "asymptotic_key_length: f_ec must be at least 1");

    AsymptoticResult out;
    out.e_src = source_tail_esrc(params);
    out.q_d = double_click_fraction(stats);

    const double N = static_cast<double>(stats.n_sifted);
    const auto frac = key_fraction(stats.sifted_rate(), stats.bit_error_rate(), out.q_d, out.e_src, params, f_ec);
    out.e_ph_prime = frac.e_ph_prime;
    out.no_key_possible = frac.no_key_possible;
    out.raw_secure_length = N * frac.g_over_n;
    out.secure_length = frac.no_key_possible ? 0.0 : std::max(0.0, out.raw_secure_length);

    const double pulses = static_cast<double>(params.L) * static_cast<double>(stats.n_emitted);
    out.rate_per_pulse = out.secure_length / pulses;
    out.raw_rate_per_pulse = out.raw_secure_length / pulses;
    return out;
}

double model_sifted_rate(const ProtocolParams &params, const ChannelModel &channel) {
    params.validate();
    channel.validate();
    return signal_term(params, channel) + dark_term(params, channel);
}

double model_bit_error(const ProtocolParams &params, const ChannelModel &channel) {
    const double Q = model_sifted_rate(params, channel);
    if (Q <= 0.0)
        throw DomainError("model_bit_error: no sifted events expected");
    return (signal_term(params, channel) * channel.e_sys + dark_term(params, channel) / 2.0) / Q;
}

double model_double_click(const ProtocolParams &params, const ChannelModel &channel) {
    params.validate();
    channel.validate();
    const double x = params.L * params.mu * channel.transmittance();
    return x * x / 16.0;
}

ModelKeyRate model_key_rate(const ProtocolParams &params, const ChannelModel &channel) {
    ModelKeyRate out;
    out.Q = model_sifted_rate(params, channel);
    out.p_d = model_double_click(params, channel);
    out.e_src = source_tail_esrc(params);
    if (out.Q <= 0.0) {
        out.no_key_possible = true;
        return out;
    }
    out.e_bit = model_bit_error(params, channel);
    out.q_d = std::min(1.0, 8.0 * out.p_d / out.Q);

    const auto frac = key_fraction(out.Q, out.e_bit, out.q_d, out.e_src, params, channel.f_ec);
    out.e_ph_prime = frac.e_ph_prime;
    out.no_key_possible = frac.no_key_possible;
    out.g_over_n = frac.g_over_n;
    out.rate_per_pulse = out.g_over_n * out.Q / params.L;
    return out;
}

RunStatistics synthesize_statistics(const ProtocolParams &params, const ChannelModel &channel,
                                    std::uint64_t n_sifted) {
    const double Q = model_sifted_rate(params, channel);
    if (Q <= 0.0)
        throw DomainError("synthesize_statistics: no sifted events expected");
    const double e_bit = model_bit_error(params, channel);
    const double p_d = model_double_click(params, channel);

    RunStatistics stats;
    stats.n_sifted = n_sifted;
    stats.n_emitted = static_cast<std::uint64_t>(std::llround(static_cast<double>(n_sifted) / Q));
    stats.n_bit_errors = static_cast<std::uint64_t>(std::llround(static_cast<double>(n_sifted) * e_bit));
    stats.n_double_clicks = static_cast<std::uint64_t>(std::llround(static_cast<double>(stats.n_emitted) * p_d));
    return stats;
}

std::vector<int> default_nu_th_candidates() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

namespace {

double rate_at(ProtocolParams params, const ChannelModel &channel, double log10_mu) {
    params.mu = std::pow(10.0, log10_mu);
    return model_key_rate(params, channel).rate_per_pulse;
}

} // namespace

OptimizeResult optimize_mu(const ProtocolParams &params, const ChannelModel &channel,
                           const std::vector<int> &nu_th_candidates, const MuSearch &search) {
    require(!nu_th_candidates.empty(), "optimize_mu: empty threshold candidate set");
    require(search.grid_points >= 3, "optimize_mu: grid needs at least 3 points");
    require(search.log10_mu_max > search.log10_mu_min, "optimize_mu: empty mu range");
    channel.validate();

    const double step = (search.log10_mu_max - search.log10_mu_min) / (search.grid_points - 1);
    const double log_tol = std::log10(1.0 + search.rel_tolerance);

    OptimizeResult best;
    best.raw_rate_per_pulse = -std::numeric_limits<double>::infinity();

    for (int nu : nu_th_candidates) {
        ProtocolParams p = params;
        p.nu_th = nu;
        p.mu = 0.0;
        p.validate();

        int arg = 0;
        double arg_rate = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < search.grid_points; ++i) {
            const double r = rate_at(p, channel, search.log10_mu_min + i * step);
            if (r > arg_rate) {
                arg_rate = r;
                arg = i;
            }
        }

        // Golden-section refinement inside the bracketing grid cells.
        double lo = search.log10_mu_min + std::max(0, arg - 1) * step;
        double hi = search.log10_mu_min + std::min(search.grid_points - 1, arg + 1) * step;
        double x_best = search.log10_mu_min + arg * step;
        double r_best = arg_rate;
        constexpr double inv_phi = 0.6180339887498949;
        double a = hi - inv_phi * (hi - lo);
        double b = lo + inv_phi * (hi - lo);
        double ra = rate_at(p, channel, a);
        double rb = rate_at(p, channel, b);
        while (hi - lo > log_tol) {
            if (ra >= rb) {
                hi = b;
                b = a;
                rb = ra;
                a = hi - inv_phi * (hi - lo);
                ra = rate_at(p, channel, a);
            } else {
                lo = a;
                a = b;
                ra = rb;
                b = lo + inv_phi * (hi - lo);
                rb = rate_at(p, channel, b);
            }
        }
        for (auto [x, r] : {std::pair{a, ra}, std::pair{b, rb}}) {
            if (r > r_best) {
                r_best = r;
                x_best = x;
            }
        }

        if (r_best > best.raw_rate_per_pulse) {
            best.raw_rate_per_pulse = r_best;
            best.mu = std::pow(10.0, x_best);
            best.nu_th = nu;
        }
    }

    best.positive_key = best.raw_rate_per_pulse > 0.0;
    best.rate_per_pulse = best.positive_key ? best.raw_rate_per_pulse : 0.0;
    return best;
}

ChannelModel tolerable_error_channel() {
    ChannelModel ch;
    ch.system_loss_db = 12.7;
    ch.channel_loss_db = 4.7;
    ch.dark_prob = dark_probability(2.0, 200e-12);
    ch.f_ec = 1.1;
    ch.setup = Setup::active;
    return ch;
}

double max_tolerable_esys(int L, const ChannelModel &channel_template, double tolerance) {
    require(tolerance > 0.0, "max_tolerable_esys: tolerance must be positive");
    ProtocolParams params;
    params.L = L;
    params.validate();

    auto positive = [&](double e_sys) {
        ChannelModel ch = channel_template;
        ch.e_sys = e_sys;
        return optimize_mu(params, ch).positive_key;
    };

    double lo = 0.0;
    double hi = 0.5;
    if (!positive(lo))
        return 0.0;
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        (positive(mid) ? lo : hi) = mid;
    }
    return lo;
}

} // namespace rrdps
