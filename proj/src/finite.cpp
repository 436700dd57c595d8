#include "rrdps/finite.hpp"

#include "rrdps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace rrdps {

using detail::require;

EpsilonBudget EpsilonBudget::defaults() {
    const LogProb third_of_2_103 = LogProb::pow2(-103) / 3.0;
    return {
        .eps1 = LogProb::pow2(-50),
        .eps2 = third_of_2_103,
        .eps3 = third_of_2_103,
        .eta_x = third_of_2_103,
        .eta_z = LogProb::pow2(-51),
    };
}

void EpsilonBudget::validate() const {
    for (const LogProb &e : {eps1, eps2, eps3, eta_x, eta_z})
        require(!e.is_zero() && e < LogProb::one(), "EpsilonBudget: every entry must lie in (0, 1)");
}

double kl_divergence_bits(double q, double p) {
    if (!(q >= 0.0 && q <= 1.0) || !(p >= 0.0 && p <= 1.0))
        throw DomainError("kl_divergence_bits: arguments must be probabilities");
    constexpr double inf = std::numeric_limits<double>::infinity();
    double d = 0.0;
    if (q > 0.0) {
        if (p == 0.0)
            return inf;
        d += q * std::log2(q / p);
    }
    if (q < 1.0) {
        if (p == 1.0)
            return inf;
        d += (1.0 - q) * std::log2((1.0 - q) / (1.0 - p));
    }
    return std::max(0.0, d);
}

namespace {

// log2 of sum_{j in [lo, hi]} C(n, j) p^j (1-p)^(n-j), for 0 < p < 1.
double log2_binomial_range(std::uint64_t lo, std::uint64_t hi, std::uint64_t n, double p) {
    const double nd = static_cast<double>(n);
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double log_nf = std::lgamma(nd + 1.0);

    std::vector<double> terms;
    terms.reserve(hi - lo + 1);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::uint64_t j = lo; j <= hi; ++j) {
        const double jd = static_cast<double>(j);
        const double t = log_nf - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0) + jd * log_p + (nd - jd) * log_q;
        terms.push_back(t);
        peak = std::max(peak, t);
    }
    double sum = 0.0;
    for (double t : terms)
        sum += std::exp(t - peak);
    return std::min(0.0, (peak + std::log(sum)) / std::numbers::ln2);
}

bool use_exact(std::uint64_t n, TailMode mode) {
    switch (mode) {
    case TailMode::exact:
        return true;
    case TailMode::chernoff:
        return false;
    case TailMode::automatic:
        break;
    }
    return n <= exact_tail_limit;
}

void check_probability(double p, const char *what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError(what);
}

} // namespace

LogProb tail_geq(std::uint64_t k, std::uint64_t n, double p, TailMode mode) {
    check_probability(p, "tail_geq: p must lie in [0, 1]");
    if (k == 0)
        return LogProb::one();
    if (k > n || p == 0.0)
        return LogProb::zero();
    if (p == 1.0)
        return LogProb::one();
    if (use_exact(n, mode))
        return LogProb::from_log2(log2_binomial_range(k, n, n, p));
    const double ratio = static_cast<double>(k) / static_cast<double>(n);
    if (ratio <= p)
        return LogProb::one();
    return LogProb::from_log2(-static_cast<double>(n) * kl_divergence_bits(ratio, p));
}

LogProb tail_leq(std::uint64_t k, std::uint64_t n, double p, TailMode mode) {
    check_probability(p, "tail_leq: p must lie in [0, 1]");
    if (k >= n || p == 0.0)
        return LogProb::one();
    if (p == 1.0)
        return LogProb::zero();
    if (use_exact(n, mode))
        return LogProb::from_log2(log2_binomial_range(0, k, n, p));
    const double ratio = static_cast<double>(k) / static_cast<double>(n);
    if (ratio >= p)
        return LogProb::one();
    return LogProb::from_log2(-static_cast<double>(n) * kl_divergence_bits(ratio, p));
}

std::uint64_t threshold_nbar_d(std::uint64_t n_emitted, double p_d) {
    require(p_d >= 0.0 && p_d <= 1.0, "threshold_nbar_d: p_d must lie in [0, 1]");
    const double expected = static_cast<double>(n_emitted) * p_d;
    return static_cast<std::uint64_t>(std::ceil(expected + 3.0 * std::sqrt(expected)));
}

namespace {

// Smallest x in [lo, hi] with ok(x), given ok is monotone and ok(hi) holds.
template <typename Pred> std::uint64_t lower_bound_true(std::uint64_t lo, std::uint64_t hi, Pred ok) {
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (ok(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

} // namespace

std::uint64_t threshold_nbar_mB(std::uint64_t nbar_d, LogProb eps1) {
    require(!eps1.is_zero(), "threshold_nbar_mB: eps1 must be positive");
    constexpr double p = 1.0 / 8.0;
    if (eps1 >= LogProb::one())
        return 0;
    // g(nbar_d; n, 1/8) = 1 for every n <= nbar_d
    auto ok = [&](std::uint64_t n) { return tail_leq(nbar_d, n, p) <= eps1; };

    if (nbar_d < exact_tail_limit && ok(exact_tail_limit))
        return lower_bound_true(nbar_d + 1, exact_tail_limit, ok);

    // Chernoff range: -n D(nbar_d/n || 1/8) decreases monotonically in n.
    std::uint64_t lo = std::max(exact_tail_limit, nbar_d) + 1;
    std::uint64_t hi = lo;
    while (!ok(hi)) {
        lo = hi + 1;
        hi *= 2;
    }
    return lower_bound_true(lo, hi, ok);
}

std::uint64_t threshold_nbar_mA(std::uint64_t n_emitted, double e_src, LogProb eps2) {
    require(!eps2.is_zero(), "threshold_nbar_mA: eps2 must be positive");
    require(e_src >= 0.0 && e_src <= 1.0, "threshold_nbar_mA: e_src must lie in [0, 1]");
    auto ok = [&](std::uint64_t k) { return tail_geq(k, n_emitted, e_src) <= eps2; };
    return lower_bound_true(0, n_emitted + 1, ok);
}

std::uint64_t threshold_nbar_ph(std::uint64_t n_double_prime, const ProtocolParams &params, LogProb eps3) {
    params.validate();
    require(!eps3.is_zero(), "threshold_nbar_ph: eps3 must be positive");
    if (n_double_prime == 0)
        return 0;
    const double p = static_cast<double>(params.nu_th) / (params.L - 1);
    if (p >= 1.0)
        return n_double_prime;
    auto ok = [&](std::uint64_t k) { return tail_geq(k, n_double_prime, p) <= eps3; };
    return lower_bound_true(0, n_double_prime + 1, ok);
}

std::uint64_t tag_bits(LogProb eta) {
    require(!eta.is_zero() && eta <= LogProb::one(), "tag_bits: eta must lie in (0, 1]");
    return static_cast<std::uint64_t>(std::ceil(-eta.log2()));
}

LogProb security_parameter(const EpsilonBudget &budget) {
    budget.validate();
    // sqrt(2) sqrt(x) is evaluated as sqrt(2x) so powers of two stay exact.
    const LogProb fail = budget.eps2 + budget.eps3 + budget.eta_x;
    return max(budget.eps1, budget.eta_z + sqrt(LogProb::pow2(1) * fail));
}

FiniteKeyResult finite_key_length(const RunStatistics &stats, const ProtocolParams &params, double f_ec,
                                  double p_d, const EpsilonBudget &budget) {
    stats.validate();
    params.validate();
    budget.validate();
    require(f_ec >= 1.0, "finite_key_length: f_ec must be at least 1");

    FiniteKeyResult out;
    out.nbar_d = threshold_nbar_d(stats.n_emitted, p_d);
    if (stats.n_double_clicks > out.nbar_d)
        throw SessionDiscarded("finite_key_length: double clicks exceed the threshold");

    out.nbar_mB = threshold_nbar_mB(out.nbar_d, budget.eps1);
    out.e_src = source_tail_esrc(params);
    out.nbar_mA = threshold_nbar_mA(stats.n_emitted, out.e_src, budget.eps2);

    const auto N = static_cast<std::int64_t>(stats.n_sifted);
    out.n_prime = N - static_cast<std::int64_t>(out.nbar_mB);
    out.n_double_prime = out.n_prime - static_cast<std::int64_t>(out.nbar_mA);
    out.nbar_ph = threshold_nbar_ph(static_cast<std::uint64_t>(std::max<std::int64_t>(0, out.n_double_prime)),
                                    params, budget.eps3);
    out.s_x = tag_bits(budget.eta_x);
    out.s_z = tag_bits(budget.eta_z);

    const double e_bit = stats.n_sifted > 0 ? stats.bit_error_rate() : 0.0;
    const double ec = f_ec * static_cast<double>(N) * (e_bit >= 0.5 ? 1.0 : binary_entropy(e_bit));
    const double np = static_cast<double>(out.n_prime);
    double pa = 0.0;
    if (out.n_prime > 0) {
        const double ratio = static_cast<double>(out.nbar_mA + out.nbar_ph) / np;
        pa = np * (ratio >= 0.5 ? 1.0 : binary_entropy(ratio));
    }
    out.raw_g_f = np - ec - static_cast<double>(out.s_z) - pa - static_cast<double>(out.s_x);
    out.g_f = out.n_prime > 0 ? std::max(0.0, out.raw_g_f) : 0.0;
    out.d_bound = security_parameter(budget);
    return out;
}

} // namespace rrdps
