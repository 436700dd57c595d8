#pragma once

#include "rrdps/asymptotic.hpp"
#include "rrdps/log_prob.hpp"

#include <cstdint>

namespace rrdps {

/// Failure probabilities of the finite-key procedure.
struct EpsilonBudget {
    LogProb eps1;  ///< double-click test
    LogProb eps2;  ///< source photon-number tail
    LogProb eps3;  ///< phase-error sampling
    LogProb eta_x; ///< phase-error correction
    LogProb eta_z; ///< bit-error-correction verification

    /// eps1 = 2^-50, eps2 = eps3 = eta_x = 2^-103 / 3, eta_z = 2^-51.
    static EpsilonBudget defaults();

    void validate() const;
};

struct FiniteKeyResult {
    std::uint64_t nbar_d = 0;
    std::uint64_t nbar_mB = 0;
    std::uint64_t nbar_mA = 0;
    std::uint64_t nbar_ph = 0;
    std::uint64_t s_x = 0;
    std::uint64_t s_z = 0;
    std::int64_t n_prime = 0;        ///< N - nbar_mB
    std::int64_t n_double_prime = 0; ///< N' - nbar_mA
    double e_src = 0.0;
    double g_f = 0.0;                ///< max(raw, 0)
    double raw_g_f = 0.0;
    LogProb d_bound;
};

/// D(q || p) in bits, with 0 log 0 = 0; +infinity when q puts weight where p
/// has none.
double kl_divergence_bits(double q, double p);

enum class TailMode : std::uint8_t {
    automatic, ///< exact up to `exact_tail_limit` trials, Chernoff above
    exact,
    chernoff,
};

inline constexpr std::uint64_t exact_tail_limit = 10'000;

/// Pr[X >= k] for X ~ Binomial(n, p). The Chernoff form returns
/// 2^(-n D(k/n || p)) when k/n > p and 1 otherwise.
LogProb tail_geq(std::uint64_t k, std::uint64_t n, double p, TailMode mode = TailMode::automatic);

/// Pr[X <= k] for X ~ Binomial(n, p). The Chernoff form returns
/// 2^(-n D(k/n || p)) when k/n < p and 1 otherwise.
LogProb tail_leq(std::uint64_t k, std::uint64_t n, double p, TailMode mode = TailMode::automatic);

/// ceil(N_em p_d + 3 sqrt(N_em p_d)).
std::uint64_t threshold_nbar_d(std::uint64_t n_emitted, double p_d);

/// Smallest n with Pr[Binomial(n, 1/8) <= nbar_d] <= eps1.
std::uint64_t threshold_nbar_mB(std::uint64_t nbar_d, LogProb eps1);

/// Smallest k with Pr[Binomial(N_em, e_src) >= k] <= eps2.
std::uint64_t threshold_nbar_mA(std::uint64_t n_emitted, double e_src, LogProb eps2);

/// Smallest k with Pr[Binomial(N'', nu_th/(L-1)) >= k] <= eps3. Returns N''
/// when nu_th/(L-1) >= 1.
std::uint64_t threshold_nbar_ph(std::uint64_t n_double_prime, const ProtocolParams &params, LogProb eps3);

/// Integer bit length ceil(-log2 eta) of a hash or syndrome.
std::uint64_t tag_bits(LogProb eta);

/// max(eps1, eta_z + sqrt(2 (eps2 + eps3 + eta_x))).
LogProb security_parameter(const EpsilonBudget &budget);

/// Finite-length secure key.
///
/// `p_d` is the double-click probability used to set the discard threshold
/// (normally the channel-model value). Throws SessionDiscarded when the run
/// saw more double clicks than the threshold allows.
FiniteKeyResult finite_key_length(const RunStatistics &stats, const ProtocolParams &params, double f_ec,
                                  double p_d, const EpsilonBudget &budget = EpsilonBudget::defaults());

} // namespace rrdps
