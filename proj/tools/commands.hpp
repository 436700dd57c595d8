#pragma once

#include "config.hpp"

#include "rrdps/asymptotic.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rrdps::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_discarded = 3;

/// Invalid flag combination or range.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view keyrate_header =
    "channel_loss_db,mu,nu_th,Q,e_bit,p_d,e_src,e_ph_prime,G_over_N,rate_per_pulse";

/// One operating point of the key-rate table.
struct KeyRatePoint {
    double channel_loss_db = 0.0;
    double mu = 0.0;
    int nu_th = 1;
    ModelKeyRate model;
};

/// Evaluates the config. A missing mu is optimised together with nu_th; a
/// missing nu_th alone is picked as the best threshold at the given mu.
KeyRatePoint evaluate_point(const Config &config);

/// Same as evaluate_point but always optimises mu.
KeyRatePoint optimize_point(const Config &config);

/// CSV row in the keyrate schema. Rates are clipped at zero, missing values
/// are empty fields, numbers carry 6 significant digits.
std::string format_row(const KeyRatePoint &p);

/// Compact number formatting used by every CSV writer.
std::string csv_number(double x);

/// Grid from `from` to `to` inclusive: `step` apart, or `points` values
/// (log-spaced when `log_spaced`). Throws UsageError when empty.
std::vector<double> sweep_grid(double from, double to, double step, int points, bool log_spaced);

/// Entry point behind the executable; returns the process exit code.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace rrdps::cli
