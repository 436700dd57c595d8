#include "rrdps/log_prob.hpp"

#include "rrdps/errors.hpp"

#include <cmath>
#include <limits>

namespace rrdps {

LogProb::LogProb(double mantissa, std::int64_t exponent) : mantissa_(mantissa), exponent_(exponent) {}

LogProb LogProb::normalised(double mantissa, std::int64_t exponent) {
    if (!(mantissa >= 0.0) || !std::isfinite(mantissa))
        throw DomainError("LogProb: mantissa must be finite and non-negative");
    if (mantissa == 0.0)
        return {};
    int e = 0;
    const double m = std::frexp(mantissa, &e);
    return {m, exponent + e};
}

LogProb LogProb::pow2(std::int64_t e) { return {0.5, e + 1}; }

LogProb LogProb::from_log2(double log2_value) {
    if (std::isnan(log2_value) || log2_value == std::numeric_limits<double>::infinity())
        throw DomainError("LogProb: log2 value must be finite or -infinity");
    if (log2_value == -std::numeric_limits<double>::infinity())
        return {};
    const double whole = std::floor(log2_value);
    return normalised(std::exp2(log2_value - whole), static_cast<std::int64_t>(whole));
}

LogProb LogProb::from_linear(double p) { return normalised(p, 0); }

double LogProb::log2() const {
    if (is_zero())
        return -std::numeric_limits<double>::infinity();
    return std::log2(mantissa_) + static_cast<double>(exponent_);
}

double LogProb::linear() const {
    if (is_zero())
        return 0.0;
    if (exponent_ < -2000)
        return 0.0;
    if (exponent_ > 2000)
        return std::numeric_limits<double>::infinity();
    return std::ldexp(mantissa_, static_cast<int>(exponent_));
}

LogProb operator+(LogProb a, LogProb b) {
    if (a.is_zero())
        return b;
    if (b.is_zero())
        return a;
    if (a.exponent_ < b.exponent_)
        std::swap(a, b);
    const std::int64_t shift = b.exponent_ - a.exponent_;
    if (shift < -1100)
        return a;
    return LogProb::normalised(a.mantissa_ + std::ldexp(b.mantissa_, static_cast<int>(shift)), a.exponent_);
}

LogProb operator*(LogProb a, LogProb b) {
    if (a.is_zero() || b.is_zero())
        return {};
    return LogProb::normalised(a.mantissa_ * b.mantissa_, a.exponent_ + b.exponent_);
}

LogProb operator/(LogProb a, double d) {
    if (!(d > 0.0))
        throw DomainError("LogProb: division by a non-positive number");
    if (a.is_zero())
        return a;
    return LogProb::normalised(a.mantissa_ / d, a.exponent_);
}

LogProb sqrt(LogProb a) {
    if (a.is_zero())
        return a;
    double m = a.mantissa_;
    std::int64_t e = a.exponent_;
    if (e % 2 != 0) {
        m *= 2.0;
        e -= 1;
    }
    return LogProb::normalised(std::sqrt(m), e / 2);
}

LogProb max(LogProb a, LogProb b) { return a < b ? b : a; }

std::partial_ordering operator<=>(const LogProb &a, const LogProb &b) {
    if (a.is_zero() || b.is_zero())
        return a.mantissa_ <=> b.mantissa_;
    if (a.exponent_ != b.exponent_)
        return a.exponent_ <=> b.exponent_;
    return a.mantissa_ <=> b.mantissa_;
}

} // namespace rrdps
