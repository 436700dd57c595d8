#pragma once

#include <compare>
#include <cstdint>

namespace rrdps {

/// Non-negative probability stored as mantissa * 2^exponent.
///
/// The binary exponent is an integer, so quantities such as 2^-103 / 3 or a
/// Chernoff bound of 2^-(10^7) keep an exact exponent, and sums and square
/// roots of powers of two stay exact. The mantissa is normalised to [0.5, 1).
class LogProb {
  public:
    /// Zero probability.
    constexpr LogProb() = default;

    static LogProb zero() { return {}; }
    static LogProb one() { return pow2(0); }
    /// Exactly 2^e.
    static LogProb pow2(std::int64_t e);
    /// 2^log2_value; -infinity gives zero.
    static LogProb from_log2(double log2_value);
    static LogProb from_linear(double p);

    [[nodiscard]] bool is_zero() const noexcept { return mantissa_ == 0.0; }
    /// log2 of the value, -infinity for zero.
    [[nodiscard]] double log2() const;
    /// Value as a double; underflows to 0 below ~2^-1074.
    [[nodiscard]] double linear() const;

    [[nodiscard]] double mantissa() const noexcept { return mantissa_; }
    [[nodiscard]] std::int64_t exponent() const noexcept { return exponent_; }

    friend LogProb operator+(LogProb a, LogProb b);
    friend LogProb operator*(LogProb a, LogProb b);
    /// Division by a positive real.
    friend LogProb operator/(LogProb a, double d);
    friend LogProb sqrt(LogProb a);
    friend LogProb max(LogProb a, LogProb b);

    friend std::partial_ordering operator<=>(const LogProb &a, const LogProb &b);
    friend bool operator==(const LogProb &a, const LogProb &b) = default;

  private:
    LogProb(double mantissa, std::int64_t exponent);
    static LogProb normalised(double mantissa, std::int64_t exponent);

    double mantissa_ = 0.0;
    std::int64_t exponent_ = 0;
};

} // namespace rrdps
