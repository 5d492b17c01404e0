#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

namespace asflow {

/// Simulated time, stored as integer milliseconds.
class SimTime {
public:
    constexpr SimTime() = default;

    static constexpr SimTime from_ms(std::int64_t ms) { return SimTime{ms}; }
    static SimTime from_seconds(double s) { return SimTime{std::llround(s * 1000.0)}; }
    static constexpr SimTime max() { return SimTime{std::numeric_limits<std::int64_t>::max()}; }

    constexpr std::int64_t ms() const { return ms_; }
    constexpr double seconds() const { return static_cast<double>(ms_) / 1000.0; }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime o) const { return SimTime{ms_ + o.ms_}; }
    constexpr SimTime operator-(SimTime o) const { return SimTime{ms_ - o.ms_}; }
    constexpr SimTime& operator+=(SimTime o) { ms_ += o.ms_; return *this; }
    constexpr SimTime operator*(std::int64_t k) const { return SimTime{ms_ * k}; }

private:
    constexpr explicit SimTime(std::int64_t ms) : ms_(ms) {}
    std::int64_t ms_ = 0;
};

inline constexpr SimTime operator""_s(unsigned long long s) {
    return SimTime::from_ms(static_cast<std::int64_t>(s) * 1000);
}

} // namespace asflow
