#pragma once

#include <compare>
#include <cstdint>
#include <limits>

namespace dccsim {

/// Signed span of simulated time with microsecond resolution.
class Duration {
public:
  constexpr Duration() = default;

  static constexpr Duration us(std::int64_t v) { return Duration{v}; }
  static constexpr Duration ms(std::int64_t v) { return Duration{v * 1000}; }
  static constexpr Duration s(std::int64_t v) { return Duration{v * 1'000'000}; }
  static constexpr Duration seconds(double v) {
    return Duration{static_cast<std::int64_t>(v * 1e6 + (v >= 0 ? 0.5 : -0.5))};
  }
  static constexpr Duration zero() { return Duration{0}; }
  static constexpr Duration max() { return Duration{std::numeric_limits<std::int64_t>::max() / 4}; }

  constexpr std::int64_t count() const { return us_; }
  constexpr double to_ms() const { return static_cast<double>(us_) / 1e3; }
  constexpr double to_seconds() const { return static_cast<double>(us_) / 1e6; }

  constexpr auto operator<=>(const Duration&) const = default;

  constexpr Duration operator-() const { return Duration{-us_}; }
  constexpr Duration& operator+=(Duration o) { us_ += o.us_; return *this; }
  constexpr Duration& operator-=(Duration o) { us_ -= o.us_; return *this; }
  friend constexpr Duration operator+(Duration a, Duration b) { return Duration{a.us_ + b.us_}; }
  friend constexpr Duration operator-(Duration a, Duration b) { return Duration{a.us_ - b.us_}; }
  friend constexpr Duration operator*(Duration a, std::int64_t k) { return Duration{a.us_ * k}; }
  friend constexpr Duration operator*(std::int64_t k, Duration a) { return Duration{a.us_ * k}; }
  friend constexpr Duration operator/(Duration a, std::int64_t k) { return Duration{a.us_ / k}; }

private:
  constexpr explicit Duration(std::int64_t v) : us_{v} {}
  std::int64_t us_ = 0;
};

/// Absolute simulated instant, microseconds since simulation start.
class SimTime {
public:
  constexpr SimTime() = default;

  static constexpr SimTime from_us(std::int64_t v) { return SimTime{v}; }
  static constexpr SimTime from_ms(std::int64_t v) { return SimTime{v * 1000}; }
  static constexpr SimTime zero() { return SimTime{0}; }

  constexpr std::int64_t us() const { return us_; }
  constexpr double to_seconds() const { return static_cast<double>(us_) / 1e6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime& operator+=(Duration d) { us_ += d.count(); return *this; }
  friend constexpr SimTime operator+(SimTime t, Duration d) { return SimTime{t.us_ + d.count()}; }
  friend constexpr SimTime operator-(SimTime t, Duration d) { return SimTime{t.us_ - d.count()}; }
  friend constexpr Duration operator-(SimTime a, SimTime b) { return Duration::us(a.us_ - b.us_); }

private:
  constexpr explicit SimTime(std::int64_t v) : us_{v} {}
  std::int64_t us_ = 0;
};

constexpr Duration clamp(Duration v, Duration lo, Duration hi) {
  return v < lo ? lo : (hi < v ? hi : v);
}

namespace literals {
constexpr Duration operator""_us(unsigned long long v) { return Duration::us(static_cast<std::int64_t>(v)); }
constexpr Duration operator""_ms(unsigned long long v) { return Duration::ms(static_cast<std::int64_t>(v)); }
constexpr Duration operator""_s(unsigned long long v) { return Duration::s(static_cast<std::int64_t>(v)); }
}  // namespace literals

}  // namespace dccsim
