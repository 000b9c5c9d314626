#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "fsrl/errors.hpp"

namespace fsrl {

/// Non-negative reduced fraction for exact speedup arithmetic.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational make(std::uint64_t n, std::uint64_t d) {
    if (d == 0) throw ParameterError("Rational: zero denominator");
    const std::uint64_t g = std::gcd(n, d);
    return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
  }

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_integer() const noexcept { return den == 1; }
  std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

  friend bool operator==(const Rational&, const Rational&) = default;
};

}  // namespace fsrl
