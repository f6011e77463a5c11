#include "qauth/secparams.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qauth::secparams {

namespace {

void check_security_target(double D) {
  if (!(D > 0.0 && D < 1.0)) {
    throw std::invalid_argument("security target D must lie in (0, 1), got " + std::to_string(D));
  }
}

void check_p1(double p1) {
  if (!(p1 > 0.0 && p1 <= 1.0)) {
    throw std::invalid_argument("p1 must lie in (0, 1], got " + std::to_string(p1));
  }
}

Rational exact(double x) { return Rational(x); }

Rational three_quarters_pow(std::uint64_t n) {
  Integer num = boost::multiprecision::pow(Integer(3), static_cast<unsigned>(n));
  Integer den = boost::multiprecision::pow(Integer(4), static_cast<unsigned>(n));
  return Rational(num, den);
}

}  // namespace

double to_double(const Rational& r) { return r.convert_to<double>(); }

Integer binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  if (r > n - r) r = n - r;
  Integer out = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    out *= n - r + i;
    out /= i;
  }
  return out;
}

Integer factorial(std::uint64_t n) {
  Integer out = 1;
  for (std::uint64_t i = 2; i <= n; ++i) out *= i;
  return out;
}

double forgery_prob(std::uint64_t k) { return std::ldexp(1.0, -static_cast<int>(k)); }

double evasion_prob(std::uint64_t d) { return std::pow(0.75, static_cast<double>(d)); }

Rational evasion_prob_exact(std::uint64_t d) { return three_quarters_pow(d); }

std::uint64_t required_k(double D) {
  check_security_target(D);
  auto k = static_cast<std::uint64_t>(std::ceil(-std::log(D) / std::log(2.0)));
  const Rational target = exact(D);
  const auto bound = [](std::uint64_t n) {
    return Rational(Integer(1), boost::multiprecision::pow(Integer(2), static_cast<unsigned>(n)));
  };
  while (k > 0 && bound(k - 1) <= target) --k;
  while (bound(k) > target) ++k;
  return k;
}

std::uint64_t required_d(double D) {
  check_security_target(D);
  auto d = static_cast<std::uint64_t>(std::ceil(std::log(D) / std::log(0.75)));
  const Rational target = exact(D);
  while (d > 0 && three_quarters_pow(d - 1) <= target) --d;
  while (three_quarters_pow(d) > target) ++d;
  return d;
}

double ratio_d_over_k() { return std::log(2.0) / -std::log(0.75); }

Rational subset_success_prob(std::uint64_t k, std::uint64_t d, std::uint64_t g) {
  if (g < k || g > k + d) {
    throw std::out_of_range("subset_success_prob: g = " + std::to_string(g) +
                            " outside [k, k+d] = [" + std::to_string(k) + ", " +
                            std::to_string(k + d) + "]");
  }
  return Rational(binomial(d, g - k), binomial(k + d, g)) * three_quarters_pow(g - k);
}

Rational subset_success_prob_factorial(std::uint64_t k, std::uint64_t d, std::uint64_t g) {
  if (g < k || g > k + d) {
    throw std::out_of_range("subset_success_prob_factorial: g outside [k, k+d]");
  }
  return Rational(factorial(d) * factorial(g), factorial(k + d) * factorial(g - k)) *
         three_quarters_pow(g - k);
}

Rational marginal_gain_ratio(std::uint64_t g, std::uint64_t k) {
  if (k < 1 || g < k) throw std::out_of_range("marginal_gain_ratio: requires g >= k >= 1");
  return Rational(Integer(g + 1), Integer(g + 1 - k));
}

std::uint64_t improvement_limit(std::uint64_t k) { return 4 * k - 1; }

double pns_effective_d(double d, double p1) {
  check_p1(p1);
  return p1 * d;
}

std::uint64_t pns_required_d(std::uint64_t d_target, double p1) {
  check_p1(p1);
  // Exact ceiling of d_target / p1 on the rational value of p1.
  const Rational q = Rational(Integer(d_target)) / exact(p1);
  Integer whole = boost::multiprecision::numerator(q) / boost::multiprecision::denominator(q);
  if (Rational(whole) < q) whole += 1;
  return whole.convert_to<std::uint64_t>();
}

double pns_exact_evasion(std::uint64_t d, double p1) {
  check_p1(p1);
  return std::pow(1.0 - 0.25 * p1, static_cast<double>(d));
}

double pns_approx_evasion(std::uint64_t d, double p1) {
  check_p1(p1);
  return std::pow(0.75, p1 * static_cast<double>(d));
}

std::uint64_t pns_required_d_exact(double D, double p1) {
  check_security_target(D);
  check_p1(p1);
  if (p1 == 1.0) return required_d(D);
  const Rational base = Rational(1) - exact(p1) / 4;
  const Rational target = exact(D);
  auto d = static_cast<std::uint64_t>(std::ceil(std::log(D) / std::log1p(-0.25 * p1)));
  const auto power = [&](std::uint64_t n) {
    Rational out = 1;
    for (std::uint64_t i = 0; i < n; ++i) out *= base;
    return out;
  };
  while (d > 0 && power(d - 1) <= target) --d;
  while (power(d) > target) ++d;
  return d;
}

}  // namespace qauth::secparams
