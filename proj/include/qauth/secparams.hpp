#pragma once

// Closed-form security parameters for the tamper-bit / key-bit design.
//
// Sizing uses the exact constants 1/ln 2 and -1/ln(3/4) rather than their
// two-digit roundings: the rounded 3.48 yields d = 42 at D = 2^-17, whereas
// the exact constant gives the intended d = 41. Both ceilings are then
// corrected with exact rational comparisons so that the returned value is
// the smallest one meeting the bound.
//
// Combinatorial probabilities are computed as exact rationals; convert with
// to_double() only for presentation.

#include <cstddef>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace qauth::secparams {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& r);
Integer binomial(std::uint64_t n, std::uint64_t r);
Integer factorial(std::uint64_t n);

/// 2^-k, exact in double for k < 1075.
double forgery_prob(std::uint64_t k);
/// (3/4)^d.
double evasion_prob(std::uint64_t d);
Rational evasion_prob_exact(std::uint64_t d);

/// Smallest k with 2^-k <= D. Throws std::invalid_argument unless 0 < D < 1.
std::uint64_t required_k(double D);
/// Smallest d with (3/4)^d <= D. Throws std::invalid_argument unless 0 < D < 1.
std::uint64_t required_d(double D);

/// ln 2 / -ln(3/4), the asymptotic tamper-to-key ratio when D_a = D_e.
double ratio_d_over_k();

/// Eve guesses g of k+d positions and wins if all k key bits are among them
/// and none of the g-k tamper bits she hit was disturbed:
///   C(d, g-k) / C(k+d, g) * (3/4)^(g-k).
/// Requires k <= g <= k+d (throws std::out_of_range otherwise).
Rational subset_success_prob(std::uint64_t k, std::uint64_t d, std::uint64_t g);
/// Same value through the factorial form d! g! / ((k+d)! (g-k)!) * (3/4)^(g-k).
Rational subset_success_prob_factorial(std::uint64_t k, std::uint64_t d, std::uint64_t g);

/// Growth of the key-coverage factor when one more bit is guessed:
/// (g+1) / (g+1-k). Requires g >= k >= 1.
Rational marginal_gain_ratio(std::uint64_t g, std::uint64_t k);
/// Guessing one more bit helps while g < 4k - 1.
std::uint64_t improvement_limit(std::uint64_t k);

/// Photon-number splitting: only single-photon slots remain effective.
double pns_effective_d(double d, double p1);
/// ceil(d_target / p1).
std::uint64_t pns_required_d(std::uint64_t d_target, double p1);
/// Per-slot model: a tamper slot is single-photon with probability p1 and
/// then disturbed with probability 1/4, so evasion is (1 - p1/4)^d.
double pns_exact_evasion(std::uint64_t d, double p1);
/// The coarser 0.75^(p1 d) form. Never larger than pns_exact_evasion.
double pns_approx_evasion(std::uint64_t d, double p1);
/// Smallest d with (1 - p1/4)^d <= D under the per-slot model. Exceeds
/// pns_required_d(required_d(D), p1) whenever p1 < 1.
std::uint64_t pns_required_d_exact(double D, double p1);

}  // namespace qauth::secparams
