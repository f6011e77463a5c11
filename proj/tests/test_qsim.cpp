#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "qauth/qsim.hpp"
#include "qauth/random.hpp"

using namespace qauth;

namespace {

using C = std::complex<double>;
using Rational = boost::multiprecision::cpp_rational;
const double kH = 1.0 / std::sqrt(2.0);

// Independent Bell vectors over |00>,|01>,|10>,|11>.
std::array<C, 4> bell_vector(BellLabel b) {
  if (b == kPhiPlus) return {kH, 0, 0, kH};
  if (b == kPhiMinus) return {kH, 0, 0, -kH};
  if (b == kPsiPlus) return {0, kH, kH, 0};
  return {0, kH, -kH, 0};
}

// |<a|b>| for two equal-length vectors.
double overlap(const std::vector<C>& a, const std::vector<C>& b) {
  C s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return std::abs(s);
}

// Hand-rolled swap on qubits (k, l, i, j): project (j, k) on a Bell vector
// and return the unnormalized (i, l) amplitudes.
std::vector<C> hand_swap(BellLabel created, BellLabel outcome) {
  const auto src = bell_vector(kPhiPlus);  // (k, l)
  const auto cre = bell_vector(created);   // (i, j)
  const auto meas = bell_vector(outcome);  // (j, k)
  std::vector<C> out(4, 0);
  for (int i = 0; i < 2; ++i) {
    for (int l = 0; l < 2; ++l) {
      C a = 0;
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          a += std::conj(meas[2 * j + k]) * src[2 * k + l] * cre[2 * i + j];
        }
      }
      out[2 * i + l] = a;
    }
  }
  return out;
}

Rational dyadic(double p) {
  // Every probability reached here is a multiple of 2^-20.
  const double scaled = std::round(p * 1048576.0);
  EXPECT_NEAR(scaled, p * 1048576.0, 1e-6);
  return Rational(static_cast<long long>(scaled), 1048576);
}

}  // namespace

TEST(BellLabel, IndexRoundTrip) {
  for (int i = 0; i < 4; ++i) EXPECT_EQ(BellLabel::from_index(i).index(), i);
  EXPECT_EQ(kPhiPlus.index(), 0);
  EXPECT_EQ(kPhiMinus.index(), 1);
  EXPECT_EQ(kPsiPlus.index(), 2);
  EXPECT_EQ(kPsiMinus.index(), 3);
}

TEST(BellLabel, NamesRoundTrip) {
  for (BellLabel b : kAllBellLabels) EXPECT_EQ(parse_bell(to_string(b)), b);
  EXPECT_FALSE(parse_bell("PHI").has_value());
}

TEST(BellCompose, GroupLaws) {
  for (BellLabel a : kAllBellLabels) {
    EXPECT_EQ(bell_compose(a, kPhiPlus), a);
    EXPECT_EQ(bell_compose(a, a), kPhiPlus);
    for (BellLabel b : kAllBellLabels) {
      EXPECT_EQ(bell_compose(a, b), bell_compose(b, a));
      for (BellLabel c : kAllBellLabels) {
        EXPECT_EQ(bell_compose(bell_compose(a, b), c), bell_compose(a, bell_compose(b, c)));
      }
    }
  }
}

TEST(StateRegister, RejectsBadInput) {
  EXPECT_THROW(StateRegister(std::vector<Amplitude>{1, 0, 0}), std::invalid_argument);
  EXPECT_THROW(StateRegister(std::vector<Amplitude>{1, 1}), std::invalid_argument);
  EXPECT_THROW(StateRegister(std::vector<Amplitude>{1}), std::invalid_argument);
  StateRegister r = StateRegister::computational(2, 0);
  EXPECT_THROW((void)r.probability(2, MeasBasis::Rectilinear, 0), std::out_of_range);
  EXPECT_THROW((void)r.bell_probabilities(1, 1), std::invalid_argument);
  EXPECT_THROW(r.project(0, MeasBasis::Rectilinear, 1), std::domain_error);
}

TEST(StateRegister, TensorLimit) {
  StateRegister four = tensor(prepare_bell(kPhiPlus), prepare_bell(kPsiMinus));
  StateRegister eight = tensor(four, four);
  EXPECT_EQ(eight.num_qubits(), 8);
  EXPECT_THROW((void)tensor(eight, prepare_polarized(0, MeasBasis::Rectilinear)), std::length_error);
}

TEST(StateRegister, PsiPlusTensorZeroByHand) {
  // Psi+ (x) |0> = (|010> + |100>)/sqrt2.
  const StateRegister r = tensor(prepare_bell(kPsiPlus), prepare_polarized(0, MeasBasis::Rectilinear));
  const auto a = r.amplitudes();
  ASSERT_EQ(a.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    const double want = (i == 2 || i == 4) ? kH : 0.0;
    EXPECT_NEAR(a[i].real(), want, 1e-12) << i;
    EXPECT_NEAR(a[i].imag(), 0.0, 1e-12) << i;
  }
}

TEST(StateRegister, DiagonalPolarization) {
  const StateRegister minus = prepare_polarized(1, MeasBasis::Diagonal);
  EXPECT_NEAR(minus.probability(0, MeasBasis::Diagonal, 1), 1.0, 1e-12);
  EXPECT_NEAR(minus.probability(0, MeasBasis::Rectilinear, 1), 0.5, 1e-12);
}

TEST(StateRegister, BellProbabilitiesOfBellStates) {
  for (BellLabel b : kAllBellLabels) {
    const auto p = prepare_bell(b).bell_probabilities(0, 1);
    for (BellLabel m : kAllBellLabels) EXPECT_NEAR(p[m.index()], m == b ? 1.0 : 0.0, 1e-12);
  }
}

TEST(StateRegister, NormPreservedUnderRandomOperations) {
  RandomSource rand(7, 0);
  for (int trial = 0; trial < 200; ++trial) {
    StateRegister r = tensor(prepare_bell(BellLabel::from_index(static_cast<int>(rand.below(4)))),
                             prepare_ghz());
    for (int step = 0; step < 3; ++step) {
      const int q = static_cast<int>(rand.below(5));
      const MeasBasis basis = rand.bit() ? MeasBasis::Diagonal : MeasBasis::Rectilinear;
      (void)measure_in_basis(r, q, basis, rand);
      EXPECT_NEAR(r.norm_squared(), 1.0, 1e-9);
    }
    (void)measure_bell(r, 0, 4, rand);
    EXPECT_NEAR(r.norm_squared(), 1.0, 1e-9);
  }
}

TEST(StateRegister, PermutedMovesQubits) {
  // |01> permuted with order {1, 0} becomes |10>.
  const StateRegister r = StateRegister::computational(2, 1);
  const std::array<int, 2> order{1, 0};
  EXPECT_TRUE(r.permuted(order).equal_up_to_phase(StateRegister::computational(2, 2)));
}

TEST(StateRegister, EqualUpToPhase) {
  const StateRegister a = prepare_bell(kPsiMinus);
  std::vector<Amplitude> neg(a.amplitudes().begin(), a.amplitudes().end());
  for (auto& x : neg) x *= C(0, 1);
  EXPECT_TRUE(a.equal_up_to_phase(StateRegister(neg)));
  EXPECT_FALSE(a.equal_up_to_phase(prepare_bell(kPsiPlus)));
}

TEST(SwapOracle, MatchesHandRolledSwapAndCompose) {
  for (BellLabel s : kAllBellLabels) {
    const SwapTable t = swap_enumerate(s, SwapSource::entangled());
    for (BellLabel m : kAllBellLabels) {
      const SwapBranch& b = t.branches[m.index()];
      const std::vector<C> hand = hand_swap(s, m);
      double norm = 0.0;
      for (const C& c : hand) norm += std::norm(c);
      EXPECT_NEAR(norm, 0.25, 1e-12);
      EXPECT_NEAR(b.probability, 0.25, 1e-12);
      std::vector<C> unit;
      for (const C& c : hand) unit.push_back(c / std::sqrt(norm));
      const auto want = bell_vector(bell_compose(s, m));
      EXPECT_NEAR(overlap(unit, {want.begin(), want.end()}), 1.0, 1e-12)
          << to_string(s) << " " << to_string(m);
      ASSERT_TRUE(b.residual.has_value());
      std::vector<C> res(b.residual->amplitudes().begin(), b.residual->amplitudes().end());
      EXPECT_NEAR(overlap(res, unit), 1.0, 1e-12);
    }
  }
}

TEST(SwapOracle, BranchProbabilitiesSumToOne) {
  for (BellLabel s : kAllBellLabels) {
    for (SwapSource src : {SwapSource::entangled(), SwapSource::product(0), SwapSource::product(1),
                           SwapSource::ghz()}) {
      const SwapTable t = swap_enumerate(s, src);
      double total = 0.0;
      for (const SwapBranch& b : t.branches) {
        total += b.probability;
        if (b.probability > 0) {
          double j = 0.0;
          for (double p : b.joint) j += p;
          EXPECT_NEAR(j, 1.0, 1e-12);
        }
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(SwapOracle, GhzKeepsBobAndServerEqual) {
  for (BellLabel s : kAllBellLabels) {
    const SwapTable t = swap_enumerate(s, SwapSource::ghz());
    for (const SwapBranch& b : t.branches) {
      ASSERT_TRUE(b.p_ql_equals_qm().has_value());
      EXPECT_NEAR(*b.p_ql_equals_qm(), 1.0, 1e-12);
    }
  }
}

// Bob's Q_l marginal must not depend on what Alice does with Q_k.
TEST(SwapOracle, NoSignalingExact) {
  for (SwapSource src : {SwapSource::entangled(), SwapSource::product(0), SwapSource::product(1),
                         SwapSource::ghz()}) {
    const StateRegister source = prepare_source(src);
    const Rational untouched = dyadic(source.probability(1, MeasBasis::Rectilinear, 1));

    for (BellLabel s : kAllBellLabels) {
      const SwapTable t = swap_enumerate(s, src);
      Rational after_swap = 0;
      for (const SwapBranch& b : t.branches) {
        after_swap += dyadic(b.probability) * dyadic(b.p_ql_one());
      }
      EXPECT_EQ(after_swap, untouched) << to_string(src) << " " << to_string(s);
    }

    for (MeasBasis basis : {MeasBasis::Rectilinear, MeasBasis::Diagonal}) {
      Rational after_measure = 0;
      for (Bit v : {Bit{0}, Bit{1}}) {
        StateRegister r = source;
        const double pv = r.probability(0, basis, v);
        if (pv < 1e-15) continue;
        r.project(0, basis, v);
        after_measure += dyadic(pv) * dyadic(r.probability(1, MeasBasis::Rectilinear, 1));
      }
      EXPECT_EQ(after_measure, untouched) << to_string(src);
    }
  }
}

TEST(Sampling, MeasureBellMatchesBornRule) {
  constexpr int kN = 100000;
  const SwapTable t = swap_enumerate(kPsiPlus, SwapSource::product(0));
  std::array<int, 4> counts{};
  RandomSource rand(2024, 3);
  const StateRegister full = tensor(prepare_source(SwapSource::product(0)), prepare_bell(kPsiPlus));
  for (int i = 0; i < kN; ++i) {
    StateRegister r = full;
    ++counts[measure_bell(r, 3, 0, rand).index()];
  }
  for (BellLabel m : kAllBellLabels) {
    const double p = t.branches[m.index()].probability;
    const double f = static_cast<double>(counts[m.index()]) / kN;
    EXPECT_LE(std::abs(f - p), 4.0 * std::sqrt(p * (1 - p) / kN) + 1e-12) << to_string(m);
  }
}

TEST(Sampling, MeasureInBasisCollapses) {
  RandomSource rand(1, 1);
  StateRegister r = prepare_bell(kPhiPlus);
  const Bit a = measure_in_basis(r, 0, MeasBasis::Rectilinear, rand);
  EXPECT_NEAR(r.probability(1, MeasBasis::Rectilinear, a), 1.0, 1e-12);
}
