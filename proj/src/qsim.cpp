#include "qauth/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qauth {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kZeroProbability = 1e-15;

std::array<Amplitude, 2> basis_vector(MeasBasis basis, Bit outcome) {
  if (basis == MeasBasis::Rectilinear) {
    return outcome ? std::array<Amplitude, 2>{0.0, 1.0} : std::array<Amplitude, 2>{1.0, 0.0};
  }
  const double sign = outcome ? -1.0 : 1.0;
  return {kInvSqrt2, sign * kInvSqrt2};
}

// Components over |q1 q2> = |00>, |01>, |10>, |11>.
std::array<Amplitude, 4> bell_vector(BellLabel label) {
  const double sign = label.phase == BellPhase::Minus ? -1.0 : 1.0;
  if (label.kind == BellKind::Phi) return {kInvSqrt2, 0.0, 0.0, sign * kInvSqrt2};
  return {0.0, kInvSqrt2, sign * kInvSqrt2, 0.0};
}

int qubits_for_size(std::size_t size) {
  int n = 0;
  while ((std::size_t{1} << n) < size) ++n;
  if ((std::size_t{1} << n) != size) return -1;
  return n;
}

}  // namespace

std::string_view to_string(MeasBasis basis) {
  return basis == MeasBasis::Rectilinear ? "RECTILINEAR" : "DIAGONAL";
}

std::optional<MeasBasis> parse_basis(std::string_view name) {
  if (name == "RECTILINEAR") return MeasBasis::Rectilinear;
  if (name == "DIAGONAL") return MeasBasis::Diagonal;
  return std::nullopt;
}

std::string_view to_string(BellLabel label) {
  static constexpr std::array<std::string_view, 4> names{"PHI_PLUS", "PHI_MINUS", "PSI_PLUS",
                                                         "PSI_MINUS"};
  return names[label.index()];
}

std::optional<BellLabel> parse_bell(std::string_view name) {
  for (BellLabel label : kAllBellLabels) {
    if (to_string(label) == name) return label;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

StateRegister::StateRegister(std::vector<Amplitude> amplitudes)
    : num_qubits_(qubits_for_size(amplitudes.size())), amps_(std::move(amplitudes)) {
  if (num_qubits_ < 1 || num_qubits_ > kMaxQubits) {
    throw std::invalid_argument("StateRegister: size must be 2^n with 1 <= n <= 8");
  }
  if (std::abs(norm_squared() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("StateRegister: amplitudes are not normalized");
  }
}

StateRegister::StateRegister(int num_qubits, std::vector<Amplitude> amplitudes, bool)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {}

StateRegister StateRegister::computational(int num_qubits, std::uint64_t index) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("StateRegister: qubit count out of range");
  }
  std::vector<Amplitude> amps(std::size_t{1} << num_qubits);
  if (index >= amps.size()) throw std::out_of_range("StateRegister: basis index out of range");
  amps[index] = 1.0;
  return StateRegister(num_qubits, std::move(amps), true);
}

double StateRegister::norm_squared() const {
  double total = 0.0;
  for (const Amplitude& a : amps_) total += std::norm(a);
  return total;
}

void StateRegister::check_qubit(int qubit) const {
  if (qubit < 0 || qubit >= num_qubits_) {
    throw std::out_of_range("StateRegister: qubit index " + std::to_string(qubit) +
                            " out of range for " + std::to_string(num_qubits_) + " qubits");
  }
}

void StateRegister::check_pair(int q1, int q2) const {
  check_qubit(q1);
  check_qubit(q2);
  if (q1 == q2) throw std::invalid_argument("StateRegister: Bell measurement needs two qubits");
}

void StateRegister::renormalize(double norm_sq) {
  const double scale = 1.0 / std::sqrt(norm_sq);
  for (Amplitude& a : amps_) a *= scale;
}

double StateRegister::probability(int qubit, MeasBasis basis, Bit outcome) const {
  check_qubit(qubit);
  const auto v = basis_vector(basis, outcome);
  const std::uint64_t m = mask(qubit);
  double p = 0.0;
  for (std::uint64_t idx = 0; idx < amps_.size(); ++idx) {
    if (idx & m) continue;
    p += std::norm(std::conj(v[0]) * amps_[idx] + std::conj(v[1]) * amps_[idx | m]);
  }
  return p;
}

std::array<double, 4> StateRegister::bell_probabilities(int q1, int q2) const {
  check_pair(q1, q2);
  const std::uint64_t m1 = mask(q1), m2 = mask(q2);
  std::array<double, 4> probs{};
  for (BellLabel label : kAllBellLabels) {
    const auto v = bell_vector(label);
    double p = 0.0;
    for (std::uint64_t base = 0; base < amps_.size(); ++base) {
      if (base & (m1 | m2)) continue;
      const Amplitude c = std::conj(v[0]) * amps_[base] + std::conj(v[1]) * amps_[base | m2] +
                          std::conj(v[2]) * amps_[base | m1] +
                          std::conj(v[3]) * amps_[base | m1 | m2];
      p += std::norm(c);
    }
    probs[label.index()] = p;
  }
  return probs;
}

double StateRegister::project(int qubit, MeasBasis basis, Bit outcome) {
  check_qubit(qubit);
  const auto v = basis_vector(basis, outcome);
  const std::uint64_t m = mask(qubit);
  double p = 0.0;
  for (std::uint64_t idx = 0; idx < amps_.size(); ++idx) {
    if (idx & m) continue;
    const Amplitude c = std::conj(v[0]) * amps_[idx] + std::conj(v[1]) * amps_[idx | m];
    amps_[idx] = v[0] * c;
    amps_[idx | m] = v[1] * c;
    p += std::norm(c);
  }
  if (p < kZeroProbability) throw std::domain_error("StateRegister: projection onto null outcome");
  renormalize(p);
  return p;
}

double StateRegister::project_bell(int q1, int q2, BellLabel label) {
  check_pair(q1, q2);
  const auto v = bell_vector(label);
  const std::uint64_t m1 = mask(q1), m2 = mask(q2);
  double p = 0.0;
  for (std::uint64_t base = 0; base < amps_.size(); ++base) {
    if (base & (m1 | m2)) continue;
    const std::array<std::uint64_t, 4> idx{base, base | m2, base | m1, base | m1 | m2};
    Amplitude c = 0.0;
    for (int t = 0; t < 4; ++t) c += std::conj(v[t]) * amps_[idx[t]];
    for (int t = 0; t < 4; ++t) amps_[idx[t]] = v[t] * c;
    p += std::norm(c);
  }
  if (p < kZeroProbability) throw std::domain_error("StateRegister: projection onto null outcome");
  renormalize(p);
  return p;
}

std::pair<StateRegister, double> StateRegister::contract_bell(int q1, int q2,
                                                              BellLabel label) const {
  check_pair(q1, q2);
  if (num_qubits_ < 3) {
    throw std::invalid_argument("StateRegister: contraction needs at least one spectator qubit");
  }
  const auto v = bell_vector(label);
  const std::uint64_t m1 = mask(q1), m2 = mask(q2);
  const int rest = num_qubits_ - 2;
  std::vector<Amplitude> out(std::size_t{1} << rest);
  for (std::uint64_t base = 0; base < amps_.size(); ++base) {
    if (base & (m1 | m2)) continue;
    const Amplitude c = std::conj(v[0]) * amps_[base] + std::conj(v[1]) * amps_[base | m2] +
                        std::conj(v[2]) * amps_[base | m1] +
                        std::conj(v[3]) * amps_[base | m1 | m2];
    // Squeeze out the two contracted bit positions, keeping qubit order.
    std::uint64_t compact = 0;
    for (int q = 0; q < num_qubits_; ++q) {
      if (q == q1 || q == q2) continue;
      compact = (compact << 1) | ((base & mask(q)) ? 1 : 0);
    }
    out[compact] = c;
  }
  double p = 0.0;
  for (const Amplitude& a : out) p += std::norm(a);
  if (p < kZeroProbability) {
    throw std::domain_error("StateRegister: contraction onto null outcome");
  }
  StateRegister residual(rest, std::move(out), true);
  residual.renormalize(p);
  return {std::move(residual), p};
}

StateRegister StateRegister::permuted(std::span<const int> order) const {
  if (static_cast<int>(order.size()) != num_qubits_) {
    throw std::invalid_argument("StateRegister: permutation size mismatch");
  }
  std::vector<bool> seen(num_qubits_, false);
  for (int q : order) {
    check_qubit(q);
    if (seen[q]) throw std::invalid_argument("StateRegister: permutation repeats a qubit");
    seen[q] = true;
  }
  std::vector<Amplitude> out(amps_.size());
  for (std::uint64_t idx = 0; idx < amps_.size(); ++idx) {
    std::uint64_t target = 0;
    for (int t = 0; t < num_qubits_; ++t) {
      target = (target << 1) | ((idx & mask(order[t])) ? 1 : 0);
    }
    out[target] = amps_[idx];
  }
  return StateRegister(num_qubits_, std::move(out), true);
}

std::vector<double> StateRegister::computational_distribution() const {
  std::vector<double> dist(amps_.size());
  std::transform(amps_.begin(), amps_.end(), dist.begin(),
                 [](const Amplitude& a) { return std::norm(a); });
  return dist;
}

bool StateRegister::equal_up_to_phase(const StateRegister& other, double tol) const {
  if (other.num_qubits_ != num_qubits_) return false;
  std::size_t pivot = 0;
  for (std::size_t i = 1; i < amps_.size(); ++i) {
    if (std::abs(amps_[i]) > std::abs(amps_[pivot])) pivot = i;
  }
  if (std::abs(other.amps_[pivot]) < tol) return false;
  const Amplitude ratio = other.amps_[pivot] / amps_[pivot];
  const Amplitude phase = ratio / std::abs(ratio);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (std::abs(other.amps_[i] - phase * amps_[i]) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

StateRegister prepare_bell(BellLabel label) {
  const auto v = bell_vector(label);
  return StateRegister(std::vector<Amplitude>(v.begin(), v.end()));
}

StateRegister prepare_ghz() {
  std::vector<Amplitude> amps(8);
  amps[0] = kInvSqrt2;
  amps[7] = kInvSqrt2;
  return StateRegister(std::move(amps));
}

StateRegister prepare_polarized(Bit value, MeasBasis basis) {
  const auto v = basis_vector(basis, value ? 1 : 0);
  return StateRegister(std::vector<Amplitude>(v.begin(), v.end()));
}

StateRegister tensor(const StateRegister& a, const StateRegister& b) {
  const int n = a.num_qubits() + b.num_qubits();
  if (n > StateRegister::kMaxQubits) {
    throw std::length_error("tensor: " + std::to_string(n) + " qubits exceeds register capacity " +
                            std::to_string(StateRegister::kMaxQubits));
  }
  const auto aa = a.amplitudes();
  const auto bb = b.amplitudes();
  std::vector<Amplitude> out;
  out.reserve(aa.size() * bb.size());
  for (const Amplitude& x : aa) {
    for (const Amplitude& y : bb) out.push_back(x * y);
  }
  return StateRegister(std::move(out));
}

Bit measure_in_basis(StateRegister& reg, int qubit, MeasBasis basis, RandomSource& rand) {
  const double p0 = reg.probability(qubit, basis, 0);
  Bit outcome = rand.uniform() < p0 ? 0 : 1;
  // Guard against drawing an outcome whose probability is rounding noise.
  if (outcome == 1 && 1.0 - p0 < kZeroProbability) outcome = 0;
  if (outcome == 0 && p0 < kZeroProbability) outcome = 1;
  reg.project(qubit, basis, outcome);
  return outcome;
}

BellLabel measure_bell(StateRegister& reg, int q1, int q2, RandomSource& rand) {
  const auto probs = reg.bell_probabilities(q1, q2);
  const double u = rand.uniform();
  double cumulative = 0.0;
  int chosen = -1;
  int last_nonzero = 0;
  for (int i = 0; i < 4; ++i) {
    if (probs[i] < kZeroProbability) continue;
    last_nonzero = i;
    cumulative += probs[i];
    if (chosen < 0 && u < cumulative) chosen = i;
  }
  if (chosen < 0) chosen = last_nonzero;
  const BellLabel label = BellLabel::from_index(chosen);
  reg.project_bell(q1, q2, label);
  return label;
}

// ---------------------------------------------------------------------------

std::string to_string(SwapSource source) {
  switch (source.kind) {
    case SourceKind::EntangledPhiPlus:
      return "ENTANGLED_PHI_PLUS";
    case SourceKind::Product:
      return source.x ? "PRODUCT(1)" : "PRODUCT(0)";
    case SourceKind::Ghz:
      return "GHZ";
  }
  return "?";
}

StateRegister prepare_source(SwapSource source) {
  switch (source.kind) {
    case SourceKind::EntangledPhiPlus:
      return prepare_bell(kPhiPlus);
    case SourceKind::Product: {
      const Bit x = source.x ? 1 : 0;
      return tensor(prepare_polarized(x, MeasBasis::Rectilinear),
                    prepare_polarized(x, MeasBasis::Rectilinear));
    }
    case SourceKind::Ghz:
      return prepare_ghz();
  }
  throw std::invalid_argument("prepare_source: unknown source kind");
}

namespace {

double marginal_one(const std::vector<double>& joint, int width, int position) {
  double p = 0.0;
  const std::uint64_t bit = std::uint64_t{1} << (width - 1 - position);
  for (std::uint64_t idx = 0; idx < joint.size(); ++idx) {
    if (idx & bit) p += joint[idx];
  }
  return p;
}

double agreement(const std::vector<double>& joint, int width, int a, int b) {
  double p = 0.0;
  const std::uint64_t ba = std::uint64_t{1} << (width - 1 - a);
  const std::uint64_t bb = std::uint64_t{1} << (width - 1 - b);
  for (std::uint64_t idx = 0; idx < joint.size(); ++idx) {
    if (static_cast<bool>(idx & ba) == static_cast<bool>(idx & bb)) p += joint[idx];
  }
  return p;
}

int joint_width(const std::vector<double>& joint) { return qubits_for_size(joint.size()); }

}  // namespace

double SwapBranch::p_qi_one() const { return marginal_one(joint, joint_width(joint), 0); }
double SwapBranch::p_ql_one() const { return marginal_one(joint, joint_width(joint), 1); }

std::optional<double> SwapBranch::p_qm_one() const {
  if (joint_width(joint) < 3) return std::nullopt;
  return marginal_one(joint, 3, 2);
}

double SwapBranch::p_qi_equals_ql() const { return agreement(joint, joint_width(joint), 0, 1); }

std::optional<double> SwapBranch::p_ql_equals_qm() const {
  if (joint_width(joint) < 3) return std::nullopt;
  return agreement(joint, 3, 1, 2);
}

SwapTable swap_enumerate(BellLabel created, SwapSource source) {
  const StateRegister src = prepare_source(source);
  const int n_src = src.num_qubits();
  const StateRegister full = tensor(src, prepare_bell(created));
  const int qk = 0;
  const int qj = n_src + 1;

  // After contracting (j, k) the survivors keep their order: l, [m], i.
  // Reorder them to i, l, [m].
  std::vector<int> order;
  if (n_src == 2) {
    order = {1, 0};
  } else {
    order = {2, 0, 1};
  }

  SwapTable table{created, source, {}};
  const auto probs = full.bell_probabilities(qj, qk);
  for (BellLabel m : kAllBellLabels) {
    SwapBranch& branch = table.branches[m.index()];
    branch.outcome = m;
    branch.probability = probs[m.index()];
    if (branch.probability < kZeroProbability) {
      branch.probability = 0.0;
      branch.joint.assign(std::size_t{1} << (n_src), 0.0);
      continue;
    }
    StateRegister ordered = full.contract_bell(qj, qk, m).first.permuted(order);
    branch.joint = ordered.computational_distribution();
    branch.residual = std::move(ordered);
  }
  return table;
}

}  // namespace qauth
