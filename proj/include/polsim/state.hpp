#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace polsim {

using Amplitude = std::complex<double>;

/// Largest photon count a state may carry unless a caller raises the cap.
inline constexpr int kDefaultMaxPhotons = 20;

/// Linear polarizer orientation in radians.
///
/// The raw value is kept as given: |θ⟩ and |θ+π⟩ differ by a sign, which the
/// measurement code relies on being visible. canonical() folds the value into
/// [0, π), where each physical orientation has exactly one representative.
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians);

  double radians() const { return radians_; }
  Angle canonical() const;

  friend bool operator==(const Angle&, const Angle&) = default;

 private:
  double radians_ = 0.0;
};

/// Pure polarization state of n photons over the H/V product basis.
///
/// Basis index b is read bitwise with photon a (index 0) as the most
/// significant bit; bit 0 is |H⟩ = |0⟩ and bit 1 is |V⟩ = |π/2⟩.
class PureState {
 public:
  /// Wraps amplitudes as given. The length must be a power of two (at least
  /// 2) and every component finite; the vector is not normalized.
  static PureState from_amplitudes(std::vector<Amplitude> amplitudes);

  /// Same checks as from_amplitudes, then scales to unit norm. A zero
  /// vector is rejected.
  static PureState normalized(std::vector<Amplitude> amplitudes);

  int num_photons() const { return num_photons_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  const Amplitude& operator[](std::size_t index) const { return amplitudes_[index]; }

  friend bool operator==(const PureState&, const PureState&) = default;

 private:
  PureState(int num_photons, std::vector<Amplitude> amplitudes)
      : num_photons_(num_photons), amplitudes_(std::move(amplitudes)) {}

  int num_photons_ = 0;
  std::vector<Amplitude> amplitudes_;
};

/// Single-photon linear polarization cos θ|H⟩ + sin θ|V⟩.
PureState linear_ket(Angle theta);

/// Kronecker product; the left operand's photons come first.
/// Throws std::length_error when the result would exceed max_photons.
PureState tensor(const PureState& left, const PureState& right,
                 int max_photons = kDefaultMaxPhotons);

/// ⟨bra|ket⟩, conjugate-linear in the bra.
Amplitude inner_product(const PureState& bra, const PureState& ket);

/// Euclidean norm of the amplitude vector.
double norm(const PureState& state);

/// (|HH⟩ + |VV⟩)/√2.
PureState bell_state();

/// (|HHV⟩ + |VVH⟩)/√2, the triphoton source.
PureState ghz_state();

}  // namespace polsim
