#include "polsim/state.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace polsim {

namespace {

int photons_for_dimension(std::size_t dimension) {
  if (dimension < 2 || !std::has_single_bit(dimension)) {
    throw std::invalid_argument("amplitude vector length " + std::to_string(dimension) +
                                " is not a power of two >= 2");
  }
  return std::countr_zero(dimension);
}

double squared_norm(std::span<const Amplitude> amplitudes) {
  double sum = 0.0;
  for (const auto& a : amplitudes) sum += std::norm(a);
  return sum;
}

}  // namespace

Angle::Angle(double radians) : radians_(radians) {
  if (!std::isfinite(radians)) throw std::invalid_argument("angle must be finite");
}

Angle Angle::canonical() const {
  constexpr double pi = std::numbers::pi;
  double folded = std::fmod(radians_, pi);
  if (folded < 0.0) folded += pi;
  // fmod of a tiny negative value plus pi rounds up to pi itself
  if (folded >= pi) folded = 0.0;
  return Angle(folded);
}

PureState PureState::from_amplitudes(std::vector<Amplitude> amplitudes) {
  const int n = photons_for_dimension(amplitudes.size());
  for (const auto& a : amplitudes) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw std::invalid_argument("amplitude is not finite");
    }
  }
  return PureState(n, std::move(amplitudes));
}

PureState PureState::normalized(std::vector<Amplitude> amplitudes) {
  PureState state = from_amplitudes(std::move(amplitudes));
  const double length = std::sqrt(squared_norm(state.amplitudes_));
  if (length == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
  for (auto& a : state.amplitudes_) a /= length;
  return state;
}

PureState linear_ket(Angle theta) {
  return PureState::from_amplitudes({std::cos(theta.radians()), std::sin(theta.radians())});
}

PureState tensor(const PureState& left, const PureState& right, int max_photons) {
  const int n = left.num_photons() + right.num_photons();
  if (n > max_photons) {
    throw std::length_error("tensor product of " + std::to_string(n) +
                            " photons exceeds the cap of " + std::to_string(max_photons));
  }
  std::vector<Amplitude> out;
  out.reserve(left.dimension() * right.dimension());
  for (const auto& l : left.amplitudes()) {
    for (const auto& r : right.amplitudes()) out.push_back(l * r);
  }
  return PureState::from_amplitudes(std::move(out));
}

Amplitude inner_product(const PureState& bra, const PureState& ket) {
  if (bra.num_photons() != ket.num_photons()) {
    throw std::invalid_argument("inner product of states with " +
                                std::to_string(bra.num_photons()) + " and " +
                                std::to_string(ket.num_photons()) + " photons");
  }
  Amplitude sum{0.0, 0.0};
  for (std::size_t i = 0; i < bra.dimension(); ++i) sum += std::conj(bra[i]) * ket[i];
  return sum;
}

double norm(const PureState& state) { return std::sqrt(squared_norm(state.amplitudes())); }

PureState bell_state() {
  const double h = std::numbers::sqrt2 / 2.0;
  return PureState::from_amplitudes({h, 0.0, 0.0, h});
}

PureState ghz_state() {
  const double h = std::numbers::sqrt2 / 2.0;
  // index 1 = |H⟩a|H⟩b|V⟩c, index 6 = |V⟩a|V⟩b|H⟩c
  return PureState::from_amplitudes({0.0, h, 0.0, 0.0, 0.0, 0.0, h, 0.0});
}

}  // namespace polsim
