#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "eprsim/channel.hpp"
#include "eprsim/errors.hpp"

namespace eprsim {

// Two-branch record of an entangled pair: per environment sector, the
// amplitudes attached to |Phi+> and |Phi->. Distinct sectors are orthogonal
// environment records and never interfere; fidelity and all downstream
// operations depend on the records only through per-component norms
// (dephased convention).
struct EprPairState {
  struct Sector {
    std::uint64_t tag = 0;
    Complex plus{};
    Complex minus{};
  };

  std::vector<Sector> sectors;
  int history = 0; // purification steps applied

  static EprPairState from_amplitudes(Complex plus, Complex minus) {
    EprPairState p;
    p.sectors.push_back({0, plus, minus});
    return p;
  }

  // Bell-diagonal pair of the given fidelity, with the |Phi+> and |Phi->
  // weights on orthogonal sectors.
  static EprPairState dephased(double fidelity) {
    if (fidelity < 0.0 || fidelity > 1.0) throw PreconditionError("fidelity must be in [0, 1]");
    EprPairState p;
    p.sectors.push_back({0, std::sqrt(fidelity), 0.0});
    p.sectors.push_back({1, 0.0, std::sqrt(1.0 - fidelity)});
    return p;
  }

  double plus_norm2() const {
    double n = 0.0;
    for (const Sector& s : sectors) n += std::norm(s.plus);
    return n;
  }

  double minus_norm2() const {
    double n = 0.0;
    for (const Sector& s : sectors) n += std::norm(s.minus);
    return n;
  }

  double norm2() const { return plus_norm2() + minus_norm2(); }

  double fidelity() const {
    const double p = plus_norm2();
    const double total = p + minus_norm2();
    if (total <= 0.0) throw DegenerateStateError("pair state has zero norm");
    return p / total;
  }

  EprPairState normalized() const {
    const double total = norm2();
    if (total <= 0.0) throw DegenerateStateError("pair state has zero norm");
    EprPairState out = *this;
    const double inv = 1.0 / std::sqrt(total);
    for (Sector& s : out.sectors) {
      s.plus *= inv;
      s.minus *= inv;
    }
    return out;
  }

  // Norm-equivalent two-sector form. Observationally lossless under the
  // dephased convention; keeps sector counts bounded in long pipelines.
  EprPairState compressed() const {
    EprPairState out = dephased(0.5);
    out.sectors[0].plus = std::sqrt(plus_norm2());
    out.sectors[1].minus = std::sqrt(minus_norm2());
    out.history = history;
    return out;
  }
};

inline double fidelity(const EprPairState& pair) { return pair.fidelity(); }

// Reads the |Phi+>/|Phi-> records of a two-atom BranchState, restricted to
// its Phi components; any |Psi+->/|Psi-> weight (an undetected photon loss)
// is discarded.
inline EprPairState to_epr_pair(const BranchState& state, std::string_view a,
                                std::string_view b) {
  EprPairState pair;
  for (const BellAmplitudes& e : bell_amplitudes(state, a, b)) {
    if (e.phi_plus == Complex{} && e.phi_minus == Complex{}) continue;
    pair.sectors.push_back({e.sector, e.phi_plus, e.phi_minus});
  }
  if (pair.sectors.empty()) throw DegenerateStateError("state has no Phi component");
  return pair;
}

} // namespace eprsim
