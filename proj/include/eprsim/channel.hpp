#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eprsim/errors.hpp"

namespace eprsim {

using Complex = std::complex<double>;

inline constexpr double kAmplitudeTol = 1e-12;

// ---------------------------------------------------------------------------
// Phase jitter
// ---------------------------------------------------------------------------

// Start-time dependent unit-modulus factor multiplying the success amplitude
// of a photon transfer. Models timing/phase error of the send/receive pulses.
//
//   none    -- constant unit factor (stationary environment)
//   linear  -- phase drifts linearly, phi(t) = omega * t
//   sine    -- phi(t) = amp * sin(omega * t + phase0)
//
// Phases are evaluated on the start time reduced modulo the model period so
// that accuracy does not degrade as the simulated clock grows.
class JitterSpec {
public:
  enum class Kind { None, Linear, Sine };

  Kind kind = Kind::None;
  double omega = 0.0;
  double amplitude = 0.0;
  double phase0 = 0.0;

  static JitterSpec none() { return {}; }

  static JitterSpec linear(double omega) {
    JitterSpec j;
    if (omega != 0.0) {
      j.kind = Kind::Linear;
      j.omega = omega;
    }
    return j;
  }

  static JitterSpec sine(double amplitude, double omega, double phase0 = 0.0) {
    JitterSpec j;
    if (amplitude != 0.0 && omega != 0.0) {
      j.kind = Kind::Sine;
      j.amplitude = amplitude;
      j.omega = omega;
      j.phase0 = phase0;
    }
    return j;
  }

  bool is_none() const { return kind == Kind::None; }

  double phase(double t) const {
    switch (kind) {
    case Kind::None:
      return 0.0;
    case Kind::Linear:
      return omega * reduced(t, omega);
    case Kind::Sine:
      return amplitude * std::sin(omega * reduced(t, omega) + phase0);
    }
    return 0.0;
  }

  Complex factor(double t) const {
    if (kind == Kind::None) return {1.0, 0.0};
    const double p = phase(t);
    return {std::cos(p), std::sin(p)};
  }

  // Accepted forms: "none" | "linear:omega=<w>" | "sine:amp=<a>,omega=<w>[,phase=<p>]"
  static JitterSpec parse(std::string_view text);
  std::string str() const;

private:
  static double reduced(double t, double omega) {
    const double period = 2.0 * std::numbers::pi / std::abs(omega);
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    return r;
  }
};

inline JitterSpec JitterSpec::parse(std::string_view text) {
  auto fail = [&](const std::string& why) -> JitterSpec {
    throw ConfigError("invalid jitter spec '" + std::string(text) + "': " + why);
  };
  const auto colon = text.find(':');
  const std::string head(text.substr(0, colon));
  if (head == "none") {
    if (colon != std::string_view::npos) return fail("'none' takes no parameters");
    return none();
  }
  if (head != "linear" && head != "sine") return fail("unknown kind '" + head + "'");

  std::unordered_map<std::string, double> params;
  if (colon != std::string_view::npos) {
    std::string rest(text.substr(colon + 1));
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) return fail("expected key=value in '" + item + "'");
      const std::string key = item.substr(0, eq);
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(item.substr(eq + 1), &used);
      } catch (const std::exception&) {
        return fail("bad number in '" + item + "'");
      }
      if (used != item.size() - eq - 1) return fail("bad number in '" + item + "'");
      if (!params.emplace(key, value).second) return fail("duplicate parameter '" + key + "'");
    }
  }
  auto take = [&](const char* key, bool required, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) {
      if (required) fail(std::string("missing parameter '") + key + "'");
      return fallback;
    }
    const double v = it->second;
    params.erase(it);
    return v;
  };
  JitterSpec j;
  if (head == "linear") {
    j = linear(take("omega", true, 0.0));
  } else {
    const double a = take("amp", true, 0.0);
    const double w = take("omega", true, 0.0);
    j = sine(a, w, take("phase", false, 0.0));
  }
  if (!params.empty()) fail("unknown parameter '" + params.begin()->first + "'");
  return j;
}

inline std::string JitterSpec::str() const {
  std::ostringstream os;
  switch (kind) {
  case Kind::None:
    return "none";
  case Kind::Linear:
    os << "linear:omega=" << omega;
    return os.str();
  case Kind::Sine:
    os << "sine:amp=" << amplitude << ",omega=" << omega << ",phase=" << phase0;
    return os.str();
  }
  return "none";
}

// ---------------------------------------------------------------------------
// Channel model
// ---------------------------------------------------------------------------

// One photon transfer through the compound cavity-fiber system.
//
// The vacuum branch is unaffected, the success branch is damped by
// e^{-kappa*tau} (times a unit-modulus jitter factor), and the lost weight
// goes to an absorption branch that is orthogonal to everything else.
//
// Two equivalent parameterizations, with the speed of light set to 1:
//   (kappa, tau)  -- damping rate and transfer time
//   (l, l0)       -- fiber length and half length l0 = 1/(2 kappa), tau = l
// so that e^{-2 kappa tau} = e^{-l/l0} always holds.
class ChannelModel {
public:
  ChannelModel(double kappa, double tau, JitterSpec jitter = {})
      : kappa_(kappa), tau_(tau), jitter_(jitter) {
    if (kappa_ < 0.0) throw ConfigError("kappa must be nonnegative");
    if (tau_ < 0.0) throw ConfigError("tau must be nonnegative");
  }

  // tau is taken as the time unit.
  static ChannelModel from_rate_product(double kappa_tau, JitterSpec jitter = {}) {
    if (kappa_tau < 0.0) throw ConfigError("kappa_tau must be nonnegative");
    return ChannelModel(kappa_tau, 1.0, jitter);
  }

  static ChannelModel from_lengths(double l, double l0, JitterSpec jitter = {}) {
    if (l0 <= 0.0) throw ConfigError("l0 must be positive");
    if (l < 0.0) throw ConfigError("l must be nonnegative");
    return ChannelModel(1.0 / (2.0 * l0), l, jitter);
  }

  // Builds a model from whichever fields are present and cross-checks any
  // redundant ones against e^{-2 kappa tau} = e^{-l/l0}.
  static ChannelModel resolve(std::optional<double> kappa, std::optional<double> tau,
                              std::optional<double> kappa_tau, std::optional<double> l,
                              std::optional<double> l0, JitterSpec jitter = {});

  double kappa() const { return kappa_; }
  double tau() const { return tau_; }
  double kappa_tau() const { return kappa_ * tau_; }
  double length() const { return tau_; }
  double half_length() const { return 1.0 / (2.0 * kappa_); }
  const JitterSpec& jitter() const { return jitter_; }
  bool stationary() const { return jitter_.is_none(); }

  // Success amplitude a1(t) for a transfer starting at t; |a1| = e^{-kappa tau}.
  Complex success_amplitude(double t) const {
    return std::exp(-kappa_ * tau_) * jitter_.factor(t);
  }

  // |a1|^2 = e^{-2 kappa tau} = e^{-l/l0}, independent of the start time.
  double success_probability() const { return std::exp(-2.0 * kappa_ * tau_); }

  // Aggregate amplitude lost to the environment per transfer of an excited sender.
  double absorption_weight() const {
    const double s = std::exp(-kappa_ * tau_);
    return std::sqrt(std::max(0.0, 1.0 - s * s));
  }

private:
  double kappa_;
  double tau_;
  JitterSpec jitter_;
};

inline ChannelModel ChannelModel::resolve(std::optional<double> kappa, std::optional<double> tau,
                                          std::optional<double> kappa_tau, std::optional<double> l,
                                          std::optional<double> l0, JitterSpec jitter) {
  if (kappa.has_value() != tau.has_value())
    throw ConfigError(kappa ? "tau is required when kappa is given"
                            : "kappa is required when tau is given");
  if (l.has_value() != l0.has_value())
    throw ConfigError(l ? "l0 is required when l is given" : "l is required when l0 is given");

  std::optional<ChannelModel> model;
  if (kappa) model = ChannelModel(*kappa, *tau, jitter);
  if (l) {
    ChannelModel m = from_lengths(*l, *l0, jitter);
    if (model) {
      const double a = model->kappa_tau();
      const double b = m.kappa_tau();
      if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}))
        throw ConfigError("inconsistent channel parameters: kappa*tau differs from l/(2*l0)");
    } else {
      model = m;
    }
  }
  if (kappa_tau) {
    if (model) {
      const double a = model->kappa_tau();
      if (std::abs(a - *kappa_tau) > 1e-9 * std::max({1.0, std::abs(a), std::abs(*kappa_tau)}))
        throw ConfigError("inconsistent channel parameters: kappa_tau disagrees with the other "
                          "parameterization");
    } else {
      model = from_rate_product(*kappa_tau, jitter);
    }
  }
  if (!model)
    throw ConfigError("channel parameters missing: give kappa_tau, (kappa, tau) or (l, l0)");
  return *model;
}

// ---------------------------------------------------------------------------
// Branch states
// ---------------------------------------------------------------------------

// One term of an unnormalized joint atoms (x) environment state.
//
// `bits` holds one computational-basis bit per named atom. `sector` labels
// the environment record: branches in different sectors are exactly
// orthogonal in the environment (differing photon-absorption histories),
// while branches in the same sector share one environment state and remain
// mutually coherent.
struct Branch {
  std::uint64_t bits = 0;
  std::uint32_t sector = 0;
  Complex amp{0.0, 0.0};
};

class BranchState {
public:
  BranchState() = default;

  explicit BranchState(std::vector<std::string> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.size() > 64) throw ConfigError("too many atoms");
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      for (std::size_t j = i + 1; j < atoms_.size(); ++j)
        if (atoms_[i] == atoms_[j]) throw ConfigError("duplicate atom name '" + atoms_[i] + "'");
  }

  static BranchState single_qubit(std::string atom, Complex c0, Complex c1) {
    BranchState s(std::vector<std::string>{std::move(atom)});
    if (c0 == Complex{} && c1 == Complex{}) throw PreconditionError("qubit amplitudes are both zero");
    if (c0 != Complex{}) s.branches_.push_back({0, 0, c0});
    if (c1 != Complex{}) s.branches_.push_back({1, 0, c1});
    return s;
  }

  const std::vector<std::string>& atoms() const { return atoms_; }
  const std::vector<Branch>& branches() const { return branches_; }

  bool has_atom(std::string_view name) const {
    return std::find(atoms_.begin(), atoms_.end(), name) != atoms_.end();
  }

  std::size_t atom_index(std::string_view name) const {
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      if (atoms_[i] == name) return i;
    throw ConfigError("unknown atom '" + std::string(name) + "'");
  }

  // Adds a fresh atom in |0>.
  void add_atom(std::string name) {
    if (has_atom(name)) throw ConfigError("atom '" + name + "' already present");
    if (atoms_.size() == 64) throw ConfigError("too many atoms");
    atoms_.push_back(std::move(name));
  }

  // Removes an atom that is |0> in every branch.
  void drop_atom(std::string_view name) {
    const std::size_t k = atom_index(name);
    const std::uint64_t mask = std::uint64_t{1} << k;
    for (const Branch& b : branches_)
      if (b.bits & mask)
        throw PreconditionError("atom '" + std::string(name) + "' is not |0> in every branch");
    const std::uint64_t low = mask - 1;
    for (Branch& b : branches_) b.bits = (b.bits & low) | ((b.bits >> 1) & ~low);
    atoms_.erase(atoms_.begin() + static_cast<std::ptrdiff_t>(k));
    canonicalize();
  }

  // Construction helper; `bits` is one '0'/'1' character per atom, in order.
  void set_branch(std::string_view bits, std::uint32_t sector, Complex amp) {
    branches_.push_back({parse_bits(bits), sector, amp});
    next_sector_ = std::max(next_sector_, sector + 1);
    canonicalize();
  }

  Complex amplitude(std::string_view bits, std::uint32_t sector = 0) const {
    const std::uint64_t key = parse_bits(bits);
    for (const Branch& b : branches_)
      if (b.bits == key && b.sector == sector) return b.amp;
    return {0.0, 0.0};
  }

  double norm2() const {
    double n = 0.0;
    for (const Branch& b : branches_) n += std::norm(b.amp);
    return n;
  }

  // Allocates an environment sector orthogonal to all existing ones.
  std::uint32_t new_sector() { return next_sector_++; }

  // --- exact local operations (error-free by assumption) ---

  friend BranchState apply_x(BranchState s, std::string_view atom) {
    const std::uint64_t mask = std::uint64_t{1} << s.atom_index(atom);
    for (Branch& b : s.branches_) b.bits ^= mask;
    s.canonicalize();
    return s;
  }

  friend BranchState apply_cnot(BranchState s, std::string_view control, std::string_view target) {
    const std::uint64_t cm = std::uint64_t{1} << s.atom_index(control);
    const std::uint64_t tm = std::uint64_t{1} << s.atom_index(target);
    if (cm == tm) throw ConfigError("cnot control and target must differ");
    for (Branch& b : s.branches_)
      if (b.bits & cm) b.bits ^= tm;
    s.canonicalize();
    return s;
  }

  friend BranchState apply_hadamard(BranchState s, std::string_view atom) {
    const std::uint64_t mask = std::uint64_t{1} << s.atom_index(atom);
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    std::vector<Branch> out;
    out.reserve(2 * s.branches_.size());
    for (const Branch& b : s.branches_) {
      const Complex a = b.amp * inv_sqrt2;
      out.push_back({b.bits & ~mask, b.sector, a});
      out.push_back({b.bits | mask, b.sector, (b.bits & mask) ? -a : a});
    }
    s.branches_ = std::move(out);
    s.canonicalize();
    return s;
  }

  // Keeps the branches where `atom` reads `value`; no renormalization.
  friend BranchState project(BranchState s, std::string_view atom, int value) {
    const std::uint64_t mask = std::uint64_t{1} << s.atom_index(atom);
    std::vector<Branch> out;
    for (const Branch& b : s.branches_)
      if (((b.bits & mask) != 0) == (value != 0)) out.push_back(b);
    s.branches_ = std::move(out);
    return s;
  }

  friend double outcome_probability(const BranchState& s, std::string_view atom, int value) {
    const double total = s.norm2();
    if (total <= 0.0) throw DegenerateStateError("state has zero norm");
    return project(s, atom, value).norm2() / total;
  }

  // Applies `fn` to every branch in place, then restores canonical form.
  template <typename Fn>
  friend BranchState transform_branches(BranchState s, Fn&& fn) {
    for (Branch& b : s.branches_) fn(b);
    s.canonicalize();
    return s;
  }

  // Multiplies every branch by `factor` and moves it to a fresh sector,
  // one new sector per distinct parent sector.
  friend BranchState scaled_into_fresh_sectors(BranchState s, double factor) {
    std::unordered_map<std::uint32_t, std::uint32_t> fresh;
    for (Branch& b : s.branches_) {
      auto [it, inserted] = fresh.try_emplace(b.sector, 0);
      if (inserted) it->second = s.new_sector();
      b.sector = it->second;
      b.amp *= factor;
    }
    s.canonicalize();
    return s;
  }

  friend BranchState transfer(BranchState state, std::string_view sender,
                              std::string_view receiver, const ChannelModel& channel, double t);

private:
  std::uint64_t parse_bits(std::string_view bits) const {
    if (bits.size() != atoms_.size())
      throw ConfigError("bit string length does not match atom count");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == '1')
        v |= std::uint64_t{1} << i;
      else if (bits[i] != '0')
        throw ConfigError("bit string must contain only '0' and '1'");
    }
    return v;
  }

  // Branches with identical (bits, sector) are merged; exact zeros dropped.
  void canonicalize() {
    std::sort(branches_.begin(), branches_.end(), [](const Branch& a, const Branch& b) {
      return a.bits != b.bits ? a.bits < b.bits : a.sector < b.sector;
    });
    std::vector<Branch> out;
    out.reserve(branches_.size());
    for (const Branch& b : branches_) {
      if (!out.empty() && out.back().bits == b.bits && out.back().sector == b.sector)
        out.back().amp += b.amp;
      else
        out.push_back(b);
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Branch& b) { return b.amp == Complex{}; }),
              out.end());
    branches_ = std::move(out);
  }

  std::vector<std::string> atoms_;
  std::vector<Branch> branches_;
  std::uint32_t next_sector_ = 1;
};

// ---------------------------------------------------------------------------
// The photonic channel
// ---------------------------------------------------------------------------

// One photon transfer from `sender` to `receiver` starting at time t.
//
// Per branch: an excited sender either hands its excitation to the receiver
// (amplitude x a1(t)) or loses the photon to the environment (amplitude
// x sqrt(1-|a1|^2), fresh orthogonal sector). A de-excited sender leaves the
// branch untouched. The sender is |0> in every output branch and the total
// squared norm is preserved.
inline BranchState transfer(BranchState state, std::string_view sender, std::string_view receiver,
                            const ChannelModel& channel, double t) {
  const std::uint64_t sm = std::uint64_t{1} << state.atom_index(sender);
  const std::uint64_t rm = std::uint64_t{1} << state.atom_index(receiver);
  if (sm == rm) throw ConfigError("transfer sender and receiver must differ");
  for (const Branch& b : state.branches_)
    if (b.bits & rm)
      throw PreconditionError("receiver '" + std::string(receiver) +
                              "' is not |0> in every branch");

  const Complex a1 = channel.success_amplitude(t);
  const double w = channel.absorption_weight();

  std::vector<Branch> out;
  out.reserve(2 * state.branches_.size());
  std::unordered_map<std::uint32_t, std::uint32_t> fresh; // parent sector -> loss sector
  for (const Branch& b : state.branches_) {
    if (!(b.bits & sm)) {
      out.push_back(b); // vacuum branch, T0 = 1
      continue;
    }
    out.push_back({(b.bits & ~sm) | rm, b.sector, b.amp * a1});
    if (w > 0.0) {
      auto [it, inserted] = fresh.try_emplace(b.sector, 0);
      if (inserted) it->second = state.new_sector();
      out.push_back({b.bits & ~sm, it->second, b.amp * w});
    }
  }
  state.branches_ = std::move(out);
  state.canonicalize();
  return state;
}

// ---------------------------------------------------------------------------
// Direct (uncorrected) EPR attempt and Bell readouts
// ---------------------------------------------------------------------------

struct BellAmplitudes {
  std::uint32_t sector = 0;
  Complex phi_plus{}, phi_minus{}, psi_plus{}, psi_minus{};
};

inline std::vector<BellAmplitudes> bell_amplitudes(const BranchState& state, std::string_view a,
                                                   std::string_view b) {
  const std::uint64_t am = std::uint64_t{1} << state.atom_index(a);
  const std::uint64_t bm = std::uint64_t{1} << state.atom_index(b);
  const std::uint64_t rest = ~(am | bm);
  constexpr double inv_sqrt2 = 0.7071067811865475244;

  std::vector<BellAmplitudes> out;
  auto slot = [&](std::uint32_t sector) -> BellAmplitudes& {
    for (auto& e : out)
      if (e.sector == sector) return e;
    out.push_back({sector});
    return out.back();
  };
  for (const Branch& br : state.branches()) {
    if (br.bits & rest)
      throw PreconditionError("bell readout requires all other atoms in |0>");
    BellAmplitudes& e = slot(br.sector);
    const bool ba = br.bits & am, bb = br.bits & bm;
    const Complex c = br.amp * inv_sqrt2;
    if (!ba && !bb) {
      e.phi_plus += c;
      e.phi_minus += c;
    } else if (ba && bb) {
      e.phi_plus += c;
      e.phi_minus -= c;
    } else if (!ba && bb) {
      e.psi_plus += c;
      e.psi_minus += c;
    } else {
      e.psi_plus += c;
      e.psi_minus -= c;
    }
  }
  return out;
}

// Squared overlap of the (unnormalized) state with |Phi+> on atoms (a, b).
inline double phi_plus_overlap(const BranchState& state, std::string_view a, std::string_view b) {
  double f = 0.0;
  for (const BellAmplitudes& e : bell_amplitudes(state, a, b)) f += std::norm(e.phi_plus);
  return f;
}

// Local CNOT followed by one transfer, starting from (|0>+|1>)/sqrt(2) on A.
// Returns the two-atom state on (A, B); the helper atom ends in |0> and is
// dropped. The |Phi+> overlap of the result is |(1 + a1(t))/2|^2.
inline BranchState direct_epr(const ChannelModel& channel, double t) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  BranchState s(std::vector<std::string>{"A", "A2", "B"});
  s.set_branch("000", 0, inv_sqrt2);
  s.set_branch("100", 0, inv_sqrt2);
  s = apply_cnot(std::move(s), "A", "A2");
  s = transfer(std::move(s), "A2", "B", channel, t);
  s.drop_atom("A2");
  return s;
}

// p(l) = e^{-l/l0} = e^{-2 kappa tau}: per-attempt success probability of one
// photon transfer, and the reciprocal of the expected repetition count.
inline double success_probability(const ChannelModel& channel) {
  return channel.success_probability();
}

} // namespace eprsim
