#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace eprsim::testing {

// Replays a fixed sequence of uniforms; used to force outcome sequences.
struct ScriptedRng {
  std::vector<double> values;
  std::size_t next = 0;

  double next_double() {
    if (next >= values.size()) throw std::runtime_error("ScriptedRng exhausted");
    return values[next++];
  }
};

// Always returns the same uniform; handy for "always succeed"/"always fail".
struct ConstantRng {
  double value = 0.0;
  double next_double() { return value; }
};

} // namespace eprsim::testing
