#pragma once

#include <filesystem>
#include <string>

#include "proact/policy.hpp"

namespace proact::testing {

// Feature offsets, recomputed independently of featurize().
struct Layout {
  std::size_t cursor, feedback, family, slots, known, step, count, dim;
  explicit Layout(const EnvConfig& c) {
    const auto L = static_cast<std::size_t>(c.code_length);
    const auto A = static_cast<std::size_t>(c.alphabet_size);
    cursor = 0;
    feedback = cursor + L + 1;
    family = feedback + 3;
    slots = family + static_cast<std::size_t>(c.n_families);
    known = slots + L * (A + 1);
    step = known + A + 1;
    count = step + 1;
    dim = count + 4;
  }
};

// Retrieve the own family's code first, then play the known symbol.
inline PolicyParams hand_built_policy(const EnvConfig& c, double strength) {
  const ActionSpace space(c);
  const Layout l(c);
  PolicyParams p = PolicyParams::zeros(space.size(), l.dim);
  for (int f = 0; f < c.n_families; ++f) {
    const auto a = static_cast<std::size_t>(space.retrieve_family(f));
    p.at(a, l.family + static_cast<std::size_t>(f)) = strength;
    p.at(a, l.count) = strength;
  }
  for (int s = 0; s < c.alphabet_size; ++s) {
    p.at(static_cast<std::size_t>(space.env_action(s)), l.known + static_cast<std::size_t>(s)) = 3.0 * strength;
  }
  return p;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("proact_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace proact::testing
