#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace critgyro {

/// Single-particle state: radial (Landau) index n and angular momentum m.
struct Mode {
  int n = 0;
  int m = 0;

  auto operator<=>(const Mode&) const = default;
};

/// n + (|m| - m)/2. Zero for every lowest-Landau-level mode.
int landau_weight(Mode mode);

/// Modes with landau_weight <= n_ll - 1 and m <= l_max, sorted by (n, m).
std::vector<Mode> enumerate_modes(int n_ll, int l_max);

/// Occupation numbers aligned with the mode list of the basis that owns the state.
struct FockState {
  std::vector<int> occupations;

  auto operator<=>(const FockState&) const = default;
  bool operator==(const FockState&) const = default;
};

int total_particles(const FockState& state);
int total_L(std::span<const Mode> modes, const FockState& state);
int total_landau_weight(std::span<const Mode> modes, const FockState& state);

struct BasisParams {
  int n_particles = 0;
  int n_ll = 2;
  int l_max = 0;

  bool operator==(const BasisParams&) const = default;
};

/// Truncated many-body Fock basis. Immutable once built.
///
/// States are ordered by total angular momentum, then lexicographically by
/// their occupation vectors over the sorted mode list, so every L sector is a
/// contiguous index range.
class FockBasis {
 public:
  FockBasis(BasisParams params, std::vector<Mode> modes, std::vector<FockState> states);

  const BasisParams& params() const noexcept { return params_; }
  std::span<const Mode> modes() const noexcept { return modes_; }
  std::size_t size() const noexcept { return states_.size(); }
  const FockState& state(std::size_t i) const { return states_.at(i); }
  std::span<const FockState> states() const noexcept { return states_; }

  std::optional<std::size_t> find(const FockState& state) const;
  std::optional<std::size_t> mode_index(Mode mode) const;

  int total_L(std::size_t i) const { return total_l_.at(i); }
  std::span<const int> total_L_values() const noexcept { return total_l_; }

  /// True when every occupied mode has m = 0.
  bool all_zero_angular_momentum(std::size_t i) const { return zero_l_mask_.at(i) != 0; }

  /// Index of the state with every particle in (0,0), if present.
  std::optional<std::size_t> condensate_index() const;

 private:
  struct StateHash {
    std::size_t operator()(const FockState& s) const noexcept;
  };

  BasisParams params_;
  std::vector<Mode> modes_;
  std::vector<FockState> states_;
  std::vector<int> total_l_;
  std::vector<char> zero_l_mask_;
  std::unordered_map<FockState, std::size_t, StateHash> index_;
};

FockBasis enumerate_basis(int n_particles, int n_ll, int l_max);

/// "n:m:count;..." over occupied modes.
std::string format_occupations(std::span<const Mode> modes, const FockState& state);

/// CSV with columns index,L,occupations.
void write_basis_csv(std::ostream& out, const FockBasis& basis);

}  // namespace critgyro
