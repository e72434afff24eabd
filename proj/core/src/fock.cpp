#include "critgyro/fock.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <sstream>

#include "critgyro/error.hpp"

namespace critgyro {

int landau_weight(Mode mode) { return mode.n + (std::abs(mode.m) - mode.m) / 2; }

std::vector<Mode> enumerate_modes(int n_ll, int l_max) {
  if (n_ll < 1) throw ParameterError("enumerate_modes: n_ll must be >= 1");
  if (l_max < 0) throw ParameterError("enumerate_modes: l_max must be >= 0");

  const int budget = n_ll - 1;
  std::vector<Mode> modes;
  for (int n = 0; n <= budget; ++n) {
    // For m < 0 the weight is n + |m|, so m >= -(budget - n).
    for (int m = -(budget - n); m <= l_max; ++m) {
      if (landau_weight({n, m}) <= budget) modes.push_back({n, m});
    }
  }
  std::sort(modes.begin(), modes.end());
  return modes;
}

int total_particles(const FockState& state) {
  return std::accumulate(state.occupations.begin(), state.occupations.end(), 0);
}

int total_L(std::span<const Mode> modes, const FockState& state) {
  if (modes.size() != state.occupations.size()) {
    throw StructuralError("total_L: state does not match the mode list");
  }
  int l = 0;
  for (std::size_t k = 0; k < modes.size(); ++k) l += modes[k].m * state.occupations[k];
  return l;
}

int total_landau_weight(std::span<const Mode> modes, const FockState& state) {
  if (modes.size() != state.occupations.size()) {
    throw StructuralError("total_landau_weight: state does not match the mode list");
  }
  int w = 0;
  for (std::size_t k = 0; k < modes.size(); ++k) w += landau_weight(modes[k]) * state.occupations[k];
  return w;
}

std::size_t FockBasis::StateHash::operator()(const FockState& s) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (int occ : s.occupations) {
    h ^= static_cast<std::size_t>(occ) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

FockBasis::FockBasis(BasisParams params, std::vector<Mode> modes, std::vector<FockState> states)
    : params_(params), modes_(std::move(modes)), states_(std::move(states)) {
  total_l_.reserve(states_.size());
  zero_l_mask_.reserve(states_.size());
  index_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const auto& s = states_[i];
    total_l_.push_back(critgyro::total_L(modes_, s));
    bool zero = true;
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      if (s.occupations[k] > 0 && modes_[k].m != 0) zero = false;
    }
    zero_l_mask_.push_back(zero ? 1 : 0);
    if (!index_.emplace(s, i).second) throw StructuralError("FockBasis: duplicate state");
  }
}

std::optional<std::size_t> FockBasis::find(const FockState& state) const {
  auto it = index_.find(state);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FockBasis::mode_index(Mode mode) const {
  auto it = std::lower_bound(modes_.begin(), modes_.end(), mode);
  if (it == modes_.end() || *it != mode) return std::nullopt;
  return static_cast<std::size_t>(it - modes_.begin());
}

std::optional<std::size_t> FockBasis::condensate_index() const {
  auto k = mode_index({0, 0});
  if (!k) return std::nullopt;
  FockState s{std::vector<int>(modes_.size(), 0)};
  s.occupations[*k] = params_.n_particles;
  return find(s);
}

namespace {

struct Enumerator {
  std::span<const Mode> modes;
  std::vector<std::size_t> order;  // mode indices sorted by ascending m
  int budget;
  int l_max;
  std::vector<FockState>* out;
  std::vector<int> occ;

  void run(std::size_t pos, int remaining, int l, int w) {
    if (remaining == 0) {
      if (l <= l_max) out->push_back(FockState{occ});
      return;
    }
    if (pos == order.size()) return;
    const Mode mode = modes[order[pos]];
    // Every remaining particle sits in this mode or a later one, all with m >= mode.m.
    if (l + remaining * mode.m > l_max) return;
    const int weight = landau_weight(mode);
    for (int c = remaining; c >= 0; --c) {
      if (w + c * weight > budget) continue;
      occ[order[pos]] = c;
      run(pos + 1, remaining - c, l + c * mode.m, w + c * weight);
    }
    occ[order[pos]] = 0;
  }
};

}  // namespace

FockBasis enumerate_basis(int n_particles, int n_ll, int l_max) {
  if (n_particles < 0) throw ParameterError("enumerate_basis: N must be >= 0");
  auto modes = enumerate_modes(n_ll, l_max);

  std::vector<FockState> states;
  Enumerator e{modes, {}, n_ll - 1, l_max, &states, std::vector<int>(modes.size(), 0)};
  e.order.resize(modes.size());
  std::iota(e.order.begin(), e.order.end(), std::size_t{0});
  std::stable_sort(e.order.begin(), e.order.end(),
                   [&](std::size_t a, std::size_t b) { return modes[a].m < modes[b].m; });
  e.run(0, n_particles, 0, 0);

  std::vector<std::pair<int, FockState>> keyed;
  keyed.reserve(states.size());
  for (auto& s : states) {
    const int l = total_L(modes, s);
    keyed.emplace_back(l, std::move(s));
  }
  std::sort(keyed.begin(), keyed.end());
  states.clear();
  for (auto& [l, s] : keyed) states.push_back(std::move(s));

  return FockBasis({n_particles, n_ll, l_max}, std::move(modes), std::move(states));
}

std::string format_occupations(std::span<const Mode> modes, const FockState& state) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (state.occupations[k] == 0) continue;
    if (!first) os << ';';
    os << modes[k].n << ':' << modes[k].m << ':' << state.occupations[k];
    first = false;
  }
  return os.str();
}

void write_basis_csv(std::ostream& out, const FockBasis& basis) {
  out << "index,L,occupations\n";
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out << i << ',' << basis.total_L(i) << ',' << format_occupations(basis.modes(), basis.state(i))
        << '\n';
  }
}

}  // namespace critgyro
