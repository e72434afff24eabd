#include "critgyro/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "critgyro/error.hpp"

namespace critgyro {

Posterior::Posterior(std::vector<double> grid, std::vector<double> mass) {
  if (grid.empty() || grid.size() != mass.size()) throw ParameterError("Posterior: grid and mass sizes differ");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ParameterError("Posterior: grid must be strictly ascending");
  }
  for (double m : mass) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw ParameterError("Posterior: masses must be finite and non-negative");
  }
  origin_ = grid.front();
  offset_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) offset_[i] = grid[i] - origin_;
  mass_ = std::move(mass);
  first_ = 0;
  last_ = mass_.size();
  normalize();
}

std::vector<double> Posterior::grid() const {
  std::vector<double> g(offset_.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = point(i);
  return g;
}

void Posterior::normalize() {
  double sum = 0.0;
  for (std::size_t i = first_; i < last_; ++i) sum += mass_[i];
  if (!(sum > 0.0) || !std::isfinite(sum)) throw DegenerateUpdateError("posterior has no mass left");
  for (std::size_t i = first_; i < last_; ++i) mass_[i] /= sum;
  while (first_ < last_ && mass_[first_] == 0.0) ++first_;
  while (last_ > first_ && mass_[last_ - 1] == 0.0) --last_;
}

void Posterior::multiply(std::span<const double> likelihood) {
  if (likelihood.size() != mass_.size()) throw StructuralError("Posterior::multiply: size mismatch");
  for (std::size_t i = first_; i < last_; ++i) mass_[i] *= likelihood[i];
  normalize();
}

double Posterior::mean_offset() const {
  double m = 0.0;
  for (std::size_t i = first_; i < last_; ++i) m += mass_[i] * offset_[i];
  return m;
}

double Posterior::sigma() const {
  const double mu = mean_offset();
  double v = 0.0;
  for (std::size_t i = first_; i < last_; ++i) {
    const double d = offset_[i] - mu;
    v += mass_[i] * d * d;
  }
  return std::sqrt(v);
}

double Posterior::hwhm() const {
  std::size_t k = first_;
  for (std::size_t i = first_; i < last_; ++i) {
    if (mass_[i] > mass_[k]) k = i;
  }
  const double half = 0.5 * mass_[k];
  double left = offset_.front();
  for (std::size_t j = k; j > 0; --j) {
    if (mass_[j - 1] <= half) {
      const double t = (half - mass_[j - 1]) / (mass_[j] - mass_[j - 1]);
      left = offset_[j - 1] + t * (offset_[j] - offset_[j - 1]);
      break;
    }
  }
  double right = offset_.back();
  for (std::size_t j = k; j + 1 < mass_.size(); ++j) {
    if (mass_[j + 1] <= half) {
      const double t = (mass_[j] - half) / (mass_[j] - mass_[j + 1]);
      right = offset_[j] + t * (offset_[j + 1] - offset_[j]);
      break;
    }
  }
  return 0.5 * (right - left);
}

Posterior init_prior(double lo, double hi, int n) {
  if (n < 2) throw ParameterError("init_prior: grid needs at least two points");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw ParameterError("init_prior: need lo < hi");
  Posterior p;
  p.origin_ = lo;
  const double step = (hi - lo) / (n - 1);
  p.offset_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p.offset_[static_cast<std::size_t>(i)] = step * i;
  p.mass_.assign(static_cast<std::size_t>(n), 1.0 / n);
  p.first_ = 0;
  p.last_ = p.mass_.size();
  return p;
}

const char* to_string(Outcome o) { return o == Outcome::zero ? "zero" : "not-zero"; }

double uniform_draw(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

Outcome simulate_outcome(double p, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("simulate_outcome: p must lie in [0, 1]");
  return uniform_draw(rng) <= p ? Outcome::zero : Outcome::not_zero;
}

CurveSampler::CurveSampler(const ResonanceCurve& curve) : p_(curve.p0), center_(curve.center) {
  if (curve.omega.size() < 2 || curve.omega.size() != curve.p0.size()) {
    throw StructuralError("CurveSampler: malformed curve");
  }
  rel_.resize(curve.omega.size());
  for (std::size_t i = 0; i < rel_.size(); ++i) rel_[i] = curve.omega[i] - center_;
  const double step = (rel_.back() - rel_.front()) / static_cast<double>(rel_.size() - 1);
  uniform_ = step > 0.0;
  for (std::size_t i = 1; i < rel_.size() && uniform_; ++i) {
    if (std::abs((rel_[i] - rel_[i - 1]) - step) > 1e-9 * step) uniform_ = false;
  }
  if (uniform_) inv_step_ = 1.0 / step;
}

double CurveSampler::at_offset(double r) const {
  const std::size_t n = rel_.size();
  if (r <= rel_.front()) return p_.front();
  if (r >= rel_.back()) return p_.back();
  std::size_t j;
  if (uniform_) {
    j = static_cast<std::size_t>((r - rel_.front()) * inv_step_) + 1;
    j = std::clamp<std::size_t>(j, 1, n - 1);
    while (j < n - 1 && rel_[j] <= r) ++j;
    while (j > 1 && rel_[j - 1] > r) --j;
  } else {
    j = static_cast<std::size_t>(std::upper_bound(rel_.begin(), rel_.end(), r) - rel_.begin());
  }
  const double t = (r - rel_[j - 1]) / (rel_[j] - rel_[j - 1]);
  return p_[j - 1] + t * (p_[j] - p_[j - 1]);
}

Posterior bayes_update(const Posterior& post, const ResonanceCurve& curve, double delta, Outcome outcome) {
  Posterior out = post;
  std::vector<double> like(post.size(), 0.0);
  const auto [a, b] = post.active();
  for (std::size_t i = a; i < b; ++i) {
    const double p = curve.evaluate(post.point(i) + delta);
    like[i] = outcome == Outcome::zero ? p : 1.0 - p;
  }
  out.multiply(like);
  return out;
}

double recenter_offset(const Posterior& post, const ResonanceCurve& curve) { return curve.center - post.mean(); }

const ResonanceCurve& retune(const Posterior& post, const CurveCatalog& catalog, double kappa) {
  return lookup_by_width(catalog, kappa * post.sigma());
}

void validate(const ProtocolConfig& c) {
  std::vector<std::string> errs;
  if (!std::isfinite(c.true_omega)) errs.push_back("true_omega must be finite");
  if (!(c.prior_lo < c.prior_hi)) errs.push_back("prior_lo must be below prior_hi");
  if (c.grid_size < 2) errs.push_back("grid_size must be at least 2");
  if (c.measurements < 1) errs.push_back("measurements must be at least 1");
  if (c.batch_size < 1) errs.push_back("batch_size must be at least 1");
  if (c.recenter_interval < 0) errs.push_back("recenter_interval must be non-negative");
  if (!(c.kappa > 0.0)) errs.push_back("kappa must be positive");
  for (std::size_t i = 0; i < c.retune_at.size(); ++i) {
    const int r = c.retune_at[i];
    if (i > 0 && r <= c.retune_at[i - 1]) errs.push_back("retune_at must be strictly increasing");
    if (r < 1 || r >= c.measurements) errs.push_back("retune_at entries must lie in [1, measurements)");
    if (c.batch_size > 1 && r % c.batch_size != 0) {
      errs.push_back("retune_at entry " + std::to_string(r) + " is not a multiple of batch_size");
    }
  }
  for (std::size_t i = 0; i < c.snapshots.size(); ++i) {
    if (i > 0 && c.snapshots[i] <= c.snapshots[i - 1]) errs.push_back("snapshots must be strictly increasing");
    if (c.snapshots[i] < 1 || c.snapshots[i] > c.measurements) {
      errs.push_back("snapshots entries must lie in [1, measurements]");
    }
  }
  if (errs.empty()) return;
  std::string msg = "invalid protocol config:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw ParameterError(msg);
}

ProtocolResult run_protocol(const ProtocolConfig& config, const CurveCatalog& catalog) {
  validate(config);
  const auto& curves = catalog.curves();
  const ResonanceCurve* start = catalog.find(config.initial_g, config.initial_A);
  if (start == nullptr) throw ParameterError("run_protocol: catalog has no curve for the initial (g, A)");

  std::vector<CurveSampler> samplers;
  samplers.reserve(curves.size());
  for (const auto& c : curves) samplers.emplace_back(c);
  auto index_of = [&](const ResonanceCurve& c) { return static_cast<std::size_t>(&c - curves.data()); };

  ProtocolResult result;
  Posterior post = init_prior(config.prior_lo, config.prior_hi, config.grid_size);
  std::mt19937_64 rng(config.seed);
  const int interval = config.recenter_interval > 0 ? config.recenter_interval : config.batch_size;
  const double star = config.true_omega - post.origin();
  const double target = config.target_offset;

  std::size_t active = index_of(*start);
  std::size_t next_retune = 0;
  std::size_t next_snapshot = 0;
  double anchor = 0.0;
  double delta = 0.0;
  std::vector<double> like(post.size(), 0.0);
  result.trajectory.reserve(static_cast<std::size_t>(config.measurements));

  for (int mu = 0; mu < config.measurements; ++mu) {
    bool recenter = mu % interval == 0;
    if (next_retune < config.retune_at.size() && config.retune_at[next_retune] == mu) {
      active = index_of(retune(post, catalog, config.kappa));
      ++next_retune;
      recenter = true;
    }
    const CurveSampler& sampler = samplers[active];
    if (recenter) {
      anchor = post.mean_offset();
      delta = sampler.center() + target - (post.origin() + anchor);
    }

    const double p = sampler.at_offset(target + (star - anchor));
    const Outcome outcome = simulate_outcome(p, rng);
    const auto [a, b] = post.active();
    for (std::size_t i = a; i < b; ++i) {
      const double l = sampler.at_offset(target + (post.offset(i) - anchor));
      like[i] = outcome == Outcome::zero ? l : 1.0 - l;
    }
    try {
      post.multiply(like);
    } catch (const DegenerateUpdateError& e) {
      throw DegenerateUpdateError("measurement " + std::to_string(mu + 1) + ": " + e.what());
    }

    const auto& c = curves[active];
    result.trajectory.push_back({mu + 1, outcome, c.g, c.anisotropy, delta, post.sigma()});
    if (next_snapshot < config.snapshots.size() && config.snapshots[next_snapshot] == mu + 1) {
      result.snapshots.emplace_back(mu + 1, post);
      ++next_snapshot;
    }
  }
  result.final_posterior = std::move(post);
  return result;
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + index * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EnsembleResult run_ensemble(const ProtocolConfig& config, const CurveCatalog& catalog, int trajectories,
                            std::uint64_t master_seed) {
  if (trajectories < 1) throw ParameterError("run_ensemble: need at least one trajectory");
  validate(config);
  const auto n = static_cast<std::size_t>(trajectories);
  std::vector<std::vector<double>> sigma(n);
  std::vector<double> hwhm(n, 0.0);
  std::vector<char> ok(n, 0);
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) seeds[i] = split_seed(master_seed, i);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto k = static_cast<std::size_t>(i);
    ProtocolConfig c = config;
    c.seed = seeds[k];
    c.snapshots.clear();
    try {
      const auto r = run_protocol(c, catalog);
      sigma[k].reserve(r.trajectory.size());
      for (const auto& m : r.trajectory) sigma[k].push_back(m.sigma);
      hwhm[k] = r.final_posterior.hwhm();
      ok[k] = 1;
    } catch (const DegenerateUpdateError&) {
    }
  }

  EnsembleResult out;
  for (std::size_t k = 0; k < n; ++k) {
    if (!ok[k]) {
      ++out.failures;
      continue;
    }
    out.seeds.push_back(seeds[k]);
    out.sigma.push_back(std::move(sigma[k]));
    out.final_hwhm.push_back(hwhm[k]);
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ParameterError("median: no values");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double median_sigma(const EnsembleResult& ensemble, int mu) {
  if (ensemble.sigma.empty()) throw ParameterError("median_sigma: ensemble has no completed trajectories");
  std::vector<double> v;
  v.reserve(ensemble.sigma.size());
  for (const auto& s : ensemble.sigma) v.push_back(s.at(static_cast<std::size_t>(mu - 1)));
  return median(std::move(v));
}

std::vector<double> median_sigma_series(const EnsembleResult& ensemble) {
  if (ensemble.sigma.empty()) throw ParameterError("median_sigma_series: ensemble has no completed trajectories");
  const auto n = ensemble.sigma.front().size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = median_sigma(ensemble, static_cast<int>(i + 1));
  return out;
}

double sigma_scaling(std::span<const double> sigma) {
  const auto n = sigma.size();
  if (n < 100) throw ParameterError("sigma_scaling: need at least two decades of measurements");
  const double first = static_cast<double>(n) / 100.0;
  std::vector<std::size_t> mus;
  for (int k = 0; k <= 40; ++k) {
    const auto mu = static_cast<std::size_t>(std::llround(first * std::pow(10.0, k / 20.0)));
    const auto m = std::clamp<std::size_t>(mu, 1, n);
    if (mus.empty() || m != mus.back()) mus.push_back(m);
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (auto mu : mus) {
    const double s = sigma[mu - 1];
    if (!(s > 0.0)) throw ParameterError("sigma_scaling: sigma must be positive");
    const double x = std::log(static_cast<double>(mu));
    const double y = std::log(s);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(mus.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double hwhm_proxy(ProtocolConfig config, const CurveCatalog& catalog, double offset, int trajectories,
                  std::uint64_t master_seed) {
  config.target_offset = offset;
  const auto ens = run_ensemble(config, catalog, trajectories, master_seed);
  return median(ens.final_hwhm);
}

std::string to_json(const ProtocolConfig& c) {
  const nlohmann::json j = {{"true_omega", c.true_omega},
                            {"prior_lo", c.prior_lo},
                            {"prior_hi", c.prior_hi},
                            {"grid_size", c.grid_size},
                            {"seed", c.seed},
                            {"measurements", c.measurements},
                            {"retune_at", c.retune_at},
                            {"batch_size", c.batch_size},
                            {"recenter_interval", c.recenter_interval},
                            {"initial_g", c.initial_g},
                            {"initial_A", c.initial_A},
                            {"kappa", c.kappa},
                            {"target_offset", c.target_offset},
                            {"snapshots", c.snapshots}};
  return j.dump(2);
}

ProtocolConfig protocol_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("invalid protocol config: not JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParameterError("invalid protocol config: top level must be an object");

  ProtocolConfig c;
  std::vector<std::string> errs;
  auto read = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception&) {
      errs.push_back(std::string(key) + " has the wrong type");
    }
  };
  read("true_omega", c.true_omega);
  read("prior_lo", c.prior_lo);
  read("prior_hi", c.prior_hi);
  read("grid_size", c.grid_size);
  read("seed", c.seed);
  read("measurements", c.measurements);
  read("retune_at", c.retune_at);
  read("batch_size", c.batch_size);
  read("recenter_interval", c.recenter_interval);
  read("initial_g", c.initial_g);
  read("initial_A", c.initial_A);
  read("kappa", c.kappa);
  read("target_offset", c.target_offset);
  read("snapshots", c.snapshots);
  static const char* known[] = {"true_omega", "prior_lo",         "prior_hi",  "grid_size", "seed",
                                "measurements", "retune_at",      "batch_size", "recenter_interval",
                                "initial_g",  "initial_A",        "kappa",     "target_offset", "snapshots"};
  for (const auto& item : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return item.key() == k; }) ==
        std::end(known)) {
      errs.push_back("unknown key " + item.key());
    }
  }
  try {
    validate(c);
  } catch (const ParameterError& e) {
    std::istringstream lines(e.what());
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) errs.push_back(line.substr(line.find("- ") + 2));
  }
  if (errs.empty()) return c;
  std::string msg = "invalid protocol config:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw ParameterError(msg);
}

bool apply_seed_override(ProtocolConfig& config) {
  const char* env = std::getenv("CRITGYRO_SEED");
  if (env == nullptr || *env == '\0') return false;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 0);
  if (end == env || *end != '\0') throw ParameterError("CRITGYRO_SEED is not an unsigned integer");
  config.seed = v;
  return true;
}

void write_trajectory_csv(std::ostream& out, std::span<const MeasurementRecord> trajectory) {
  const auto prec = out.precision(17);
  out << "mu,outcome,g,A,delta,sigma\n";
  for (const auto& r : trajectory) {
    out << r.index << ',' << to_string(r.outcome) << ',' << r.g << ',' << r.anisotropy << ',' << r.delta << ','
        << r.sigma << '\n';
  }
  out.precision(prec);
}

void write_posterior_csv(std::ostream& out, const Posterior& post) {
  const auto prec = out.precision(17);
  out << "omega,probability\n";
  const auto mass = post.mass();
  for (std::size_t i = 0; i < post.size(); ++i) out << post.point(i) << ',' << mass[i] << '\n';
  out.precision(prec);
}

}  // namespace critgyro
