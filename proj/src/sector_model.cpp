#include "rcbf/sector_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace rcbf {

namespace {

void require_same_size(const Vector& u, Eigen::Index n, const char* what) {
  if (u.size() != n) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(u.size()) + " vs " + std::to_string(n) + ")");
  }
}

void require_theta(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw std::invalid_argument("theta must lie in [0, 1), got " + std::to_string(theta));
  }
}

// Uniform draw in [0, 1) keyed by (seed, t, channel); identical keys give identical draws.
double keyed_uniform(std::uint64_t seed, double t, Eigen::Index channel) {
  const auto t_bits = std::bit_cast<std::uint64_t>(t);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(t_bits), static_cast<std::uint32_t>(t_bits >> 32),
                    static_cast<std::uint32_t>(channel)};
  std::mt19937_64 gen(seq);
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

void validate_sector(const SectorBound& bound) {
  if (!(bound.alpha > 0.0)) {
    throw std::invalid_argument("sector: alpha must be > 0");
  }
  if (bound.alpha > 1.0) {
    throw std::invalid_argument("sector: alpha must be <= 1");
  }
  if (!(bound.beta >= 1.0) || !std::isfinite(bound.beta)) {
    throw std::invalid_argument("sector: beta must be finite and >= 1");
  }
}

NormalizedUncertainty normalize_sector(const SectorBound& bound) {
  validate_sector(bound);
  const double sum = bound.alpha + bound.beta;
  return {(bound.beta - bound.alpha) / sum, 0.5 * sum};
}

SectorBound sector_from_theta(double theta) {
  require_theta(theta);
  return {1.0 - theta, 1.0 + theta};
}

bool check_sector_qc(const Vector& u, const Vector& v, const SectorBound& bound, double tol) {
  require_same_size(v, u.size(), "check_sector_qc");
  if (u.size() == 0) {
    throw std::invalid_argument("check_sector_qc: empty input");
  }
  const double qc = (v - bound.alpha * u).dot(bound.beta * u - v);
  return qc >= -tol;
}

SectorNonlinearity make_identity() { return {NonlinearityKind::identity, {}, 0}; }

SectorNonlinearity make_saturation(const SectorBound& bound, double limit) {
  validate_sector(bound);
  if (!(limit > 0.0) || !std::isfinite(limit)) {
    throw std::invalid_argument("saturation: limit must be positive and finite");
  }
  return {NonlinearityKind::saturation_in_sector, {limit}, 0};
}

SectorNonlinearity make_time_varying_gain(const SectorBound& bound, double mean, double amplitude,
                                          double frequency_hz) {
  validate_sector(bound);
  const double lo = mean - std::abs(amplitude);
  const double hi = mean + std::abs(amplitude);
  if (lo < bound.alpha || hi > bound.beta) {
    throw std::invalid_argument("time_varying_gain: gain range [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "] leaves the sector");
  }
  if (!std::isfinite(frequency_hz)) {
    throw std::invalid_argument("time_varying_gain: frequency must be finite");
  }
  return {NonlinearityKind::time_varying_gain, {mean, amplitude, frequency_hz}, 0};
}

SectorNonlinearity make_random_in_sector(std::uint64_t seed) {
  return {NonlinearityKind::random_in_sector, {}, seed};
}

Vector apply_nonlinearity(const SectorNonlinearity& nl, const SectorBound& bound, const Vector& u,
                          double t) {
  switch (nl.kind) {
    case NonlinearityKind::identity:
      return u;

    case NonlinearityKind::saturation_in_sector: {
      // Clip at the limit but never below the alpha line, so the slope stays in [alpha, 1].
      const double limit = nl.params.at(0);
      Vector v(u.size());
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double mag = std::max(std::min(std::abs(u(i)), limit), bound.alpha * std::abs(u(i)));
        v(i) = std::copysign(mag, u(i));
      }
      return v;
    }

    case NonlinearityKind::time_varying_gain: {
      const double mean = nl.params.at(0);
      const double amp = nl.params.at(1);
      const double freq = nl.params.at(2);
      const double gain = std::clamp(mean + amp * std::sin(2.0 * std::numbers::pi * freq * t),
                                     bound.alpha, bound.beta);
      return gain * u;
    }

    case NonlinearityKind::random_in_sector: {
      Vector v(u.size());
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double gain = bound.alpha + (bound.beta - bound.alpha) * keyed_uniform(nl.seed, t, i);
        v(i) = gain * u(i);
      }
      return v;
    }
  }
  throw std::logic_error("apply_nonlinearity: unknown kind");
}

Vector worst_case_input(const Vector& u, const RowVector& a, double theta) {
  require_same_size(u, a.size(), "worst_case_input");
  require_theta(theta);
  const double a_norm = a.norm();
  if (a_norm == 0.0) {
    throw DegenerateGradient("worst_case_input: L_g~h is zero, worst case undefined");
  }
  return (-theta * u.norm() / a_norm) * a.transpose();
}

double optimal_multiplier(const Vector& u, const RowVector& a, double theta) {
  require_same_size(u, a.size(), "optimal_multiplier");
  const double denom = 2.0 * theta * u.norm();
  const double a_norm = a.norm();
  if (denom == 0.0 || a_norm == 0.0) {
    throw std::domain_error("optimal_multiplier: requires ||u|| > 0, theta > 0 and ||a|| > 0");
  }
  return a_norm / denom;
}

Vector worst_case_oracle(const Vector& u, const RowVector& a, double theta, int samples,
                         std::uint64_t seed) {
  require_same_size(u, a.size(), "worst_case_oracle");
  require_theta(theta);
  if (samples < 1000) {
    throw std::invalid_argument("worst_case_oracle: need at least 1000 samples");
  }
  const Eigen::Index m = u.size();
  const double radius = theta * u.norm();
  Vector best = Vector::Zero(m);
  if (radius == 0.0) {
    return best;
  }

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  double best_value = 0.0;  // a . w at w = 0
  Vector dir(m);
  for (int k = 0; k < samples; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) dir(i) = normal(gen);
    const double n = dir.norm();
    if (n == 0.0) continue;
    dir /= n;
    const double r_inner = radius * std::pow(unit(gen), 1.0 / static_cast<double>(m));
    for (const double r : {radius, r_inner}) {
      const double value = r * a.dot(dir);
      if (value < best_value) {
        best_value = value;
        best = r * dir;
      }
    }
  }
  return best;
}

Vector per_channel_worst_case(const Vector& u, const RowVector& a, const Vector& theta) {
  require_same_size(u, a.size(), "per_channel_worst_case");
  require_same_size(theta, u.size(), "per_channel_worst_case theta");
  Vector w(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    require_theta(theta(i));
    const double sgn = (a(i) > 0.0) ? 1.0 : (a(i) < 0.0 ? -1.0 : 0.0);
    w(i) = -theta(i) * std::abs(u(i)) * sgn;
  }
  return w;
}

}  // namespace rcbf
