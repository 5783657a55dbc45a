#pragma once

#include <cstdint>
#include <vector>

#include "rcbf/types.hpp"

namespace rcbf {

// Absolute slack allowed when checking the sector quadratic constraint.
inline constexpr double kSectorQcTolerance = 1e-9;

/// Memoryless sector [alpha, beta] with 0 < alpha <= 1 <= beta.
struct SectorBound {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Loop-shifted form of a sector: v = scale * (u + w), ||w|| <= theta * ||u||.
struct NormalizedUncertainty {
  double theta = 0.0;
  double scale = 1.0;
};

/// Throws std::invalid_argument unless 0 < alpha <= 1 <= beta.
void validate_sector(const SectorBound& bound);

/// theta = (beta - alpha) / (beta + alpha), scale = (alpha + beta) / 2.
NormalizedUncertainty normalize_sector(const SectorBound& bound);

/// The symmetric sector [1 - theta, 1 + theta], whose normalized scale is 1.
SectorBound sector_from_theta(double theta);

/// (v - alpha u)^T (beta u - v) >= -tol.
bool check_sector_qc(const Vector& u, const Vector& v, const SectorBound& bound,
                     double tol = kSectorQcTolerance);

enum class NonlinearityKind { identity, saturation_in_sector, time_varying_gain, random_in_sector };

/// Test fixture for the plant-side nonlinearity phi(u, t).
///
/// Parameters by kind:
///   identity              -> none
///   saturation_in_sector  -> {limit}
///   time_varying_gain     -> {mean, amplitude, frequency_hz}
///   random_in_sector      -> none (uses `seed`)
///
/// Use the make_* factories; they reject parameters that leave the sector.
struct SectorNonlinearity {
  NonlinearityKind kind = NonlinearityKind::identity;
  std::vector<double> params;
  std::uint64_t seed = 0;
};

SectorNonlinearity make_identity();
SectorNonlinearity make_saturation(const SectorBound& bound, double limit);
SectorNonlinearity make_time_varying_gain(const SectorBound& bound, double mean, double amplitude,
                                          double frequency_hz);
SectorNonlinearity make_random_in_sector(std::uint64_t seed);

/// v = phi(u, t). The result always satisfies check_sector_qc(u, v, bound).
Vector apply_nonlinearity(const SectorNonlinearity& nl, const SectorBound& bound, const Vector& u,
                          double t);

/// w* = -theta ||u|| a^T / ||a||, the minimizer of a (u + w) over ||w|| <= theta ||u||.
/// Throws DegenerateGradient when ||a|| == 0.
Vector worst_case_input(const Vector& u, const RowVector& a, double theta);

/// lambda* = ||a|| / (2 theta ||u||). Throws std::domain_error on a zero denominator.
double optimal_multiplier(const Vector& u, const RowVector& a, double theta);

/// Brute-force minimizer of a (u + w) over sampled ||w|| <= theta ||u||.
///
/// Each of `samples` directions is drawn uniformly on the unit sphere and contributes two
/// candidates: the boundary point and a point drawn uniformly inside the ball along it.
Vector worst_case_oracle(const Vector& u, const RowVector& a, double theta, int samples,
                         std::uint64_t seed = 0x5eed);

/// w_i* = -theta_i |u_i| sgn(a_i) with sgn(0) = 0 (uncoupled channels).
Vector per_channel_worst_case(const Vector& u, const RowVector& a, const Vector& theta);

}  // namespace rcbf
