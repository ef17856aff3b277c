// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace fdbeam {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Powers are carried in milliwatt everywhere inside the library; dB/dBm
// conversion happens at the configuration boundary only.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// Wraps an angle difference into (-pi, pi].
inline double wrap_pi(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

/// Folds an angle into the half plane [-pi/2, pi/2] a ULA can observe.
/// Angles already in range are returned unchanged; out-of-range angles are
/// mapped to the direction with the same array response (sin-equivalent).
inline double fold_to_halfplane(double angle) {
  if (angle >= -kPi / 2 && angle <= kPi / 2) return angle;
  return std::asin(std::sin(angle));
}

/// Deterministic counter-free stream RNG. A stream is addressed by
/// (master_seed, run, stream) so that concurrent Monte Carlo runs and the
/// different randomness purposes inside one run never share draws.
/// Distributions are generated locally (not via <random> distribution
/// objects) so output is identical across standard library versions.
class Rng {
 public:
  enum Stream : std::uint64_t {
    kChannel = 0,
    kNoise = 1,
    kData = 2,
    kEstimation = 3,
  };

  Rng(std::uint64_t master_seed, std::uint64_t run, std::uint64_t stream)
      : gen_(mix64(mix64(mix64(master_seed) + run) + stream)) {}

  /// Uniform double in [0, 1).
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniformly distributed point on the complex unit circle.
  Complex unit_phasor() { return std::polar(1.0, 2.0 * kPi * uniform()); }

  /// Circularly-symmetric complex Gaussian CN(0, variance).
  Complex complex_gaussian(double variance) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double amplitude = std::sqrt(-variance * std::log1p(-u1));
    return std::polar(amplitude, 2.0 * kPi * u2);
  }

 private:
  static std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace fdbeam
