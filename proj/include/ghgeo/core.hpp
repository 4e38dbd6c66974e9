#pragma once

// Shared vocabulary types: vectors, potential jets, errors and a small
// deterministic parallel-for used by the scanning routines.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ghgeo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
  InvalidConfiguration,
  EvaluationAtSingularity,
  ParameterError,
  NotBalanced,
  ResolutionTooCoarse,
  DegeneratePresent,
  NonpositivePotential,
  DomainError,
  EpsilonTooLarge,
  NoThreshold,
  InvalidPartition,
  InputError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidConfiguration: return "InvalidConfiguration";
    case ErrorCode::EvaluationAtSingularity: return "EvaluationAtSingularity";
    case ErrorCode::ParameterError: return "ParameterError";
    case ErrorCode::NotBalanced: return "NotBalanced";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::DegeneratePresent: return "DegeneratePresent";
    case ErrorCode::NonpositivePotential: return "NonpositivePotential";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorCode::NoThreshold: return "NoThreshold";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::InputError: return "InputError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Value, gradient and Hessian of a scalar field at one point.
///
/// `gradient_scale` and `hessian_scale` are the sums of the magnitudes of the
/// individual kernel contributions before cancellation. They give the local
/// size against which "zero" is judged.
struct PotentialJet {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
  double gradient_scale = 0.0;
  double hessian_scale = 0.0;
};

/// Anything that can be evaluated to a jet at a Cartesian point.
template <class F>
concept JetField = requires(const F& f, const Vec3& x) {
  { f.jet(x) } -> std::convertible_to<PotentialJet>;
  { f.value(x) } -> std::convertible_to<double>;
};

/// Worker count from an explicit request, then GHGEO_THREADS, then hardware.
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GHGEO_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n). Work is split into contiguous blocks so the
/// result of each index never depends on the worker count.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2 * threads) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace ghgeo
