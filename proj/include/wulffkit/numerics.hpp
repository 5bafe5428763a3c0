#pragma once

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>
#include <utility>
#include <vector>

#include "wulffkit/error.hpp"

namespace wulffkit {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -kPi ? a + kTwoPi : a;
}

/// Root of f on [a, b] where f(a), f(b) have opposite signs (TOMS 748).
template <class F>
double solve_bracketed(F&& f, double a, double b, double fa, double fb, int bits = 50) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) fail(ErrorCode::invalid_argument, "root not bracketed");
  std::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb,
                                                    boost::math::tools::eps_tolerance<double>(bits), iters);
  return 0.5 * (lo + hi);
}

template <class F>
double solve_bracketed(F&& f, double a, double b, int bits = 50) {
  return solve_bracketed(f, a, b, f(a), f(b), bits);
}

/// Brent minimisation on [a, b]; returns (argmin, min).
template <class F>
std::pair<double, double> minimize_scalar(F&& f, double a, double b, int bits = 30, int max_iter = 80) {
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  return boost::math::tools::brent_find_minima(f, a, b, bits, iters);
}

/// SplitMix64 step, used to derive independent RNG streams from one recorded seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0, 1) from a counter, so any sample can be regenerated
/// independently of evaluation order.
inline double counter_uniform(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(splitmix64(derive_seed(seed, index)) >> 11) * 0x1.0p-53;
}

/// Runs f(0) .. f(count - 1) on up to `jobs` threads. Work items must write
/// only to their own slots; the first exception is rethrown after joining.
template <class F>
void parallel_for(std::size_t count, int jobs, F&& f) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace wulffkit
