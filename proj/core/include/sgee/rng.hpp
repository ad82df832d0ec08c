#pragma once

#include <cstdint>
#include <span>

namespace sgee {

/// Coordinates of a Gaussian draw inside the global probability space.
///
/// Every random number produced by the library is a pure function of
/// (seed, stream, counter) plus the per-vector lane index, so any draw can
/// be regenerated bit-exactly, in any order, from any worker.
///   seed    : experiment-level key
///   stream  : Monte Carlo sample index
///   counter : time-step (or draw-event) index within the stream
struct SeedPath {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  SeedPath with_counter(std::uint64_t c) const { return {seed, stream, c}; }
  SeedPath with_stream(std::uint64_t s) const { return {seed, s, counter}; }
};

namespace rng {

/// One block of the Philox-4x32-10 counter cipher: 128-bit counter plus
/// 64-bit key in, four uniform 32-bit words out.
struct Philox4x32 {
  std::uint32_t x0, x1, x2, x3;
};
Philox4x32 philox4x32(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                      std::uint32_t c3, std::uint64_t key);

/// Uniform double in (0,1), never 0 or 1, from a 64-bit word.
inline double uniform_from_bits(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximation, accurate to full double precision). This is the one
/// uniform-to-Gaussian conversion used everywhere; keeping it fixed keeps
/// every draw reproducible bit for bit.
double inverse_normal_cdf(double p);

/// Standard normal draw for lane `lane` under draw-slot `slot`.
/// Slots separate logically distinct draws that share a counter (for
/// example a step increment and its interior bridge refinement).
double standard_normal(const SeedPath& path, std::uint32_t lane, std::uint32_t slot);

/// Fills out[0..n) with the lane-indexed standard normals of (path, slot).
/// Equivalent to calling standard_normal per lane; pairs of lanes share one
/// cipher invocation.
void fill_standard_normals(const SeedPath& path, std::uint32_t slot,
                           std::span<double> out);

}  // namespace rng
}  // namespace sgee
