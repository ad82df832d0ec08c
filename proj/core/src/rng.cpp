#include "sgee/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgee::rng {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t& x0, std::uint32_t& x1, std::uint32_t& x2,
                         std::uint32_t& x3, std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x0;
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x2;
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  const std::uint32_t y0 = hi1 ^ x1 ^ k0;
  const std::uint32_t y1 = lo1;
  const std::uint32_t y2 = hi0 ^ x3 ^ k1;
  const std::uint32_t y3 = lo0;
  x0 = y0;
  x1 = y1;
  x2 = y2;
  x3 = y3;
}

}  // namespace

Philox4x32 philox4x32(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                      std::uint32_t c3, std::uint64_t key) {
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  std::uint32_t x0 = c0, x1 = c1, x2 = c2, x3 = c3;
  for (int round = 0; round < 10; ++round) {
    philox_round(x0, x1, x2, x3, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return {x0, x1, x2, x3};
}

// Coefficients of Wichura's algorithm AS 241 (PPND16).
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("inverse_normal_cdf: p must lie in (0,1)");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return (q < 0.0) ? -value : value;
}

namespace {

// Counter layout: c0 = lane pair | slot<<24, c1 = stream, c2/c3 = counter.
inline Philox4x32 block_for(const SeedPath& path, std::uint32_t pair_index,
                            std::uint32_t slot) {
  const std::uint32_t c0 = pair_index | (slot << 24);
  const std::uint32_t c1 = static_cast<std::uint32_t>(path.stream) ^
                           static_cast<std::uint32_t>(path.stream >> 32) * 0x9E3779B9u;
  const std::uint32_t c2 = static_cast<std::uint32_t>(path.counter);
  const std::uint32_t c3 = static_cast<std::uint32_t>(path.counter >> 32);
  return philox4x32(c0, c1, c2, c3, path.seed);
}

}  // namespace

double standard_normal(const SeedPath& path, std::uint32_t lane, std::uint32_t slot) {
  const Philox4x32 b = block_for(path, lane >> 1, slot);
  const std::uint64_t lo =
      static_cast<std::uint64_t>(b.x0) | (static_cast<std::uint64_t>(b.x1) << 32);
  const std::uint64_t hi =
      static_cast<std::uint64_t>(b.x2) | (static_cast<std::uint64_t>(b.x3) << 32);
  const std::uint64_t bits = (lane & 1u) ? hi : lo;
  return inverse_normal_cdf(uniform_from_bits(bits));
}

void fill_standard_normals(const SeedPath& path, std::uint32_t slot,
                           std::span<double> out) {
  // Separate bit generation from the uniform-to-Gaussian conversion; both
  // loops stay branch-light over one cache-resident chunk.
  constexpr std::size_t kChunk = 128;
  std::uint64_t bits[kChunk];
  const std::size_t n = out.size();
  std::size_t base = 0;
  while (base < n) {
    const std::size_t len = std::min(kChunk, n - base);
    const std::uint32_t pair0 = static_cast<std::uint32_t>(base >> 1);
    for (std::size_t i = 0; i < len; i += 2) {
      const Philox4x32 b = block_for(path, pair0 + static_cast<std::uint32_t>(i >> 1), slot);
      bits[i] =
          static_cast<std::uint64_t>(b.x0) | (static_cast<std::uint64_t>(b.x1) << 32);
      if (i + 1 < len) {
        bits[i + 1] =
            static_cast<std::uint64_t>(b.x2) | (static_cast<std::uint64_t>(b.x3) << 32);
      }
    }
    for (std::size_t i = 0; i < len; ++i) {
      out[base + i] = inverse_normal_cdf(uniform_from_bits(bits[i]));
    }
    base += len;
  }
}

}  // namespace sgee::rng
