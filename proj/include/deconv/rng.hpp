#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace deconv {

//! splitmix64 finalizer; bijective mixing of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! FNV-1a over the bytes of a purpose tag.
constexpr std::uint64_t hash_tag(std::string_view tag) noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

//! Sub-seed for (master seed, purpose tag, index). Streams for distinct
//! purposes or indices are decorrelated, so adding a consumer never shifts
//! the draws of an existing one.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::string_view tag,
                                    std::uint64_t index = 0) noexcept
{
  return mix64(mix64(master ^ hash_tag(tag)) + index);
}

//! Seedable generator with named, splittable sub-streams.
//!
//! Floating-point output is assembled from raw mt19937_64 words rather than
//! std::*_distribution, so sequences depend only on the seed, not on the
//! standard library implementation.
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : seed_(seed)
    , engine_(mix64(seed))
  {
  }

  std::uint64_t seed() const noexcept { return seed_; }

  //! Independent generator for (tag, index); does not advance this one.
  Rng split(std::string_view tag, std::uint64_t index = 0) const
  {
    return Rng(derive_seed(seed_, tag, index));
  }

  std::uint64_t next_u64() { return engine_(); }

  //! uniform on [0, 1)
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  //! uniform on (0, 1), endpoints excluded
  double uniform_pos()
  {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  bool coin() { return (engine_() >> 63) != 0; }

  //! standard normal (Box-Muller, one value per call)
  double normal()
  {
    double u = uniform_pos();
    double v = uniform01();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
  }

  //! standard Cauchy
  double cauchy()
  {
    return std::tan(3.141592653589793238 * (uniform_pos() - 0.5));
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

} // namespace deconv
