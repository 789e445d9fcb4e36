#include "stad/rng.hpp"

#include <cmath>
#include <numbers>

namespace stad {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t hash_label(std::string_view label) {
  // FNV-1a.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::string_view label,
                     std::uint64_t index0, std::uint64_t index1) {
  std::uint64_t s = mix64(master_seed ^ hash_label(label));
  s = mix64(s ^ index0);
  s = mix64(s ^ index1);
  engine_.seed(s);
}

double RngStream::uniform() {
  // 53 mantissa bits from the top of the 64-bit output.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

double RngStream::exponential() {
  double u = uniform();
  while (u <= 0.0) u = uniform();
  return -std::log(u);
}

Complex RngStream::cnormal() {
  // Real and imaginary parts each N(0, 1/2).
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  const double re = normal();
  const double im = normal();
  return Complex(re * inv_sqrt2, im * inv_sqrt2);
}

CVector RngStream::cnormal_vector(Index p) {
  CVector z(p);
  for (Index i = 0; i < p; ++i) {
    z(i) = cnormal();
  }
  return z;
}

}  // namespace stad
