#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace vsfp {

/// SplitMix64 step; used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Independent per-purpose seed derived from (master, stream).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  splitmix64(s);
  return splitmix64(s);
}

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) with 53 random bits; platform independent.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Inverse-CDF sample from a probability vector given a uniform draw.
inline std::size_t sample_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  // Skip trailing zero-probability actions absorbed by rounding.
  std::size_t last = probs.size() - 1;
  while (last > 0 && probs[last] == 0.0) --last;
  return last;
}

/// Uniform point of the simplex (flat Dirichlet).
inline std::vector<double> sample_simplex(std::size_t dim, Rng& rng) {
  std::vector<double> w(dim);
  double sum = 0.0;
  for (auto& v : w) {
    v = -std::log1p(-uniform01(rng));
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

}  // namespace vsfp
