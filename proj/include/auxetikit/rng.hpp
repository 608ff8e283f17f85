#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace auxetikit {

/// Deterministic random stream. Wraps std::mt19937_64 and converts raw words
/// to doubles and indices by fixed bit manipulations, so sequences do not
/// depend on the standard library's distribution implementations.
class Rng {
public:
   explicit Rng(std::uint64_t seed) : engine_(seed) {}

   /// Independent stream number `stream` derived from `seed`.
   static Rng split(std::uint64_t seed, std::uint64_t stream)
   {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x61757874u};
      Rng r(0);
      r.engine_.seed(seq);
      return r;
   }

   std::uint64_t next() { return engine_(); }

   /// Uniform on [0, 1) with 53 random bits.
   double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

   double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

   /// Uniform integer in [0, n) by multiply-shift; n must be positive.
   std::size_t index(std::size_t n)
   {
      return static_cast<std::size_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
   }

private:
   std::mt19937_64 engine_;
};

} // namespace auxetikit
