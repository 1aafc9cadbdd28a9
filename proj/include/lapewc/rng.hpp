#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace lapewc {

/// Seeded generator with a fully specified output stream.
///
/// Raw bits come from std::mt19937_64, whose sequence the C++ standard pins
/// down. The conversions on top are spelled out here instead of using
/// <random> distributions, whose algorithms are implementation-defined:
///   uniform()      = (next() >> 11) * 2^-53                  in [0, 1)
///   normal()       = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)     (Box-Muller, one value per call)
///   below(n)       = floor(uniform() * n)
///   shuffle(v)     = Fisher-Yates from the back, j = below(i + 1)
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    std::size_t below(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(values[i - 1], values[j]);
        }
    }

    /// Random permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

  private:
    std::mt19937_64 engine_;
};

}  // namespace lapewc
