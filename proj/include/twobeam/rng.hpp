#ifndef TWOBEAM_RNG_HPP
#define TWOBEAM_RNG_HPP

#include <cmath>
#include <cstdint>

namespace twobeam {

// splitmix64: tiny, well-mixed, and fully portable.  We avoid
// std::normal_distribution because its output sequence is
// implementation-defined; reproducible scenario outputs require the
// exact same draws on every build.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in (0,1); never returns 0 so log() is safe.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // Standard normal pair via Box-Muller.
    void next_gaussian_pair(double& g0, double& g1) {
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        g0 = r * std::cos(2.0 * M_PI * u2);
        g1 = r * std::sin(2.0 * M_PI * u2);
    }

  private:
    std::uint64_t state_;
};

// Decorrelated per-item stream: results do not depend on how items are
// distributed across workers.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ull * (index + 1)));
    return SplitMix64(mixer.next_u64());
}

} // namespace twobeam

#endif
