#ifndef POLYURN_RNG_HPP
#define POLYURN_RNG_HPP

#include <cmath>
#include <cstdint>

namespace polyurn {

// xoshiro256++ (Blackman & Vigna), seeded through splitmix64. Chosen over
// std::mt19937_64 because the raw stream AND the derived variates below are
// fixed across platforms; std:: distributions are not. Traces record the
// seed, so any run is replayable bit for bit.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ULL) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : s_) {
            // splitmix64 step
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    std::uint64_t operator()() { return next(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ULL; }

    // uniform on [0,1) with 53-bit resolution
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform on (0,1], safe as a log argument
    double uniform_pos() { return 1.0 - uniform01(); }

    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection below the last full multiple of n keeps this unbiased
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    double exponential(double mean = 1.0) { return -mean * std::log(uniform_pos()); }

    // Pareto with survival (x/x_min)^-a on [x_min, inf)
    double pareto(double exponent, double x_min = 1.0) {
        return x_min * std::pow(uniform_pos(), -1.0 / exponent);
    }

    double normal(double mu = 0.0, double sigma = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mu + sigma * spare_;
        }
        // Box-Muller; both variates kept so the stream advances two words
        const double u = uniform_pos();
        const double v = uniform01();
        const double R = std::sqrt(-2.0 * std::log(u));
        spare_ = R * std::sin(6.283185307179586477 * v);
        have_spare_ = true;
        return mu + sigma * R * std::cos(6.283185307179586477 * v);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace polyurn

#endif // POLYURN_RNG_HPP
