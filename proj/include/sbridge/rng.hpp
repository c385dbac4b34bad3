// Counter-based RNG (Philox4x32-10) with independent streams.
//
// Trajectory-parallel Monte Carlo needs reproducible, non-overlapping random
// streams: stream i of a given seed always yields the same sequence, no matter
// how many other streams are drawn from concurrently. Philox is stateless per
// block, so a stream is just (seed, stream_id, block_counter).

#ifndef SBRIDGE_RNG_HPP
#define SBRIDGE_RNG_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace sbridge {

namespace detail {

struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                              std::uint64_t stream,
                                              std::uint64_t counter) {
        std::uint32_t c0 = static_cast<std::uint32_t>(counter);
        std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return {c0, c1, c2, c3};
    }
};

}  // namespace detail

// One random stream: sequential draws, cheap to construct, value-semantic.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id) {}

    std::uint64_t next_u64() {
        if (have_half_) {
            have_half_ = false;
            return half_;
        }
        const auto b = detail::Philox4x32::block(seed_, stream_, counter_++);
        half_ = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
        have_half_ = true;
        return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [a, b).
    double uniform(double a, double b) { return a + uniform() * (b - a); }

    // Standard normal via Box-Muller. Two uniforms per draw; 1-u keeps the
    // log argument in (0, 1].
    double gaussian() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * kPi * u2);
    }

    // Circularly-symmetric complex normal with total variance 1
    // (independent N(0, 1/2) real and imaginary parts).
    std::complex<double> gaussian_complex() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-std::log1p(-u1));
        return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

private:
    static constexpr double kPi = 3.14159265358979323846;
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::uint64_t half_ = 0;
    bool have_half_ = false;
};

}  // namespace sbridge

#endif  // SBRIDGE_RNG_HPP
