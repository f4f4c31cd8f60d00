#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace powvar {

/// Philox4x32-10 counter-based generator (Salmon et al. constants).
/// A draw is a pure function of (key, counter), so any worker can produce
/// any path's variates in any order and the ensemble still comes out
/// bit-identical.
struct Philox4x32 {
    static constexpr uint32_t kMul0 = 0xD2511F53u;
    static constexpr uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                         std::array<uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            uint64_t p0 = (uint64_t)kMul0 * ctr[0];
            uint64_t p1 = (uint64_t)kMul1 * ctr[2];
            std::array<uint32_t, 4> next;
            next[0] = (uint32_t)(p1 >> 32) ^ ctr[1] ^ key[0];
            next[1] = (uint32_t)p1;
            next[2] = (uint32_t)(p0 >> 32) ^ ctr[3] ^ key[1];
            next[3] = (uint32_t)p0;
            ctr = next;
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// Streams keep independent uses of the same seed from colliding.
enum class RngStream : uint32_t {
    GaussianPath = 1,
    DriverIncrements = 2,
    MomentProbe = 3,
};

class CounterRng {
public:
    CounterRng(uint64_t seed, RngStream stream, uint64_t path)
        : key_{(uint32_t)(seed & 0xFFFFFFFFu), (uint32_t)(seed >> 32)},
          path_lo_((uint32_t)(path & 0xFFFFFFFFu)),
          path_hi_((uint32_t)(path >> 32)),
          stream_((uint32_t)stream) {}

    /// Two unit uniforms in (0,1) from the 128-bit block at `index`.
    std::array<double, 2> uniformPair(uint64_t index) const {
        auto words = Philox4x32::block(
            {path_lo_, path_hi_, (uint32_t)(index & 0xFFFFFFFFu),
             (uint32_t)((index >> 32) & 0x00FFFFFFu) | (stream_ << 24)},
            key_);
        uint64_t w0 = ((uint64_t)words[0] << 32) | words[1];
        uint64_t w1 = ((uint64_t)words[2] << 32) | words[3];
        // 53-bit mantissas, offset by half an ulp so 0 is excluded.
        double u0 = ((double)(w0 >> 11) + 0.5) * 0x1.0p-53;
        double u1 = ((double)(w1 >> 11) + 0.5) * 0x1.0p-53;
        return {u0, u1};
    }

    /// Standard normal via Box-Muller; one variate per index.
    double normal(uint64_t index) const {
        auto [u0, u1] = uniformPair(index >> 1);
        double r = std::sqrt(-2.0 * std::log(u0));
        double angle = 2.0 * M_PI * u1;
        return (index & 1) ? r * std::sin(angle) : r * std::cos(angle);
    }

private:
    std::array<uint32_t, 2> key_;
    uint32_t path_lo_;
    uint32_t path_hi_;
    uint32_t stream_;
};

}  // namespace powvar
