#pragma once

#include <cstdint>
#include <utility>

#include "iflow/common.hpp"

namespace iflow {

// Counter-based generator: Philox2x64-10 (Salmon et al. constants). A stream is
// (key = seed, stream_id, counter); splitting a seed into independent streams
// is just picking distinct stream_ids, and replaying a stream is restoring its
// counter. No hidden state: one draw consumes one counter tick.
namespace philox {

constexpr uint64_t MULT = 0xD2B74407B1CE6E93ULL;
constexpr uint64_t WEYL = 0x9E3779B97F4A7C15ULL;

inline std::pair<uint64_t, uint64_t> block(uint64_t key, uint64_t c1, uint64_t c0) {
    uint64_t k = key;
    for (int round = 0; round < 10; ++round) {
        unsigned __int128 prod = static_cast<unsigned __int128>(MULT) * c0;
        uint64_t hi = static_cast<uint64_t>(prod >> 64);
        uint64_t lo = static_cast<uint64_t>(prod);
        c0 = hi ^ k ^ c1;
        c1 = lo;
        k += WEYL;
    }
    return {c0, c1};
}

}  // namespace philox

// Well-known stream ids. Sampling/eval streams are per-index substreams built
// from (purpose << 32) | index so they never collide with the training streams.
enum class StreamPurpose : uint64_t {
    TrainData = 0,
    TrainNoise = 1,
    ParamInit = 2,
    BufferInit = 3,
    Sample = 4,
    Trace = 5,
    EvalPairs = 6,
    EvalAblation = 7,
    Dataset = 8,
    Split = 9,
    OracleMc = 10,
};

inline uint64_t stream_id(StreamPurpose p, uint64_t index = 0) {
    return (static_cast<uint64_t>(p) << 32) | (index & 0xFFFFFFFFULL);
}

class RngStream {
  public:
    RngStream() = default;
    RngStream(uint64_t seed, uint64_t stream) : key_(seed), stream_(stream) {}
    RngStream(uint64_t seed, StreamPurpose p, uint64_t index = 0)
        : key_(seed), stream_(stream_id(p, index)) {}

    uint64_t seed() const { return key_; }
    uint64_t stream() const { return stream_; }
    uint64_t counter() const { return counter_; }
    void set_counter(uint64_t c) { counter_ = c; }

    uint64_t next_u64() {
        return philox::block(key_, stream_, counter_++).first;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe under log().
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Unbiased-enough integer in [0, bound): 128-bit multiply-shift. The bias is
    // bound/2^64, irrelevant at desk scale, and the draw count is always one.
    uint64_t uniform_int(uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        return static_cast<uint64_t>(m >> 64);
    }

    // Box-Muller pair; consumes exactly two counter ticks.
    std::pair<double, double> normal_pair() {
        double u1 = uniform_pos();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    double normal() { return normal_pair().first; }

    void fill_normal(double* out, size_t n) {
        size_t i = 0;
        for (; i + 1 < n; i += 2) {
            auto [z0, z1] = normal_pair();
            out[i] = z0;
            out[i + 1] = z1;
        }
        if (i < n) out[i] = normal();
    }

    Vec normal_vec(size_t n) {
        Vec v(n);
        fill_normal(v.data(), n);
        return v;
    }

    // Marsaglia-Tsang Gamma(shape, 1). Rejections consume extra counter ticks,
    // which the counter records, so replay stays exact.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw ArgumentError("gamma shape must be positive");
        if (shape < 1.0) {
            double u = uniform_pos();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform_pos();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        double ga = gamma(a);
        double gb = gamma(b);
        return ga / (ga + gb);
    }

  private:
    uint64_t key_ = 0;
    uint64_t stream_ = 0;
    uint64_t counter_ = 0;
};

}  // namespace iflow
