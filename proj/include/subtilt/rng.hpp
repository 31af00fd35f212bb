#pragma once

#include <cstddef>
#include <cstdint>

namespace subtilt {

// Counter-based uniform stream: draw i of a stream is a pure function of
// (key, counter + i), so a stream can be split by index, replayed, or filled in
// bulk by the SIMD kernels without changing a single bit of the output.
//
// Construction: splitmix64 finalizer applied to key + counter * golden ratio.
// Outputs are doubles in the open interval (0, 1) on a 2^-52 grid shifted by
// 2^-53 (never exactly 0 or 1, safe under log()).
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key, std::uint64_t counter = 0)
        : key_(key), counter_(counter) {}

    // Independent stream for (seed, tag, index); tags keep the per-method and
    // per-chunk streams of one run disjoint.
    static RandomStream derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

    double next();

    // Batch fill through the active kernel backend; advances the counter by n.
    void fill(double* out, std::size_t n);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }
    void skip(std::uint64_t n) { counter_ += n; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

namespace stream_tag {
// Fixed tags for stream derivation; part of the output-reproducibility contract.
inline constexpr std::uint64_t sample = 0x01;
inline constexpr std::uint64_t naive = 0x02;
inline constexpr std::uint64_t esscher = 0x03;
inline constexpr std::uint64_t shift = 0x04;
inline constexpr std::uint64_t diagnostics = 0x05;
inline constexpr std::uint64_t bound_check = 0x06;
}  // namespace stream_tag

}  // namespace subtilt
