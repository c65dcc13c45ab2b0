#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace stmca {

struct RngSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
};

std::uint64_t splitmix64(std::uint64_t& state);

// Per-path random stream. The engine seed is a splitmix64 hash of
// (master_seed, stream_id), so streams are reproducible and independent of
// the order or thread in which they are created.
class RandomStream {
public:
    explicit RandomStream(const RngSpec& spec);

    std::uint64_t next() { return engine_(); }
    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    // Standard normal by the Marsaglia polar method.
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// handled exactly once; results must be written to index-addressed storage.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace stmca
