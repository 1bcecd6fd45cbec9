#pragma once

#include "blindgate/sha384.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace blindgate {

/// Source of random bytes. Protocol code takes this as a parameter so tests
/// can substitute a deterministic stream for the system CSPRNG.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    std::vector<std::uint8_t> bytes(std::size_t n) {
        std::vector<std::uint8_t> buf(n);
        fill(buf);
        return buf;
    }
};

/// Cryptographically secure randomness (OpenSSL RAND_bytes).
class SystemRandom final : public RandomSource {
public:
    void fill(std::span<std::uint8_t> out) override;
};

/// Deterministic stream for tests: block i is SHA384(seed || BE32(i)).
/// Same seed, same byte stream, independent of read sizes.
class DeterministicRandom final : public RandomSource {
public:
    explicit DeterministicRandom(std::span<const std::uint8_t> seed);
    explicit DeterministicRandom(std::uint64_t seed);

    void fill(std::span<std::uint8_t> out) override;

    /// Derives an independent child stream; used to give each element of a
    /// batch its own reproducible source regardless of processing order.
    DeterministicRandom fork(std::uint64_t index) const;

private:
    std::vector<std::uint8_t> seed_;
    std::uint32_t counter_ = 0;
    std::vector<std::uint8_t> pending_;
};

/// Produces one RandomSource per batch element.
using RandomFactory = std::function<std::unique_ptr<RandomSource>(std::size_t index)>;

RandomFactory system_random_factory();
RandomFactory deterministic_random_factory(std::uint64_t seed);

} // namespace blindgate
