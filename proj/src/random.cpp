#include "blindgate/random.hpp"

#include <openssl/rand.h>

#include <cstring>
#include <stdexcept>

namespace blindgate {

void SystemRandom::fill(std::span<std::uint8_t> out) {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
        throw std::runtime_error("SystemRandom: RAND_bytes failed");
    }
}

DeterministicRandom::DeterministicRandom(std::span<const std::uint8_t> seed)
    : seed_(seed.begin(), seed.end()) {}

DeterministicRandom::DeterministicRandom(std::uint64_t seed) {
    seed_.resize(8);
    for (int i = 0; i < 8; ++i) seed_[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
    std::size_t pos = 0;
    while (pos < out.size()) {
        if (pending_.empty()) {
            std::vector<std::uint8_t> block = seed_;
            block.push_back(static_cast<std::uint8_t>(counter_ >> 24));
            block.push_back(static_cast<std::uint8_t>(counter_ >> 16));
            block.push_back(static_cast<std::uint8_t>(counter_ >> 8));
            block.push_back(static_cast<std::uint8_t>(counter_));
            ++counter_;
            Sha384Digest d = sha384(block);
            pending_.assign(d.begin(), d.end());
        }
        std::size_t take = std::min(pending_.size(), out.size() - pos);
        std::memcpy(out.data() + pos, pending_.data(), take);
        pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(take));
        pos += take;
    }
}

DeterministicRandom DeterministicRandom::fork(std::uint64_t index) const {
    std::vector<std::uint8_t> child = seed_;
    child.push_back(0xF0); // domain separator between stream and fork
    for (int i = 0; i < 8; ++i) child.push_back(static_cast<std::uint8_t>(index >> (56 - 8 * i)));
    return DeterministicRandom(std::span<const std::uint8_t>(child));
}

RandomFactory system_random_factory() {
    return [](std::size_t) { return std::make_unique<SystemRandom>(); };
}

RandomFactory deterministic_random_factory(std::uint64_t seed) {
    return [seed](std::size_t index) {
        DeterministicRandom root(seed);
        return std::make_unique<DeterministicRandom>(root.fork(index));
    };
}

} // namespace blindgate
