#include "blindgate/sha384.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace blindgate {

Sha384Digest sha384(std::span<const std::uint8_t> data) {
    Sha384Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha384(), nullptr) != 1 ||
        len != kSha384Len) {
        throw std::runtime_error("sha384: digest failed");
    }
    return out;
}

Sha384Digest sha384(std::string_view data) {
    return sha384(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::vector<std::uint8_t> sha384_expand(std::span<const std::uint8_t> seed,
                                        std::size_t out_len,
                                        std::uint32_t first_block) {
    std::vector<std::uint8_t> out;
    out.reserve((out_len + kSha384Len - 1) / kSha384Len * kSha384Len);
    std::vector<std::uint8_t> block(4 + seed.size());
    std::uint32_t counter = first_block;
    while (out.size() < out_len) {
        block[0] = static_cast<std::uint8_t>(counter >> 24);
        block[1] = static_cast<std::uint8_t>(counter >> 16);
        block[2] = static_cast<std::uint8_t>(counter >> 8);
        block[3] = static_cast<std::uint8_t>(counter);
        std::copy(seed.begin(), seed.end(), block.begin() + 4);
        Sha384Digest d = sha384(block);
        out.insert(out.end(), d.begin(), d.end());
        ++counter;
    }
    out.resize(out_len);
    return out;
}

std::string to_hex(std::span<const std::uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("from_hex: odd length");
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_nibble(hex[2 * i]);
        int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("from_hex: bad digit");
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return out;
}

} // namespace blindgate
