#include "blindgate/encoding.hpp"

#include <array>
#include <stdexcept>

namespace blindgate {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

std::array<int8_t, 256> build_reverse() {
    std::array<int8_t, 256> rev{};
    rev.fill(-1);
    for (int i = 0; i < 64; ++i) rev[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int8_t>(i);
    return rev;
}

const std::array<int8_t, 256> kReverse = build_reverse();

} // namespace

std::string base64url_encode(std::span<const std::uint8_t> data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= data.size()) {
        std::uint32_t v = data[i] << 16 | data[i + 1] << 8 | data[i + 2];
        out.push_back(kAlphabet[v >> 18]);
        out.push_back(kAlphabet[v >> 12 & 0x3F]);
        out.push_back(kAlphabet[v >> 6 & 0x3F]);
        out.push_back(kAlphabet[v & 0x3F]);
        i += 3;
    }
    std::size_t rem = data.size() - i;
    if (rem == 1) {
        std::uint32_t v = data[i] << 16;
        out.push_back(kAlphabet[v >> 18]);
        out.push_back(kAlphabet[v >> 12 & 0x3F]);
    } else if (rem == 2) {
        std::uint32_t v = data[i] << 16 | data[i + 1] << 8;
        out.push_back(kAlphabet[v >> 18]);
        out.push_back(kAlphabet[v >> 12 & 0x3F]);
        out.push_back(kAlphabet[v >> 6 & 0x3F]);
    }
    return out;
}

std::vector<std::uint8_t> base64url_decode(std::string_view text) {
    if (text.size() % 4 == 1) throw std::invalid_argument("base64url: bad length");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3 + 2);
    std::uint32_t acc = 0;
    int nbits = 0;
    for (char c : text) {
        int8_t v = kReverse[static_cast<unsigned char>(c)];
        if (v < 0) throw std::invalid_argument("base64url: bad character");
        acc = acc << 6 | static_cast<std::uint32_t>(v);
        nbits += 6;
        if (nbits >= 8) {
            nbits -= 8;
            out.push_back(static_cast<std::uint8_t>(acc >> nbits & 0xFF));
        }
    }
    // Leftover bits must be zero (canonical encoding).
    if (nbits > 0 && (acc & ((1u << nbits) - 1)) != 0) {
        throw std::invalid_argument("base64url: non-canonical trailing bits");
    }
    return out;
}

std::string encode_int(const Bigint& value, std::size_t modulus_bits) {
    return base64url_encode(value.to_bytes_be(wire_width(modulus_bits)));
}

Bigint decode_int(std::string_view text, std::size_t modulus_bits) {
    std::vector<std::uint8_t> bytes = base64url_decode(text);
    if (bytes.size() != wire_width(modulus_bits)) {
        throw std::invalid_argument("decode_int: wrong width");
    }
    return Bigint::from_bytes_be(bytes);
}

} // namespace blindgate
