#pragma once

#include "blindgate/bigint.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blindgate {

std::string base64url_encode(std::span<const std::uint8_t> data);
/// Strict decode: rejects padding, whitespace and non-alphabet characters.
/// Throws std::invalid_argument.
std::vector<std::uint8_t> base64url_decode(std::string_view text);

/// Width in bytes of the integer wire encoding for a given modulus size.
inline std::size_t wire_width(std::size_t modulus_bits) { return (modulus_bits + 7) / 8; }

/// Integers travel as fixed-width big-endian bytes, base64url without padding.
std::string encode_int(const Bigint& value, std::size_t modulus_bits);
/// Strict inverse; rejects encodings of the wrong width. Throws std::invalid_argument.
Bigint decode_int(std::string_view text, std::size_t modulus_bits);

} // namespace blindgate
