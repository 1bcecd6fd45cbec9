#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blindgate {

inline constexpr std::size_t kSha384Len = 48;

using Sha384Digest = std::array<std::uint8_t, kSha384Len>;

Sha384Digest sha384(std::span<const std::uint8_t> data);
Sha384Digest sha384(std::string_view data);

/// Counter-mode expansion of SHA-384: block i is SHA384(BE32(i) || seed),
/// starting at block `first_block`, truncated to `out_len` bytes.
std::vector<std::uint8_t> sha384_expand(std::span<const std::uint8_t> seed,
                                        std::size_t out_len,
                                        std::uint32_t first_block = 0);

std::string to_hex(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> from_hex(std::string_view hex); // throws std::invalid_argument

} // namespace blindgate
