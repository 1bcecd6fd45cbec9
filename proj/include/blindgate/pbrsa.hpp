#pragma once

#include "blindgate/bigint.hpp"
#include "blindgate/errors.hpp"
#include "blindgate/random.hpp"
#include "blindgate/sha384.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace blindgate::pbrsa {

struct PublicKey {
    Bigint n;
    std::size_t bits = 0;
};

struct KeyPair {
    Bigint p;
    Bigint q;
    Bigint n;
    Bigint lambda_n; // lcm(p-1, q-1)
    std::size_t bits = 0;

    PublicKey public_key() const { return PublicKey{n, bits}; }
};

/// Canonical public-metadata bytes plus their SHA-384 digest. Both sides of
/// the protocol derive everything metadata-dependent from this value.
struct InfoBytes {
    std::string canonical;
    Sha384Digest digest{};

    static InfoBytes from_canonical(std::string canonical); // rejects empty input
};

inline constexpr std::size_t kTicketLen = 32;

struct Ticket {
    std::array<std::uint8_t, kTicketLen> value{};

    std::string hex() const;
    static Ticket from_hex(std::string_view hex); // throws std::invalid_argument
    friend bool operator==(const Ticket&, const Ticket&) = default;
};

Ticket random_ticket(RandomSource& rng);

struct BlindedMessage {
    Bigint value;
};

struct BlindSignature {
    Bigint value;
};

struct Signature {
    Bigint value;
};

/// Client-side secret kept between blind and unblind. `message_hash` caches
/// the blind-phase hash so the unblind check does not hash a second time.
struct BlindingState {
    Bigint r;
    Bigint r_inv;
    Ticket ticket;
    InfoBytes info;
    Bigint message_hash;
};

struct DerivedExponents {
    Bigint e_info;
    std::optional<Bigint> d_info; // signer-side only
};

/// Generates an RSA key pair with an exactly `bits`-bit modulus. `bits` must
/// be even and at least 16; deployments should insist on 1024 or more.
/// Primality is checked at 64 rounds.
KeyPair setup(std::size_t bits, RandomSource& rng);

/// Length-prefixed binding of metadata and ticket, the preimage for the
/// message hash: BE32(len(info.canonical)) || info.canonical || ticket.
std::vector<std::uint8_t> canonical_message(const Ticket& ticket, const InfoBytes& info);

/// Full-domain hash into [1, n-1]: counter-mode SHA-384 expansion to
/// ceil(bits/8)+16 bytes, reduced mod n, retried on zero.
Bigint hash_to_group(std::span<const std::uint8_t> message, const PublicKey& pk);

/// Metadata-derived public exponent: SHA-384 expansion over
/// (n big-endian || info digest) to floor(bits/2)-2 bits, top bit cleared,
/// low bit forced to 1.
Bigint derive_info_exponent(const InfoBytes& info, const PublicKey& pk);

/// Signer-side inverse exponent e_info^-1 mod lambda(n).
/// Throws NOT_INVERTIBLE when gcd(e_info, lambda_n) != 1; the signer must
/// refuse such metadata.
Bigint derive_info_secret(const Bigint& e_info, const KeyPair& kp);

std::pair<BlindedMessage, BlindingState> blind(const Ticket& ticket, const InfoBytes& info,
                                               const PublicKey& pk, RandomSource& rng);

BlindSignature sign_blinded(const BlindedMessage& blinded, const InfoBytes& info,
                            const KeyPair& kp);

/// Removes the blinding factor and checks the result against the cached
/// message hash. Throws INVALID_BLIND_SIGNATURE if the signer responded with
/// anything that does not verify.
Signature unblind(const BlindSignature& blind_sig, const BlindingState& state,
                  const PublicKey& pk);

bool verify(const Signature& sig, const Ticket& ticket, const InfoBytes& info,
            const PublicKey& pk);

// Algebraic steps with every operand explicit. The high-level operations
// compose these; tests and the harness drive them with forced values.
Bigint blind_value(const Bigint& message_hash, const Bigint& r, const Bigint& e_info,
                   const Bigint& n);
Bigint sign_value_crt(const Bigint& blinded, const Bigint& d_info, const KeyPair& kp);
Bigint unblind_value(const Bigint& blind_sig, const Bigint& r_inv, const Bigint& n);

} // namespace blindgate::pbrsa
