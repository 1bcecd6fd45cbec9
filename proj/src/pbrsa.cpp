#include "blindgate/pbrsa.hpp"

#include "blindgate/encoding.hpp"

#include <stdexcept>

namespace blindgate::pbrsa {

namespace {

constexpr int kPrimalityRounds = 64;
constexpr int kBlindingRetries = 64;

Bigint one() { return Bigint(1); }

} // namespace

InfoBytes InfoBytes::from_canonical(std::string canonical) {
    if (canonical.empty()) throw std::invalid_argument("InfoBytes: empty canonical form");
    InfoBytes info;
    info.digest = sha384(canonical);
    info.canonical = std::move(canonical);
    return info;
}

std::string Ticket::hex() const { return to_hex(value); }

Ticket Ticket::from_hex(std::string_view hex) {
    std::vector<std::uint8_t> bytes = blindgate::from_hex(hex);
    if (bytes.size() != kTicketLen) throw std::invalid_argument("Ticket: wrong length");
    Ticket t;
    std::copy(bytes.begin(), bytes.end(), t.value.begin());
    return t;
}

Ticket random_ticket(RandomSource& rng) {
    Ticket t;
    rng.fill(t.value);
    return t;
}

KeyPair setup(std::size_t bits, RandomSource& rng) {
    if (bits % 2 != 0) throw std::invalid_argument("setup: bits must be even");
    if (bits < 16) throw std::invalid_argument("setup: bits must be at least 16");
    KeyPair kp;
    kp.bits = bits;
    // Safe primes make lambda(n) = 2 p' q', so every metadata exponent (odd,
    // below 2^(bits/2 - 3) < p') is invertible and the signer never has to
    // refuse a plan. Widths too small for safe primes are test-only.
    auto gen = [&] {
        return bits / 2 >= 32 ? random_safe_prime(rng, bits / 2, kPrimalityRounds)
                              : random_prime(rng, bits / 2, kPrimalityRounds);
    };
    kp.p = gen();
    do {
        kp.q = gen();
    } while (kp.q == kp.p);
    kp.n = kp.p * kp.q;
    kp.lambda_n = lcm(kp.p - one(), kp.q - one());
    if (kp.n.bit_length() != bits) throw std::runtime_error("setup: modulus width drifted");
    return kp;
}

std::vector<std::uint8_t> canonical_message(const Ticket& ticket, const InfoBytes& info) {
    const std::string& c = info.canonical;
    if (c.empty()) throw std::invalid_argument("canonical_message: empty info");
    std::vector<std::uint8_t> out;
    out.reserve(4 + c.size() + ticket.value.size());
    std::uint32_t len = static_cast<std::uint32_t>(c.size());
    out.push_back(static_cast<std::uint8_t>(len >> 24));
    out.push_back(static_cast<std::uint8_t>(len >> 16));
    out.push_back(static_cast<std::uint8_t>(len >> 8));
    out.push_back(static_cast<std::uint8_t>(len));
    out.insert(out.end(), c.begin(), c.end());
    out.insert(out.end(), ticket.value.begin(), ticket.value.end());
    return out;
}

Bigint hash_to_group(std::span<const std::uint8_t> message, const PublicKey& pk) {
    if (message.empty()) throw std::invalid_argument("hash_to_group: empty message");
    detail::opcount_bump_hash_to_group();
    const std::size_t out_len = wire_width(pk.bits) + 16;
    const std::size_t blocks = (out_len + kSha384Len - 1) / kSha384Len;
    for (std::uint32_t attempt = 0;; ++attempt) {
        std::vector<std::uint8_t> buf =
            sha384_expand(message, out_len, attempt * static_cast<std::uint32_t>(blocks));
        Bigint x = Bigint::from_bytes_be(buf) % pk.n;
        if (!x.is_zero()) return x;
    }
}

Bigint derive_info_exponent(const InfoBytes& info, const PublicKey& pk) {
    if (pk.bits < 8) throw std::invalid_argument("derive_info_exponent: modulus too small");
    detail::opcount_bump_info_exponent();
    const std::size_t k = pk.bits / 2 - 2;
    std::vector<std::uint8_t> seed = pk.n.to_bytes_be(wire_width(pk.bits));
    seed.insert(seed.end(), info.digest.begin(), info.digest.end());
    const std::size_t len = (k + 7) / 8;
    Bigint e = Bigint::from_bytes_be(sha384_expand(seed, len));
    for (std::size_t i = k; i < 8 * len; ++i) e.clear_bit(i);
    e.clear_bit(k - 1);
    e.set_bit(0);
    return e;
}

Bigint derive_info_secret(const Bigint& e_info, const KeyPair& kp) {
    std::optional<Bigint> d = invmod(e_info, kp.lambda_n);
    if (!d) {
        throw Error(Errc::not_invertible, "metadata exponent shares a factor with lambda(n)");
    }
    return *d;
}

Bigint blind_value(const Bigint& message_hash, const Bigint& r, const Bigint& e_info,
                   const Bigint& n) {
    return mulmod(message_hash, powmod(r, e_info, n), n);
}

Bigint sign_value_crt(const Bigint& blinded, const Bigint& d_info, const KeyPair& kp) {
    Bigint d_p = d_info % (kp.p - one());
    Bigint d_q = d_info % (kp.q - one());
    Bigint m_p = powmod(blinded, d_p, kp.p);
    Bigint m_q = powmod(blinded, d_q, kp.q);
    std::optional<Bigint> q_inv = invmod(kp.q, kp.p);
    if (!q_inv) throw Error(Errc::degenerate_modulus, "p and q are not coprime");
    Bigint h = mulmod(*q_inv, (m_p - m_q) % kp.p, kp.p);
    return m_q + h * kp.q;
}

Bigint unblind_value(const Bigint& blind_sig, const Bigint& r_inv, const Bigint& n) {
    return mulmod(blind_sig, r_inv, n);
}

std::pair<BlindedMessage, BlindingState> blind(const Ticket& ticket, const InfoBytes& info,
                                               const PublicKey& pk, RandomSource& rng) {
    Bigint m_hash = hash_to_group(canonical_message(ticket, info), pk);
    Bigint e_info = derive_info_exponent(info, pk);

    Bigint two(2);
    Bigint r;
    int failures = 0;
    for (;;) {
        r = two + random_below(rng, pk.n - two); // uniform in [2, n-1]
        if (gcd(r, pk.n) == one()) break;
        if (++failures > kBlindingRetries) {
            throw Error(Errc::degenerate_modulus, "blinding factor repeatedly shares a factor with n");
        }
    }
    std::optional<Bigint> r_inv = invmod(r, pk.n);
    if (!r_inv) throw Error(Errc::degenerate_modulus, "blinding factor not invertible");

    BlindedMessage blinded{blind_value(m_hash, r, e_info, pk.n)};
    BlindingState state{std::move(r), std::move(*r_inv), ticket, info, std::move(m_hash)};
    return {std::move(blinded), std::move(state)};
}

BlindSignature sign_blinded(const BlindedMessage& blinded, const InfoBytes& info,
                            const KeyPair& kp) {
    if (blinded.value <= one() || blinded.value >= kp.n ||
        !(gcd(blinded.value, kp.n) == one())) {
        throw Error(Errc::malformed_blinded, "blinded message outside the unit group of n");
    }
    Bigint e_info = derive_info_exponent(info, kp.public_key());
    Bigint d_info = derive_info_secret(e_info, kp);
    return BlindSignature{sign_value_crt(blinded.value, d_info, kp)};
}

Signature unblind(const BlindSignature& blind_sig, const BlindingState& state,
                  const PublicKey& pk) {
    Bigint candidate = unblind_value(blind_sig.value, state.r_inv, pk.n);
    // Same check as verify(), against the hash already computed in blind().
    Bigint e_info = derive_info_exponent(state.info, pk);
    if (!(powmod(candidate, e_info, pk.n) == state.message_hash)) {
        throw Error(Errc::invalid_blind_signature, "signer response does not verify");
    }
    return Signature{std::move(candidate)};
}

bool verify(const Signature& sig, const Ticket& ticket, const InfoBytes& info,
            const PublicKey& pk) {
    if (sig.value <= Bigint(0) || sig.value >= pk.n) return false;
    if (info.canonical.empty()) return false;
    Bigint e_info = derive_info_exponent(info, pk);
    Bigint m_hash = hash_to_group(canonical_message(ticket, info), pk);
    return powmod(sig.value, e_info, pk.n) == m_hash;
}

} // namespace blindgate::pbrsa
