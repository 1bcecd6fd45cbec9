#include "blindgate/pbrsa_batch.hpp"

#include "blindgate/encoding.hpp"

#include <exception>
#include <mutex>
#include <stdexcept>

namespace blindgate::pbrsa {

namespace {

// Runs fn(i) for i in [0, count), serially or under OpenMP. The first
// exception thrown by any element is rethrown on the calling thread.
template <typename Fn>
void for_each_index(std::size_t count, Exec exec, Fn&& fn) {
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

Bigint sample_blinding_factor(const Bigint& n, RandomSource& rng) {
    Bigint two(2);
    Bigint one(1);
    int failures = 0;
    for (;;) {
        Bigint r = two + random_below(rng, n - two);
        if (gcd(r, n) == one) return r;
        if (++failures > 64) {
            throw Error(Errc::degenerate_modulus, "blinding factor repeatedly shares a factor with n");
        }
    }
}

} // namespace

std::pair<std::vector<BlindedMessage>, std::vector<BlindingState>> blind_batch(
    std::span<const Ticket> tickets, const InfoBytes& info, const PublicKey& pk,
    const RandomFactory& rng_factory, Exec exec) {
    const Bigint e_info = derive_info_exponent(info, pk);
    std::vector<BlindedMessage> blinded(tickets.size());
    std::vector<BlindingState> states(tickets.size());
    for_each_index(tickets.size(), exec, [&](std::size_t i) {
        std::unique_ptr<RandomSource> rng = rng_factory(i);
        Bigint m_hash = hash_to_group(canonical_message(tickets[i], info), pk);
        Bigint r = sample_blinding_factor(pk.n, *rng);
        std::optional<Bigint> r_inv = invmod(r, pk.n);
        if (!r_inv) throw Error(Errc::degenerate_modulus, "blinding factor not invertible");
        blinded[i] = BlindedMessage{blind_value(m_hash, r, e_info, pk.n)};
        states[i] = BlindingState{std::move(r), std::move(*r_inv), tickets[i], info,
                                  std::move(m_hash)};
    });
    return {std::move(blinded), std::move(states)};
}

std::vector<BlindSignature> sign_blinded_batch(std::span<const BlindedMessage> blinded,
                                               const InfoBytes& info, const KeyPair& kp,
                                               Exec exec) {
    const Bigint one(1);
    const Bigint e_info = derive_info_exponent(info, kp.public_key());
    const Bigint d_info = derive_info_secret(e_info, kp);
    std::vector<BlindSignature> out(blinded.size());
    for_each_index(blinded.size(), exec, [&](std::size_t i) {
        const Bigint& value = blinded[i].value;
        if (value <= one || value >= kp.n || !(gcd(value, kp.n) == one)) {
            throw Error(Errc::malformed_blinded, "blinded message outside the unit group of n");
        }
        out[i] = BlindSignature{sign_value_crt(value, d_info, kp)};
    });
    return out;
}

std::vector<Signature> unblind_batch(std::span<const BlindSignature> blind_sigs,
                                     std::span<const BlindingState> states,
                                     const PublicKey& pk, Exec exec) {
    if (blind_sigs.size() != states.size()) {
        throw std::invalid_argument("unblind_batch: size mismatch");
    }
    for (const BlindingState& s : states) {
        if (s.info.canonical != states[0].info.canonical) {
            throw std::invalid_argument("unblind_batch: mixed metadata in one batch");
        }
    }
    const Bigint e_info = states.empty() ? Bigint(0)
                                         : derive_info_exponent(states[0].info, pk);
    std::vector<Signature> out(blind_sigs.size());
    for_each_index(blind_sigs.size(), exec, [&](std::size_t i) {
        Bigint candidate = unblind_value(blind_sigs[i].value, states[i].r_inv, pk.n);
        if (!(powmod(candidate, e_info, pk.n) == states[i].message_hash)) {
            throw Error(Errc::invalid_blind_signature, "signer response does not verify");
        }
        out[i] = Signature{std::move(candidate)};
    });
    return out;
}

std::vector<std::uint8_t> verify_batch(std::span<const Signature> sigs,
                                       std::span<const Ticket> tickets, const InfoBytes& info,
                                       const PublicKey& pk, Exec exec) {
    if (sigs.size() != tickets.size()) throw std::invalid_argument("verify_batch: size mismatch");
    const Bigint e_info = derive_info_exponent(info, pk);
    std::vector<std::uint8_t> out(sigs.size(), 0);
    for_each_index(sigs.size(), exec, [&](std::size_t i) {
        if (sigs[i].value <= Bigint(0) || sigs[i].value >= pk.n) return;
        Bigint m_hash = hash_to_group(canonical_message(tickets[i], info), pk);
        out[i] = powmod(sigs[i].value, e_info, pk.n) == m_hash ? 1 : 0;
    });
    return out;
}

} // namespace blindgate::pbrsa
