#pragma once

#include <gmp.h>

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blindgate {

class RandomSource;

/// Arbitrary-precision integer backed by GMP. All modular arithmetic used by
/// the signature scheme goes through the instrumented free functions below so
/// the operation audit can count them.
class Bigint {
public:
    Bigint() { mpz_init(v_); }
    Bigint(const Bigint& other) { mpz_init_set(v_, other.v_); }
    Bigint(Bigint&& other) noexcept {
        mpz_init(v_);
        mpz_swap(v_, other.v_);
    }
    explicit Bigint(unsigned long value) { mpz_init_set_ui(v_, value); }
    ~Bigint() { mpz_clear(v_); }

    Bigint& operator=(const Bigint& other) {
        if (this != &other) mpz_set(v_, other.v_);
        return *this;
    }
    Bigint& operator=(Bigint&& other) noexcept {
        mpz_swap(v_, other.v_);
        return *this;
    }

    static Bigint from_decimal(const std::string& s); // throws std::invalid_argument
    static Bigint from_bytes_be(std::span<const std::uint8_t> bytes);

    std::string to_decimal() const;
    /// Fixed-width big-endian encoding; throws std::length_error if the value
    /// needs more than `len` bytes. Negative values are rejected.
    std::vector<std::uint8_t> to_bytes_be(std::size_t len) const;

    std::size_t bit_length() const { return mpz_sgn(v_) == 0 ? 0 : mpz_sizeinbase(v_, 2); }
    bool is_odd() const { return mpz_odd_p(v_) != 0; }
    bool is_zero() const { return mpz_sgn(v_) == 0; }
    bool fits_u64() const { return mpz_sgn(v_) >= 0 && mpz_sizeinbase(v_, 2) <= 64; }
    std::uint64_t to_u64() const;

    bool get_bit(std::size_t i) const { return mpz_tstbit(v_, i) != 0; }
    void set_bit(std::size_t i) { mpz_setbit(v_, i); }
    void clear_bit(std::size_t i) { mpz_clrbit(v_, i); }

    unsigned long mod_ui(unsigned long m) const { return mpz_fdiv_ui(v_, m); }

    friend Bigint operator+(const Bigint& a, const Bigint& b);
    friend Bigint operator-(const Bigint& a, const Bigint& b);
    friend Bigint operator*(const Bigint& a, const Bigint& b);
    friend Bigint operator%(const Bigint& a, const Bigint& b); // non-negative result

    friend bool operator==(const Bigint& a, const Bigint& b) { return mpz_cmp(a.v_, b.v_) == 0; }
    friend std::strong_ordering operator<=>(const Bigint& a, const Bigint& b) {
        int c = mpz_cmp(a.v_, b.v_);
        return c < 0 ? std::strong_ordering::less
             : c > 0 ? std::strong_ordering::greater
                     : std::strong_ordering::equal;
    }
    friend bool operator==(const Bigint& a, unsigned long b) { return mpz_cmp_ui(a.v_, b) == 0; }

    friend Bigint gcd(const Bigint& a, const Bigint& b);
    friend Bigint lcm(const Bigint& a, const Bigint& b);

    friend Bigint mulmod(const Bigint& a, const Bigint& b, const Bigint& m);
    friend Bigint powmod(const Bigint& base, const Bigint& exp, const Bigint& m);
    friend std::optional<Bigint> invmod(const Bigint& a, const Bigint& m);

    /// Miller-Rabin style probabilistic primality (GMP), `rounds` repetitions.
    bool probably_prime(int rounds) const { return mpz_probab_prime_p(v_, rounds) != 0; }

private:
    mpz_t v_;
};

/// Counted modular multiplication a*b mod m.
Bigint mulmod(const Bigint& a, const Bigint& b, const Bigint& m);
/// Counted modular exponentiation base^exp mod m.
Bigint powmod(const Bigint& base, const Bigint& exp, const Bigint& m);
/// Counted modular inverse; nullopt when gcd(a, m) != 1.
std::optional<Bigint> invmod(const Bigint& a, const Bigint& m);

/// Uniform value in [0, bound) by oversampling 16 extra bytes and reducing.
Bigint random_below(RandomSource& rng, const Bigint& bound);
/// Random prime of exactly `bits` bits with the top two bits set, so a product
/// of two such primes has exactly 2*bits bits. Primality at `rounds` rounds.
Bigint random_prime(RandomSource& rng, std::size_t bits, int rounds);
/// Like random_prime but returns a safe prime p = 2p' + 1 with p' prime, so
/// every odd value below p' is invertible mod p - 1. Needs `bits` >= 32.
Bigint random_safe_prime(RandomSource& rng, std::size_t bits, int rounds);

// ---- operation counters ----------------------------------------------------
//
// mulmod/powmod/invmod bump these. Calls are split into full-width and
// reduced-width buckets by comparing the modulus bit length against a
// configurable floor (the audit sets it to the key's modulus size so that
// CRT arithmetic mod p or q lands in the reduced bucket). The hash counters
// are bumped by the scheme's hash functions.

struct OpCounts {
    std::uint64_t modmul_full = 0;
    std::uint64_t modmul_reduced = 0;
    std::uint64_t modexp_full = 0;
    std::uint64_t modexp_reduced = 0;
    std::uint64_t modinv = 0;
    std::uint64_t hash_to_group = 0;
    std::uint64_t info_exponent = 0;

    std::uint64_t modmul_total() const { return modmul_full + modmul_reduced; }
    std::uint64_t modexp_total() const { return modexp_full + modexp_reduced; }
};

OpCounts opcount_snapshot();
void opcount_reset();
/// Moduli of at least `bits` bits count as full-width; 0 restores the default
/// (everything full-width).
void opcount_set_full_width_floor(std::size_t bits);
OpCounts opcount_delta(const OpCounts& before, const OpCounts& after);

namespace detail {
void opcount_bump_hash_to_group();
void opcount_bump_info_exponent();
} // namespace detail

} // namespace blindgate
