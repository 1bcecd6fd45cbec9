#include "blindgate/bigint.hpp"

#include "blindgate/random.hpp"

#include <atomic>
#include <cstring>
#include <stdexcept>

namespace blindgate {

namespace {

std::atomic<std::uint64_t> g_modmul_full{0};
std::atomic<std::uint64_t> g_modmul_reduced{0};
std::atomic<std::uint64_t> g_modexp_full{0};
std::atomic<std::uint64_t> g_modexp_reduced{0};
std::atomic<std::uint64_t> g_modinv{0};
std::atomic<std::uint64_t> g_hash_to_group{0};
std::atomic<std::uint64_t> g_info_exponent{0};
std::atomic<std::size_t> g_full_width_floor{0};

bool is_full_width(const Bigint& m) {
    std::size_t floor = g_full_width_floor.load(std::memory_order_relaxed);
    return floor == 0 || m.bit_length() >= floor;
}

} // namespace

Bigint Bigint::from_decimal(const std::string& s) {
    Bigint out;
    if (s.empty() || mpz_set_str(out.v_, s.c_str(), 10) != 0) {
        throw std::invalid_argument("Bigint: bad decimal string");
    }
    return out;
}

Bigint Bigint::from_bytes_be(std::span<const std::uint8_t> bytes) {
    Bigint out;
    if (!bytes.empty()) {
        mpz_import(out.v_, bytes.size(), 1 /*msb first*/, 1, 0, 0, bytes.data());
    }
    return out;
}

std::string Bigint::to_decimal() const {
    char* raw = mpz_get_str(nullptr, 10, v_);
    std::string out(raw);
    void (*freefn)(void*, std::size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefn);
    freefn(raw, out.size() + 1);
    return out;
}

std::vector<std::uint8_t> Bigint::to_bytes_be(std::size_t len) const {
    if (mpz_sgn(v_) < 0) throw std::length_error("Bigint: negative value has no wire form");
    std::size_t need = (bit_length() + 7) / 8;
    if (need > len) throw std::length_error("Bigint: value does not fit in requested width");
    std::vector<std::uint8_t> out(len, 0);
    if (need > 0) {
        std::size_t written = 0;
        mpz_export(out.data() + (len - need), &written, 1, 1, 0, 0, v_);
    }
    return out;
}

std::uint64_t Bigint::to_u64() const {
    if (!fits_u64()) throw std::length_error("Bigint: does not fit in 64 bits");
    std::uint64_t lo = mpz_get_ui(v_);
    if (mpz_sizeinbase(v_, 2) > 8 * sizeof(unsigned long)) {
        // 32-bit unsigned long fallback; not hit on this platform.
        mpz_t tmp;
        mpz_init(tmp);
        mpz_fdiv_q_2exp(tmp, v_, 32);
        lo |= static_cast<std::uint64_t>(mpz_get_ui(tmp)) << 32;
        mpz_clear(tmp);
    }
    return lo;
}

Bigint operator+(const Bigint& a, const Bigint& b) {
    Bigint out;
    mpz_add(out.v_, a.v_, b.v_);
    return out;
}

Bigint operator-(const Bigint& a, const Bigint& b) {
    Bigint out;
    mpz_sub(out.v_, a.v_, b.v_);
    return out;
}

Bigint operator*(const Bigint& a, const Bigint& b) {
    Bigint out;
    mpz_mul(out.v_, a.v_, b.v_);
    return out;
}

Bigint operator%(const Bigint& a, const Bigint& b) {
    Bigint out;
    mpz_mod(out.v_, a.v_, b.v_);
    return out;
}

Bigint gcd(const Bigint& a, const Bigint& b) {
    Bigint out;
    mpz_gcd(out.v_, a.v_, b.v_);
    return out;
}

Bigint lcm(const Bigint& a, const Bigint& b) {
    Bigint out;
    mpz_lcm(out.v_, a.v_, b.v_);
    return out;
}

Bigint mulmod(const Bigint& a, const Bigint& b, const Bigint& m) {
    (is_full_width(m) ? g_modmul_full : g_modmul_reduced).fetch_add(1, std::memory_order_relaxed);
    Bigint out;
    mpz_mul(out.v_, a.v_, b.v_);
    mpz_mod(out.v_, out.v_, m.v_);
    return out;
}

Bigint powmod(const Bigint& base, const Bigint& exp, const Bigint& m) {
    (is_full_width(m) ? g_modexp_full : g_modexp_reduced).fetch_add(1, std::memory_order_relaxed);
    Bigint out;
    mpz_powm(out.v_, base.v_, exp.v_, m.v_);
    return out;
}

std::optional<Bigint> invmod(const Bigint& a, const Bigint& m) {
    g_modinv.fetch_add(1, std::memory_order_relaxed);
    Bigint out;
    if (mpz_invert(out.v_, a.v_, m.v_) == 0) return std::nullopt;
    return out;
}

Bigint random_below(RandomSource& rng, const Bigint& bound) {
    if (bound <= Bigint(1)) throw std::invalid_argument("random_below: bound must exceed 1");
    std::size_t len = (bound.bit_length() + 7) / 8 + 16;
    std::vector<std::uint8_t> buf(len);
    rng.fill(buf);
    return Bigint::from_bytes_be(buf) % bound;
}

namespace {

// Random `bits`-wide odd value with the top two bits forced.
Bigint random_prime_candidate(RandomSource& rng, std::size_t bits,
                              std::vector<std::uint8_t>& buf) {
    buf.resize((bits + 7) / 8);
    rng.fill(buf);
    Bigint candidate = Bigint::from_bytes_be(buf);
    for (std::size_t i = bits; i < 8 * buf.size(); ++i) candidate.clear_bit(i);
    candidate.set_bit(bits - 1);
    candidate.set_bit(bits - 2);
    candidate.set_bit(0);
    return candidate;
}

const std::vector<unsigned long>& sieve_primes() {
    static const std::vector<unsigned long> table = [] {
        constexpr unsigned long limit = 20000;
        std::vector<bool> composite(limit + 1, false);
        std::vector<unsigned long> primes;
        for (unsigned long i = 2; i <= limit; ++i) {
            if (composite[i]) continue;
            primes.push_back(i);
            for (unsigned long j = i * i; j <= limit; j += i) composite[j] = true;
        }
        return primes;
    }();
    return table;
}

} // namespace

Bigint random_prime(RandomSource& rng, std::size_t bits, int rounds) {
    if (bits < 8) throw std::invalid_argument("random_prime: too few bits");
    std::vector<std::uint8_t> buf;
    for (;;) {
        Bigint candidate = random_prime_candidate(rng, bits, buf);
        if (candidate.probably_prime(rounds)) return candidate;
    }
}

Bigint random_safe_prime(RandomSource& rng, std::size_t bits, int rounds) {
    if (bits < 32) throw std::invalid_argument("random_safe_prime: too few bits");
    std::vector<std::uint8_t> buf;
    for (;;) {
        // h is the candidate for (p-1)/2; forcing its top two bits keeps
        // p = 2h+1 at exactly `bits` bits with its own top two bits set.
        Bigint h = random_prime_candidate(rng, bits - 1, buf);
        bool pass = true;
        for (unsigned long ell : sieve_primes()) {
            if (ell == 2) continue;
            unsigned long rem = h.mod_ui(ell);
            if (rem == 0 || (2 * rem + 1) % ell == 0) {
                pass = false;
                break;
            }
        }
        if (!pass) continue;
        if (!h.probably_prime(1)) continue; // cheap screen before the full test
        Bigint p = h + h + Bigint(1);
        if (!p.probably_prime(1)) continue;
        if (h.probably_prime(rounds) && p.probably_prime(rounds)) return p;
    }
}

OpCounts opcount_snapshot() {
    OpCounts c;
    c.modmul_full = g_modmul_full.load(std::memory_order_relaxed);
    c.modmul_reduced = g_modmul_reduced.load(std::memory_order_relaxed);
    c.modexp_full = g_modexp_full.load(std::memory_order_relaxed);
    c.modexp_reduced = g_modexp_reduced.load(std::memory_order_relaxed);
    c.modinv = g_modinv.load(std::memory_order_relaxed);
    c.hash_to_group = g_hash_to_group.load(std::memory_order_relaxed);
    c.info_exponent = g_info_exponent.load(std::memory_order_relaxed);
    return c;
}

void opcount_reset() {
    g_modmul_full = 0;
    g_modmul_reduced = 0;
    g_modexp_full = 0;
    g_modexp_reduced = 0;
    g_modinv = 0;
    g_hash_to_group = 0;
    g_info_exponent = 0;
}

void opcount_set_full_width_floor(std::size_t bits) {
    g_full_width_floor.store(bits, std::memory_order_relaxed);
}

OpCounts opcount_delta(const OpCounts& before, const OpCounts& after) {
    OpCounts d;
    d.modmul_full = after.modmul_full - before.modmul_full;
    d.modmul_reduced = after.modmul_reduced - before.modmul_reduced;
    d.modexp_full = after.modexp_full - before.modexp_full;
    d.modexp_reduced = after.modexp_reduced - before.modexp_reduced;
    d.modinv = after.modinv - before.modinv;
    d.hash_to_group = after.hash_to_group - before.hash_to_group;
    d.info_exponent = after.info_exponent - before.info_exponent;
    return d;
}

namespace detail {

void opcount_bump_hash_to_group() { g_hash_to_group.fetch_add(1, std::memory_order_relaxed); }
void opcount_bump_info_exponent() { g_info_exponent.fetch_add(1, std::memory_order_relaxed); }

} // namespace detail

} // namespace blindgate
