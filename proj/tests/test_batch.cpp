#include <doctest.h>

#include "blindgate/pbrsa_batch.hpp"
#include "blindgate/random.hpp"

#include <stdexcept>

using namespace blindgate;
using namespace blindgate::pbrsa;

namespace {
struct Fixture {
    KeyPair kp;
    PublicKey pk;
    InfoBytes info;
    std::vector<Ticket> tickets;

    explicit Fixture(std::size_t count) {
        DeterministicRandom rng(20);
        kp = setup(512, rng);
        pk = kp.public_key();
        info = InfoBytes::from_canonical("v1|mode=api|model=gpt2|maxtok=64");
        DeterministicRandom trng(21);
        for (std::size_t i = 0; i < count; ++i) tickets.push_back(random_ticket(trng));
    }
};
} // namespace

TEST_CASE("serial and parallel batches agree element for element") {
    Fixture f(24);
    auto factory = deterministic_random_factory(22);

    auto [bs_s, st_s] = blind_batch(f.tickets, f.info, f.pk, factory, Exec::serial);
    auto [bs_p, st_p] = blind_batch(f.tickets, f.info, f.pk, factory, Exec::parallel);
    REQUIRE(bs_s.size() == f.tickets.size());
    REQUIRE(bs_p.size() == f.tickets.size());
    for (std::size_t i = 0; i < bs_s.size(); ++i) {
        CHECK(bs_s[i].value == bs_p[i].value);
        CHECK(st_s[i].r == st_p[i].r);
    }

    auto sig_s = sign_blinded_batch(bs_s, f.info, f.kp, Exec::serial);
    auto sig_p = sign_blinded_batch(bs_p, f.info, f.kp, Exec::parallel);
    for (std::size_t i = 0; i < sig_s.size(); ++i) CHECK(sig_s[i].value == sig_p[i].value);

    auto un_s = unblind_batch(sig_s, st_s, f.pk, Exec::serial);
    auto un_p = unblind_batch(sig_p, st_p, f.pk, Exec::parallel);
    for (std::size_t i = 0; i < un_s.size(); ++i) CHECK(un_s[i].value == un_p[i].value);

    auto ok_s = verify_batch(un_s, f.tickets, f.info, f.pk, Exec::serial);
    auto ok_p = verify_batch(un_p, f.tickets, f.info, f.pk, Exec::parallel);
    for (std::size_t i = 0; i < ok_s.size(); ++i) {
        CHECK(ok_s[i] == 1);
        CHECK(ok_p[i] == 1);
    }
}

TEST_CASE("batch results verify and bind to their own tickets") {
    Fixture f(6);
    auto factory = deterministic_random_factory(23);

    auto [blinded, states] = blind_batch(f.tickets, f.info, f.pk, factory, Exec::parallel);
    auto bsigs = sign_blinded_batch(blinded, f.info, f.kp, Exec::parallel);
    auto sigs = unblind_batch(bsigs, states, f.pk, Exec::parallel);

    for (std::size_t i = 0; i < sigs.size(); ++i) {
        CHECK(verify(sigs[i], f.tickets[i], f.info, f.pk));
        // swap a signature under another ticket: must fail
        std::size_t j = (i + 1) % sigs.size();
        CHECK_FALSE(verify(sigs[i], f.tickets[j], f.info, f.pk));
    }
}

TEST_CASE("parallel batches propagate worker exceptions") {
    Fixture f(4);
    std::vector<BlindedMessage> bad;
    for (std::size_t i = 0; i < 4; ++i) bad.push_back(BlindedMessage{Bigint(1)});
    CHECK_THROWS_AS((void)sign_blinded_batch(bad, f.info, f.kp, Exec::parallel), Error);
    CHECK_THROWS_AS((void)sign_blinded_batch(bad, f.info, f.kp, Exec::serial), Error);
}

TEST_CASE("unblind_batch refuses mixed metadata") {
    Fixture f(2);
    auto factory = deterministic_random_factory(24);
    auto [blinded, states] = blind_batch(f.tickets, f.info, f.pk, factory, Exec::serial);
    states[1].info = InfoBytes::from_canonical("v1|mode=api|model=other|maxtok=64");
    auto bsigs = sign_blinded_batch(blinded, f.info, f.kp, Exec::serial);
    CHECK_THROWS_AS((void)unblind_batch(bsigs, states, f.pk, Exec::serial),
                    std::invalid_argument);
}

TEST_CASE("batch size mismatches are rejected") {
    Fixture f(3);
    auto factory = deterministic_random_factory(25);
    auto [blinded, states] = blind_batch(f.tickets, f.info, f.pk, factory, Exec::serial);
    states.pop_back();
    auto bsigs = sign_blinded_batch(blinded, f.info, f.kp, Exec::serial);
    CHECK_THROWS_AS((void)unblind_batch(bsigs, states, f.pk, Exec::serial),
                    std::invalid_argument);

    std::vector<Ticket> fewer(f.tickets.begin(), f.tickets.end() - 1);
    std::vector<Signature> sigs;
    for (auto& b : bsigs) sigs.push_back(Signature{b.value});
    CHECK_THROWS_AS((void)verify_batch(sigs, fewer, f.info, f.pk, Exec::serial),
                    std::invalid_argument);
}

TEST_CASE("empty batches are fine") {
    Fixture f(0);
    auto factory = deterministic_random_factory(26);
    auto [blinded, states] = blind_batch(f.tickets, f.info, f.pk, factory, Exec::parallel);
    CHECK(blinded.empty());
    CHECK(states.empty());
    CHECK(sign_blinded_batch(blinded, f.info, f.kp, Exec::parallel).empty());
}
