// Test-vector generator/checker. One record per line:
//   bits p q info_canonical(hex) ticket(hex) r blinded blind_sig sig
// Integers are fixed-width big-endian base64url; p and q at the half-modulus
// width, group elements at the modulus width. `check` recomputes the whole
// chain from (p, q, info, ticket, r) and demands bit-for-bit equality, so an
// independent implementation can cross-validate either direction.

#include "blindgate/encoding.hpp"
#include "blindgate/errors.hpp"
#include "blindgate/pbrsa.hpp"
#include "blindgate/plan.hpp"
#include "blindgate/random.hpp"
#include "blindgate/sha384.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace blindgate;

namespace {

pbrsa::InfoBytes record_info(std::size_t index) {
    plan::InfoFields fields;
    fields.model_id = index % 3 == 0 ? "gpt2" : "llama3-8b";
    fields.max_tokens_per_request = 16 << (index % 8);
    if (index % 2 == 1) {
        fields.mode = plan::Mode::subscription;
        fields.deadline = plan::standardize_deadline(
            1735689600 + static_cast<plan::UtcSeconds>(index) * 40 * 86400,
            plan::Period::monthly);
    }
    return plan::encode_info(fields);
}

struct Record {
    std::size_t bits = 0;
    Bigint p, q, r, blinded, blind_sig, sig;
    pbrsa::InfoBytes info;
    pbrsa::Ticket ticket;
};

std::string format_record(const Record& rec) {
    std::ostringstream out;
    std::vector<std::uint8_t> info_bytes(rec.info.canonical.begin(), rec.info.canonical.end());
    out << rec.bits << ' ' << encode_int(rec.p, rec.bits / 2) << ' '
        << encode_int(rec.q, rec.bits / 2) << ' ' << to_hex(info_bytes) << ' '
        << rec.ticket.hex() << ' ' << encode_int(rec.r, rec.bits) << ' '
        << encode_int(rec.blinded, rec.bits) << ' ' << encode_int(rec.blind_sig, rec.bits)
        << ' ' << encode_int(rec.sig, rec.bits);
    return out.str();
}

Record parse_record(const std::string& line) {
    std::istringstream in(line);
    std::string p, q, info_hex, ticket_hex, r, blinded, bsig, sig;
    Record rec;
    if (!(in >> rec.bits >> p >> q >> info_hex >> ticket_hex >> r >> blinded >> bsig >> sig)) {
        throw std::invalid_argument("record needs 9 fields");
    }
    std::string extra;
    if (in >> extra) throw std::invalid_argument("trailing field");
    rec.p = decode_int(p, rec.bits / 2);
    rec.q = decode_int(q, rec.bits / 2);
    std::vector<std::uint8_t> info_bytes = from_hex(info_hex);
    rec.info = pbrsa::InfoBytes::from_canonical(std::string(info_bytes.begin(), info_bytes.end()));
    rec.ticket = pbrsa::Ticket::from_hex(ticket_hex);
    rec.r = decode_int(r, rec.bits);
    rec.blinded = decode_int(blinded, rec.bits);
    rec.blind_sig = decode_int(bsig, rec.bits);
    rec.sig = decode_int(sig, rec.bits);
    return rec;
}

pbrsa::KeyPair key_from(const Record& rec) {
    pbrsa::KeyPair kp;
    kp.p = rec.p;
    kp.q = rec.q;
    kp.n = rec.p * rec.q;
    kp.lambda_n = lcm(rec.p - Bigint(1), rec.q - Bigint(1));
    kp.bits = rec.bits;
    return kp;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"partially blind RSA test vectors"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "generate a vector file");
    std::size_t bits = 512, count = 8;
    std::uint64_t seed = 42;
    std::string path;
    gen->add_option("--bits", bits)->capture_default_str();
    gen->add_option("--count", count)->capture_default_str();
    gen->add_option("--seed", seed, "deterministic generation seed")->capture_default_str();
    gen->add_option("--out", path, "output file (default: stdout)");

    auto* check = app.add_subcommand("check", "recompute and compare every record");
    check->add_option("file", path, "vector file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            DeterministicRandom rng(seed);
            std::ostringstream out;
            for (std::size_t i = 0; i < count; ++i) {
                Record rec;
                rec.bits = bits;
                pbrsa::KeyPair kp = pbrsa::setup(bits, rng);
                rec.p = kp.p;
                rec.q = kp.q;
                rec.info = record_info(i);
                rec.ticket = pbrsa::random_ticket(rng);
                auto [blinded, state] = pbrsa::blind(rec.ticket, rec.info, kp.public_key(), rng);
                rec.r = state.r;
                rec.blinded = blinded.value;
                pbrsa::BlindSignature bsig = pbrsa::sign_blinded(blinded, rec.info, kp);
                rec.blind_sig = bsig.value;
                rec.sig = pbrsa::unblind(bsig, state, kp.public_key()).value;
                out << format_record(rec) << '\n';
            }
            if (path.empty()) {
                std::cout << out.str();
            } else {
                std::ofstream file(path, std::ios::trunc);
                if (!file) throw std::runtime_error("cannot write " + path);
                file << out.str();
                std::cout << count << " records written to " << path << std::endl;
            }
            return 0;
        }

        std::ifstream file(path);
        std::string line;
        std::size_t line_no = 0, checked = 0;
        while (std::getline(file, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            Record rec = parse_record(line);
            pbrsa::KeyPair kp = key_from(rec);
            pbrsa::PublicKey pk = kp.public_key();

            Bigint m_h = pbrsa::hash_to_group(pbrsa::canonical_message(rec.ticket, rec.info), pk);
            Bigint e_info = pbrsa::derive_info_exponent(rec.info, pk);
            Bigint d_info = pbrsa::derive_info_secret(e_info, kp);
            auto fail = [&](const char* field) {
                std::cerr << "line " << line_no << ": " << field << " mismatch" << std::endl;
                std::exit(1);
            };
            if (pbrsa::blind_value(m_h, rec.r, e_info, kp.n) != rec.blinded) fail("blinded");
            if (pbrsa::sign_value_crt(rec.blinded, d_info, kp) != rec.blind_sig) fail("blind_sig");
            auto r_inv = invmod(rec.r, kp.n);
            if (!r_inv) fail("r not invertible");
            if (pbrsa::unblind_value(rec.blind_sig, *r_inv, kp.n) != rec.sig) fail("sig");
            if (!pbrsa::verify(pbrsa::Signature{rec.sig}, rec.ticket, rec.info, pk)) {
                fail("verify");
            }
            ++checked;
        }
        std::cout << checked << " records ok" << std::endl;
        return 0;
    } catch (const Error& e) {
        std::cerr << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "INTERNAL: " << e.what() << std::endl;
        return 1;
    }
}
