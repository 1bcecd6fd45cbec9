#include "blindgate/plan.hpp"

#include "blindgate/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace blindgate::plan {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::size_t kMaxModelIdLen = 64;
constexpr std::uint32_t kMaxTokensCap = 1'000'000'000;
constexpr std::size_t kMaxCanonicalLen = 1024;

// Proleptic Gregorian calendar <-> days since 1970-01-01 (Howard Hinnant's
// civil-days algorithms).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

bool parse_fixed_uint(std::string_view s, unsigned width, unsigned& out) {
    if (s.size() < width) return false;
    out = 0;
    for (unsigned i = 0; i < width; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        out = out * 10 + static_cast<unsigned>(c - '0');
    }
    return true;
}

} // namespace

std::string format_rfc3339(UtcSeconds ts) {
    std::int64_t days = floor_div(ts, kSecondsPerDay);
    std::int64_t rem = ts - days * kSecondsPerDay;
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    if (y < 1583 || y > 9999) throw std::out_of_range("format_rfc3339: year out of range");
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(y), m, d,
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

std::optional<UtcSeconds> parse_rfc3339(std::string_view text) {
    // Exactly YYYY-MM-DDTHH:MM:SSZ.
    if (text.size() != 20) return std::nullopt;
    if (text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
        text[16] != ':' || text[19] != 'Z') {
        return std::nullopt;
    }
    unsigned y, mo, d, h, mi, s;
    if (!parse_fixed_uint(text.substr(0, 4), 4, y) || !parse_fixed_uint(text.substr(5, 2), 2, mo) ||
        !parse_fixed_uint(text.substr(8, 2), 2, d) || !parse_fixed_uint(text.substr(11, 2), 2, h) ||
        !parse_fixed_uint(text.substr(14, 2), 2, mi) ||
        !parse_fixed_uint(text.substr(17, 2), 2, s)) {
        return std::nullopt;
    }
    if (y < 1583 || mo < 1 || mo > 12 || d < 1 || h > 23 || mi > 59 || s > 59) return std::nullopt;
    static constexpr std::array<unsigned, 12> days_in = {31, 28, 31, 30, 31, 30,
                                                         31, 31, 30, 31, 30, 31};
    unsigned dmax = days_in[mo - 1];
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (mo == 2 && leap) dmax = 29;
    if (d > dmax) return std::nullopt;
    return days_from_civil(y, mo, d) * kSecondsPerDay + h * 3600 + mi * 60 + s;
}

bool is_month_start(UtcSeconds ts) {
    std::int64_t days = floor_div(ts, kSecondsPerDay);
    if (ts != days * kSecondsPerDay) return false;
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    return d == 1;
}

UtcSeconds standardize_deadline(UtcSeconds now, Period period) {
    std::int64_t y;
    unsigned m, d;
    civil_from_days(floor_div(now, kSecondsPerDay), y, m, d);
    if (period == Period::monthly) {
        if (m == 12) {
            ++y;
            m = 1;
        } else {
            ++m;
        }
    } else {
        ++y;
        m = 1;
    }
    return days_from_civil(y, m, 1) * kSecondsPerDay;
}

bool valid_model_id(std::string_view id) {
    if (id.empty() || id.size() > kMaxModelIdLen) return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '.' || c == '_' || c == '-';
    });
}

const char* mode_label(Mode mode) { return mode == Mode::api ? "api" : "sub"; }

namespace {

void check_fields(const InfoFields& f, Errc code) {
    auto fail = [&](const char* what) { throw Error(code, what); };
    if (f.version != 1) fail("unsupported version");
    if (!valid_model_id(f.model_id)) fail("bad model id");
    if (f.max_tokens_per_request < 1 || f.max_tokens_per_request > kMaxTokensCap) {
        fail("bad max token count");
    }
    if (f.mode == Mode::subscription) {
        if (!f.deadline) fail("subscription needs a deadline");
        if (!is_month_start(*f.deadline)) fail("deadline must be a standardized boundary");
    }
    if (f.mode == Mode::api && f.deadline) fail("api mode carries no deadline");
}

} // namespace

pbrsa::InfoBytes encode_info(const InfoFields& fields) {
    check_fields(fields, Errc::malformed_plan);
    std::string s = "v1|mode=";
    s += mode_label(fields.mode);
    s += "|model=";
    s += fields.model_id;
    s += "|maxtok=";
    s += std::to_string(fields.max_tokens_per_request);
    if (fields.mode == Mode::subscription) {
        s += "|deadline=";
        s += format_rfc3339(*fields.deadline);
    }
    return pbrsa::InfoBytes::from_canonical(std::move(s));
}

InfoFields decode_info(std::string_view canonical) {
    auto fail = [](const char* what) -> InfoFields { throw Error(Errc::malformed_info, what); };
    if (canonical.empty() || canonical.size() > kMaxCanonicalLen) return fail("bad length");

    auto take = [&](std::string_view prefix) -> bool {
        if (canonical.substr(0, prefix.size()) != prefix) return false;
        canonical.remove_prefix(prefix.size());
        return true;
    };
    auto field = [&]() -> std::string_view {
        std::size_t bar = canonical.find('|');
        std::string_view v = canonical.substr(0, bar);
        canonical.remove_prefix(bar == std::string_view::npos ? canonical.size() : bar);
        return v;
    };

    InfoFields f;
    if (!take("v1|mode=")) return fail("missing version or mode");
    std::string_view mode = field();
    if (mode == "api") {
        f.mode = Mode::api;
    } else if (mode == "sub") {
        f.mode = Mode::subscription;
    } else {
        return fail("unknown mode");
    }

    if (!take("|model=")) return fail("missing model");
    f.model_id = std::string(field());

    if (!take("|maxtok=")) return fail("missing maxtok");
    std::string_view tok = field();
    if (tok.empty() || tok.size() > 10 || (tok.size() > 1 && tok[0] == '0')) {
        return fail("non-canonical maxtok");
    }
    std::uint64_t maxtok = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), maxtok);
    if (ec != std::errc() || p != tok.data() + tok.size() || maxtok > kMaxTokensCap) {
        return fail("bad maxtok");
    }
    f.max_tokens_per_request = static_cast<std::uint32_t>(maxtok);

    if (f.mode == Mode::subscription) {
        if (!take("|deadline=")) return fail("missing deadline");
        std::optional<UtcSeconds> ts = parse_rfc3339(field());
        if (!ts) return fail("bad deadline");
        f.deadline = *ts;
    }
    if (!canonical.empty()) return fail("trailing data");

    check_fields(f, Errc::malformed_info);
    return f;
}

std::vector<pbrsa::Ticket> generate_tickets(std::size_t count, RandomSource& rng) {
    if (count < 1 || count > 1000) throw std::invalid_argument("generate_tickets: bad count");
    std::set<std::array<std::uint8_t, pbrsa::kTicketLen>> seen;
    std::vector<pbrsa::Ticket> out;
    out.reserve(count);
    while (out.size() < count) {
        pbrsa::Ticket t = pbrsa::random_ticket(rng);
        if (seen.insert(t.value).second) out.push_back(t);
    }
    return out;
}

InfoStatus validate_info(const InfoFields& fields, UtcSeconds now) {
    try {
        check_fields(fields, Errc::malformed_info);
    } catch (const Error&) {
        return InfoStatus::malformed;
    }
    if (fields.mode == Mode::subscription && now >= *fields.deadline) return InfoStatus::expired;
    return InfoStatus::ok;
}

std::size_t count_tokens(std::string_view query) {
    std::size_t count = 0;
    bool in_token = false;
    for (unsigned char c : query) {
        if (std::isspace(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

} // namespace blindgate::plan
