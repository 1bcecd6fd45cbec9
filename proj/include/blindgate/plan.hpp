#pragma once

#include "blindgate/pbrsa.hpp"
#include "blindgate/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blindgate::plan {

/// UTC timestamp at second resolution.
using UtcSeconds = std::int64_t;

enum class Mode { api, subscription };
enum class Period { monthly, yearly };
enum class InfoStatus { ok, expired, malformed };

/// A purchase order as the buyer states it. `request_count` is an API-mode
/// purchase quantity and is deliberately never encoded into the public
/// metadata; each credit stands alone.
struct PlanSpec {
    Mode mode = Mode::api;
    std::string model_id;
    std::uint32_t max_tokens_per_request = 0;
    std::optional<UtcSeconds> deadline;          // subscription only
    std::optional<std::uint32_t> request_count;  // api only
};

/// The decoded form of the canonical metadata string.
struct InfoFields {
    int version = 1;
    Mode mode = Mode::api;
    std::string model_id;
    std::uint32_t max_tokens_per_request = 0;
    std::optional<UtcSeconds> deadline; // subscription only

    friend bool operator==(const InfoFields&, const InfoFields&) = default;
};

std::string format_rfc3339(UtcSeconds ts);
/// Strict "YYYY-MM-DDTHH:MM:SSZ" only; anything else is rejected.
std::optional<UtcSeconds> parse_rfc3339(std::string_view text);

/// True when ts is 00:00:00 UTC on the first day of a month.
bool is_month_start(UtcSeconds ts);

/// Monthly: midnight UTC on the 1st of the month after `now`'s month.
/// Yearly: midnight UTC on January 1 of the year after `now`'s year.
/// A purchase exactly on a boundary gets the full next period.
UtcSeconds standardize_deadline(UtcSeconds now, Period period);

/// Canonical encoding:
///   v1|mode=<api|sub>|model=<id>|maxtok=<k>[|deadline=<RFC3339 Z>]
/// Field order is fixed; the string feeds the signature hashes byte for byte.
/// Throws MALFORMED_PLAN when the fields violate their invariants.
pbrsa::InfoBytes encode_info(const InfoFields& fields);

/// Exact inverse of encode_info. Unknown fields, reordered fields, sloppy
/// integers or a non-Z deadline all throw MALFORMED_INFO.
InfoFields decode_info(std::string_view canonical);

/// `count` distinct random 32-byte tickets, 1 <= count <= 1000.
std::vector<pbrsa::Ticket> generate_tickets(std::size_t count, RandomSource& rng);

InfoStatus validate_info(const InfoFields& fields, UtcSeconds now);

/// Whitespace-separated token count; the limit check in both client and
/// gateway uses this same rule.
std::size_t count_tokens(std::string_view query);

bool valid_model_id(std::string_view id);

const char* mode_label(Mode mode); // "api" / "sub"

} // namespace blindgate::plan
