#include <doctest.h>

#include "blindgate/errors.hpp"
#include "blindgate/plan.hpp"
#include "blindgate/random.hpp"

#include <set>
#include <string>

using namespace blindgate;
using namespace blindgate::plan;

namespace {
InfoFields api_fields(std::string model = "gpt2", std::uint32_t maxtok = 64) {
    InfoFields f;
    f.mode = Mode::api;
    f.model_id = std::move(model);
    f.max_tokens_per_request = maxtok;
    return f;
}

InfoFields sub_fields(UtcSeconds deadline) {
    InfoFields f;
    f.mode = Mode::subscription;
    f.model_id = "gpt2";
    f.max_tokens_per_request = 64;
    f.deadline = deadline;
    return f;
}
} // namespace

TEST_CASE("rfc3339 formatting and strict parsing") {
    CHECK(format_rfc3339(0) == "1970-01-01T00:00:00Z");
    CHECK(format_rfc3339(1741944413) == "2025-03-14T09:26:53Z");
    CHECK(format_rfc3339(951825600) == "2000-02-29T12:00:00Z");
    CHECK(format_rfc3339(946684799) == "1999-12-31T23:59:59Z");

    CHECK(parse_rfc3339("2025-03-14T09:26:53Z") == 1741944413);
    CHECK(parse_rfc3339("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_rfc3339("2000-02-29T12:00:00Z") == 951825600);

    // strictness: exact shape, real dates, Z only
    CHECK_FALSE(parse_rfc3339("2025-03-14 09:26:53Z").has_value());
    CHECK_FALSE(parse_rfc3339("2025-03-14T09:26:53").has_value());
    CHECK_FALSE(parse_rfc3339("2025-03-14T09:26:53+00:00").has_value());
    CHECK_FALSE(parse_rfc3339("2025-03-14T09:26:53.000Z").has_value());
    CHECK_FALSE(parse_rfc3339("2025-13-01T00:00:00Z").has_value());
    CHECK_FALSE(parse_rfc3339("2025-02-29T00:00:00Z").has_value()); // not a leap year
    CHECK(parse_rfc3339("2024-02-29T00:00:00Z").has_value());
    CHECK_FALSE(parse_rfc3339("2100-02-29T00:00:00Z").has_value()); // century, not leap
    CHECK_FALSE(parse_rfc3339("2025-00-10T00:00:00Z").has_value());
    CHECK_FALSE(parse_rfc3339("2025-04-31T00:00:00Z").has_value());
    CHECK_FALSE(parse_rfc3339("2025-03-14T24:00:00Z").has_value());
    CHECK_FALSE(parse_rfc3339("2025-03-14T09:60:00Z").has_value());
    CHECK_FALSE(parse_rfc3339("2025-03-14T09:26:60Z").has_value());
    CHECK_FALSE(parse_rfc3339("").has_value());
    CHECK_FALSE(parse_rfc3339("garbage").has_value());
}

TEST_CASE("round trip across a spread of timestamps") {
    DeterministicRandom rng(11);
    for (int i = 0; i < 200; ++i) {
        auto b = rng.bytes(5);
        UtcSeconds ts = 0;
        for (auto byte : b) ts = ts << 8 | byte;
        ts %= 4102444800; // stay below year 2100
        std::string text = format_rfc3339(ts);
        CHECK(parse_rfc3339(text) == ts);
    }
}

TEST_CASE("standardize_deadline rounds up to the next period boundary") {
    // mid-month purchase gets the first of the next month
    CHECK(standardize_deadline(1741944413, Period::monthly) == 1743465600);
    CHECK(format_rfc3339(standardize_deadline(1741944413, Period::monthly)) ==
          "2025-04-01T00:00:00Z");

    // December rolls into January of the next year
    CHECK(standardize_deadline(1764939600, Period::monthly) == 1767225600);

    // a purchase exactly on the boundary gets the full next period
    CHECK(standardize_deadline(1740787200, Period::monthly) == 1743465600);
    CHECK(standardize_deadline(1735689600, Period::yearly) == 1767225600);

    // leap-day edge: last second of Feb 2024 still lands on March 1
    CHECK(standardize_deadline(1709251199, Period::monthly) == 1709251200);

    // yearly mid-year
    CHECK(standardize_deadline(1741944413, Period::yearly) == 1767225600);

    CHECK(is_month_start(1743465600));
    CHECK(is_month_start(0));
    CHECK_FALSE(is_month_start(1741944413));
    CHECK_FALSE(is_month_start(1743465601));
}

TEST_CASE("encode_info produces the fixed field order") {
    CHECK(encode_info(api_fields()).canonical == "v1|mode=api|model=gpt2|maxtok=64");
    CHECK(encode_info(sub_fields(1743465600)).canonical ==
          "v1|mode=sub|model=gpt2|maxtok=64|deadline=2025-04-01T00:00:00Z");
}

TEST_CASE("encode_info enforces field invariants") {
    auto expect_malformed_plan = [](InfoFields f) {
        try {
            (void)encode_info(f);
            FAIL("expected MALFORMED_PLAN");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::malformed_plan);
        }
    };

    expect_malformed_plan(api_fields(""));                    // empty model
    expect_malformed_plan(api_fields("has space"));           // bad charset
    expect_malformed_plan(api_fields("pipe|char"));           // delimiter collision
    expect_malformed_plan(api_fields(std::string(65, 'a')));  // too long
    expect_malformed_plan(api_fields("gpt2", 0));             // zero budget
    expect_malformed_plan(api_fields("gpt2", 1000000001));    // over cap

    InfoFields api_with_deadline = api_fields();
    api_with_deadline.deadline = 1743465600;
    expect_malformed_plan(api_with_deadline); // api carries no deadline

    InfoFields sub_without = sub_fields(1743465600);
    sub_without.deadline.reset();
    expect_malformed_plan(sub_without); // subscription requires one

    expect_malformed_plan(sub_fields(1743465601)); // not a standardized boundary
}

TEST_CASE("decode_info inverts encode_info") {
    InfoFields a = api_fields("model-x.y_z", 1000000000);
    CHECK(decode_info(encode_info(a).canonical) == a);

    InfoFields s = sub_fields(1767225600);
    CHECK(decode_info(encode_info(s).canonical) == s);
}

TEST_CASE("decode_info rejects anything but the canonical form") {
    auto expect_malformed_info = [](std::string_view text) {
        try {
            (void)decode_info(text);
            FAIL("expected MALFORMED_INFO for: ", text);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::malformed_info);
        }
    };

    expect_malformed_info("");
    expect_malformed_info("v2|mode=api|model=gpt2|maxtok=64");
    expect_malformed_info("v1|mode=apx|model=gpt2|maxtok=64");
    expect_malformed_info("v1|model=gpt2|mode=api|maxtok=64");    // reordered
    expect_malformed_info("v1|mode=api|model=gpt2|maxtok=064");   // leading zero
    expect_malformed_info("v1|mode=api|model=gpt2|maxtok=+64");
    expect_malformed_info("v1|mode=api|model=gpt2|maxtok=64 ");
    expect_malformed_info("v1|mode=api|model=gpt2|maxtok=64|");
    expect_malformed_info("v1|mode=api|model=gpt2|maxtok=64|x=1"); // unknown field
    expect_malformed_info("v1|mode=api|model=gpt2|maxtok=0");
    expect_malformed_info("v1|mode=api|model=gpt2|maxtok=1000000001");
    expect_malformed_info("v1|mode=api|model=gpt2|maxtok=99999999999999999999");
    expect_malformed_info("v1|mode=api|model=|maxtok=64");
    // deadline rules
    expect_malformed_info("v1|mode=api|model=gpt2|maxtok=64|deadline=2025-04-01T00:00:00Z");
    expect_malformed_info("v1|mode=sub|model=gpt2|maxtok=64");
    expect_malformed_info("v1|mode=sub|model=gpt2|maxtok=64|deadline=2025-04-01T00:00:01Z");
    expect_malformed_info("v1|mode=sub|model=gpt2|maxtok=64|deadline=2025-04-01");
}

TEST_CASE("validate_info flags expiry only for subscriptions") {
    UtcSeconds deadline = 1743465600; // 2025-04-01T00:00:00Z
    CHECK(validate_info(sub_fields(deadline), deadline - 1) == InfoStatus::ok);
    CHECK(validate_info(sub_fields(deadline), deadline) == InfoStatus::expired);
    CHECK(validate_info(sub_fields(deadline), deadline + 100) == InfoStatus::expired);
    CHECK(validate_info(api_fields(), deadline + 100) == InfoStatus::ok);

    InfoFields bad = api_fields();
    bad.model_id = "not ok";
    CHECK(validate_info(bad, 0) == InfoStatus::malformed);
}

TEST_CASE("generate_tickets yields distinct tickets within bounds") {
    DeterministicRandom rng(12);
    auto ts = generate_tickets(100, rng);
    REQUIRE(ts.size() == 100);
    std::set<std::string> hexes;
    for (const auto& t : ts) hexes.insert(t.hex());
    CHECK(hexes.size() == 100);

    CHECK(generate_tickets(1, rng).size() == 1);
    CHECK(generate_tickets(1000, rng).size() == 1000);
    CHECK_THROWS_AS((void)generate_tickets(0, rng), std::invalid_argument);
    CHECK_THROWS_AS((void)generate_tickets(1001, rng), std::invalid_argument);
}

TEST_CASE("token counting is whitespace based") {
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("   ") == 0);
    CHECK(count_tokens("one") == 1);
    CHECK(count_tokens("one two three") == 3);
    CHECK(count_tokens("  padded   words\tand\nnewlines  ") == 4);
}

TEST_CASE("model id charset") {
    CHECK(valid_model_id("gpt2"));
    CHECK(valid_model_id("a"));
    CHECK(valid_model_id("Model-1.2_beta"));
    CHECK(valid_model_id(std::string(64, 'x')));
    CHECK_FALSE(valid_model_id(""));
    CHECK_FALSE(valid_model_id(std::string(65, 'x')));
    CHECK_FALSE(valid_model_id("has space"));
    CHECK_FALSE(valid_model_id("pipe|char"));
    CHECK_FALSE(valid_model_id("uni\xc3\xa9"));
}

TEST_CASE("mode labels") {
    CHECK(std::string(mode_label(Mode::api)) == "api");
    CHECK(std::string(mode_label(Mode::subscription)) == "sub");
}
