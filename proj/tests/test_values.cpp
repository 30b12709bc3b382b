#include <doctest.h>

#include <string>
#include <vector>

#include "kgtk/values.hpp"
#include "test_support.hpp"

using namespace kgtk;

TEST_CASE("language-tagged strings") {
    KgtkValue v = parse_value("'Sprechen sie deutsch?'@de");
    REQUIRE(v.kind() == ValueKind::LangString);
    const auto& ls = v.as<LangStringValue>();
    CHECK(ls.text == "Sprechen sie deutsch?");
    CHECK(ls.lang == "de");
    CHECK(ls.suffix == "");
    CHECK(serialize_value(v) == "'Sprechen sie deutsch?'@de");

    auto dialect = parse_value("'colour'@en-GB").as<LangStringValue>();
    CHECK(dialect.lang == "en");
    CHECK(dialect.suffix == "GB");

    // the primary code is case-normalized, the subtag is not
    CHECK(parse_value("'x'@EN-Latn").as<LangStringValue>().lang == "en");
    CHECK(parse_value("'x'@EN-Latn").as<LangStringValue>().suffix == "Latn");

    CHECK(value_kind("'abc'@toolong5") == ValueKind::Malformed);
    CHECK(value_kind("'abc'@e") == ValueKind::Malformed);
    CHECK(value_kind("'abc'@en-") == ValueKind::Malformed);
    CHECK(value_kind("'abc'") == ValueKind::Malformed);
    CHECK(value_kind("'abc'@en extra") == ValueKind::Malformed);
}

TEST_CASE("quantities") {
    KgtkValue v = parse_value("-1.2e+2[-1.0,+1.0]kg.m/s2");
    REQUIRE(v.kind() == ValueKind::Quantity);
    const auto& q = v.as<QuantityValue>();
    CHECK(q.amount.value == -120.0);
    CHECK(q.amount.lexical == "-1.2e+2");
    REQUIRE(q.tolerance.has_value());
    CHECK(q.tolerance->first.value == -1.0);
    CHECK(q.tolerance->second.value == 1.0);
    CHECK(q.unit == "kg.m/s2");
    CHECK_FALSE(q.unit_is_node());
    CHECK(serialize_value(v) == "-1.2e+2[-1.0,+1.0]kg.m/s2");

    KgtkValue w = parse_value("+17.2Q494083");
    REQUIRE(w.kind() == ValueKind::Quantity);
    const auto& wq = w.as<QuantityValue>();
    CHECK(wq.amount.value == 17.2);
    CHECK_FALSE(wq.tolerance.has_value());
    CHECK(wq.unit == "Q494083");
    CHECK(wq.unit_is_node());
    CHECK(serialize_value(w) == "+17.2Q494083");

    KgtkValue m = parse_value("10m");
    REQUIRE(m.kind() == ValueKind::Quantity);
    CHECK(m.as<QuantityValue>().amount.value == 10.0);
    CHECK(m.as<QuantityValue>().unit == "m");
    CHECK(serialize_value(m) == "10m");

    QuantityValue built;
    built.amount = NumberValue::of(10.0);
    built.unit = "m";
    CHECK(serialize_value(KgtkValue(built)) == "10m");

    CHECK(value_kind("10[2.0,1.0]m") == ValueKind::Malformed);  // low > high
    CHECK(value_kind("10[1,2m") == ValueKind::Malformed);
    CHECK(value_kind("10#") == ValueKind::Malformed);
    CHECK(parse_value("10em").as<QuantityValue>().unit == "em");
    CHECK(parse_value("10e2m").as<QuantityValue>().amount.value == 1000.0);
}

TEST_CASE("numbers keep their spelling") {
    KgtkValue v = parse_value("-1.20e+2");
    REQUIRE(v.kind() == ValueKind::Number);
    CHECK(v.as<NumberValue>().value == -120.0);
    CHECK(serialize_value(v) == "-1.20e+2");

    CHECK(parse_value("-.5").as<NumberValue>().value == -0.5);
    CHECK(serialize_value(parse_value("007")) == "007");
    CHECK(parse_value("+0").as<NumberValue>().value == 0.0);

    // a bare dot-prefixed token has no sign/digit sigil, so it is a symbol
    CHECK(value_kind(".5") == ValueKind::Symbol);
    CHECK(value_kind("1.2.3") == ValueKind::Malformed);
    CHECK(value_kind("1e999") == ValueKind::Malformed);

    CHECK(NumberValue::of(10.0).lexical == "10");
    CHECK(NumberValue::of(-0.5).lexical == "-0.5");
    CHECK(NumberValue::of(3LL).lexical == "3");
}

TEST_CASE("coordinates") {
    KgtkValue v = parse_value("@043.26193/010.92708");
    REQUIRE(v.kind() == ValueKind::Coordinates);
    const auto& c = v.as<CoordinatesValue>();
    CHECK(c.lat == doctest::Approx(43.26193).epsilon(1e-12));
    CHECK(c.lon == doctest::Approx(10.92708).epsilon(1e-12));
    CHECK(serialize_value(v) == "@043.26193/010.92708");

    CHECK(serialize_value(KgtkValue(CoordinatesValue::of(43.26193, 10.92708))) ==
          "@043.26193/010.92708");
    CHECK(serialize_value(KgtkValue(CoordinatesValue::of(-5.5, 7.0))) == "@-005.5/007");

    // short degree spellings are padded, long ones kept
    CHECK(serialize_value(parse_value("@43.5/7")) == "@043.5/007");
    CHECK(serialize_value(parse_value("@+43.5/7")) == "@043.5/007");

    CHECK(value_kind("@999/0") == ValueKind::Malformed);
    CHECK(value_kind("@43.0") == ValueKind::Malformed);
    CHECK(value_kind("@43/181") == ValueKind::Malformed);
    CHECK(value_kind("@/5") == ValueKind::Malformed);

    ParseError err;
    CHECK_FALSE(try_parse_value("@91.0/10.0", &err).has_value());
    CHECK(err.kind == ValueKind::Coordinates);
    CHECK(err.code == ParseErrorCode::Range);
}

TEST_CASE("date-times") {
    KgtkValue v = parse_value("^1839-00-00T00:00:00Z/9");
    REQUIRE(v.kind() == ValueKind::DateTime);
    const auto& d = v.as<DateTimeValue>();
    CHECK(d.year == 1839);
    CHECK(d.month == 0);
    CHECK(d.day == 0);
    CHECK(d.hour == 0);
    CHECK(d.tz == "Z");
    REQUIRE(d.precision.has_value());
    CHECK(*d.precision == 9);
    CHECK(serialize_value(v) == "^1839-00-00T00:00:00Z/9");

    CHECK(value_kind("^2020-01-01T00:00:00Z") == ValueKind::DateTime);

    // date-only input parses with a zeroed time; serialization is always full
    KgtkValue date_only = parse_value("^2001-02-03/11");
    CHECK(serialize_value(date_only) == "^2001-02-03T00:00:00/11");
    CHECK(parse_value(serialize_value(date_only)) == date_only);

    auto bce = parse_value("^-0044-03-15T12:00:00").as<DateTimeValue>();
    CHECK(bce.year == -44);
    CHECK(serialize_value(parse_value("^-0044-03-15T12:00:00")) == "^-0044-03-15T12:00:00");

    CHECK(parse_value("^2020-01-01T01:02:03+05:30").as<DateTimeValue>().tz == "+05:30");
    CHECK(parse_value("^2020-01-01T01:02:03-11").as<DateTimeValue>().tz == "-11");

    CHECK(value_kind("^2020-13-01T00:00:00Z") == ValueKind::Malformed);
    CHECK(value_kind("^2020-01-32T00:00:00Z") == ValueKind::Malformed);
    CHECK(value_kind("^2020-01-01T24:00:00Z") == ValueKind::Malformed);
    CHECK(value_kind("^2020-01-01T00:00:00Z/16") == ValueKind::Malformed);
    CHECK(value_kind("^2020") == ValueKind::Malformed);
    CHECK(value_kind("^2020-1-1") == ValueKind::Malformed);

    ParseError err;
    CHECK_FALSE(try_parse_value("^2020-13-01T00:00:00Z", &err).has_value());
    CHECK(err.kind == ValueKind::DateTime);
    CHECK(err.code == ParseErrorCode::Range);
}

TEST_CASE("strings and escapes") {
    CHECK(value_kind("\"Moe\"") == ValueKind::String);
    CHECK(parse_value("\"Moe\"").as<StringValue>().text == "Moe");

    CHECK(parse_value("\"a\\\"b\"").as<StringValue>().text == "a\"b");
    CHECK(parse_value("\"a\\tb\\nc\\rd\"").as<StringValue>().text == "a\tb\nc\rd");
    CHECK(parse_value("\"a\\|b\"").as<StringValue>().text == "a|b");
    CHECK(parse_value("\"it's\"").as<StringValue>().text == "it's");

    CHECK(serialize_value(parse_value("\"a\\|b\"")) == "\"a\\|b\"");
    CHECK(serialize_value(KgtkValue(StringValue{"tab\there"})) == "\"tab\\there\"");

    CHECK(value_kind("\"unterminated") == ValueKind::Malformed);
    CHECK(value_kind("\"bad\\zescape\"") == ValueKind::Malformed);
    CHECK(value_kind("\"trailing\"x") == ValueKind::Malformed);
    CHECK(value_kind("\"a|b\"") == ValueKind::Malformed);  // raw pipe splits the cell
}

TEST_CASE("symbols") {
    CHECK(value_kind("Q5") == ValueKind::Symbol);
    CHECK(parse_value("Q5").as<SymbolValue>().name == "Q5");
    CHECK(parse_value("rdf:type").as<SymbolValue>().name == "rdf:type");
    CHECK(parse_value("_:b12").as<SymbolValue>().name == "_:b12");

    CHECK(parse_value("a\\|b").as<SymbolValue>().name == "a|b");
    CHECK(parse_value("a\\\\b").as<SymbolValue>().name == "a\\b");
    CHECK(parse_value("a\\zb").as<SymbolValue>().name == "a\\zb");  // lone backslash is literal
    CHECK(serialize_value(KgtkValue(SymbolValue{"a|b"})) == "a\\|b");
    CHECK(serialize_value(KgtkValue(SymbolValue{"a\\b"})) == "a\\\\b");

    CHECK(value_kind("True") == ValueKind::Boolean);
    CHECK(value_kind("False") == ValueKind::Boolean);
    CHECK(value_kind("Truex") == ValueKind::Symbol);
    CHECK(parse_value("True").as<BooleanValue>().value);
    CHECK_FALSE(parse_value("False").as<BooleanValue>().value);
}

TEST_CASE("empty and lists") {
    CHECK(value_kind("") == ValueKind::Empty);
    CHECK(parse_value("").kind() == ValueKind::Empty);
    CHECK(serialize_value(KgtkValue(EmptyValue{})) == "");

    KgtkValue v = parse_value("Q5|\"Moe\"|10m");
    REQUIRE(v.kind() == ValueKind::List);
    const auto& list = v.as<ListValue>();
    REQUIRE(list.items.size() == 3);
    CHECK(list.items[0].kind() == ValueKind::Symbol);
    CHECK(list.items[1].kind() == ValueKind::String);
    CHECK(list.items[2].kind() == ValueKind::Quantity);
    CHECK(serialize_value(v) == "Q5|\"Moe\"|10m");

    CHECK(value_kind("a|") == ValueKind::Malformed);
    CHECK(value_kind("|a") == ValueKind::Malformed);
    CHECK(value_kind("a||b") == ValueKind::Malformed);
    CHECK(value_kind("a|@999/0") == ValueKind::Malformed);

    // escaped pipes do not split
    CHECK(value_kind("a\\|b") == ValueKind::Symbol);
    CHECK(value_kind("\"a\\|b\"") == ValueKind::String);
}

TEST_CASE("malformed errors carry position and kind") {
    ParseError err;
    CHECK_FALSE(try_parse_value("'abc'@toolong5", &err).has_value());
    CHECK(err.kind == ValueKind::LangString);
    CHECK(err.position == 6);

    CHECK_FALSE(try_parse_value("Q5|'x'@zzzz", &err).has_value());
    CHECK(err.kind == ValueKind::LangString);
    CHECK(err.position >= 3);  // offset inside the second list item

    CHECK_THROWS_AS(parse_value("@999/0"), MalformedValue);
    try {
        parse_value("@999/0");
    } catch (const MalformedValue& e) {
        CHECK(e.detail().kind == ValueKind::Coordinates);
        CHECK(e.detail().code == ParseErrorCode::Range);
        CHECK(e.cell() == "@999/0");
    }
}

TEST_CASE("round-trip property") {
    testsupport::Rng rng(20260814);
    for (int i = 0; i < 20000; ++i) {
        KgtkValue v = testsupport::gen_value(rng);
        std::string text = serialize_value(v);
        CAPTURE(text);
        KgtkValue back = parse_value(text);
        CHECK(back == v);
        // serialization stays inside one TSV cell
        CHECK(text.find('\t') == std::string::npos);
        CHECK(text.find('\n') == std::string::npos);
    }
}

TEST_CASE("dispatch determinism") {
    testsupport::Rng rng(99);
    std::vector<std::string> corpus = {
        "", "Q5", "\"Moe\"", "'x'@en", "10", "10m", "@043.26193/010.92708",
        "^1839-00-00T00:00:00Z/9", "True", "a|b", "@999/0", "'abc'@toolong5",
        "\"unterminated", "1.2.3", "^2020-13-01", "|", "a||b", ".5", "-.5",
    };
    for (int i = 0; i < 2000; ++i) {
        if (i % 3 == 0) {
            corpus.push_back(testsupport::gen_text(rng, 16));
        } else {
            std::string s = serialize_value(testsupport::gen_value(rng));
            if (i % 3 == 1 && !s.empty()) {
                s[std::size_t(rng.range(0, int(s.size()) - 1))] =
                    char(rng.range(32, 126));  // mutate one byte
            }
            corpus.push_back(s);
        }
    }
    for (const auto& cell : corpus) {
        CAPTURE(cell);
        ValueKind kind = value_kind(cell);
        ParseError err;
        auto parsed = try_parse_value(cell, &err);
        if (parsed) {
            CHECK(kind == parsed->kind());
        } else {
            CHECK(kind == ValueKind::Malformed);
        }
    }
}
