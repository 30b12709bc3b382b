#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "kgtk/errors.hpp"

namespace kgtk {

// Every kind of value a KGTK cell may hold. Malformed is only ever produced
// by value_kind(); parse_value() throws instead.
enum class ValueKind {
    Empty,
    Symbol,
    String,
    LangString,
    Number,
    Quantity,
    Coordinates,
    DateTime,
    Boolean,
    List,
    Malformed,
};

std::string_view to_string(ValueKind kind);

class KgtkValue;

// Unquoted identifier, e.g. Q5, rdf:type, _:b12. The stored name is the
// unescaped form (a literal pipe is stored as '|', serialized as "\|").
struct SymbolValue {
    std::string name;
    bool operator==(const SymbolValue&) const = default;
};

// Double-quoted string; text is the unescaped content.
struct StringValue {
    std::string text;
    bool operator==(const StringValue&) const = default;
};

// Single-quoted string with a language tag: 'text'@lang or 'text'@lang-suffix.
// lang is the 2-3 letter primary code, stored lowercase; suffix holds any
// dialect/location subtags after the first '-', verbatim ("" when absent).
struct LangStringValue {
    std::string text;
    std::string lang;
    std::string suffix;
    bool operator==(const LangStringValue&) const = default;
};

// Number with its lexical form preserved. Values built by parsing keep the
// input spelling; programmatic values get the shortest round-trip spelling.
struct NumberValue {
    double value = 0.0;
    std::string lexical;

    static NumberValue of(double v);
    static NumberValue of(long long v);
    bool operator==(const NumberValue&) const = default;
};

// amount [low,high]? unit?  where unit is an SI-unit string or a Wikidata
// node symbol (Q followed by digits).
struct QuantityValue {
    NumberValue amount;
    std::optional<std::pair<NumberValue, NumberValue>> tolerance;
    std::string unit;  // empty when absent

    bool unit_is_node() const;
    bool operator==(const QuantityValue&) const = default;
};

// @LAT/LON. *_text are canonical degree spellings: integer part zero-padded
// to 3 digits (sign-extended), fraction digits kept verbatim.
struct CoordinatesValue {
    double lat = 0.0;
    double lon = 0.0;
    std::string lat_text;
    std::string lon_text;

    // Canonicalizes and range-checks; throws DataError when out of range.
    static CoordinatesValue of(double lat, double lon);
    bool operator==(const CoordinatesValue&) const = default;
};

// ^ISO-8601 with optional timezone and /precision. Month and day may be 00.
struct DateTimeValue {
    int year = 0;
    int month = 0;
    int day = 0;
    int hour = 0;
    int minute = 0;
    int second = 0;
    std::string tz;                // "", "Z", or a verbatim +HH:MM style offset
    std::optional<int> precision;  // 0..15

    bool operator==(const DateTimeValue&) const = default;
};

struct BooleanValue {
    bool value = false;
    bool operator==(const BooleanValue&) const = default;
};

struct EmptyValue {
    bool operator==(const EmptyValue&) const = default;
};

// Pipe-separated list; holds >= 2 non-list values when built by parsing.
struct ListValue {
    std::vector<KgtkValue> items;
    bool operator==(const ListValue& other) const;
};

class KgtkValue {
public:
    using Storage = std::variant<EmptyValue, SymbolValue, StringValue, LangStringValue,
                                 NumberValue, QuantityValue, CoordinatesValue, DateTimeValue,
                                 BooleanValue, ListValue>;

    KgtkValue() : storage_(EmptyValue{}) {}
    KgtkValue(Storage storage) : storage_(std::move(storage)) {}

    ValueKind kind() const;

    template <typename T>
    bool is() const {
        return std::holds_alternative<T>(storage_);
    }
    template <typename T>
    const T& as() const {
        return std::get<T>(storage_);
    }
    template <typename T>
    const T* get_if() const {
        return std::get_if<T>(&storage_);
    }

    const Storage& storage() const { return storage_; }

    bool operator==(const KgtkValue& other) const { return storage_ == other.storage_; }

private:
    Storage storage_;
};

enum class ParseErrorCode { Syntax, Range };

struct ParseError {
    ValueKind kind = ValueKind::Malformed;  // the kind whose grammar failed
    ParseErrorCode code = ParseErrorCode::Syntax;
    std::size_t position = 0;
    std::string message;
};

class MalformedValue : public DataError {
public:
    MalformedValue(ParseError detail, std::string_view cell);
    const ParseError& detail() const { return detail_; }
    const std::string& cell() const { return cell_; }

private:
    ParseError detail_;
    std::string cell_;
};

// Parses one cell (tabs/newlines already stripped by the reader) into the
// unique variant matched by the grammar. Throws MalformedValue.
KgtkValue parse_value(std::string_view cell);

// Non-throwing variant; fills *err on failure when err != nullptr.
std::optional<KgtkValue> try_parse_value(std::string_view cell, ParseError* err = nullptr);

// Classifies a cell without building the payload; returns Malformed instead
// of throwing. Agrees with parse_value on every input.
ValueKind value_kind(std::string_view cell) noexcept;

// Canonical lexical form; parse_value(serialize_value(v)) == v for valid v.
std::string serialize_value(const KgtkValue& v);
void serialize_value(const KgtkValue& v, std::string& out);

// Shortest decimal spelling that round-trips the double (never exponent form
// for coordinate degrees; general form otherwise).
std::string format_double(double v);

}  // namespace kgtk
