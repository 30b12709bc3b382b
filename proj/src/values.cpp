#include "kgtk/values.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace kgtk {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }
char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c; }

bool fail(ParseError& err, ValueKind kind, ParseErrorCode code, std::size_t pos,
          std::string message) {
    err.kind = kind;
    err.code = code;
    err.position = pos;
    err.message = std::move(message);
    return false;
}

void append_padded(std::string& out, unsigned value, int width) {
    char buf[16];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    int len = int(ptr - buf);
    for (int i = len; i < width; ++i) out.push_back('0');
    out.append(buf, ptr);
}

// Scans one number token at s[i]; advances i past it. err_kind names the
// grammar being parsed (Number, Quantity, ...) for error reporting.
bool scan_number(std::string_view s, std::size_t base, std::size_t& i, NumberValue& nv,
                 ParseError& err, ValueKind err_kind) {
    std::size_t start = i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t int_digits = 0;
    while (i < s.size() && is_digit(s[i])) ++i, ++int_digits;
    std::size_t frac_digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && is_digit(s[i])) ++i, ++frac_digits;
    }
    if (int_digits == 0 && frac_digits == 0)
        return fail(err, err_kind, ParseErrorCode::Syntax, base + i, "expected digits");
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        // Commit to the exponent only when digits follow; otherwise the 'e'
        // belongs to a trailing unit (e.g. `10em`).
        std::size_t mark = i;
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        std::size_t exp_digits = 0;
        while (i < s.size() && is_digit(s[i])) ++i, ++exp_digits;
        if (exp_digits == 0) i = mark;
    }
    nv.lexical.assign(s.substr(start, i - start));

    // from_chars rejects a leading '+' and a '.' not followed by a digit.
    std::string conv;
    conv.reserve(nv.lexical.size());
    for (std::size_t k = 0; k < nv.lexical.size(); ++k) {
        char c = nv.lexical[k];
        if (c == '+' && k == 0) continue;
        if (c == '.' && (k + 1 >= nv.lexical.size() || !is_digit(nv.lexical[k + 1]))) continue;
        conv.push_back(c);
    }
    auto [ptr, ec] = std::from_chars(conv.data(), conv.data() + conv.size(), nv.value);
    if (ec == std::errc::result_out_of_range)
        return fail(err, err_kind, ParseErrorCode::Range, base + start, "number out of range");
    if (ec != std::errc() || ptr != conv.data() + conv.size())
        return fail(err, err_kind, ParseErrorCode::Syntax, base + start, "invalid number");
    return true;
}

bool parse_numberish(std::string_view s, std::size_t base, KgtkValue* out, ParseError& err) {
    std::size_t i = 0;
    QuantityValue qv;
    if (!scan_number(s, base, i, qv.amount, err, ValueKind::Number)) return false;
    bool has_tolerance = false;
    if (i < s.size() && s[i] == '[') {
        ++i;
        NumberValue low, high;
        if (!scan_number(s, base, i, low, err, ValueKind::Quantity)) return false;
        if (i >= s.size() || s[i] != ',')
            return fail(err, ValueKind::Quantity, ParseErrorCode::Syntax, base + i,
                        "expected ',' in tolerance");
        ++i;
        if (!scan_number(s, base, i, high, err, ValueKind::Quantity)) return false;
        if (i >= s.size() || s[i] != ']')
            return fail(err, ValueKind::Quantity, ParseErrorCode::Syntax, base + i,
                        "expected ']' after tolerance");
        ++i;
        if (low.value > high.value)
            return fail(err, ValueKind::Quantity, ParseErrorCode::Range, base,
                        "tolerance low exceeds high");
        qv.tolerance.emplace(std::move(low), std::move(high));
        has_tolerance = true;
    }
    if (i < s.size() && is_alpha(s[i])) {
        std::size_t start = i;
        while (i < s.size() &&
               (is_alnum(s[i]) || s[i] == '.' || s[i] == '/' || s[i] == '-'))
            ++i;
        qv.unit.assign(s.substr(start, i - start));
    }
    if (i != s.size())
        return fail(err, has_tolerance || !qv.unit.empty() ? ValueKind::Quantity : ValueKind::Number,
                    ParseErrorCode::Syntax, base + i, "unexpected character after number");
    if (out) {
        if (!has_tolerance && qv.unit.empty())
            *out = KgtkValue(std::move(qv.amount));
        else
            *out = KgtkValue(std::move(qv));
    }
    return true;
}

bool unescape_quoted(std::string_view s, std::size_t base, char quote, std::size_t& i,
                     std::string& text, ParseError& err, ValueKind kind) {
    while (i < s.size()) {
        char c = s[i];
        if (c == quote) return true;
        if (c == '\\') {
            if (i + 1 >= s.size())
                return fail(err, kind, ParseErrorCode::Syntax, base + i, "dangling backslash");
            char e = s[i + 1];
            switch (e) {
                case '"': case '\'': case '\\': case '|': text.push_back(e); break;
                case 't': text.push_back('\t'); break;
                case 'n': text.push_back('\n'); break;
                case 'r': text.push_back('\r'); break;
                default:
                    return fail(err, kind, ParseErrorCode::Syntax, base + i,
                                std::string("unsupported escape '\\") + e + "'");
            }
            i += 2;
        } else {
            text.push_back(c);
            ++i;
        }
    }
    return fail(err, kind, ParseErrorCode::Syntax, base + s.size(), "unterminated string");
}

bool parse_string(std::string_view s, std::size_t base, KgtkValue* out, ParseError& err) {
    std::size_t i = 1;
    std::string text;
    if (!unescape_quoted(s, base, '"', i, text, err, ValueKind::String)) return false;
    ++i;  // closing quote
    if (i != s.size())
        return fail(err, ValueKind::String, ParseErrorCode::Syntax, base + i,
                    "unexpected characters after closing quote");
    if (out) *out = KgtkValue(StringValue{std::move(text)});
    return true;
}

bool parse_lang_string(std::string_view s, std::size_t base, KgtkValue* out, ParseError& err) {
    std::size_t i = 1;
    std::string text;
    if (!unescape_quoted(s, base, '\'', i, text, err, ValueKind::LangString)) return false;
    ++i;  // closing quote
    if (i >= s.size() || s[i] != '@')
        return fail(err, ValueKind::LangString, ParseErrorCode::Syntax, base + i,
                    "expected '@' language tag");
    ++i;
    std::size_t lang_start = i;
    while (i < s.size() && is_alpha(s[i])) ++i;
    std::size_t lang_len = i - lang_start;
    if (lang_len < 2 || lang_len > 3)
        return fail(err, ValueKind::LangString, ParseErrorCode::Syntax, base + lang_start,
                    "language code must be 2-3 letters");
    std::string lang;
    for (std::size_t k = lang_start; k < lang_start + lang_len; ++k)
        lang.push_back(to_lower(s[k]));
    std::string suffix;
    if (i < s.size() && s[i] == '-') {
        ++i;
        std::size_t suffix_start = i;
        for (;;) {
            std::size_t seg = 0;
            while (i < s.size() && is_alnum(s[i])) ++i, ++seg;
            if (seg == 0)
                return fail(err, ValueKind::LangString, ParseErrorCode::Syntax, base + i,
                            "empty language subtag");
            if (i < s.size() && s[i] == '-') { ++i; continue; }
            break;
        }
        suffix.assign(s.substr(suffix_start, i - suffix_start));
    }
    if (i != s.size())
        return fail(err, ValueKind::LangString, ParseErrorCode::Syntax, base + i,
                    "invalid language tag");
    if (out) *out = KgtkValue(LangStringValue{std::move(text), std::move(lang), std::move(suffix)});
    return true;
}

// Degrees with canonical respelling: sign kept only when negative, integer
// digits left-padded to 3, fraction digits verbatim.
bool scan_degrees(std::string_view s, std::size_t base, std::size_t& i, double& value,
                  std::string& canon, ParseError& err) {
    bool negative = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        negative = s[i] == '-';
        ++i;
    }
    std::size_t digits_start = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i == digits_start)
        return fail(err, ValueKind::Coordinates, ParseErrorCode::Syntax, base + i,
                    "expected degree digits");
    std::size_t int_len = i - digits_start;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && is_digit(s[i])) ++i;
    }
    std::string_view magnitude = s.substr(digits_start, i - digits_start);
    auto [ptr, ec] = std::from_chars(magnitude.data(), magnitude.data() + magnitude.size(), value);
    if (ec != std::errc() || ptr != magnitude.data() + magnitude.size())
        return fail(err, ValueKind::Coordinates, ParseErrorCode::Syntax, base + digits_start,
                    "invalid degrees");
    if (negative) value = -value;
    canon.clear();
    if (negative) canon.push_back('-');
    for (std::size_t k = int_len; k < 3; ++k) canon.push_back('0');
    canon.append(magnitude);
    return true;
}

bool parse_coordinates(std::string_view s, std::size_t base, KgtkValue* out, ParseError& err) {
    std::size_t i = 1;
    CoordinatesValue cv;
    std::size_t lat_pos = i;
    if (!scan_degrees(s, base, i, cv.lat, cv.lat_text, err)) return false;
    if (cv.lat < -90.0 || cv.lat > 90.0)
        return fail(err, ValueKind::Coordinates, ParseErrorCode::Range, base + lat_pos,
                    "latitude out of range");
    if (i >= s.size() || s[i] != '/')
        return fail(err, ValueKind::Coordinates, ParseErrorCode::Syntax, base + i,
                    "expected '/' between latitude and longitude");
    ++i;
    std::size_t lon_pos = i;
    if (!scan_degrees(s, base, i, cv.lon, cv.lon_text, err)) return false;
    if (cv.lon < -180.0 || cv.lon > 180.0)
        return fail(err, ValueKind::Coordinates, ParseErrorCode::Range, base + lon_pos,
                    "longitude out of range");
    if (i != s.size())
        return fail(err, ValueKind::Coordinates, ParseErrorCode::Syntax, base + i,
                    "unexpected characters after coordinates");
    if (out) *out = KgtkValue(std::move(cv));
    return true;
}

bool scan_fixed_digits(std::string_view s, std::size_t base, std::size_t& i, int count, int& value,
                       ParseError& err, const char* what) {
    value = 0;
    for (int k = 0; k < count; ++k) {
        if (i >= s.size() || !is_digit(s[i]))
            return fail(err, ValueKind::DateTime, ParseErrorCode::Syntax, base + i,
                        std::string("expected ") + what);
        value = value * 10 + (s[i] - '0');
        ++i;
    }
    return true;
}

bool parse_date_time(std::string_view s, std::size_t base, KgtkValue* out, ParseError& err) {
    std::size_t i = 1;
    DateTimeValue dv;
    bool negative_year = false;
    if (i < s.size() && s[i] == '-') {
        negative_year = true;
        ++i;
    }
    if (!scan_fixed_digits(s, base, i, 4, dv.year, err, "4-digit year")) return false;
    if (negative_year) dv.year = -dv.year;
    if (i >= s.size() || s[i] != '-')
        return fail(err, ValueKind::DateTime, ParseErrorCode::Syntax, base + i,
                    "expected '-' after year");
    ++i;
    if (!scan_fixed_digits(s, base, i, 2, dv.month, err, "2-digit month")) return false;
    if (i >= s.size() || s[i] != '-')
        return fail(err, ValueKind::DateTime, ParseErrorCode::Syntax, base + i,
                    "expected '-' after month");
    ++i;
    if (!scan_fixed_digits(s, base, i, 2, dv.day, err, "2-digit day")) return false;
    if (i < s.size() && s[i] == 'T') {
        ++i;
        if (!scan_fixed_digits(s, base, i, 2, dv.hour, err, "2-digit hour")) return false;
        if (i >= s.size() || s[i] != ':')
            return fail(err, ValueKind::DateTime, ParseErrorCode::Syntax, base + i,
                        "expected ':' after hour");
        ++i;
        if (!scan_fixed_digits(s, base, i, 2, dv.minute, err, "2-digit minute")) return false;
        if (i >= s.size() || s[i] != ':')
            return fail(err, ValueKind::DateTime, ParseErrorCode::Syntax, base + i,
                        "expected ':' after minute");
        ++i;
        if (!scan_fixed_digits(s, base, i, 2, dv.second, err, "2-digit second")) return false;
        if (i < s.size() && s[i] == 'Z') {
            dv.tz = "Z";
            ++i;
        } else if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            std::size_t tz_start = i;
            ++i;
            int dummy = 0;
            if (!scan_fixed_digits(s, base, i, 2, dummy, err, "2-digit timezone hour"))
                return false;
            if (i < s.size() && s[i] == ':') {
                ++i;
                if (!scan_fixed_digits(s, base, i, 2, dummy, err, "2-digit timezone minute"))
                    return false;
            } else if (i + 1 < s.size() && is_digit(s[i]) && is_digit(s[i + 1])) {
                i += 2;
            }
            dv.tz.assign(s.substr(tz_start, i - tz_start));
        }
    }
    if (i < s.size() && s[i] == '/') {
        ++i;
        std::size_t digits_start = i;
        while (i < s.size() && is_digit(s[i])) ++i;
        if (i == digits_start)
            return fail(err, ValueKind::DateTime, ParseErrorCode::Syntax, base + i,
                        "expected precision digits");
        int precision = 0;
        auto [ptr, ec] = std::from_chars(s.data() + digits_start, s.data() + i, precision);
        if (ec != std::errc() || precision > 15)
            return fail(err, ValueKind::DateTime, ParseErrorCode::Range, base + digits_start,
                        "precision out of range");
        (void)ptr;
        dv.precision = precision;
    }
    if (i != s.size())
        return fail(err, ValueKind::DateTime, ParseErrorCode::Syntax, base + i,
                    "unexpected characters after date");
    if (dv.month > 12)
        return fail(err, ValueKind::DateTime, ParseErrorCode::Range, base, "month out of range");
    if (dv.day > 31)
        return fail(err, ValueKind::DateTime, ParseErrorCode::Range, base, "day out of range");
    if (dv.hour > 23)
        return fail(err, ValueKind::DateTime, ParseErrorCode::Range, base, "hour out of range");
    if (dv.minute > 59)
        return fail(err, ValueKind::DateTime, ParseErrorCode::Range, base, "minute out of range");
    if (dv.second > 59)
        return fail(err, ValueKind::DateTime, ParseErrorCode::Range, base, "second out of range");
    if (out) *out = KgtkValue(std::move(dv));
    return true;
}

bool parse_symbol(std::string_view s, KgtkValue* out) {
    if (out) {
        std::string name;
        name.reserve(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == '|' || s[i + 1] == '\\')) {
                name.push_back(s[i + 1]);
                ++i;
            } else {
                name.push_back(s[i]);
            }
        }
        *out = KgtkValue(SymbolValue{std::move(name)});
    }
    return true;
}

// One non-list value. base is the segment's offset within the whole cell.
bool parse_single(std::string_view s, std::size_t base, KgtkValue* out, ParseError& err) {
    if (s.empty()) {
        if (out) *out = KgtkValue(EmptyValue{});
        return true;
    }
    char c = s.front();
    if (c == '"') return parse_string(s, base, out, err);
    if (c == '\'') return parse_lang_string(s, base, out, err);
    if (c == '@') return parse_coordinates(s, base, out, err);
    if (c == '^') return parse_date_time(s, base, out, err);
    if (c == '+' || c == '-' || is_digit(c)) return parse_numberish(s, base, out, err);
    if (s == "True" || s == "False") {
        if (out) *out = KgtkValue(BooleanValue{s == "True"});
        return true;
    }
    return parse_symbol(s, out);
}

// Full cell: splits on unescaped '|' first, then dispatches each segment.
bool parse_cell(std::string_view cell, KgtkValue* out, ParseError& err) {
    // A backslash always protects the next byte from the list scan, matching
    // the escape rules of every single-value grammar.
    std::size_t first_pipe = std::string_view::npos;
    for (std::size_t i = 0; i < cell.size(); ++i) {
        if (cell[i] == '\\') {
            ++i;
        } else if (cell[i] == '|') {
            first_pipe = i;
            break;
        }
    }
    if (first_pipe == std::string_view::npos) return parse_single(cell, 0, out, err);

    ListValue list;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= cell.size(); ++i) {
        bool at_end = i == cell.size();
        if (!at_end && cell[i] == '\\') {
            ++i;
            continue;
        }
        if (at_end || cell[i] == '|') {
            std::string_view segment = cell.substr(start, i - start);
            if (segment.empty())
                return fail(err, ValueKind::List, ParseErrorCode::Syntax, start,
                            "empty list item");
            KgtkValue item;
            if (!parse_single(segment, start, out ? &item : nullptr, err)) return false;
            if (out) list.items.push_back(std::move(item));
            start = i + 1;
        }
    }
    if (out) *out = KgtkValue(std::move(list));
    return true;
}

void append_quoted(std::string& out, const std::string& text, char quote) {
    out.push_back(quote);
    for (char c : text) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '|': out += "\\|"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c == quote) {
                    out.push_back('\\');
                }
                out.push_back(c);
        }
    }
    out.push_back(quote);
}

}  // namespace

std::string_view to_string(ValueKind kind) {
    switch (kind) {
        case ValueKind::Empty: return "empty";
        case ValueKind::Symbol: return "symbol";
        case ValueKind::String: return "string";
        case ValueKind::LangString: return "language-string";
        case ValueKind::Number: return "number";
        case ValueKind::Quantity: return "quantity";
        case ValueKind::Coordinates: return "coordinates";
        case ValueKind::DateTime: return "date-time";
        case ValueKind::Boolean: return "boolean";
        case ValueKind::List: return "list";
        case ValueKind::Malformed: return "malformed";
    }
    return "unknown";
}

NumberValue NumberValue::of(double v) {
    NumberValue nv;
    nv.value = v;
    nv.lexical = format_double(v);
    return nv;
}

NumberValue NumberValue::of(long long v) {
    NumberValue nv;
    nv.value = double(v);
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    nv.lexical.assign(buf, ptr);
    return nv;
}

bool QuantityValue::unit_is_node() const {
    if (unit.size() < 2 || unit[0] != 'Q') return false;
    for (std::size_t i = 1; i < unit.size(); ++i)
        if (!is_digit(unit[i])) return false;
    return true;
}

CoordinatesValue CoordinatesValue::of(double lat, double lon) {
    if (!(lat >= -90.0 && lat <= 90.0)) throw DataError("latitude out of range");
    if (!(lon >= -180.0 && lon <= 180.0)) throw DataError("longitude out of range");
    auto degrees_text = [](double v) {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, std::fabs(v),
                                       std::chars_format::fixed);
        std::string_view magnitude(buf, std::size_t(ptr - buf));
        std::size_t int_len = magnitude.find('.');
        if (int_len == std::string_view::npos) int_len = magnitude.size();
        std::string text;
        if (std::signbit(v) && v != 0.0) text.push_back('-');
        for (std::size_t k = int_len; k < 3; ++k) text.push_back('0');
        text.append(magnitude);
        return text;
    };
    CoordinatesValue cv;
    cv.lat = lat;
    cv.lon = lon;
    cv.lat_text = degrees_text(lat);
    cv.lon_text = degrees_text(lon);
    return cv;
}

bool ListValue::operator==(const ListValue& other) const { return items == other.items; }

ValueKind KgtkValue::kind() const { return static_cast<ValueKind>(storage_.index()); }

MalformedValue::MalformedValue(ParseError detail, std::string_view cell)
    : DataError([&] {
          std::string msg = "malformed ";
          msg += to_string(detail.kind);
          msg += " at offset ";
          char buf[24];
          auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, detail.position);
          msg.append(buf, ptr);
          msg += ": ";
          msg += detail.message;
          return msg;
      }()),
      detail_(std::move(detail)),
      cell_(cell) {}

KgtkValue parse_value(std::string_view cell) {
    KgtkValue value;
    ParseError err;
    if (!parse_cell(cell, &value, err)) throw MalformedValue(std::move(err), cell);
    return value;
}

std::optional<KgtkValue> try_parse_value(std::string_view cell, ParseError* err) {
    KgtkValue value;
    ParseError local;
    if (!parse_cell(cell, &value, err ? *err : local)) return std::nullopt;
    return value;
}

ValueKind value_kind(std::string_view cell) noexcept {
    KgtkValue value;
    ParseError err;
    if (!parse_cell(cell, &value, err)) return ValueKind::Malformed;
    return value.kind();
}

void serialize_value(const KgtkValue& v, std::string& out) {
    struct Visitor {
        std::string& out;
        void operator()(const EmptyValue&) {}
        void operator()(const SymbolValue& s) {
            for (char c : s.name) {
                if (c == '\\') out += "\\\\";
                else if (c == '|') out += "\\|";
                else out.push_back(c);
            }
        }
        void operator()(const StringValue& s) { append_quoted(out, s.text, '"'); }
        void operator()(const LangStringValue& s) {
            append_quoted(out, s.text, '\'');
            out.push_back('@');
            out += s.lang;
            if (!s.suffix.empty()) {
                out.push_back('-');
                out += s.suffix;
            }
        }
        void operator()(const NumberValue& n) { out += n.lexical; }
        void operator()(const QuantityValue& q) {
            out += q.amount.lexical;
            if (q.tolerance) {
                out.push_back('[');
                out += q.tolerance->first.lexical;
                out.push_back(',');
                out += q.tolerance->second.lexical;
                out.push_back(']');
            }
            out += q.unit;
        }
        void operator()(const CoordinatesValue& c) {
            out.push_back('@');
            out += c.lat_text;
            out.push_back('/');
            out += c.lon_text;
        }
        void operator()(const DateTimeValue& d) {
            out.push_back('^');
            int year = d.year;
            if (year < 0) {
                out.push_back('-');
                year = -year;
            }
            append_padded(out, unsigned(year), 4);
            out.push_back('-');
            append_padded(out, unsigned(d.month), 2);
            out.push_back('-');
            append_padded(out, unsigned(d.day), 2);
            out.push_back('T');
            append_padded(out, unsigned(d.hour), 2);
            out.push_back(':');
            append_padded(out, unsigned(d.minute), 2);
            out.push_back(':');
            append_padded(out, unsigned(d.second), 2);
            out += d.tz;
            if (d.precision) {
                out.push_back('/');
                append_padded(out, unsigned(*d.precision), 1);
            }
        }
        void operator()(const BooleanValue& b) { out += b.value ? "True" : "False"; }
        void operator()(const ListValue& l) {
            bool first = true;
            for (const auto& item : l.items) {
                if (!first) out.push_back('|');
                first = false;
                serialize_value(item, out);
            }
        }
    };
    std::visit(Visitor{out}, v.storage());
}

std::string serialize_value(const KgtkValue& v) {
    std::string out;
    serialize_value(v, out);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace kgtk
