#include "kgtk/validation.hpp"

#include <ostream>

namespace kgtk {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

const char* classify_parse_error(const ParseError& err) {
    switch (err.kind) {
        case ValueKind::String:
        case ValueKind::LangString:
            return "malformed-string";
        case ValueKind::DateTime:
            return "invalid-date";
        case ValueKind::Coordinates:
            return err.code == ParseErrorCode::Range ? "coordinate-range" : "malformed-value";
        default:
            return "malformed-value";
    }
}

void record(ValidationReport& report, std::size_t max_exemplars, Finding finding) {
    std::uint64_t count = ++report.rule_counts[finding.rule];
    if (count <= max_exemplars) report.exemplars.push_back(std::move(finding));
}

// Runs every check against one row. A cell-count mismatch suppresses the
// per-cell rules: column alignment is unknown on a ragged row.
void check_row(const Header& header, const EdgeRecord& row, const ValidationOptions& options,
               std::vector<Finding>& findings) {
    findings.clear();
    if (row.cells.size() != header.columns.size()) {
        findings.push_back({"cell-count", row.line_number, "",
                            "expected " + std::to_string(header.columns.size()) +
                                " cells, found " + std::to_string(row.cells.size())});
        return;
    }
    for (std::size_t role : {header.node1, header.label, header.node2}) {
        if (row.cells[role].empty())
            findings.push_back(
                {"empty-required", row.line_number, header.columns[role], "empty value"});
    }
    for (std::size_t i = 0; i < row.cells.size(); ++i) {
        const std::string& cell = row.cells[i];
        if (cell.size() > options.max_cell_length) {
            findings.push_back({"length-bound", row.line_number, header.columns[i],
                                "cell length " + std::to_string(cell.size()) + " exceeds " +
                                    std::to_string(options.max_cell_length)});
            continue;  // oversized cells are not worth parsing
        }
        if (!cell.empty() && cell.size() < options.min_cell_length) {
            findings.push_back({"length-bound", row.line_number, header.columns[i],
                                "cell length " + std::to_string(cell.size()) + " below " +
                                    std::to_string(options.min_cell_length)});
        }
        ParseError err;
        auto parsed = try_parse_value(cell, &err);
        if (!parsed) {
            findings.push_back(
                {classify_parse_error(err), row.line_number, header.columns[i], err.message});
            continue;
        }
        if (i == header.id && !cell.empty() && parsed->kind() != ValueKind::Symbol)
            findings.push_back({"id-not-symbol", row.line_number, header.columns[i],
                                std::string("id is a ") + std::string(to_string(parsed->kind()))});
    }
}

// Escapes '|' wherever it occurs inside an open single or double quote.
std::string escape_stray_pipes(const std::string& cell) {
    std::string out;
    out.reserve(cell.size());
    bool in_dq = false, in_sq = false;
    for (std::size_t i = 0; i < cell.size(); ++i) {
        char c = cell[i];
        if (c == '\\' && i + 1 < cell.size()) {
            out.push_back(c);
            out.push_back(cell[++i]);
            continue;
        }
        if (c == '"' && !in_sq) {
            in_dq = !in_dq;
        } else if (c == '\'' && !in_dq) {
            in_sq = !in_sq;
        } else if (c == '|' && (in_dq || in_sq)) {
            out += "\\|";
            continue;
        }
        out.push_back(c);
    }
    return out;
}

bool scan_loose_int(const std::string& s, std::size_t& i, int max_digits, int& value) {
    std::size_t start = i;
    value = 0;
    while (i < s.size() && is_digit(s[i]) && int(i - start) < max_digits)
        value = value * 10 + (s[i++] - '0');
    return i > start;
}

// Accepts date-times with under-width fields or out-of-range components and
// rebuilds the canonical spelling. Returns nothing when the text does not
// look like a date at all, or when a component is out of range under the
// drop policy.
std::optional<std::string> rebuild_date(const std::string& cell, DatePolicy policy) {
    if (cell.empty() || cell[0] != '^') return std::nullopt;
    std::size_t i = 1;
    DateTimeValue dv;
    bool negative = false;
    if (i < cell.size() && cell[i] == '-') {
        negative = true;
        ++i;
    }
    if (!scan_loose_int(cell, i, 4, dv.year)) return std::nullopt;
    if (negative) dv.year = -dv.year;
    if (i >= cell.size() || cell[i] != '-') return std::nullopt;
    ++i;
    if (!scan_loose_int(cell, i, 2, dv.month)) return std::nullopt;
    if (i >= cell.size() || cell[i] != '-') return std::nullopt;
    ++i;
    if (!scan_loose_int(cell, i, 2, dv.day)) return std::nullopt;
    if (i < cell.size() && cell[i] == 'T') {
        ++i;
        if (!scan_loose_int(cell, i, 2, dv.hour)) return std::nullopt;
        if (i >= cell.size() || cell[i] != ':') return std::nullopt;
        ++i;
        if (!scan_loose_int(cell, i, 2, dv.minute)) return std::nullopt;
        if (i >= cell.size() || cell[i] != ':') return std::nullopt;
        ++i;
        if (!scan_loose_int(cell, i, 2, dv.second)) return std::nullopt;
    }
    if (i < cell.size() && cell[i] == 'Z') {
        dv.tz = "Z";
        ++i;
    } else if (i < cell.size() && (cell[i] == '+' || cell[i] == '-')) {
        char sign = cell[i];
        ++i;
        int tz_hour = 0, tz_minute = -1;
        bool colon = false;
        if (!scan_loose_int(cell, i, 2, tz_hour)) return std::nullopt;
        if (i < cell.size() && cell[i] == ':') {
            colon = true;
            ++i;
            if (!scan_loose_int(cell, i, 2, tz_minute)) return std::nullopt;
        } else if (i + 1 < cell.size() && is_digit(cell[i]) && is_digit(cell[i + 1])) {
            scan_loose_int(cell, i, 2, tz_minute);
        }
        auto pad2 = [](int v) {
            std::string s = std::to_string(v);
            return s.size() < 2 ? "0" + s : s;
        };
        dv.tz = sign + pad2(tz_hour);
        if (tz_minute >= 0) dv.tz += (colon ? ":" : "") + pad2(tz_minute);
    }
    int precision = -1;
    if (i < cell.size() && cell[i] == '/') {
        ++i;
        if (!scan_loose_int(cell, i, 2, precision)) return std::nullopt;
    }
    if (i != cell.size()) return std::nullopt;

    auto apply_policy = [&](int& component, int bound) -> bool {
        if (component <= bound) return true;
        switch (policy) {
            case DatePolicy::Clamp: component = bound; return true;
            case DatePolicy::Zero: component = 0; return true;
            case DatePolicy::Drop: return false;
        }
        return false;
    };
    if (!apply_policy(dv.month, 12)) return std::nullopt;
    if (!apply_policy(dv.day, 31)) return std::nullopt;
    if (!apply_policy(dv.hour, 23)) return std::nullopt;
    if (!apply_policy(dv.minute, 59)) return std::nullopt;
    if (!apply_policy(dv.second, 59)) return std::nullopt;
    if (precision >= 0) {
        if (!apply_policy(precision, 15)) return std::nullopt;
        dv.precision = precision;
    }
    return serialize_value(KgtkValue(std::move(dv)));
}

bool wants_normalization(ValueKind kind) {
    switch (kind) {
        case ValueKind::Quantity:
        case ValueKind::Coordinates:
        case ValueKind::DateTime:
        case ValueKind::LangString:
        case ValueKind::List:
            return true;
        default:
            return false;
    }
}

}  // namespace

const std::vector<ValidationRule>& builtin_rules() {
    using Scope = ValidationRule::Scope;
    using Severity = ValidationRule::Severity;
    static const std::vector<ValidationRule> rules = {
        {"cell-count", Scope::Line, Severity::Error},
        {"empty-required", Scope::Value, Severity::Error},
        {"length-bound", Scope::Value, Severity::Error},
        {"malformed-string", Scope::Value, Severity::Error},
        {"invalid-date", Scope::Value, Severity::Error},
        {"coordinate-range", Scope::Value, Severity::Error},
        {"malformed-value", Scope::Value, Severity::Error},
        {"id-not-symbol", Scope::Value, Severity::Error},
        {"pipe-escaped", Scope::Value, Severity::Warning},
        {"date-fixed", Scope::Value, Severity::Warning},
        {"normalized", Scope::Value, Severity::Warning},
    };
    return rules;
}

ValidatingSource::ValidatingSource(EdgeSource& inner, ValidationOptions options)
    : inner_(inner), options_(options) {}

bool ValidatingSource::next(EdgeRecord& out) {
    std::vector<Finding> findings;
    for (;;) {
        if (!inner_.next(out)) return false;
        ++report_.rows_read;
        check_row(header(), out, options_, findings);
        for (Finding& f : findings) {
            if (options_.on_error == OnError::Abort)
                throw AbortOnFirstError("line " + std::to_string(f.line_number) +
                                        (f.column.empty() ? "" : " (" + f.column + ")") + ": " +
                                        f.message + " [" + f.rule + "]");
            record(report_, options_.max_exemplars, std::move(f));
        }
        if (findings.empty() || options_.on_error == OnError::Report) {
            ++report_.rows_passed;
            return true;
        }
        ++report_.rows_excluded;
    }
}

CleaningSource::CleaningSource(EdgeSource& inner, CleanOptions options)
    : inner_(inner), options_(options) {}

bool CleaningSource::next(EdgeRecord& out) {
    const Header& h = header();
    const ValidationOptions& vopts = options_.validation;
    std::vector<Finding> findings;
    for (;;) {
        if (!inner_.next(out)) return false;
        ++report_.rows_read;
        if (out.cells.size() != h.columns.size()) {
            record(report_, vopts.max_exemplars,
                   {"cell-count", out.line_number, "",
                    "expected " + std::to_string(h.columns.size()) + " cells, found " +
                        std::to_string(out.cells.size())});
            ++report_.rows_excluded;
            continue;
        }
        bool fixed_any = false;
        bool dropped = false;
        for (std::size_t i = 0; i < out.cells.size() && !dropped; ++i) {
            std::string& cell = out.cells[i];
            ParseError err;
            auto parsed = try_parse_value(cell, &err);
            if (!parsed) {
                std::string piped = escape_stray_pipes(cell);
                if (piped != cell) {
                    if (auto reparsed = try_parse_value(piped)) {
                        cell = std::move(piped);
                        parsed = std::move(reparsed);
                        record(report_, vopts.max_exemplars,
                               {"pipe-escaped", out.line_number, h.columns[i],
                                "escaped stray pipe"});
                        fixed_any = true;
                    }
                }
            }
            if (!parsed && !cell.empty() && cell[0] == '^') {
                if (auto rebuilt = rebuild_date(cell, options_.date_policy)) {
                    if (auto reparsed = try_parse_value(*rebuilt)) {
                        cell = std::move(*rebuilt);
                        parsed = std::move(reparsed);
                        record(report_, vopts.max_exemplars,
                               {"date-fixed", out.line_number, h.columns[i], "rebuilt date"});
                        fixed_any = true;
                    }
                }
            }
            if (!parsed) {
                record(report_, vopts.max_exemplars,
                       {classify_parse_error(err), out.line_number, h.columns[i], err.message});
                dropped = true;
                break;
            }
            if (wants_normalization(parsed->kind())) {
                std::string canonical = serialize_value(*parsed);
                if (canonical != cell) {
                    cell = std::move(canonical);
                    record(report_, vopts.max_exemplars,
                           {"normalized", out.line_number, h.columns[i],
                            "re-serialized to canonical form"});
                    fixed_any = true;
                }
            }
        }
        if (!dropped) {
            // Anything the repairs could not express is caught here; the
            // emitted stream must validate cleanly.
            check_row(h, out, vopts, findings);
            for (Finding& f : findings) {
                record(report_, vopts.max_exemplars, std::move(f));
                dropped = true;
            }
        }
        if (dropped) {
            ++report_.rows_excluded;
            continue;
        }
        ++report_.rows_passed;
        if (fixed_any) ++report_.rows_fixed;
        return true;
    }
}

void render_report_text(const ValidationReport& report, std::ostream& out,
                        const std::string& op_name) {
    out << op_name << " report: " << report.rows_read << " read, " << report.rows_passed
        << " passed, " << report.rows_excluded << " excluded, " << report.rows_fixed
        << " fixed\n";
    for (const auto& [rule, count] : report.rule_counts) {
        out << "  " << rule << ": " << count << "\n";
        for (const Finding& f : report.exemplars) {
            if (f.rule != rule) continue;
            out << "    line " << f.line_number;
            if (!f.column.empty()) out << " (" << f.column << ")";
            out << ": " << f.message << "\n";
        }
    }
}

void render_report_tsv(const ValidationReport& report, std::ostream& out) {
    out << "rule\tcount\n";
    out << "rows-read\t" << report.rows_read << "\n";
    out << "rows-passed\t" << report.rows_passed << "\n";
    out << "rows-excluded\t" << report.rows_excluded << "\n";
    out << "rows-fixed\t" << report.rows_fixed << "\n";
    for (const auto& [rule, count] : report.rule_counts) out << rule << "\t" << count << "\n";
}

}  // namespace kgtk
