#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kgtk/edge_io.hpp"

namespace kgtk {

struct ValidationRule {
    enum class Scope { Header, Line, Value };
    enum class Severity { Error, Warning };
    std::string id;
    Scope scope = Scope::Value;
    Severity severity = Severity::Error;
};

// Rule ids used by the built-in checks:
//   cell-count       row cell count differs from the header
//   empty-required   node1/label/node2 cell is empty
//   length-bound     cell length outside [min, max]
//   malformed-string broken quoted string or language tag
//   invalid-date     broken or out-of-range date-time
//   coordinate-range latitude/longitude outside the legal range
//   malformed-value  any other grammar violation
//   id-not-symbol    id cell present but not a symbol
// and the repair counters reported by clean:
//   pipe-escaped, date-fixed, normalized
const std::vector<ValidationRule>& builtin_rules();

struct Finding {
    std::string rule;
    std::uint64_t line_number = 0;
    std::string column;
    std::string message;
};

struct ValidationReport {
    std::map<std::string, std::uint64_t> rule_counts;
    std::vector<Finding> exemplars;  // first K per rule, in stream order
    std::uint64_t rows_read = 0;
    std::uint64_t rows_passed = 0;    // rows emitted downstream
    std::uint64_t rows_excluded = 0;  // rows dropped
    std::uint64_t rows_fixed = 0;     // emitted rows that needed a repair

    std::uint64_t count(const std::string& rule) const {
        auto it = rule_counts.find(rule);
        return it == rule_counts.end() ? 0 : it->second;
    }
};

enum class OnError { Report, Exclude, Abort };
enum class DatePolicy { Clamp, Zero, Drop };

struct ValidationOptions {
    OnError on_error = OnError::Report;
    std::size_t max_cell_length = 32768;
    std::size_t min_cell_length = 0;  // applied to non-empty cells
    std::size_t max_exemplars = 5;
};

struct CleanOptions {
    ValidationOptions validation;
    DatePolicy date_policy = DatePolicy::Drop;
};

// Streams the input through the rule checks. Report mode passes every row,
// exclude mode drops failing rows, abort mode throws on the first finding.
// Rows are never modified. The report is complete once next() returns false.
class ValidatingSource : public EdgeSource {
public:
    ValidatingSource(EdgeSource& inner, ValidationOptions options = {});

    const Header& header() const override { return inner_.header(); }
    bool next(EdgeRecord& out) override;
    const ValidationReport& report() const { return report_; }

private:
    EdgeSource& inner_;
    ValidationOptions options_;
    ValidationReport report_;
};

// Repairs what it can, in a fixed order per cell: escape stray pipes inside
// quotes, re-serialize parseable values to canonical form, rebuild loosely
// shaped dates under the date policy. Rows that still fail any rule are
// dropped, so the output always validates cleanly.
class CleaningSource : public EdgeSource {
public:
    CleaningSource(EdgeSource& inner, CleanOptions options = {});

    const Header& header() const override { return inner_.header(); }
    bool next(EdgeRecord& out) override;
    const ValidationReport& report() const { return report_; }

private:
    EdgeSource& inner_;
    CleanOptions options_;
    ValidationReport report_;
};

void render_report_text(const ValidationReport& report, std::ostream& out,
                        const std::string& op_name);
void render_report_tsv(const ValidationReport& report, std::ostream& out);

}  // namespace kgtk
