#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "kgtk/edge_io.hpp"

namespace kgtk {

// ---------------------------------------------------------------- filter ---

// "subject ; predicate ; object" with comma-separated symbol alternatives.
// An absent set is a wildcard.
struct FilterPattern {
    std::optional<std::unordered_set<std::string>> subject;
    std::optional<std::unordered_set<std::string>> predicate;
    std::optional<std::unordered_set<std::string>> object;

    bool is_identity() const { return !subject && !predicate && !object; }
};

FilterPattern parse_pattern(std::string_view text);  // throws PatternSyntax

class FilterSource : public EdgeSource {
public:
    FilterSource(EdgeSource& inner, FilterPattern pattern)
        : inner_(inner), pattern_(std::move(pattern)) {}

    const Header& header() const override { return inner_.header(); }
    bool next(EdgeRecord& out) override;

private:
    EdgeSource& inner_;
    FilterPattern pattern_;
};

// ------------------------------------------------------------------ sort ---

struct SortSelector {
    std::string column;  // name, or 1-based position when all digits
    bool descending = false;
    bool numeric = false;
};

struct SortOptions {
    std::vector<SortSelector> keys;
    std::size_t memory_budget = std::size_t(256) << 20;
    std::string temp_dir;  // "" -> $KGTK_TMPDIR, else the system temp dir
};

// Byte-wise cell order; numeric mode orders parseable leading amounts first,
// by value, with byte order breaking ties.
int compare_cells(std::string_view a, std::string_view b, bool numeric);

// External merge sort. The input is drained on the first next(); runs beyond
// the memory budget spill to temp files and are k-way merged. Stable.
class SortedSource : public EdgeSource {
public:
    SortedSource(EdgeSource& inner, SortOptions options);
    ~SortedSource() override;

    const Header& header() const override { return inner_.header(); }
    bool next(EdgeRecord& out) override;

    std::uint64_t spilled_runs() const { return spilled_runs_; }

private:
    struct Impl;
    EdgeSource& inner_;
    SortOptions options_;
    std::vector<std::size_t> key_indices_;
    std::unique_ptr<Impl> impl_;
    std::uint64_t spilled_runs_ = 0;
    bool primed_ = false;

    void prime();
};

// Resolves a selector to a column index (name first, then 1-based position).
std::size_t resolve_column(const Header& header, const std::string& selector);

// ------------------------------------------------------------------ join ---

enum class JoinType { Inner, Left, Right, Full };

struct JoinOptions {
    JoinType type = JoinType::Inner;
    std::vector<std::string> left_keys;   // both empty -> node1 (or id below)
    std::vector<std::string> right_keys;  // arity must match left_keys
    bool join_on_id = false;
    bool add_label = false;  // extend the default key with label
    bool add_node2 = false;  // extend the default key with node2
    bool presort = false;    // sort both inputs here instead of erroring
    std::size_t group_cap = 1000000;  // rows per equal-key group and side
    SortOptions presort_options;      // budget/temp dir for --presort
};

// Sort-merge join over inputs ordered by their key columns. Output columns
// are the left columns followed by the right columns minus the right keys;
// colliding names get a "right." prefix. Unmatched right rows surface their
// key values in the left key columns.
class MergeJoinSource : public EdgeSource {
public:
    MergeJoinSource(EdgeSource& left, EdgeSource& right, JoinOptions options);
    ~MergeJoinSource() override;

    const Header& header() const override { return header_; }
    bool next(EdgeRecord& out) override;

private:
    struct Side;
    JoinOptions options_;
    Header header_;
    std::unique_ptr<Side> left_;
    std::unique_ptr<Side> right_;
    std::vector<std::size_t> right_out_;  // right column -> output column (npos for keys)
    std::size_t left_width_ = 0;
    bool left_has_group_ = false;
    bool right_has_group_ = false;
    std::deque<EdgeRecord> ready_;
    bool done_ = false;

    void refill();
    void emit_left(const EdgeRecord& row);
    void emit_right(const EdgeRecord& row);
    void emit_pair(const EdgeRecord& l, const EdgeRecord& r);
};

// ------------------------------------------------------------------- cat ---

// Concatenation with a union header: node1, label, node2, id when present
// anywhere, then extras in first-seen order. Missing cells become Empty.
class CatSource : public EdgeSource {
public:
    explicit CatSource(std::vector<std::unique_ptr<EdgeSource>> inputs);

    const Header& header() const override { return header_; }
    bool next(EdgeRecord& out) override;

private:
    std::vector<std::unique_ptr<EdgeSource>> inputs_;
    std::vector<std::vector<std::size_t>> cell_map_;  // input column -> output column
    Header header_;
    std::size_t current_ = 0;
};

// --------------------------------------------------------------- columns ---

struct RemoveColumnsOptions {
    std::vector<std::string> columns;
    bool strict_unknown = false;  // throw instead of collecting a warning
};

class RemoveColumnsSource : public EdgeSource {
public:
    RemoveColumnsSource(EdgeSource& inner, RemoveColumnsOptions options);

    const Header& header() const override { return header_; }
    bool next(EdgeRecord& out) override;
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    EdgeSource& inner_;
    std::vector<std::size_t> kept_;
    Header header_;
    std::vector<std::string> warnings_;
};

}  // namespace kgtk
