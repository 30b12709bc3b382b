#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgtk/errors.hpp"
#include "kgtk/values.hpp"

namespace kgtk {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// Column layout of one KGTK file. node1/label/node2 are always resolved
// (possibly via aliases); id is npos when the file has no id column.
struct Header {
    std::vector<std::string> columns;
    std::size_t node1 = npos;
    std::size_t label = npos;
    std::size_t node2 = npos;
    std::size_t id = npos;
    std::vector<std::size_t> extras;  // indices of non-role columns, in order

    bool has_id() const { return id != npos; }
    std::size_t find(std::string_view name) const;
    bool is_role(std::size_t index) const {
        return index == node1 || index == label || index == node2 || index == id;
    }

    // Same layout with role columns renamed to node1/label/node2/id.
    Header canonicalized() const;

    bool operator==(const Header&) const = default;
};

using AliasTable = std::unordered_map<std::string, std::string>;

// from/subject -> node1, predicate/relation -> label, to/object -> node2.
const AliasTable& default_aliases();

// Resolves roles in raw column names. An exact reserved name beats any alias;
// two aliases competing for one unclaimed role is an error.
Header resolve_header(const std::vector<std::string>& raw_names,
                      const AliasTable& aliases = default_aliases());

// One data row. Cells hold raw text; typed views are parsed on demand so that
// read->write round-trips are byte-exact and untouched columns cost nothing.
struct EdgeRecord {
    std::vector<std::string> cells;
    std::uint64_t line_number = 0;

    std::string_view cell(std::size_t index) const {
        return index < cells.size() ? std::string_view(cells[index]) : std::string_view();
    }
    KgtkValue value(std::size_t index) const { return parse_value(cell(index)); }

    bool operator==(const EdgeRecord& other) const { return cells == other.cells; }
};

// Pull-based record stream; header is available before the first next().
class EdgeSource {
public:
    virtual ~EdgeSource() = default;
    virtual const Header& header() const = 0;
    virtual bool next(EdgeRecord& out) = 0;
};

enum class ErrorAction {
    Defer,  // pass ragged rows through (clean/validate decide)
    Fail,   // throw DataError on a row whose cell count mismatches the header
};

struct ReaderOptions {
    ErrorAction error_action = ErrorAction::Defer;
    AliasTable aliases = default_aliases();
};

// source: file path, or "-" for standard input. The first line must be the
// header; a UTF-8 byte-order mark is consumed; \r\n is accepted.
std::unique_ptr<EdgeSource> open_reader(const std::string& source, ReaderOptions options = {});

// Reader over an already-open stream (not owned).
std::unique_ptr<EdgeSource> open_reader(std::istream& in, std::string name,
                                        ReaderOptions options = {});

class VectorEdgeSource : public EdgeSource {
public:
    VectorEdgeSource(Header header, std::vector<EdgeRecord> records)
        : header_(std::move(header)), records_(std::move(records)) {}

    const Header& header() const override { return header_; }
    bool next(EdgeRecord& out) override {
        if (pos_ >= records_.size()) return false;
        out = std::move(records_[pos_++]);
        return true;
    }

private:
    Header header_;
    std::vector<EdgeRecord> records_;
    std::size_t pos_ = 0;
};

struct WriteOptions {
    bool canonical_header = true;  // rename alias columns on output
};

struct WriteStats {
    std::uint64_t rows = 0;
    std::uint64_t bytes = 0;
};

WriteStats write_edges(EdgeSource& stream, std::ostream& sink, WriteOptions options = {});

enum class IdMode { SequentialPrefix, ContentHash };

struct GenerateIdsOptions {
    IdMode mode = IdMode::SequentialPrefix;
    std::string prefix = "E";
    bool overwrite = false;  // when true, existing ids are regenerated too
};

// Wraps a stream, appending an id column when missing and filling empty ids.
// Hash mode derives the id from (node1, label, node2, extras); duplicate
// digests get -2, -3, ... suffixes. collisions() counts those events.
class GenerateIdsSource : public EdgeSource {
public:
    GenerateIdsSource(EdgeSource& inner, GenerateIdsOptions options);

    const Header& header() const override { return header_; }
    bool next(EdgeRecord& out) override;
    std::uint64_t collisions() const { return collisions_; }

private:
    EdgeSource& inner_;
    GenerateIdsOptions options_;
    Header header_;
    std::size_t id_index_;
    std::uint64_t sequence_ = 0;
    std::uint64_t collisions_ = 0;
    std::unordered_set<std::string> used_;
};

// FNV-1a 64-bit over the given bytes; the digest primitive behind hash ids.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);

// Collects the remaining records of a stream (testing and small inputs only).
std::vector<EdgeRecord> read_all(EdgeSource& stream);

}  // namespace kgtk
