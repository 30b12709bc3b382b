#include "kgtk/edge_io.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <istream>
#include <ostream>

namespace kgtk {

namespace {

void split_tabs(std::string_view line, std::vector<std::string>& cells) {
    cells.clear();
    std::size_t start = 0;
    for (;;) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            cells.emplace_back(line.substr(start));
            return;
        }
        cells.emplace_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

struct RoleSlots {
    std::size_t Header::* member;
    const char* name;
};

constexpr RoleSlots kRoles[] = {
    {&Header::node1, "node1"},
    {&Header::label, "label"},
    {&Header::node2, "node2"},
    {&Header::id, "id"},
};

}  // namespace

std::size_t Header::find(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    return npos;
}

Header Header::canonicalized() const {
    Header h = *this;
    for (const auto& role : kRoles) {
        std::size_t index = h.*(role.member);
        if (index != npos) h.columns[index] = role.name;
    }
    return h;
}

const AliasTable& default_aliases() {
    static const AliasTable table = {
        {"from", "node1"},     {"subject", "node1"}, {"predicate", "label"},
        {"relation", "label"}, {"to", "node2"},      {"object", "node2"},
    };
    return table;
}

Header resolve_header(const std::vector<std::string>& raw_names, const AliasTable& aliases) {
    Header header;
    header.columns = raw_names;
    for (std::size_t i = 0; i < raw_names.size(); ++i)
        for (std::size_t j = i + 1; j < raw_names.size(); ++j)
            if (raw_names[i] == raw_names[j])
                throw DuplicateColumn("duplicate column '" + raw_names[i] + "'");

    for (const auto& role : kRoles) {
        std::size_t exact = header.find(role.name);
        if (exact != npos) header.*(role.member) = exact;
    }
    for (std::size_t i = 0; i < raw_names.size(); ++i) {
        auto alias = aliases.find(raw_names[i]);
        if (alias == aliases.end()) continue;
        for (const auto& role : kRoles) {
            if (alias->second != role.name) continue;
            if (header.find(role.name) != npos) break;  // exact name wins
            std::size_t& slot = header.*(role.member);
            if (slot != npos)
                throw AmbiguousAlias("columns '" + raw_names[slot] + "' and '" + raw_names[i] +
                                     "' both resolve to " + role.name);
            slot = i;
        }
    }
    for (const auto& role : kRoles) {
        if (std::string_view(role.name) == "id") continue;
        if (header.*(role.member) == npos)
            throw MissingRequiredColumn(std::string("missing required column ") + role.name);
    }
    for (std::size_t i = 0; i < raw_names.size(); ++i)
        if (!header.is_role(i)) header.extras.push_back(i);
    return header;
}

namespace {

class TsvEdgeReader : public EdgeSource {
public:
    TsvEdgeReader(std::unique_ptr<std::istream> owned, std::istream& in, std::string name,
                  ReaderOptions options)
        : owned_(std::move(owned)), in_(in), name_(std::move(name)), options_(std::move(options)) {
        std::string line;
        if (!std::getline(in_, line)) throw EmptyInput("empty input: " + name_);
        if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF')
            line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> names;
        split_tabs(line, names);
        header_ = resolve_header(names, options_.aliases);
    }

    const Header& header() const override { return header_; }

    bool next(EdgeRecord& out) override {
        if (!std::getline(in_, line_)) {
            if (in_.bad()) throw IoFailure("read error: " + name_);
            return false;
        }
        if (!line_.empty() && line_.back() == '\r') line_.pop_back();
        ++line_number_;
        split_tabs(line_, out.cells);
        out.line_number = line_number_;
        if (options_.error_action == ErrorAction::Fail &&
            out.cells.size() != header_.columns.size()) {
            throw DataError(name_ + ":" + std::to_string(line_number_) + ": expected " +
                            std::to_string(header_.columns.size()) + " cells, found " +
                            std::to_string(out.cells.size()));
        }
        return true;
    }

private:
    std::unique_ptr<std::istream> owned_;
    std::istream& in_;
    std::string name_;
    ReaderOptions options_;
    Header header_;
    std::uint64_t line_number_ = 1;  // the header line
    std::string line_;
};

}  // namespace

std::unique_ptr<EdgeSource> open_reader(const std::string& source, ReaderOptions options) {
    if (source == "-")
        return std::make_unique<TsvEdgeReader>(nullptr, std::cin, "<stdin>", std::move(options));
    auto file = std::make_unique<std::ifstream>(source, std::ios::in | std::ios::binary);
    if (!file->is_open()) throw IoFailure("cannot open " + source);
    std::istream& ref = *file;
    return std::make_unique<TsvEdgeReader>(std::move(file), ref, source, std::move(options));
}

std::unique_ptr<EdgeSource> open_reader(std::istream& in, std::string name, ReaderOptions options) {
    return std::make_unique<TsvEdgeReader>(nullptr, in, std::move(name), std::move(options));
}

WriteStats write_edges(EdgeSource& stream, std::ostream& sink, WriteOptions options) {
    WriteStats stats;
    std::string buffer;
    const Header header = options.canonical_header ? stream.header().canonicalized()
                                                   : stream.header();
    for (std::size_t i = 0; i < header.columns.size(); ++i) {
        if (i) buffer.push_back('\t');
        buffer += header.columns[i];
    }
    buffer.push_back('\n');

    EdgeRecord record;
    while (stream.next(record)) {
        for (std::size_t i = 0; i < record.cells.size(); ++i) {
            if (i) buffer.push_back('\t');
            buffer += record.cells[i];
        }
        buffer.push_back('\n');
        ++stats.rows;
        if (buffer.size() >= std::size_t(1) << 16) {
            sink.write(buffer.data(), std::streamsize(buffer.size()));
            stats.bytes += buffer.size();
            buffer.clear();
        }
    }
    sink.write(buffer.data(), std::streamsize(buffer.size()));
    stats.bytes += buffer.size();
    if (!sink) throw IoFailure("write error");
    return stats;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t hash = seed;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

GenerateIdsSource::GenerateIdsSource(EdgeSource& inner, GenerateIdsOptions options)
    : inner_(inner), options_(std::move(options)), header_(inner.header()) {
    if (!header_.has_id()) {
        header_.id = header_.columns.size();
        header_.columns.push_back("id");
    }
    id_index_ = header_.id;
}

bool GenerateIdsSource::next(EdgeRecord& out) {
    if (!inner_.next(out)) return false;
    if (out.cells.size() <= id_index_) out.cells.resize(id_index_ + 1);
    std::string& id = out.cells[id_index_];
    if (!id.empty() && !options_.overwrite) {
        used_.insert(id);
        return true;
    }
    if (options_.mode == IdMode::SequentialPrefix) {
        id = options_.prefix + std::to_string(++sequence_);
        used_.insert(id);
        return true;
    }
    std::string material;
    auto feed = [&](std::size_t index) {
        if (!material.empty()) material.push_back('\t');
        auto cell = out.cell(index);
        material.append(cell.data(), cell.size());
    };
    feed(header_.node1);
    feed(header_.label);
    feed(header_.node2);
    for (std::size_t extra : header_.extras) feed(extra);

    char hex[17];
    std::uint64_t digest = fnv1a64(material);
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        hex[i] = digits[digest & 0xF];
        digest >>= 4;
    }
    std::string base = options_.prefix + std::string(hex, 16);
    std::string candidate = base;
    for (unsigned n = 2; !used_.insert(candidate).second; ++n) {
        candidate = base + "-" + std::to_string(n);
        ++collisions_;
    }
    id = std::move(candidate);
    return true;
}

std::vector<EdgeRecord> read_all(EdgeSource& stream) {
    std::vector<EdgeRecord> records;
    EdgeRecord record;
    while (stream.next(record)) records.push_back(record);
    return records;
}

}  // namespace kgtk
