#include "kgtk/interchange.hpp"

#include <fstream>
#include <iostream>
#include <unordered_map>
#include <unordered_set>

#include "kgtk/errors.hpp"
#include "kgtk/values.hpp"

namespace kgtk {

namespace {

constexpr std::string_view kXsdBase = "http://www.w3.org/2001/XMLSchema#";

std::string symbol_cell(std::string_view name) {
    return serialize_value(KgtkValue{SymbolValue{std::string(name)}});
}

bool is_integer_lexical(std::string_view text) {
    std::size_t i = 0;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
    if (i == text.size()) return false;
    for (; i < text.size(); ++i)
        if (text[i] < '0' || text[i] > '9') return false;
    return true;
}

// datatype the exporter would pick for a bare Number cell
std::string inferred_numeric_datatype(std::string_view lexical) {
    return std::string(kXsdBase) + (is_integer_lexical(lexical) ? "integer" : "double");
}

bool is_numeric_datatype(std::string_view iri) {
    if (iri.size() <= kXsdBase.size() || iri.substr(0, kXsdBase.size()) != kXsdBase)
        return false;
    static const std::unordered_set<std::string_view> kNames = {
        "integer", "decimal", "double", "float", "long", "int", "short", "byte",
        "nonNegativeInteger", "positiveInteger", "negativeInteger", "nonPositiveInteger",
        "unsignedLong", "unsignedInt", "unsignedShort", "unsignedByte"};
    return kNames.count(iri.substr(kXsdBase.size())) > 0;
}

void utf8_append(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(char(cp));
    } else if (cp < 0x800) {
        out.push_back(char(0xC0 | (cp >> 6)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(char(0xE0 | (cp >> 12)));
        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(char(0xF0 | (cp >> 18)));
        out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    }
}

std::string ntriples_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

// ---- line-level N-Triples parsing ----

struct Term {
    enum Kind { Iri, Blank, Literal } kind = Iri;
    std::string text;      // IRI body, blank label with _: prefix, or literal text
    std::string lang;      // literal @lang
    std::string datatype;  // literal ^^<iri>
};

struct LineParser {
    std::string_view s;
    std::size_t i = 0;

    void skip_ws() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    }

    bool at_end() {
        skip_ws();
        return i >= s.size();
    }

    [[noreturn]] void fail(const std::string& what) { throw MalformedTriple(what); }

    std::uint32_t hex_run(std::size_t count) {
        std::uint32_t cp = 0;
        for (std::size_t k = 0; k < count; ++k) {
            if (i >= s.size()) fail("truncated unicode escape");
            char c = s[i++];
            cp <<= 4;
            if (c >= '0' && c <= '9') cp |= std::uint32_t(c - '0');
            else if (c >= 'a' && c <= 'f') cp |= std::uint32_t(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') cp |= std::uint32_t(c - 'A' + 10);
            else fail("bad unicode escape digit");
        }
        return cp;
    }

    std::string iri_body() {
        if (i >= s.size() || s[i] != '<') fail("expected <iri>");
        ++i;
        std::string body;
        while (i < s.size() && s[i] != '>') {
            if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == 'u' || s[i + 1] == 'U')) {
                bool big = s[i + 1] == 'U';
                i += 2;
                utf8_append(body, hex_run(big ? 8 : 4));
            } else {
                body.push_back(s[i++]);
            }
        }
        if (i >= s.size()) fail("unterminated <iri>");
        ++i;
        if (body.empty()) fail("empty <iri>");
        return body;
    }

    Term term() {
        skip_ws();
        if (i >= s.size()) fail("missing term");
        char c = s[i];
        if (c == '<') return {Term::Iri, iri_body(), "", ""};
        if (c == '_') {
            if (i + 1 >= s.size() || s[i + 1] != ':') fail("bad blank node");
            std::size_t start = i;
            i += 2;
            while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
            if (i == start + 2) fail("empty blank node label");
            return {Term::Blank, std::string(s.substr(start, i - start)), "", ""};
        }
        if (c == '"') {
            ++i;
            std::string text;
            while (true) {
                if (i >= s.size()) fail("unterminated literal");
                char ch = s[i];
                if (ch == '"') {
                    ++i;
                    break;
                }
                if (ch == '\\') {
                    ++i;
                    if (i >= s.size()) fail("dangling escape");
                    char e = s[i++];
                    switch (e) {
                        case 't': text.push_back('\t'); break;
                        case 'b': text.push_back('\b'); break;
                        case 'n': text.push_back('\n'); break;
                        case 'r': text.push_back('\r'); break;
                        case 'f': text.push_back('\f'); break;
                        case '"': text.push_back('"'); break;
                        case '\'': text.push_back('\''); break;
                        case '\\': text.push_back('\\'); break;
                        case 'u': utf8_append(text, hex_run(4)); break;
                        case 'U': utf8_append(text, hex_run(8)); break;
                        default: fail("unknown escape in literal");
                    }
                } else {
                    text.push_back(ch);
                    ++i;
                }
            }
            Term t{Term::Literal, std::move(text), "", ""};
            if (i < s.size() && s[i] == '@') {
                ++i;
                std::size_t start = i;
                while (i < s.size() &&
                       ((s[i] >= 'a' && s[i] <= 'z') || (s[i] >= 'A' && s[i] <= 'Z') ||
                        (s[i] >= '0' && s[i] <= '9') || s[i] == '-'))
                    ++i;
                if (i == start) fail("empty language tag");
                t.lang = std::string(s.substr(start, i - start));
            } else if (i + 1 < s.size() && s[i] == '^' && s[i + 1] == '^') {
                i += 2;
                t.datatype = iri_body();
            }
            return t;
        }
        fail("unexpected term start");
    }
};

}  // namespace

// ---- NamespaceTable ----

void NamespaceTable::add(std::string prefix, std::string base) {
    if (prefix.empty()) throw UsageError("namespace prefix cannot be empty");
    if (base.empty()) throw UsageError("namespace base cannot be empty for prefix " + prefix);
    for (const auto& [p, b] : entries_)
        if (p == prefix) throw UsageError("duplicate namespace prefix: " + prefix);
    entries_.emplace_back(std::move(prefix), std::move(base));
}

std::optional<std::string> NamespaceTable::compress(std::string_view iri) const {
    std::size_t best_len = 0;
    const std::string* best_prefix = nullptr;
    bool bare = false;
    if (iri.size() > kNodeBase.size() && iri.substr(0, kNodeBase.size()) == kNodeBase) {
        best_len = kNodeBase.size();
        bare = true;
    }
    for (const auto& [prefix, base] : entries_) {
        if (base.size() <= best_len) continue;
        if (iri.size() > base.size() && iri.substr(0, base.size()) == base) {
            best_len = base.size();
            best_prefix = &prefix;
            bare = false;
        }
    }
    if (best_len == 0) return std::nullopt;
    std::string name = bare ? std::string(iri.substr(best_len))
                            : *best_prefix + ":" + std::string(iri.substr(best_len));
    std::string cell = symbol_cell(name);
    // the compressed form must still read back as a symbol
    if (value_kind(cell) != ValueKind::Symbol) return std::nullopt;
    return cell;
}

std::optional<std::string> NamespaceTable::expand(std::string_view symbol) const {
    auto colon = symbol.find(':');
    if (colon == std::string_view::npos) return std::string(kNodeBase) + std::string(symbol);
    std::string_view prefix = symbol.substr(0, colon);
    for (const auto& [p, base] : entries_)
        if (p == prefix) return base + std::string(symbol.substr(colon + 1));
    return std::nullopt;
}

NamespaceTable default_namespaces() {
    NamespaceTable table;
    table.add("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#");
    table.add("rdfs", "http://www.w3.org/2000/01/rdf-schema#");
    table.add("owl", "http://www.w3.org/2002/07/owl#");
    table.add("xsd", std::string(kXsdBase));
    table.add("wd", "http://www.wikidata.org/entity/");
    table.add("wdt", "http://www.wikidata.org/prop/direct/");
    return table;
}

void load_namespaces(NamespaceTable& table, std::istream& in) {
    std::string line;
    std::uint64_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw UsageError("prefixes file line " + std::to_string(line_number) +
                             ": expected prefix<TAB>base");
        table.add(line.substr(0, tab), line.substr(tab + 1));
    }
}

// ---- import ----

namespace {

std::string iri_to_cell(const std::string& iri, const NamespaceTable& ns) {
    if (auto compressed = ns.compress(iri)) return *compressed;
    return "<" + iri + ">";
}

// returns {node2 cell, datatype cell}
std::pair<std::string, std::string> literal_to_cell(const Term& term,
                                                    const NamespaceTable& ns) {
    if (!term.lang.empty()) {
        auto dash = term.lang.find('-');
        std::string primary = term.lang.substr(0, dash);
        for (char& c : primary)
            if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
        LangStringValue value{term.text, std::move(primary),
                              dash == std::string::npos ? "" : term.lang.substr(dash + 1)};
        return {serialize_value(KgtkValue{std::move(value)}), ""};
    }
    if (term.datatype.empty())
        return {serialize_value(KgtkValue{StringValue{term.text}}), ""};
    if (term.datatype == std::string(kXsdBase) + "boolean") {
        if (term.text == "true") return {"True", ""};
        if (term.text == "false") return {"False", ""};
    }
    if (term.datatype.size() > kDatatypeBase.size() &&
        std::string_view(term.datatype).substr(0, kDatatypeBase.size()) == kDatatypeBase) {
        // our own typed literals hold the exact cell text
        return {term.text, ""};
    }
    if (is_numeric_datatype(term.datatype) && value_kind(term.text) == ValueKind::Number) {
        // only record a datatype the exporter would not re-infer
        if (term.datatype == inferred_numeric_datatype(term.text)) return {term.text, ""};
        return {term.text, iri_to_cell(term.datatype, ns)};
    }
    return {serialize_value(KgtkValue{StringValue{term.text}}), iri_to_cell(term.datatype, ns)};
}

}  // namespace

NtriplesImporter::NtriplesImporter(std::istream& in, NtriplesOptions options, std::string name)
    : in_(in), options_(std::move(options)), name_(std::move(name)),
      header_(resolve_header({"node1", "label", "node2", "datatype"}, {})) {}

NtriplesImporter::NtriplesImporter(std::unique_ptr<std::istream> owned,
                                   NtriplesOptions options, std::string name)
    : owned_(std::move(owned)), in_(*owned_), options_(std::move(options)),
      name_(std::move(name)),
      header_(resolve_header({"node1", "label", "node2", "datatype"}, {})) {}

bool NtriplesImporter::convert_line(std::string_view line, std::uint64_t line_number,
                                    EdgeRecord& record) {
    LineParser parser{line, 0};
    Term subject = parser.term();
    if (subject.kind == Term::Literal) parser.fail("literal subject");
    Term predicate = parser.term();
    if (predicate.kind != Term::Iri) parser.fail("predicate must be an <iri>");
    Term object = parser.term();
    parser.skip_ws();
    if (parser.i >= parser.s.size() || parser.s[parser.i] != '.')
        parser.fail("missing terminating dot");
    ++parser.i;
    if (!parser.at_end()) parser.fail("trailing content after dot");

    record.cells.assign(4, "");
    record.line_number = line_number;
    record.cells[0] = subject.kind == Term::Blank ? subject.text
                                                  : iri_to_cell(subject.text, options_.namespaces);
    record.cells[1] = iri_to_cell(predicate.text, options_.namespaces);
    switch (object.kind) {
        case Term::Iri:
            record.cells[2] = iri_to_cell(object.text, options_.namespaces);
            break;
        case Term::Blank:
            record.cells[2] = object.text;
            break;
        case Term::Literal: {
            auto [cell, datatype] = literal_to_cell(object, options_.namespaces);
            record.cells[2] = std::move(cell);
            record.cells[3] = std::move(datatype);
            break;
        }
    }
    return true;
}

bool NtriplesImporter::next(EdgeRecord& record) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_number_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            return convert_line(line, line_number_, record);
        } catch (const MalformedTriple& err) {
            if (options_.strict)
                throw MalformedTriple(name_ + " line " + std::to_string(line_number_) + ": " +
                                      err.what());
            ++skipped_;
        }
    }
    if (in_.bad()) throw IoFailure("read failure on " + name_);
    return false;
}

std::unique_ptr<NtriplesImporter> open_ntriples(const std::string& path,
                                                NtriplesOptions options) {
    if (path == "-")
        return std::make_unique<NtriplesImporter>(std::cin, std::move(options), "<stdin>");
    auto stream = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*stream) throw IoFailure("cannot open " + path);
    return std::make_unique<NtriplesImporter>(std::move(stream), std::move(options), path);
}

// ---- export ----

namespace {

// node1/label/id cells and extra column names; kind = which error to raise
std::string expand_symbol_cell(std::string_view cell, const NamespaceTable& ns,
                               std::uint64_t line, const char* role) {
    ParseError err;
    auto value = try_parse_value(cell, &err);
    if (!value || value->kind() != ValueKind::Symbol)
        throw NonSymbolSubject("line " + std::to_string(line) + ": " + role +
                               " is not a symbol: " + std::string(cell));
    const std::string& name = value->as<SymbolValue>().name;
    if (name.size() >= 2 && name[0] == '_' && name[1] == ':') return name;
    if (name.size() >= 2 && name.front() == '<' && name.back() == '>') return name;
    auto iri = ns.expand(name);
    if (!iri)
        throw UnexpandablePrefix("line " + std::to_string(line) +
                                 ": no namespace for symbol " + name);
    return "<" + *iri + ">";
}

// Resolves a datatype column cell ("xsd:long" or "<http://...>") to an IRI;
// empty when the cell is empty or unresolvable.
std::string datatype_iri_of(std::string_view datatype_cell, const NamespaceTable& ns) {
    if (datatype_cell.empty()) return {};
    ParseError err;
    auto dt = try_parse_value(datatype_cell, &err);
    if (!dt || dt->kind() != ValueKind::Symbol) return {};
    const std::string& name = dt->as<SymbolValue>().name;
    if (name.size() >= 2 && name.front() == '<' && name.back() == '>')
        return name.substr(1, name.size() - 2);
    if (auto expanded = ns.expand(name)) return *expanded;
    return {};
}

std::string object_term(std::string_view cell, std::string_view datatype_cell,
                        const NamespaceTable& ns, std::uint64_t line) {
    auto toolkit_literal = [&](std::string_view kind_name, std::string_view text) {
        return "\"" + ntriples_escape(text) + "\"^^<" + std::string(kDatatypeBase) +
               std::string(kind_name) + ">";
    };
    ParseError err;
    auto value = try_parse_value(cell, &err);
    if (!value) return toolkit_literal("malformed", cell);
    switch (value->kind()) {
        case ValueKind::Symbol: {
            const std::string& name = value->as<SymbolValue>().name;
            if (name.size() >= 2 && name[0] == '_' && name[1] == ':') return name;
            if (name.size() >= 2 && name.front() == '<' && name.back() == '>') return name;
            auto iri = ns.expand(name);
            if (!iri)
                throw UnexpandablePrefix("line " + std::to_string(line) +
                                         ": no namespace for symbol " + name);
            return "<" + *iri + ">";
        }
        case ValueKind::String: {
            std::string term = "\"" + ntriples_escape(value->as<StringValue>().text) + "\"";
            if (std::string iri = datatype_iri_of(datatype_cell, ns); !iri.empty())
                term += "^^<" + iri + ">";
            return term;
        }
        case ValueKind::LangString: {
            const auto& ls = value->as<LangStringValue>();
            std::string term = "\"" + ntriples_escape(ls.text) + "\"@" + ls.lang;
            if (!ls.suffix.empty()) term += "-" + ls.suffix;
            return term;
        }
        case ValueKind::Number: {
            std::string iri = datatype_iri_of(datatype_cell, ns);
            if (iri.empty()) iri = inferred_numeric_datatype(cell);
            return "\"" + std::string(cell) + "\"^^<" + iri + ">";
        }
        case ValueKind::Boolean:
            return std::string("\"") +
                   (value->as<BooleanValue>().value ? "true" : "false") + "\"^^<" +
                   std::string(kXsdBase) + "boolean>";
        case ValueKind::Quantity:
            return toolkit_literal("quantity", cell);
        case ValueKind::Coordinates:
            return toolkit_literal("coordinates", cell);
        case ValueKind::DateTime:
            return toolkit_literal("date", cell);
        case ValueKind::List:
            return toolkit_literal("list", cell);
        case ValueKind::Empty:
            return toolkit_literal("empty", cell);
        default:
            return toolkit_literal("malformed", cell);
    }
}

}  // namespace

ExportStats export_ntriples(EdgeSource& source, std::ostream& out,
                            const NamespaceTable& namespaces) {
    const Header& header = source.header();
    std::size_t datatype_col = header.find("datatype");
    ExportStats stats;
    EdgeRecord rec;
    std::string buffer;
    while (source.next(rec)) {
        std::string subject =
            expand_symbol_cell(rec.cell(header.node1), namespaces, rec.line_number, "node1");
        std::string predicate =
            expand_symbol_cell(rec.cell(header.label), namespaces, rec.line_number, "label");
        std::string_view datatype_cell =
            datatype_col == npos ? std::string_view() : rec.cell(datatype_col);
        std::string object =
            object_term(rec.cell(header.node2), datatype_cell, namespaces, rec.line_number);
        buffer += subject + " " + predicate + " " + object + " .\n";
        ++stats.triples;

        std::string edge_subject;
        for (std::size_t col : header.extras) {
            if (col == datatype_col) continue;
            std::string_view cell = rec.cell(col);
            if (cell.empty()) continue;
            if (edge_subject.empty()) {
                if (header.id == npos || rec.cell(header.id).empty())
                    throw DataError("line " + std::to_string(rec.line_number) +
                                    ": qualifier column " + header.columns[col] +
                                    " needs an edge id (run add-id first)");
                edge_subject = expand_symbol_cell(rec.cell(header.id), namespaces,
                                                  rec.line_number, "id");
            }
            std::string property = expand_symbol_cell(header.columns[col], namespaces,
                                                      rec.line_number, "qualifier column");
            buffer += edge_subject + " " + property + " " +
                      object_term(cell, {}, namespaces, rec.line_number) + " .\n";
            ++stats.triples;
        }
        if (buffer.size() >= std::size_t(1) << 16) {
            out.write(buffer.data(), std::streamsize(buffer.size()));
            buffer.clear();
        }
    }
    out.write(buffer.data(), std::streamsize(buffer.size()));
    out.flush();
    if (!out) throw IoFailure("cannot write triples");
    return stats;
}

// ---- ConceptNet ----

ConceptnetImporter::ConceptnetImporter(std::istream& in, ConceptnetOptions options,
                                       std::string name)
    : in_(in), options_(options), name_(std::move(name)),
      header_(resolve_header({"node1", "label", "node2", "id"}, {})) {}

ConceptnetImporter::ConceptnetImporter(std::unique_ptr<std::istream> owned,
                                       ConceptnetOptions options, std::string name)
    : owned_(std::move(owned)), in_(*owned_), options_(options), name_(std::move(name)),
      header_(resolve_header({"node1", "label", "node2", "id"}, {})) {}

bool ConceptnetImporter::next(EdgeRecord& record) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_number_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (cols.size() != 5) {
            ++skipped_;
            continue;
        }
        if (options_.english_only &&
            (cols[2].rfind("/c/en/", 0) != 0 || cols[3].rfind("/c/en/", 0) != 0))
            continue;
        record.cells = {cols[2], cols[1], cols[3], cols[0]};
        record.line_number = line_number_;
        return true;
    }
    if (in_.bad()) throw IoFailure("read failure on " + name_);
    return false;
}

std::unique_ptr<ConceptnetImporter> open_conceptnet(const std::string& path,
                                                    ConceptnetOptions options) {
    if (path == "-")
        return std::make_unique<ConceptnetImporter>(std::cin, options, "<stdin>");
    auto stream = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*stream) throw IoFailure("cannot open " + path);
    return std::make_unique<ConceptnetImporter>(std::move(stream), options, path);
}

// ---- property graph ----

PropertyGraphStats export_property_graph(EdgeSource& source, std::ostream& nodes_out,
                                         std::ostream& edges_out) {
    const Header& header = source.header();
    std::string edges_line = "id\tnode1\tlabel\tnode2";
    for (std::size_t col : header.extras) edges_line += "\t" + header.columns[col];
    edges_out << edges_line << '\n';

    std::vector<std::string> node_order;
    std::unordered_set<std::string> seen;
    std::unordered_map<std::string, std::string> label_of;
    auto note = [&](std::string_view cell) {
        if (cell.empty()) return;
        auto [it, inserted] = seen.emplace(cell);
        if (inserted) node_order.push_back(*it);
    };

    PropertyGraphStats stats;
    EdgeRecord rec;
    while (source.next(rec)) {
        std::string row(header.id == npos ? "" : std::string(rec.cell(header.id)));
        row += "\t";
        row += rec.cell(header.node1);
        row += "\t";
        row += rec.cell(header.label);
        row += "\t";
        row += rec.cell(header.node2);
        for (std::size_t col : header.extras) {
            row += "\t";
            row += rec.cell(col);
        }
        edges_out << row << '\n';
        ++stats.edge_rows;
        note(rec.cell(header.node1));
        note(rec.cell(header.node2));
        if (rec.cell(header.label) == "label")
            label_of.try_emplace(std::string(rec.cell(header.node1)),
                                 std::string(rec.cell(header.node2)));
    }

    nodes_out << "id\tlabel\n";
    for (const std::string& node : node_order) {
        auto it = label_of.find(node);
        nodes_out << node << '\t' << (it == label_of.end() ? "" : it->second) << '\n';
        ++stats.node_rows;
    }
    nodes_out.flush();
    edges_out.flush();
    if (!nodes_out || !edges_out) throw IoFailure("cannot write property graph files");
    return stats;
}

}  // namespace kgtk
