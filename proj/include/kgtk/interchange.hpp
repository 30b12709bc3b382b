#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgtk/edge_io.hpp"

namespace kgtk {

// Symbols with no prefix expand under this base and compress back to their
// bare name.
inline constexpr std::string_view kNodeBase = "https://kgtk.dev/node/";
// Typed-literal datatypes for value kinds RDF has no analogue for.
inline constexpr std::string_view kDatatypeBase = "https://kgtk.dev/datatype#";

class NamespaceTable {
public:
    // Duplicate prefixes and empty bases are configuration errors.
    void add(std::string prefix, std::string base);

    // Longest matching base wins; the result is checked to still read as a
    // symbol. IRIs under the node base compress to their bare local name.
    std::optional<std::string> compress(std::string_view iri) const;

    // "prefix:local" through the table; a bare name goes under the node
    // base. Unknown prefixes give nullopt.
    std::optional<std::string> expand(std::string_view symbol) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// rdf, rdfs, owl, xsd, wd, wdt
NamespaceTable default_namespaces();

// Extends the table from TSV lines "prefix<TAB>base"; blank lines skipped.
void load_namespaces(NamespaceTable& table, std::istream& in);

struct NtriplesOptions {
    NamespaceTable namespaces = default_namespaces();
    bool strict = false;  // abort on the first malformed line
};

// Streaming N-Triples reader. The header is always
// [node1, label, node2, datatype]; the datatype column is filled only when
// the triple's datatype carries information the exporter would not infer
// from the value itself.
class NtriplesImporter : public EdgeSource {
public:
    NtriplesImporter(std::istream& in, NtriplesOptions options, std::string name = "<ntriples>");
    NtriplesImporter(std::unique_ptr<std::istream> owned, NtriplesOptions options,
                     std::string name);
    const Header& header() const override { return header_; }
    bool next(EdgeRecord& record) override;
    std::uint64_t skipped() const { return skipped_; }

private:
    bool convert_line(std::string_view line, std::uint64_t line_number, EdgeRecord& record);
    std::unique_ptr<std::istream> owned_;
    std::istream& in_;
    NtriplesOptions options_;
    std::string name_;
    Header header_;
    std::uint64_t line_number_ = 0;
    std::uint64_t skipped_ = 0;
};

std::unique_ptr<NtriplesImporter> open_ntriples(const std::string& path,
                                                NtriplesOptions options = {});

// Inverse of the importer where representable. Qualifier columns other than
// datatype become triples about the edge id node; rows carrying qualifiers
// without an id are an error. Throws NonSymbolSubject / UnexpandablePrefix.
struct ExportStats {
    std::uint64_t triples = 0;
};
ExportStats export_ntriples(EdgeSource& source, std::ostream& out,
                            const NamespaceTable& namespaces = default_namespaces());

struct ConceptnetOptions {
    bool english_only = false;
};

// 5-column assertion dump: URI, relation, start, end, metadata. Header is
// [node1, label, node2, id] with the assertion URI as id. Malformed rows are
// skipped and counted.
class ConceptnetImporter : public EdgeSource {
public:
    ConceptnetImporter(std::istream& in, ConceptnetOptions options,
                       std::string name = "<conceptnet>");
    ConceptnetImporter(std::unique_ptr<std::istream> owned, ConceptnetOptions options,
                       std::string name);
    const Header& header() const override { return header_; }
    bool next(EdgeRecord& record) override;
    std::uint64_t skipped() const { return skipped_; }

private:
    std::unique_ptr<std::istream> owned_;
    std::istream& in_;
    ConceptnetOptions options_;
    std::string name_;
    Header header_;
    std::uint64_t line_number_ = 0;
    std::uint64_t skipped_ = 0;
};

std::unique_ptr<ConceptnetImporter> open_conceptnet(const std::string& path,
                                                    ConceptnetOptions options = {});

// Nodes file: [id, label], one row per distinct node1/node2 symbol in first
// appearance order, label taken from the first edge whose property is
// "label". Edges file: [id, node1, label, node2, qualifiers...].
struct PropertyGraphStats {
    std::uint64_t node_rows = 0;
    std::uint64_t edge_rows = 0;
};
PropertyGraphStats export_property_graph(EdgeSource& source, std::ostream& nodes_out,
                                         std::ostream& edges_out);

}  // namespace kgtk
