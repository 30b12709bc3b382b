#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "kgtk/interchange.hpp"
#include "kgtk/values.hpp"
#include "test_support.hpp"

using namespace kgtk;

namespace {

std::vector<std::vector<std::string>> import_lines(const std::string& text,
                                                   NtriplesOptions options = {},
                                                   std::uint64_t* skipped = nullptr) {
    std::istringstream in(text);
    NtriplesImporter importer(in, std::move(options));
    std::vector<std::vector<std::string>> rows;
    EdgeRecord rec;
    while (importer.next(rec)) rows.push_back(rec.cells);
    if (skipped) *skipped = importer.skipped();
    return rows;
}

std::string export_tsv(const std::string& tsv, const NamespaceTable& ns = default_namespaces()) {
    std::istringstream in(tsv);
    auto reader = open_reader(in, "<tsv>");
    std::ostringstream out;
    export_ntriples(*reader, out, ns);
    return out.str();
}

NamespaceTable with_x() {
    NamespaceTable ns = default_namespaces();
    ns.add("x", "http://x/");
    return ns;
}

}  // namespace

TEST_CASE("namespace table") {
    NamespaceTable ns = default_namespaces();
    CHECK(*ns.compress("http://www.w3.org/1999/02/22-rdf-syntax-ns#type") == "rdf:type");
    CHECK(*ns.compress("http://www.wikidata.org/entity/Q42") == "wd:Q42");
    CHECK(*ns.compress("https://kgtk.dev/node/Person") == "Person");
    CHECK_FALSE(ns.compress("http://unknown.example/x").has_value());

    CHECK(*ns.expand("Person") == "https://kgtk.dev/node/Person");
    CHECK(*ns.expand("rdf:type") == "http://www.w3.org/1999/02/22-rdf-syntax-ns#type");
    CHECK_FALSE(ns.expand("mystery:thing").has_value());

    // longest base wins
    NamespaceTable longest = default_namespaces();
    longest.add("wdq", "http://www.wikidata.org/entity/Q4");
    CHECK(*longest.compress("http://www.wikidata.org/entity/Q42") == "wdq:2");

    CHECK_THROWS_AS(longest.add("rdf", "http://elsewhere/"), UsageError);
    CHECK_THROWS_AS(longest.add("empty", ""), UsageError);

    // a local name that no longer reads as a symbol stays an <iri>
    CHECK_FALSE(ns.compress("https://kgtk.dev/node/10m").has_value());
    CHECK_FALSE(ns.compress("https://kgtk.dev/node/True").has_value());

    std::istringstream prefixes("ex\thttp://example.org/\ny\thttp://y/\n");
    NamespaceTable loaded = default_namespaces();
    load_namespaces(loaded, prefixes);
    CHECK(*loaded.expand("ex:a") == "http://example.org/a");
    std::istringstream bad("justoneword\n");
    CHECK_THROWS_AS(load_namespaces(loaded, bad), UsageError);
}

TEST_CASE("n-triples import maps terms") {
    NtriplesOptions options;
    options.namespaces = with_x();
    auto rows = import_lines(
        "<http://x/Moe> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Person> .\n"
        "_:b0 <http://x/p> \"hi\"@en .\n",
        options);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"x:Moe", "rdf:type", "x:Person", ""});
    CHECK(rows[1] == std::vector<std::string>{"_:b0", "x:p", "'hi'@en", ""});

    std::istringstream empty("");
    NtriplesImporter importer(empty, {});
    CHECK(importer.header().columns ==
          std::vector<std::string>{"node1", "label", "node2", "datatype"});
    EdgeRecord rec;
    CHECK_FALSE(importer.next(rec));
}

TEST_CASE("n-triples literal handling") {
    auto rows = import_lines(
        "<http://a/s> <http://a/p> \"plain\" .\n"
        "<http://a/s> <http://a/p> \"tagged\"@EN-Latn .\n"
        "<http://a/s> <http://a/p> \"5\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
        "<http://a/s> <http://a/p> \"5\"^^<http://www.w3.org/2001/XMLSchema#long> .\n"
        "<http://a/s> <http://a/p> \"-1.5e3\"^^<http://www.w3.org/2001/XMLSchema#double> .\n"
        "<http://a/s> <http://a/p> \"true\"^^<http://www.w3.org/2001/XMLSchema#boolean> .\n"
        "<http://a/s> <http://a/p> \"opaque\"^^<http://a/dt> .\n"
        "<http://a/s> <http://a/p> \"10m\"^^<https://kgtk.dev/datatype#quantity> .\n"
        "<http://a/s> <http://a/p> \"say \\\"hi\\\"\\n\" .\n"
        "<http://a/s> <http://a/p> \"\\u0041\\U0001F600\" .\n");
    REQUIRE(rows.size() == 10);
    CHECK(rows[0][2] == "\"plain\"");
    CHECK(rows[1][2] == "'tagged'@en-Latn");
    CHECK(rows[2][2] == "5");
    CHECK(rows[2][3] == "");  // matches what export would infer
    CHECK(rows[3][2] == "5");
    CHECK(rows[3][3] == "xsd:long");
    CHECK(rows[4][2] == "-1.5e3");
    CHECK(rows[4][3] == "");
    CHECK(rows[5][2] == "True");
    CHECK(rows[6][2] == "\"opaque\"");
    CHECK(rows[6][3] == "<http://a/dt>");
    CHECK(rows[7][2] == "10m");
    CHECK(rows[7][3] == "");
    CHECK(rows[8][2] == "\"say \\\"hi\\\"\\n\"");
    CHECK(rows[9][2] == "\"A\xF0\x9F\x98\x80\"");
}

TEST_CASE("n-triples malformed lines") {
    std::string text =
        "<http://a/s> <http://a/p> <http://a/o> .\n"
        "# a comment\n"
        "\n"
        "this is not a triple\n"
        "<http://a/s> <http://a/p> \"unterminated .\n"
        "<http://a/s> <http://a/p> <http://a/o>\n"
        "<http://a/s2> <http://a/p2> \"ok\" .\n";
    std::uint64_t skipped = 0;
    auto rows = import_lines(text, {}, &skipped);
    CHECK(rows.size() == 2);
    CHECK(skipped == 3);

    NtriplesOptions strict;
    strict.strict = true;
    std::istringstream in(text);
    NtriplesImporter importer(in, std::move(strict), "bad.nt");
    EdgeRecord rec;
    CHECK(importer.next(rec));
    CHECK_THROWS_WITH_AS(importer.next(rec),
                         doctest::Contains("bad.nt line 4"), MalformedTriple);
}

TEST_CASE("n-triples export") {
    std::string out = export_tsv(
        "node1\tlabel\tnode2\tid\tcreator\tsource\n"
        "Moe\trdf:type\tPerson\tE1\t\"Hans\"\tWikipedia\n");
    CHECK(out ==
          "<https://kgtk.dev/node/Moe> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> "
          "<https://kgtk.dev/node/Person> .\n"
          "<https://kgtk.dev/node/E1> <https://kgtk.dev/node/creator> \"Hans\" .\n"
          "<https://kgtk.dev/node/E1> <https://kgtk.dev/node/source> "
          "<https://kgtk.dev/node/Wikipedia> .\n");

    CHECK(export_tsv("node1\tlabel\tnode2\n") == "");

    CHECK_THROWS_AS(export_tsv("node1\tlabel\tnode2\n\"str\"\tp\to\n"), NonSymbolSubject);
    CHECK_THROWS_AS(export_tsv("node1\tlabel\tnode2\nfoo:bar\tp\to\n"), UnexpandablePrefix);
    // qualifier with no id cannot be reified
    CHECK_THROWS_AS(export_tsv("node1\tlabel\tnode2\tcreator\na\tp\tb\t\"Hans\"\n"), DataError);

    std::string typed = export_tsv(
        "node1\tlabel\tnode2\tdatatype\n"
        "a\tp\t5\t\n"
        "a\tp\t5\txsd:long\n"
        "a\tp\t2.5\t\n"
        "a\tp\tTrue\t\n"
        "a\tp\t10m\t\n"
        "a\tp\t'salut'@fr-CA\t\n"
        "a\tp\t_:b9\t\n"
        "a\tp\t<http://verbatim/x>\t\n");
    CHECK(typed.find("\"5\"^^<http://www.w3.org/2001/XMLSchema#integer>") != std::string::npos);
    CHECK(typed.find("\"5\"^^<http://www.w3.org/2001/XMLSchema#long>") != std::string::npos);
    CHECK(typed.find("\"2.5\"^^<http://www.w3.org/2001/XMLSchema#double>") != std::string::npos);
    CHECK(typed.find("\"true\"^^<http://www.w3.org/2001/XMLSchema#boolean>") != std::string::npos);
    CHECK(typed.find("\"10m\"^^<https://kgtk.dev/datatype#quantity>") != std::string::npos);
    CHECK(typed.find("\"salut\"@fr-CA") != std::string::npos);
    CHECK(typed.find("_:b9 .") != std::string::npos);
    CHECK(typed.find("<http://verbatim/x> .") != std::string::npos);
}

TEST_CASE("export then import is the identity on n-triples") {
    std::string lines =
        "<http://www.wikidata.org/entity/Q42> <http://www.wikidata.org/prop/direct/P31> "
        "<http://www.wikidata.org/entity/Q5> .\n"
        "_:b0 <https://kgtk.dev/node/p> \"hi\"@en .\n"
        "<https://kgtk.dev/node/a> <https://kgtk.dev/node/p> \"x\"^^<http://odd/dt> .\n"
        "<https://kgtk.dev/node/a> <https://kgtk.dev/node/p> "
        "\"7\"^^<http://www.w3.org/2001/XMLSchema#short> .\n"
        "<http://unknown.example/s> <https://kgtk.dev/node/p> <http://unknown.example/o> .\n";
    std::istringstream in(lines);
    NtriplesImporter importer(in, {});
    std::ostringstream out;
    export_ntriples(importer, out);
    CHECK(out.str() == lines);
}

TEST_CASE("import then export is the identity on core KGTK streams") {
    std::string tsv =
        "node1\tlabel\tnode2\tdatatype\n"
        "wd:Q42\twdt:P31\twd:Q5\t\n"
        "Moe\thasFriend\tLarry\t\n"
        "Moe\tname\t\"Moe Howard\"\t\n"
        "Moe\tmotto\t'nyuk nyuk'@en\t\n"
        "Moe\theight\t1.75\t\n"
        "Moe\tcount\t3\txsd:byte\n"
        "_:blank\trdf:type\towl:Thing\t\n"
        "<http://raw.example/x>\trdfs:seeAlso\t<http://raw.example/y>\t\n";
    std::string triples = export_tsv(tsv);
    std::istringstream in(triples);
    NtriplesImporter importer(in, {});
    std::ostringstream round;
    WriteOptions opts;
    write_edges(importer, round, opts);
    CHECK(round.str() == tsv);
}

TEST_CASE("random core values survive import export") {
    testsupport::Rng rng(5511);
    const std::vector<std::string> symbols = {"wd:Q1", "alpha", "beta_2", "rdf:type", "_:b1"};
    std::string tsv = "node1\tlabel\tnode2\tdatatype\n";
    for (int i = 0; i < 200; ++i) {
        std::string node2;
        switch (rng.range(0, 3)) {
            case 0: node2 = rng.pick(symbols); break;
            case 1:
                node2 = serialize_value(KgtkValue{StringValue{testsupport::gen_text(rng)}});
                break;
            case 2: {
                LangStringValue ls{testsupport::gen_text(rng), "en", ""};
                node2 = serialize_value(KgtkValue{std::move(ls)});
                break;
            }
            default: node2 = serialize_value(KgtkValue{testsupport::gen_number(rng)}); break;
        }
        tsv += rng.pick(symbols) + "\t" + (rng.chance(50) ? "p" : "wdt:P5") + "\t" + node2 + "\t\n";
    }
    std::string triples = export_tsv(tsv);
    std::istringstream in(triples);
    NtriplesImporter importer(in, {});
    CHECK(importer.skipped() == 0);
    std::ostringstream round;
    write_edges(importer, round, {});
    CHECK(round.str() == tsv);
}

TEST_CASE("conceptnet import") {
    std::string dump =
        "/a/[/r/IsA/,/c/en/cat/,/c/en/animal/]\t/r/IsA\t/c/en/cat\t/c/en/animal\t{\"w\":1}\n"
        "/a/[/r/IsA/,/c/fr/chat/,/c/en/animal/]\t/r/IsA\t/c/fr/chat\t/c/en/animal\t{}\n"
        "broken line without tabs\n"
        "/a/x\t/r/PartOf\t/c/en/wheel\t/c/en/car\t{}\n";
    {
        std::istringstream in(dump);
        ConceptnetImporter importer(in, {.english_only = true});
        CHECK(importer.header().columns ==
              std::vector<std::string>{"node1", "label", "node2", "id"});
        std::vector<std::vector<std::string>> rows;
        EdgeRecord rec;
        while (importer.next(rec)) rows.push_back(rec.cells);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0] == std::vector<std::string>{"/c/en/cat", "/r/IsA", "/c/en/animal",
                                                  "/a/[/r/IsA/,/c/en/cat/,/c/en/animal/]"});
        CHECK(rows[1][0] == "/c/en/wheel");
        CHECK(importer.skipped() == 1);
    }
    {
        // english_only never rewrites surviving rows
        std::istringstream all_in(dump), en_in(dump);
        ConceptnetImporter all(all_in, {.english_only = false});
        ConceptnetImporter en(en_in, {.english_only = true});
        std::vector<std::vector<std::string>> all_rows, en_rows;
        EdgeRecord rec;
        while (all.next(rec)) all_rows.push_back(rec.cells);
        while (en.next(rec)) en_rows.push_back(rec.cells);
        CHECK(all_rows.size() == 3);
        for (const auto& row : en_rows)
            CHECK(std::find(all_rows.begin(), all_rows.end(), row) != all_rows.end());
    }
    {
        std::istringstream in("");
        ConceptnetImporter importer(in, {});
        EdgeRecord rec;
        CHECK_FALSE(importer.next(rec));
    }
}

TEST_CASE("property graph export") {
    std::string tsv =
        "node1\tlabel\tnode2\tcreator\tsource\tid\n"
        "\"Moe\"\trdf:type\tPerson\t\"Hans\"\tWikipedia\tE1\n"
        "\"Larry\"\trdf:type\tPerson\t\"Hans\"\tWikipedia\tE2\n"
        "\"Curly\"\trdf:type\tPerson\t\tWikipedia\tE3\n"
        "\"Curly\"\thasFriend\t\"Moe\"\t\tWikipedia\tE4\n";
    std::istringstream in(tsv);
    auto reader = open_reader(in, "<pg>");
    std::ostringstream nodes, edges;
    auto stats = export_property_graph(*reader, nodes, edges);
    CHECK(stats.node_rows == 4);
    CHECK(stats.edge_rows == 4);
    // first appearance order, node1 before node2 within a row
    CHECK(nodes.str() ==
          "id\tlabel\n\"Moe\"\t\nPerson\t\n\"Larry\"\t\n\"Curly\"\t\n");
    std::string edges_text = edges.str();
    CHECK(edges_text.substr(0, edges_text.find('\n')) ==
          "id\tnode1\tlabel\tnode2\tcreator\tsource");
    CHECK(edges_text.find("E1\t\"Moe\"\trdf:type\tPerson\t\"Hans\"\tWikipedia\n") !=
          std::string::npos);

    // label property fills the node label column
    std::string labeled =
        "node1\tlabel\tnode2\n"
        "Q1\tlabel\t'Thing'@en\n"
        "Q1\tP31\tQ2\n";
    std::istringstream lin(labeled);
    auto lreader = open_reader(lin, "<pg>");
    std::ostringstream lnodes, ledges;
    export_property_graph(*lreader, lnodes, ledges);
    CHECK(lnodes.str() == "id\tlabel\nQ1\t'Thing'@en\n'Thing'@en\t\nQ2\t\n");

    std::istringstream ein("node1\tlabel\tnode2\n");
    auto ereader = open_reader(ein, "<pg>");
    std::ostringstream enodes, eedges;
    auto estats = export_property_graph(*ereader, enodes, eedges);
    CHECK(estats.node_rows == 0);
    CHECK(estats.edge_rows == 0);
    CHECK(enodes.str() == "id\tlabel\n");
    CHECK(eedges.str() == "id\tnode1\tlabel\tnode2\n");
}
