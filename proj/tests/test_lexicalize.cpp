#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "kgtk/lexicalize.hpp"
#include "test_support.hpp"

using namespace kgtk;

namespace {

std::vector<SentenceRecord> lexicalize_text(const std::string& text,
                                            const LexicalizationConfig& config) {
    std::istringstream in(text);
    auto reader = open_reader(in, "<lex>");
    return lexicalize_all(*reader, config);
}

std::string sentence_for(const std::vector<SentenceRecord>& records, const std::string& node) {
    for (const auto& r : records)
        if (r.node == node) return r.sentence;
    return "<missing>";
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;  // inputs are unit-norm
}

const char* kSaintDavid =
    "node1\tlabel\tnode2\n"
    "Q44356\tlabel\t'Saint David'@en\n"
    "Q44356\tdescription\t'patron saint of Wales'@en\n"
    "Q44356\tP31\tQ5\n"
    "Q44356\tP106\tQ250867\n"
    "Q44356\tP39\tQ611644\n"
    "Q44356\tP570\t^0589-03-01T00:00:00Z/11\n"
    "Q44356\tP140\tQ9592\n"
    "Q44356\tP411\tQ43115\n"
    "Q44356\tP19\tQ1072004\n"
    "Q5\tlabel\t'human'@en\n"
    "Q250867\tlabel\t'Catholic priest'@en\n"
    "Q611644\tlabel\t'Catholic bishop'@en\n"
    "P570\tlabel\t'date of death'@en\n"
    "P140\tlabel\t'religion'@en\n"
    "P411\tlabel\t'canonization status'@en\n"
    "P19\tlabel\t'place of birth'@en\n"
    "Q1072004\tlabel\t'Pembrokeshire'@en\n";

LexicalizationConfig saint_david_config() {
    LexicalizationConfig config;
    config.label_properties = {"label"};
    config.description_properties = {"description"};
    config.isa_properties = {"P31", "P106", "P39"};
    config.has_properties = {"P570", "P140", "P411"};
    config.property_value_properties = {"P19"};
    return config;
}

}  // namespace

TEST_CASE("the full template sentence") {
    auto records = lexicalize_text(kSaintDavid, saint_david_config());
    CHECK(sentence_for(records, "Q44356") ==
          "Saint David, patron saint of Wales is a human, Catholic priest, Catholic bishop, "
          "and has date of death, religion, canonization status, and has place of birth "
          "Pembrokeshire");
    // the label-only helper rows lexicalize to their bare label text
    CHECK(sentence_for(records, "Q5") == "human");
    CHECK(sentence_for(records, "P19") == "place of birth");
}

TEST_CASE("sentence joins") {
    SentenceSlots slots;
    slots.labels = {"X"};
    slots.isa = {"A", "B"};
    CHECK(render_sentence(slots) == "X is a A, and B");

    slots.isa = {"A"};
    CHECK(render_sentence(slots) == "X is a A");

    slots.isa = {"A", "B", "C"};
    CHECK(render_sentence(slots) == "X is a A, B, and C");

    SentenceSlots only_label;
    only_label.labels = {"X"};
    CHECK(render_sentence(only_label) == "X");

    SentenceSlots has_tail;
    has_tail.labels = {"X"};
    has_tail.has = {"p", "q"};
    has_tail.property_values = {"r v"};
    CHECK(render_sentence(has_tail) == "X has p, q, and has r v");

    SentenceSlots headless;
    headless.isa = {"thing"};
    CHECK(render_sentence(headless) == "is a thing");

    CHECK(render_sentence(SentenceSlots{}) == "");
}

TEST_CASE("every slot combination renders without dangling connectives") {
    for (int mask = 0; mask < 32; ++mask) {
        SentenceSlots slots;
        if (mask & 1) slots.labels = {"Name1", "Name2"};
        if (mask & 2) slots.descriptions = {"desc one", "desc two"};
        if (mask & 4) slots.isa = {"kind A", "kind B"};
        if (mask & 8) slots.has = {"prop A", "prop B"};
        if (mask & 16) slots.property_values = {"prop C val C", "prop D val D"};
        std::string s = render_sentence(slots);
        CAPTURE(mask);
        CAPTURE(s);
        CHECK((mask == 0) == s.empty());
        if (s.empty()) continue;
        CHECK(s.find(",,") == std::string::npos);
        CHECK(s.find(", ,") == std::string::npos);
        CHECK(s.find("  ") == std::string::npos);
        CHECK(s.front() != ' ');
        CHECK(s.back() != ' ');
        CHECK(s.back() != ',');
        // no connective left hanging at the end
        for (const char* tail : {" is a", " has", " and", ","}) {
            std::size_t len = strlen(tail);
            bool ends_with = s.size() >= len && s.compare(s.size() - len, len, tail) == 0;
            CHECK_FALSE(ends_with);
        }
        // "and" only appears glued to a following item
        CHECK(s.find("and  ") == std::string::npos);
    }
}

TEST_CASE("unconfigured properties leave the sentence unchanged") {
    auto base = lexicalize_text(kSaintDavid, saint_david_config());
    std::string with_extra = std::string(kSaintDavid) + "Q44356\tP9999\tQ42\n";
    auto extra = lexicalize_text(with_extra, saint_david_config());
    CHECK(sentence_for(base, "Q44356") == sentence_for(extra, "Q44356"));
}

TEST_CASE("lexicalize details") {
    // object with no label edge falls back to its symbol
    std::string text =
        "node1\tlabel\tnode2\n"
        "Q1\tlabel\t\"Thing\"\n"
        "Q1\tP31\tQ999\n";
    LexicalizationConfig config;
    config.label_properties = {"label"};
    config.isa_properties = {"P31"};
    auto records = lexicalize_text(text, config);
    CHECK(sentence_for(records, "Q1") == "Thing is a Q999");

    // first label in stream order wins for object rendering
    std::string dup =
        "node1\tlabel\tnode2\n"
        "Q2\tlabel\t\"first\"\n"
        "Q2\tlabel\t\"second\"\n"
        "Q1\tP31\tQ2\n";
    auto dup_records = lexicalize_text(dup, config);
    CHECK(sentence_for(dup_records, "Q1") == "is a first");

    // nodes with no configured edges produce an empty sentence record
    std::string none =
        "node1\tlabel\tnode2\n"
        "Q7\tP999\tQ8\n";
    auto none_records = lexicalize_text(none, config);
    REQUIRE(none_records.size() == 1);
    CHECK(none_records[0].node == "Q7");
    CHECK(none_records[0].sentence.empty());

    // repeated has-properties collapse to one mention
    std::string rep =
        "node1\tlabel\tnode2\n"
        "Q1\tP570\tx\n"
        "Q1\tP570\ty\n";
    LexicalizationConfig has_config;
    has_config.has_properties = {"P570"};
    auto rep_records = lexicalize_text(rep, has_config);
    CHECK(sentence_for(rep_records, "Q1") == "has P570");

    CHECK_THROWS_AS(lexicalize_text(text, LexicalizationConfig{}), UsageError);
}

TEST_CASE("baseline encoder fundamentals") {
    auto v1 = baseline_encode("cat sat", 64);
    auto v2 = baseline_encode("cat sat", 64);
    CHECK(v1 == v2);

    double norm = 0;
    for (double v : v1) norm += v * v;
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-12);

    // scaling invariance: token multiplicity does not change direction
    auto a = baseline_encode("a", 64);
    auto aa = baseline_encode("a a", 64);
    CHECK(std::abs(cosine(a, aa) - 1.0) < 1e-12);

    // case folding and separator insensitivity
    CHECK(baseline_encode("Cat,SAT", 64) == baseline_encode("cat sat", 64));

    // frozen hash oracle: "wales" lands on one index with one sign
    auto wales = baseline_encode("wales", 64);
    for (std::size_t i = 0; i < wales.size(); ++i) {
        if (i == 11)
            CHECK(wales[i] == -1.0);
        else
            CHECK(wales[i] == 0.0);
    }

    CHECK(baseline_encode("", 64) == std::vector<double>(64, 0.0));
    CHECK_THROWS_AS(baseline_encode("x", 4), UsageError);
}

TEST_CASE("similar sentences score closer") {
    auto base = baseline_encode("cat sat", 64);
    auto overlap = baseline_encode("cat sat mat", 64);
    auto unrelated = baseline_encode("airplane engine", 64);
    CHECK(cosine(base, overlap) > cosine(base, unrelated));
}

TEST_CASE("embed pipeline") {
    std::vector<SentenceRecord> sentences = {
        {"Q1", "alpha beta"}, {"Q2", ""}, {"Q3", "alpha beta"}, {"Q4", "!!!"}};
    auto encoder = make_encoder("baseline");
    EmbedReport report;
    auto records = embed(sentences, *encoder, 16, &report);
    REQUIRE(records.size() == 2);
    CHECK(records[0].node == "Q1");
    CHECK(records[1].node == "Q3");
    CHECK(records[0].vector == records[1].vector);  // determinism
    CHECK(report.encoded == 2);
    CHECK(report.empty_skipped == 2);  // the empty sentence and the zero vector
    CHECK(report.failed == 0);

    // permutation of inputs permutes outputs identically
    std::vector<SentenceRecord> reversed(sentences.rbegin(), sentences.rend());
    auto rev_records = embed(reversed, *encoder, 16);
    REQUIRE(rev_records.size() == 2);
    CHECK(rev_records[0].node == "Q3");
    CHECK(rev_records[1].node == "Q1");
    CHECK(rev_records[0].vector == records[0].vector);

    CHECK_THROWS_AS(make_encoder("transformer-xxl"), UnknownEncoder);

    std::ostringstream out;
    write_embeddings(records, out);
    std::string text = out.str();
    CHECK(text.substr(0, 3) == "Q1\t");
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    // D values per line means D-1 separating spaces
    std::string first_line = text.substr(0, text.find('\n'));
    CHECK(std::count(first_line.begin(), first_line.end(), ' ') == 15);
}

TEST_CASE("external process encoder") {
    // child echoes a deterministic 8-vector built from the line length
    auto encoder = make_encoder(
        "exec:python3 -u -c \"import sys\n"
        "for line in sys.stdin:\n"
        "    n = len(line.strip())\n"
        "    print(' '.join(str(n + i) for i in range(8)))\n"
        "    sys.stdout.flush()\"");
    auto vec = encoder->encode("abcd", 8);
    REQUIRE(vec.size() == 8);
    CHECK(vec[0] == 4.0);
    CHECK(vec[7] == 11.0);

    // wrong dimension surfaces as a per-record failure
    CHECK_THROWS_AS(encoder->encode("abcd", 16), EncoderFailure);

    std::vector<SentenceRecord> sentences = {{"Q1", "ab"}, {"Q2", "xyz"}};
    EmbedReport report;
    auto records = embed(sentences, *encoder, 8, &report);
    REQUIRE(records.size() == 2);
    CHECK(records[0].vector[0] == 2.0);
    CHECK(records[1].vector[0] == 3.0);
    CHECK(report.encoded == 2);

    // a command that dies immediately fails every record but does not crash
    auto broken = make_encoder("exec:false");
    EmbedReport broken_report;
    auto none = embed(sentences, *broken, 8, &broken_report);
    CHECK(none.empty());
    CHECK(broken_report.failed == 2);
}
