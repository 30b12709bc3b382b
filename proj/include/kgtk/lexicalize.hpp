#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "kgtk/edge_io.hpp"

namespace kgtk {

// Property lists driving sentence construction. A property may sit in more
// than one list; each slot collects its matches independently.
struct LexicalizationConfig {
    std::vector<std::string> label_properties;
    std::vector<std::string> description_properties;
    std::vector<std::string> isa_properties;
    std::vector<std::string> has_properties;
    std::vector<std::string> property_value_properties;

    bool all_empty() const {
        return label_properties.empty() && description_properties.empty() &&
               isa_properties.empty() && has_properties.empty() &&
               property_value_properties.empty();
    }
};

struct SentenceRecord {
    std::string node;
    std::string sentence;  // empty when the node has no configured edges
};

// Slot items already rendered to text, in stream order.
struct SentenceSlots {
    std::vector<std::string> labels;
    std::vector<std::string> descriptions;
    std::vector<std::string> isa;
    std::vector<std::string> has;
    std::vector<std::string> property_values;
};

// Joins the slots into one sentence. Non-empty slots read in order; the
// final non-empty slot joins its last item with ", and"; between the verb
// fragments the connective is ", and". No trailing period.
std::string render_sentence(const SentenceSlots& slots);

// Materializes the stream, builds the object-label map (first label edge in
// stream order wins), and emits one record per distinct node1 in first
// appearance order. Throws UsageError when every property list is empty.
std::vector<SentenceRecord> lexicalize_all(EdgeSource& source,
                                           const LexicalizationConfig& config);

// ---- encoders ----

class Encoder {
public:
    virtual ~Encoder() = default;
    // Throws EncoderFailure when this record cannot be encoded.
    virtual std::vector<double> encode(const std::string& sentence, std::size_t dimension) = 0;
};

// Feature hashing: ASCII lowercase, [a-z0-9]+ token runs, token hashed to an
// index with a signed second hash, accumulated and L2-normalized. Dimension
// must be >= 8. Sentences with no tokens give a zero vector.
std::vector<double> baseline_encode(const std::string& sentence, std::size_t dimension);

// "baseline" or "exec:<command>"; anything else throws UnknownEncoder.
// The exec form runs the command through the shell and speaks one line per
// record: sentence in, D space-separated floats out.
std::unique_ptr<Encoder> make_encoder(const std::string& name);

struct EmbeddingRecord {
    std::string node;
    std::vector<double> vector;
};

struct EmbedReport {
    std::uint64_t encoded = 0;
    std::uint64_t empty_skipped = 0;  // empty sentences and zero vectors
    std::uint64_t failed = 0;         // encoder failures, record skipped
};

std::vector<EmbeddingRecord> embed(const std::vector<SentenceRecord>& sentences,
                                   Encoder& encoder, std::size_t dimension,
                                   EmbedReport* report = nullptr);

// One line per node: node<TAB>v1 v2 ... vD
void write_embeddings(const std::vector<EmbeddingRecord>& records, std::ostream& out);

}  // namespace kgtk
