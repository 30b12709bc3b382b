#include "kgtk/lexicalize.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "kgtk/errors.hpp"
#include "kgtk/values.hpp"

namespace kgtk {

namespace {

// Human text for a cell: strings drop their quoting and language tag,
// everything else keeps its lexical form.
std::string render_text(std::string_view cell) {
    ParseError err;
    auto value = try_parse_value(cell, &err);
    if (value) {
        if (value->kind() == ValueKind::String)
            return value->as<StringValue>().text;
        if (value->kind() == ValueKind::LangString)
            return value->as<LangStringValue>().text;
    }
    return std::string(cell);
}

std::string join_items(const std::vector<std::string>& items, bool terminal_and) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += (terminal_and && i + 1 == items.size()) ? ", and " : ", ";
        out += items[i];
    }
    return out;
}

}  // namespace

std::string render_sentence(const SentenceSlots& slots) {
    // head slots name the node; tail slots carry a verb prefix
    struct Slot {
        const std::vector<std::string>* items;
        const char* prefix;
        bool head;
    };
    const Slot order[] = {
        {&slots.labels, "", true},
        {&slots.descriptions, "", true},
        {&slots.isa, "is a ", false},
        {&slots.has, "has ", false},
        {&slots.property_values, "has ", false},
    };
    int last_filled = -1;
    for (int i = 0; i < 5; ++i)
        if (!order[i].items->empty()) last_filled = i;
    if (last_filled < 0) return "";

    std::string out;
    bool head_written = false;
    bool tail_written = false;
    for (int i = 0; i < 5; ++i) {
        const Slot& slot = order[i];
        if (slot.items->empty()) continue;
        std::string fragment =
            slot.prefix + join_items(*slot.items, /*terminal_and=*/i == last_filled);
        if (slot.head) {
            if (head_written) out += ", ";
            out += fragment;
            head_written = true;
        } else {
            if (tail_written)
                out += ", and ";
            else if (head_written)
                out += " ";
            out += fragment;
            tail_written = true;
        }
    }
    return out;
}

std::vector<SentenceRecord> lexicalize_all(EdgeSource& source,
                                           const LexicalizationConfig& config) {
    if (config.all_empty())
        throw UsageError("lexicalization needs at least one property list");

    const Header& header = source.header();
    struct Row {
        std::string node1, label, node2;
    };
    std::vector<Row> rows;
    EdgeRecord rec;
    while (source.next(rec)) {
        rows.push_back({std::string(rec.cell(header.node1)), std::string(rec.cell(header.label)),
                        std::string(rec.cell(header.node2))});
    }

    auto member = [](const std::vector<std::string>& list) {
        return std::unordered_set<std::string>(list.begin(), list.end());
    };
    const auto label_props = member(config.label_properties);
    const auto description_props = member(config.description_properties);
    const auto isa_props = member(config.isa_properties);
    const auto has_props = member(config.has_properties);
    const auto value_props = member(config.property_value_properties);

    // first label edge in stream order names a symbol everywhere it appears
    std::unordered_map<std::string, std::string> name_of;
    for (const Row& row : rows)
        if (label_props.count(row.label)) name_of.try_emplace(row.node1, render_text(row.node2));

    auto display = [&](const std::string& symbol) {
        auto it = name_of.find(symbol);
        return it != name_of.end() ? it->second : render_text(symbol);
    };

    std::vector<std::string> node_order;
    std::unordered_map<std::string, SentenceSlots> slots;
    std::unordered_map<std::string, std::unordered_set<std::string>> has_seen;
    for (const Row& row : rows) {
        auto [it, inserted] = slots.try_emplace(row.node1);
        if (inserted) node_order.push_back(row.node1);
        SentenceSlots& s = it->second;
        if (label_props.count(row.label)) s.labels.push_back(render_text(row.node2));
        if (description_props.count(row.label)) s.descriptions.push_back(render_text(row.node2));
        if (isa_props.count(row.label)) s.isa.push_back(display(row.node2));
        if (has_props.count(row.label) && has_seen[row.node1].insert(row.label).second)
            s.has.push_back(display(row.label));
        if (value_props.count(row.label))
            s.property_values.push_back(display(row.label) + " " + display(row.node2));
    }

    std::vector<SentenceRecord> records;
    records.reserve(node_order.size());
    for (const std::string& node : node_order)
        records.push_back({node, render_sentence(slots[node])});
    return records;
}

// ---- encoders ----

std::vector<double> baseline_encode(const std::string& sentence, std::size_t dimension) {
    if (dimension < 8) throw UsageError("embedding dimension must be at least 8");
    // second hash seed; any fixed constant distinct from the FNV basis works
    constexpr std::uint64_t kSignSeed = 14695981039346656037ULL ^ 0x9e3779b97f4a7c15ULL;
    std::vector<double> vec(dimension, 0.0);
    std::size_t i = 0;
    const std::size_t n = sentence.size();
    while (i < n) {
        char c = sentence[i];
        bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
        if (!alnum) {
            ++i;
            continue;
        }
        std::string token;
        while (i < n) {
            char t = sentence[i];
            if (t >= 'A' && t <= 'Z') t = char(t - 'A' + 'a');
            bool ok = (t >= 'a' && t <= 'z') || (t >= '0' && t <= '9');
            if (!ok) break;
            token.push_back(t);
            ++i;
        }
        std::uint64_t h = fnv1a64(token);
        double sign = (fnv1a64(token, kSignSeed) & 1) ? 1.0 : -1.0;
        vec[h % dimension] += sign;
    }
    double norm = 0.0;
    for (double v : vec) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& v : vec) v /= norm;
    return vec;
}

namespace {

class BaselineEncoder : public Encoder {
public:
    std::vector<double> encode(const std::string& sentence, std::size_t dimension) override {
        return baseline_encode(sentence, dimension);
    }
};

// Line protocol against a child process: sentence in, vector out. The child
// must flush after each line or the exchange deadlocks.
class ExecEncoder : public Encoder {
public:
    explicit ExecEncoder(std::string command) : command_(std::move(command)) {}

    ~ExecEncoder() override {
        if (to_child_) fclose(to_child_);
        if (from_child_) fclose(from_child_);
        if (pid_ > 0) {
            int status = 0;
            waitpid(pid_, &status, 0);
        }
    }

    std::vector<double> encode(const std::string& sentence, std::size_t dimension) override {
        if (pid_ < 0) start();
        std::string line = sentence;
        for (char& c : line)
            if (c == '\n' || c == '\r') c = ' ';
        if (fprintf(to_child_, "%s\n", line.c_str()) < 0 || fflush(to_child_) != 0)
            throw EncoderFailure("encoder process stopped accepting input");
        char* buf = nullptr;
        std::size_t cap = 0;
        ssize_t got = getline(&buf, &cap, from_child_);
        std::string reply;
        if (got >= 0) reply.assign(buf, std::size_t(got));
        free(buf);
        if (got < 0) throw EncoderFailure("encoder process closed its output");

        std::vector<double> vec;
        vec.reserve(dimension);
        const char* p = reply.c_str();
        char* end = nullptr;
        while (*p) {
            while (*p == ' ' || *p == '\t' || *p == '\n') ++p;
            if (!*p) break;
            double v = strtod(p, &end);
            if (end == p) throw EncoderFailure("encoder reply is not numeric: " + reply);
            vec.push_back(v);
            p = end;
        }
        if (vec.size() != dimension)
            throw EncoderFailure("encoder returned " + std::to_string(vec.size()) +
                                 " values, expected " + std::to_string(dimension));
        return vec;
    }

private:
    void start() {
        // a dead child must surface as a write error, not kill the process
        signal(SIGPIPE, SIG_IGN);
        int to_pipe[2], from_pipe[2];
        if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0)
            throw EncoderFailure("cannot create encoder pipes");
        pid_ = fork();
        if (pid_ < 0) throw EncoderFailure("cannot fork encoder process");
        if (pid_ == 0) {
            dup2(to_pipe[0], 0);
            dup2(from_pipe[1], 1);
            close(to_pipe[0]);
            close(to_pipe[1]);
            close(from_pipe[0]);
            close(from_pipe[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), (char*)nullptr);
            _exit(127);
        }
        close(to_pipe[0]);
        close(from_pipe[1]);
        to_child_ = fdopen(to_pipe[1], "w");
        from_child_ = fdopen(from_pipe[0], "r");
        if (!to_child_ || !from_child_) throw EncoderFailure("cannot attach encoder pipes");
    }

    std::string command_;
    pid_t pid_ = -1;
    FILE* to_child_ = nullptr;
    FILE* from_child_ = nullptr;
};

}  // namespace

std::unique_ptr<Encoder> make_encoder(const std::string& name) {
    if (name == "baseline") return std::make_unique<BaselineEncoder>();
    if (name.rfind("exec:", 0) == 0) return std::make_unique<ExecEncoder>(name.substr(5));
    throw UnknownEncoder("unknown encoder: " + name + " (expected baseline or exec:<command>)");
}

std::vector<EmbeddingRecord> embed(const std::vector<SentenceRecord>& sentences,
                                   Encoder& encoder, std::size_t dimension,
                                   EmbedReport* report) {
    EmbedReport local;
    EmbedReport& r = report ? *report : local;
    std::vector<EmbeddingRecord> out;
    for (const SentenceRecord& record : sentences) {
        if (record.sentence.empty()) {
            ++r.empty_skipped;
            continue;
        }
        std::vector<double> vec;
        try {
            vec = encoder.encode(record.sentence, dimension);
        } catch (const EncoderFailure&) {
            ++r.failed;
            continue;
        }
        bool zero = true;
        for (double v : vec)
            if (v != 0.0) {
                zero = false;
                break;
            }
        if (zero) {
            ++r.empty_skipped;
            continue;
        }
        ++r.encoded;
        out.push_back({record.node, std::move(vec)});
    }
    return out;
}

void write_embeddings(const std::vector<EmbeddingRecord>& records, std::ostream& out) {
    for (const EmbeddingRecord& record : records) {
        out << record.node << '\t';
        for (std::size_t i = 0; i < record.vector.size(); ++i) {
            if (i) out << ' ';
            out << format_double(record.vector[i]);
        }
        out << '\n';
    }
    if (!out) throw IoFailure("cannot write embeddings");
}

}  // namespace kgtk
