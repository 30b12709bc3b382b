#include "kgtk/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "kgtk/edge_io.hpp"
#include "kgtk/graph.hpp"
#include "kgtk/interchange.hpp"
#include "kgtk/lexicalize.hpp"
#include "kgtk/transforms.hpp"
#include "kgtk/validation.hpp"

namespace kgtk {
namespace {

// Thrown (as a plain value) when a stage asked for --help during validation.
struct HelpRequested {
    std::string text;
};

// Internal: CLI11 rejected a stage's arguments; parse_pipeline adds context.
struct SchemaViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal: the producer feeding this stage failed. The root cause is
// reported by the stage that actually threw it.
struct UpstreamFailed {};

// ------------------------------------------------------------- channels ---

// Single-producer single-consumer bounded queue of records, with a one-shot
// header slot published before the first row.
class RowChannel {
public:
    explicit RowChannel(std::size_t capacity) : capacity_(capacity) {}

    void publish_header(Header header) {
        std::unique_lock lock(mutex_);
        header_ = std::move(header);
        has_header_ = true;
        consumer_cv_.notify_all();
    }

    const Header& wait_header() {
        std::unique_lock lock(mutex_);
        consumer_cv_.wait(lock, [&] { return has_header_ || producer_done_; });
        if (!has_header_) throw UpstreamFailed{};
        return header_;
    }

    // false when the consumer is gone: the producer should stop early.
    bool push(EdgeRecord&& record) {
        std::unique_lock lock(mutex_);
        producer_cv_.wait(lock, [&] { return queue_.size() < capacity_ || consumer_closed_; });
        if (consumer_closed_) return false;
        queue_.push_back(std::move(record));
        consumer_cv_.notify_one();
        return true;
    }

    bool pull(EdgeRecord& out) {
        std::unique_lock lock(mutex_);
        consumer_cv_.wait(lock, [&] { return !queue_.empty() || producer_done_; });
        if (!queue_.empty()) {
            out = std::move(queue_.front());
            queue_.pop_front();
            producer_cv_.notify_one();
            return true;
        }
        if (poisoned_) throw UpstreamFailed{};
        return false;
    }

    void close_producer(bool poisoned) {
        std::unique_lock lock(mutex_);
        producer_done_ = true;
        poisoned_ = poisoned_ || poisoned;
        consumer_cv_.notify_all();
    }

    void close_consumer() {
        std::unique_lock lock(mutex_);
        consumer_closed_ = true;
        producer_cv_.notify_all();
    }

private:
    std::size_t capacity_;
    std::mutex mutex_;
    std::condition_variable producer_cv_;
    std::condition_variable consumer_cv_;
    std::deque<EdgeRecord> queue_;
    Header header_;
    bool has_header_ = false;
    bool producer_done_ = false;
    bool consumer_closed_ = false;
    bool poisoned_ = false;
};

class ChannelSource : public EdgeSource {
public:
    explicit ChannelSource(RowChannel& channel) : channel_(channel) {}

    const Header& header() const override { return channel_.wait_header(); }
    bool next(EdgeRecord& out) override { return channel_.pull(out); }

private:
    RowChannel& channel_;
};

class RowSink {
public:
    virtual ~RowSink() = default;
    virtual void begin(const Header& header) = 0;
    virtual bool row(EdgeRecord&& record) = 0;  // false: stop producing
};

class ChannelRowSink : public RowSink {
public:
    explicit ChannelRowSink(RowChannel& channel) : channel_(channel) {}

    void begin(const Header& header) override { channel_.publish_header(header); }
    bool row(EdgeRecord&& record) override { return channel_.push(std::move(record)); }

private:
    RowChannel& channel_;
};

// --------------------------------------------------------- stage context ---

struct StageIo {
    EdgeSource* upstream = nullptr;  // null for the first stage
    RowSink* downstream = nullptr;   // null for the last stage
    std::istream* in = nullptr;      // process standard input
    std::ostream* out = nullptr;     // process standard output (last stage)
    std::ostream* err = nullptr;
    bool progress = false;
    std::uint64_t rows_in = 0;
    std::uint64_t rows_out = 0;
};

class CountingSource : public EdgeSource {
public:
    CountingSource(EdgeSource& inner, std::uint64_t& counter)
        : inner_(inner), counter_(counter) {}

    const Header& header() const override { return inner_.header(); }
    bool next(EdgeRecord& out) override {
        if (!inner_.next(out)) return false;
        ++counter_;
        return true;
    }

private:
    EdgeSource& inner_;
    std::uint64_t& counter_;
};

struct StageInput {
    std::unique_ptr<EdgeSource> owned;  // file or stdin reader; null on upstream
    std::unique_ptr<CountingSource> counted;

    EdgeSource& source() { return *counted; }
};

StageInput open_input(StageIo& io, const std::string& path) {
    StageInput input;
    EdgeSource* raw = nullptr;
    if (io.upstream) {
        if (!path.empty())
            throw UsageError("stage cannot both receive piped input and name a file");
        raw = io.upstream;
    } else if (path.empty() || path == "-") {
        input.owned = open_reader(*io.in, "<stdin>");
        raw = input.owned.get();
    } else {
        input.owned = open_reader(path);
        raw = input.owned.get();
    }
    input.counted = std::make_unique<CountingSource>(*raw, io.rows_in);
    return input;
}

// Streams a source to the stage's downstream channel, or to standard output
// as KGTK TSV when this is the last stage.
void drive(EdgeSource& source, StageIo& io) {
    if (io.downstream) {
        io.downstream->begin(source.header());
        EdgeRecord record;
        while (source.next(record)) {
            ++io.rows_out;
            if (!io.downstream->row(std::move(record))) break;  // downstream closed early
        }
    } else {
        WriteStats stats = write_edges(source, *io.out);
        io.rows_out += stats.rows;
        io.out->flush();
        if (!*io.out) throw IoFailure("write failure on standard output");
    }
}

std::ofstream open_output_file(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path);
    return out;
}

void finish_output_file(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoFailure("write failure on " + path);
}

// ---------------------------------------------------------- CLI plumbing ---

// CLI11 consumes argument vectors back to front.
void parse_reversed(CLI::App& app, std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        std::string part = text.substr(start, comma - start);
        std::size_t lo = part.find_first_not_of(" \t");
        if (lo != std::string::npos) {
            std::size_t hi = part.find_last_not_of(" \t");
            parts.push_back(part.substr(lo, hi - lo + 1));
        }
        start = comma + 1;
    }
    return parts;
}

// Multi-token list flags also accept commas inside one token.
std::vector<std::string> expand_csv(const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    for (const std::string& token : tokens)
        for (std::string& part : split_csv(token)) out.push_back(std::move(part));
    return out;
}

// Shared "-i FILE | positional FILE" input handling.
struct InputArg {
    std::string flag_value;
    std::string positional_value;

    void attach(CLI::App& app, bool with_positional = true) {
        app.add_option("-i,--input", flag_value, "input file ('-' reads standard input)");
        if (with_positional) app.add_option("file", positional_value, "input file");
    }

    std::string resolve() const {
        if (!flag_value.empty() && !positional_value.empty() && flag_value != positional_value)
            throw UsageError("input file named twice");
        return flag_value.empty() ? positional_value : flag_value;
    }

    std::vector<std::string> list() const {
        std::string path = resolve();
        if (path.empty()) return {};
        return {path};
    }
};

struct StageCheck {
    std::vector<std::string> inputs;  // input files the stage names
    bool progress = false;
};

struct CommandInfo {
    std::string help;
    bool source_only = false;  // consumes no piped input; first stage only
    bool emits_edges = true;   // false: output is not KGTK TSV; last stage only
    std::function<StageCheck(const std::vector<std::string>&)> check;
    std::function<void(const std::vector<std::string>&, StageIo&)> run;
};

// ------------------------------------------------------------- commands ---

struct FilterCmd {
    std::string pattern;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("-p,--pattern", pattern, "\"subject ; predicate ; object\" pattern")
            ->required();
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        StageInput in = open_input(io, input.resolve());
        FilterSource filtered(in.source(), parse_pattern(pattern));
        drive(filtered, io);
    }
};

struct SortCmd {
    std::string columns;
    std::size_t memory_budget = SortOptions{}.memory_budget;
    std::string temp_dir;
    bool reverse = false;
    bool numeric = false;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("-c,--columns", columns, "comma-separated key columns (names or 1-based)")
            ->required();
        app.add_option("--mem", memory_budget, "in-memory budget in bytes before spilling");
        app.add_option("--temp", temp_dir, "directory for spill files");
        app.add_flag("--reverse", reverse, "descending order");
        app.add_flag("--numeric", numeric, "numeric cell comparison");
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        SortOptions options;
        for (const std::string& column : split_csv(columns))
            options.keys.push_back({column, reverse, numeric});
        if (options.keys.empty()) throw UsageError("sort: no key columns given");
        options.memory_budget = memory_budget;
        options.temp_dir = temp_dir;
        StageInput in = open_input(io, input.resolve());
        SortedSource sorted(in.source(), std::move(options));
        drive(sorted, io);
    }
};

struct JoinCmd {
    std::string left;
    std::string right;
    std::string join_type = "inner";
    std::string left_keys;
    std::string right_keys;
    bool on_id = false;
    bool on_label = false;
    bool on_node2 = false;
    bool presort = false;
    std::size_t memory_budget = SortOptions{}.memory_budget;
    std::string temp_dir;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("left", left, "left input file")->required();
        app.add_option("right", right, "right input file")->required();
        app.add_option("--join-type", join_type, "inner, left, right, or outer");
        app.add_option("--left-keys", left_keys, "comma-separated left key columns");
        app.add_option("--right-keys", right_keys, "comma-separated right key columns");
        app.add_flag("--join-on-id", on_id, "join on the id column instead of node1");
        app.add_flag("--join-on-label", on_label, "extend the key with label");
        app.add_flag("--join-on-node2", on_node2, "extend the key with node2");
        app.add_flag("--presort", presort, "sort both inputs by the key first");
        app.add_option("--mem", memory_budget, "presort memory budget in bytes");
        app.add_option("--temp", temp_dir, "directory for presort spill files");
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {{left, right}, progress}; }
    void run(StageIo& io) {
        if (left == "-" && right == "-")
            throw UsageError("join: at most one input may be standard input");
        JoinOptions options;
        if (join_type == "inner") options.type = JoinType::Inner;
        else if (join_type == "left") options.type = JoinType::Left;
        else if (join_type == "right") options.type = JoinType::Right;
        else if (join_type == "outer" || join_type == "full") options.type = JoinType::Full;
        else throw UsageError("join: unknown join type '" + join_type + "'");
        options.left_keys = split_csv(left_keys);
        options.right_keys = split_csv(right_keys);
        options.join_on_id = on_id;
        options.add_label = on_label;
        options.add_node2 = on_node2;
        options.presort = presort;
        options.presort_options.memory_budget = memory_budget;
        options.presort_options.temp_dir = temp_dir;

        auto open_side = [&](const std::string& path) {
            return path == "-" ? open_reader(*io.in, "<stdin>") : open_reader(path);
        };
        auto left_source = open_side(left);
        auto right_source = open_side(right);
        CountingSource left_counted(*left_source, io.rows_in);
        CountingSource right_counted(*right_source, io.rows_in);
        MergeJoinSource joined(left_counted, right_counted, std::move(options));
        drive(joined, io);
    }
};

struct CatCmd {
    std::vector<std::string> files;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("files", files, "input files in order")->required();
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {files, progress}; }
    void run(StageIo& io) {
        bool used_stdin = false;
        std::vector<std::unique_ptr<EdgeSource>> inputs;
        for (const std::string& path : files) {
            if (path == "-") {
                if (used_stdin) throw UsageError("cat: standard input named twice");
                used_stdin = true;
                inputs.push_back(open_reader(*io.in, "<stdin>"));
            } else {
                inputs.push_back(open_reader(path));
            }
        }
        CatSource cat(std::move(inputs));
        CountingSource counted(cat, io.rows_in);
        drive(counted, io);
    }
};

struct RemoveColumnsCmd {
    std::string columns;
    bool strict = false;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("-c,--columns", columns, "comma-separated columns to drop")->required();
        app.add_flag("--strict", strict, "fail on unknown column names");
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        RemoveColumnsOptions options;
        options.columns = split_csv(columns);
        options.strict_unknown = strict;
        StageInput in = open_input(io, input.resolve());
        RemoveColumnsSource trimmed(in.source(), std::move(options));
        drive(trimmed, io);
        for (const std::string& warning : trimmed.warnings())
            *io.err << "remove-columns: " << warning << "\n";
    }
};

struct ValidateCmd {
    std::string on_error = "report";
    std::string report_file;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("--on-error", on_error, "report, exclude, or abort");
        app.add_option("--report-file", report_file, "also write the report as TSV");
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        ValidationOptions options;
        if (on_error == "report") options.on_error = OnError::Report;
        else if (on_error == "exclude") options.on_error = OnError::Exclude;
        else if (on_error == "abort") options.on_error = OnError::Abort;
        else throw UsageError("validate: unknown --on-error mode '" + on_error + "'");
        StageInput in = open_input(io, input.resolve());
        ValidatingSource checked(in.source(), options);
        drive(checked, io);
        render_report_text(checked.report(), *io.err, "validate");
        if (!report_file.empty()) {
            std::ofstream out = open_output_file(report_file);
            render_report_tsv(checked.report(), out);
            finish_output_file(out, report_file);
        }
    }
};

struct CleanCmd {
    std::string date_policy = "drop";
    std::string report_file;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("--date-policy", date_policy, "clamp, zero, or drop");
        app.add_option("--report-file", report_file, "write the repair report as TSV");
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        CleanOptions options;
        if (date_policy == "clamp") options.date_policy = DatePolicy::Clamp;
        else if (date_policy == "zero") options.date_policy = DatePolicy::Zero;
        else if (date_policy == "drop") options.date_policy = DatePolicy::Drop;
        else throw UsageError("clean: unknown --date-policy '" + date_policy + "'");
        StageInput in = open_input(io, input.resolve());
        CleaningSource cleaned(in.source(), options);
        drive(cleaned, io);
        if (progress) render_report_text(cleaned.report(), *io.err, "clean");
        if (!report_file.empty()) {
            std::ofstream out = open_output_file(report_file);
            render_report_tsv(cleaned.report(), out);
            finish_output_file(out, report_file);
        }
    }
};

struct AddIdCmd {
    std::string style = "prefix";
    std::string prefix = "E";
    bool overwrite = false;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("--id-style", style, "prefix (sequential) or hash (content digest)");
        app.add_option("--prefix", prefix, "id prefix");
        app.add_flag("--overwrite", overwrite, "replace existing ids too");
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        GenerateIdsOptions options;
        if (style == "prefix") options.mode = IdMode::SequentialPrefix;
        else if (style == "hash") options.mode = IdMode::ContentHash;
        else throw UsageError("add-id: unknown --id-style '" + style + "'");
        options.prefix = prefix;
        options.overwrite = overwrite;
        StageInput in = open_input(io, input.resolve());
        GenerateIdsSource ids(in.source(), options);
        drive(ids, io);
    }
};

struct ImportNtriplesCmd {
    std::string file;
    std::string prefixes;
    bool strict = false;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("file", file, "N-Triples file ('-' reads standard input)");
        app.add_option("--prefixes", prefixes, "TSV of extra prefix/base pairs");
        app.add_flag("--strict", strict, "fail on the first malformed line");
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const {
        StageCheck result{{}, progress};
        if (!file.empty()) result.inputs.push_back(file);
        return result;
    }
    void run(StageIo& io) {
        NtriplesOptions options;
        options.namespaces = default_namespaces();
        options.strict = strict;
        if (!prefixes.empty()) {
            std::ifstream in(prefixes);
            if (!in) throw IoFailure("cannot open " + prefixes);
            load_namespaces(options.namespaces, in);
        }
        std::unique_ptr<NtriplesImporter> importer;
        if (file.empty() || file == "-")
            importer = std::make_unique<NtriplesImporter>(*io.in, std::move(options), "<stdin>");
        else
            importer = open_ntriples(file, std::move(options));
        CountingSource counted(*importer, io.rows_in);
        drive(counted, io);
        if (importer->skipped() > 0)
            *io.err << "import-ntriples: skipped " << importer->skipped()
                    << " malformed line(s)\n";
    }
};

struct ExportNtriplesCmd {
    std::string prefixes;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("--prefixes", prefixes, "TSV of extra prefix/base pairs");
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        NamespaceTable namespaces = default_namespaces();
        if (!prefixes.empty()) {
            std::ifstream in(prefixes);
            if (!in) throw IoFailure("cannot open " + prefixes);
            load_namespaces(namespaces, in);
        }
        StageInput in = open_input(io, input.resolve());
        ExportStats stats = export_ntriples(in.source(), *io.out, namespaces);
        io.rows_out += stats.triples;
        io.out->flush();
        if (!*io.out) throw IoFailure("write failure on standard output");
    }
};

struct ImportConceptnetCmd {
    std::string file;
    bool english_only = false;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("file", file, "ConceptNet CSV dump ('-' reads standard input)");
        app.add_flag("--english_only,--english-only", english_only,
                     "keep only edges between English concepts");
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const {
        StageCheck result{{}, progress};
        if (!file.empty()) result.inputs.push_back(file);
        return result;
    }
    void run(StageIo& io) {
        ConceptnetOptions options;
        options.english_only = english_only;
        std::unique_ptr<ConceptnetImporter> importer;
        if (file.empty() || file == "-")
            importer = std::make_unique<ConceptnetImporter>(*io.in, options, "<stdin>");
        else
            importer = open_conceptnet(file, options);
        CountingSource counted(*importer, io.rows_in);
        drive(counted, io);
        if (importer->skipped() > 0)
            *io.err << "import-conceptnet: skipped " << importer->skipped()
                    << " malformed line(s)\n";
    }
};

struct ExportPropertyGraphCmd {
    std::string nodes_file;
    std::string edges_file;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("--nodes-file", nodes_file, "node table output")->required();
        app.add_option("--edges-file", edges_file, "edge table output")->required();
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        StageInput in = open_input(io, input.resolve());
        std::ofstream nodes = open_output_file(nodes_file);
        std::ofstream edges = open_output_file(edges_file);
        PropertyGraphStats stats = export_property_graph(in.source(), nodes, edges);
        finish_output_file(nodes, nodes_file);
        finish_output_file(edges, edges_file);
        io.rows_out += stats.edge_rows;
        if (progress)
            *io.err << "export-property-graph: " << stats.node_rows << " node row(s), "
                    << stats.edge_rows << " edge row(s)\n";
    }
};

struct GraphStatisticsCmd {
    bool directed = false;
    bool undirected = false;
    bool want_degrees = false;
    bool want_pagerank = false;
    bool want_hits = false;
    std::size_t top_k = 5;
    std::string summary_file;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        auto* directed_flag = app.add_flag("--directed", directed, "directed edges (default)");
        auto* undirected_flag =
            app.add_flag("--undirected", undirected, "treat every edge as symmetric");
        directed_flag->excludes(undirected_flag);
        undirected_flag->excludes(directed_flag);
        app.add_flag("--degrees", want_degrees, "in- and out-degree properties");
        app.add_flag("--pagerank", want_pagerank, "PageRank scores");
        app.add_flag("--hits", want_hits, "HITS hub and authority scores");
        app.add_option("--top-k", top_k, "ranked nodes per metric in the summary");
        app.add_option("--summary-file", summary_file,
                       "write the summary here instead of standard error");
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        StageInput in = open_input(io, input.resolve());
        GraphIndex graph = build_graph(in.source(), {.directed = !undirected});
        std::vector<ScoreVector> scores;
        if (want_degrees) {
            auto [in_degree, out_degree] = degrees(graph);
            scores.push_back(std::move(in_degree));
            scores.push_back(std::move(out_degree));
        }
        if (want_pagerank) scores.push_back(pagerank(graph).scores);
        if (want_hits) {
            HitsResult result = hits(graph);
            scores.push_back(std::move(result.hub));
            scores.push_back(std::move(result.authority));
        }
        std::vector<const ScoreVector*> metrics;
        metrics.reserve(scores.size());
        for (const ScoreVector& score : scores) metrics.push_back(&score);

        std::string summary = render_summary_text(summarize(graph, metrics, top_k));
        if (summary_file.empty()) {
            *io.err << summary;
        } else {
            std::ofstream out = open_output_file(summary_file);
            out << summary;
            finish_output_file(out, summary_file);
        }
        VectorEdgeSource edges = metric_edges(graph, metrics);
        drive(edges, io);
    }
};

struct ReachableNodesCmd {
    std::string props;
    std::string roots;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("--props", props, "comma-separated edge labels to follow (default all)");
        app.add_option("--root", roots, "comma-separated root nodes")->required();
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        StageInput in = open_input(io, input.resolve());
        GraphIndex graph = build_graph(in.source(), {.directed = true});
        std::vector<std::string> unknown;
        VectorEdgeSource result =
            reachable_nodes(graph, split_csv(roots), split_csv(props), &unknown);
        for (const std::string& root : unknown)
            *io.err << "reachable-nodes: unknown root '" << root << "'\n";
        drive(result, io);
    }
};

struct ConnectedComponentsCmd {
    std::string props;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("--props", props, "only consider edges with these labels");
        input.attach(app);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        StageInput in = open_input(io, input.resolve());
        GraphIndex graph = build_graph(in.source(), {.directed = true});
        VectorEdgeSource result = connected_components(graph, split_csv(props));
        drive(result, io);
    }
};

struct TextEmbeddingsCmd {
    std::vector<std::string> label_properties;
    std::vector<std::string> description_properties;
    std::vector<std::string> isa_properties;
    std::vector<std::string> has_properties;
    std::vector<std::string> property_values;
    std::string model = "baseline";
    std::size_t dimension = 100;
    InputArg input;
    bool progress = false;

    void configure(CLI::App& app) {
        app.add_option("--label-properties", label_properties, "properties naming a node");
        app.add_option("--description-properties", description_properties,
                       "properties describing a node");
        app.add_option("--isa-properties", isa_properties, "class membership properties");
        app.add_option("--has-properties", has_properties, "properties listed by name only");
        app.add_option("--property-value", property_values,
                       "properties rendered with their values");
        app.add_option("--model", model, "baseline or exec:COMMAND");
        app.add_option("--dimension", dimension, "embedding width");
        input.attach(app, /*with_positional=*/false);
        app.add_flag("--progress", progress, "per-stage diagnostics on standard error");
    }
    StageCheck check() const { return {input.list(), progress}; }
    void run(StageIo& io) {
        LexicalizationConfig config;
        config.label_properties = expand_csv(label_properties);
        config.description_properties = expand_csv(description_properties);
        config.isa_properties = expand_csv(isa_properties);
        config.has_properties = expand_csv(has_properties);
        config.property_value_properties = expand_csv(property_values);
        StageInput in = open_input(io, input.resolve());
        CountingSource counted(in.source(), io.rows_in);
        std::vector<SentenceRecord> sentences = lexicalize_all(counted, config);
        std::unique_ptr<Encoder> encoder = make_encoder(model);
        EmbedReport report;
        std::vector<EmbeddingRecord> records = embed(sentences, *encoder, dimension, &report);
        write_embeddings(records, *io.out);
        io.rows_out += records.size();
        io.out->flush();
        if (!*io.out) throw IoFailure("write failure on standard output");
        if (progress)
            *io.err << "text-embeddings: encoded " << report.encoded << ", skipped "
                    << report.empty_skipped << " empty, " << report.failed << " failed\n";
    }
};

// ------------------------------------------------------------- registry ---

template <typename Cmd>
void register_command(std::map<std::string, CommandInfo>& registry, const std::string& name,
                      const std::string& help, bool source_only, bool emits_edges) {
    CommandInfo info;
    info.help = help;
    info.source_only = source_only;
    info.emits_edges = emits_edges;
    info.check = [name, help](const std::vector<std::string>& args) {
        Cmd cmd;
        CLI::App app(help, name);
        cmd.configure(app);
        try {
            parse_reversed(app, args);
        } catch (const CLI::CallForHelp&) {
            throw HelpRequested{app.help()};
        } catch (const CLI::ParseError& error) {
            throw SchemaViolation(error.what());
        }
        return cmd.check();
    };
    info.run = [name, help](const std::vector<std::string>& args, StageIo& io) {
        Cmd cmd;
        CLI::App app(help, name);
        cmd.configure(app);
        try {
            parse_reversed(app, args);
        } catch (const CLI::CallForHelp&) {
            throw HelpRequested{app.help()};
        } catch (const CLI::ParseError& error) {
            throw UsageError(name + ": " + error.what());
        }
        cmd.run(io);
    };
    registry.emplace(name, std::move(info));
}

const std::map<std::string, CommandInfo>& command_registry() {
    static const std::map<std::string, CommandInfo> registry = [] {
        std::map<std::string, CommandInfo> commands;
        register_command<ImportNtriplesCmd>(commands, "import-ntriples",
                                            "convert N-Triples to KGTK edges", true, true);
        register_command<ImportConceptnetCmd>(commands, "import-conceptnet",
                                              "convert a ConceptNet CSV dump to KGTK edges",
                                              true, true);
        register_command<ExportNtriplesCmd>(commands, "export-ntriples",
                                            "serialize KGTK edges as N-Triples", false, false);
        register_command<ExportPropertyGraphCmd>(
            commands, "export-property-graph",
            "split KGTK edges into node and edge tables", false, false);
        register_command<FilterCmd>(commands, "filter",
                                    "keep edges matching a subject;predicate;object pattern",
                                    false, true);
        register_command<SortCmd>(commands, "sort", "order edges by key columns", false, true);
        register_command<JoinCmd>(commands, "join", "sort-merge join of two edge files", true,
                                  true);
        register_command<CatCmd>(commands, "cat", "concatenate edge files under a merged header",
                                 true, true);
        register_command<RemoveColumnsCmd>(commands, "remove-columns",
                                           "drop non-required columns", false, true);
        register_command<ValidateCmd>(commands, "validate",
                                      "check edges against the file format rules", false, true);
        register_command<CleanCmd>(commands, "clean", "repair common data errors", false, true);
        register_command<CleanCmd>(commands, "clean_data", "alias of clean", false, true);
        register_command<AddIdCmd>(commands, "add-id", "fill in missing edge ids", false, true);
        register_command<GraphStatisticsCmd>(
            commands, "graph-statistics",
            "graph summary plus degree/PageRank/HITS properties", false, true);
        register_command<ReachableNodesCmd>(commands, "reachable-nodes",
                                            "closure of root nodes over selected properties",
                                            false, true);
        register_command<ConnectedComponentsCmd>(commands, "connected-components",
                                                 "undirected connected component per node",
                                                 false, true);
        register_command<TextEmbeddingsCmd>(commands, "text-embeddings",
                                            "sentence embeddings for every node", false, false);
        return commands;
    }();
    return registry;
}

std::string usage_text() {
    std::string text = "usage: kgtk SUBCOMMAND [ARGS] [/ SUBCOMMAND [ARGS]]...\n\nsubcommands:\n";
    std::size_t width = 0;
    for (const auto& [name, info] : command_registry()) width = std::max(width, name.size());
    for (const auto& [name, info] : command_registry()) {
        text += "  " + name + std::string(width - name.size() + 2, ' ') + info.help + "\n";
    }
    text += "\nSUBCOMMAND --help shows the flags of one subcommand.\n";
    return text;
}

// Strips the rebound input file out of a later stage's argument vector.
void remove_input_tokens(std::vector<std::string>& args, const std::string& path) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == path) {
            bool flagged = i > 0 && (args[i - 1] == "-i" || args[i - 1] == "--input");
            args.erase(args.begin() + long(i) - (flagged ? 1 : 0), args.begin() + long(i) + 1);
            return;
        }
        if (args[i] == "--input=" + path || args[i] == "-i" + path) {
            args.erase(args.begin() + long(i));
            return;
        }
    }
}

int exit_code_of(const std::exception_ptr& error, std::string& message) {
    try {
        std::rethrow_exception(error);
    } catch (const std::exception& e) {
        message = e.what();
        return exit_code_for(e);
    } catch (...) {
        message = "unknown error";
        return 3;
    }
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> list;
        for (const auto& [name, info] : command_registry()) list.push_back(name);
        return list;
    }();
    return names;
}

PipelinePlan parse_pipeline(const std::vector<std::string>& args) {
    if (args.empty()) throw UsageError("no subcommand given");

    PipelinePlan plan;
    StageSpec current;
    bool expecting_name = true;
    for (const std::string& token : args) {
        if (token == "/") {
            if (expecting_name)
                throw EmptyStage("empty pipeline stage (nothing between '/' separators)");
            plan.stages.push_back(std::move(current));
            current = {};
            expecting_name = true;
        } else if (expecting_name) {
            current.name = token;
            expecting_name = false;
        } else {
            current.args.push_back(token);
        }
    }
    if (expecting_name) throw EmptyStage("empty pipeline stage after trailing '/'");
    plan.stages.push_back(std::move(current));

    const auto& registry = command_registry();
    std::vector<StageCheck> checks(plan.stages.size());
    for (std::size_t i = 0; i < plan.stages.size(); ++i) {
        const StageSpec& stage = plan.stages[i];
        auto entry = registry.find(stage.name);
        if (entry == registry.end())
            throw UnknownSubcommand("unknown subcommand '" + stage.name + "'");
        const CommandInfo& info = entry->second;
        if (info.source_only && i > 0)
            throw UsageError("'" + stage.name + "' reads its own inputs and must be the first stage");
        if (!info.emits_edges && i + 1 < plan.stages.size())
            throw UsageError("'" + stage.name + "' does not emit KGTK edges and must be the last stage");
        try {
            checks[i] = info.check(stage.args);
        } catch (const SchemaViolation& error) {
            throw BadStageArgs("stage " + std::to_string(i + 1) + " (" + stage.name + "): " +
                               error.what());
        }
        plan.progress = plan.progress || checks[i].progress;
    }

    // A file named by a later stage is the pipeline's source: bind it to the
    // first stage.
    bool first_has_input = !checks[0].inputs.empty();
    for (std::size_t i = 1; i < plan.stages.size(); ++i) {
        for (const std::string& path : checks[i].inputs) {
            if (first_has_input)
                throw UsageError("only the first stage may name an input file");
            remove_input_tokens(plan.stages[i].args, path);
            plan.stages[0].args.push_back(path);
            first_has_input = true;
        }
    }
    if (!checks[0].inputs.empty() || first_has_input) {
        try {
            registry.at(plan.stages[0].name).check(plan.stages[0].args);
        } catch (const SchemaViolation& error) {
            throw BadStageArgs("stage 1 (" + plan.stages[0].name + "): " + error.what());
        }
    }
    return plan;
}

int exit_code_for(const std::exception& error) {
    if (auto* stage = dynamic_cast<const StageFailure*>(&error)) return stage->exit_code();
    if (dynamic_cast<const UsageError*>(&error)) return 1;
    if (dynamic_cast<const DataError*>(&error)) return 2;
    return 3;
}

void run_pipeline(const PipelinePlan& plan, CliStreams io) {
    const auto& registry = command_registry();
    const std::size_t stage_count = plan.stages.size();
    if (stage_count == 0) throw UsageError("empty pipeline");

    using Clock = std::chrono::steady_clock;
    auto print_progress = [&](std::size_t index, const StageIo& stage_io, double millis) {
        *io.err << "stage " << index + 1 << " (" << plan.stages[index].name
                << "): rows in=" << stage_io.rows_in << " rows out=" << stage_io.rows_out
                << " wall=" << std::llround(millis) << "ms\n";
    };

    if (stage_count == 1) {
        StageIo stage_io;
        stage_io.in = io.in;
        stage_io.out = io.out;
        stage_io.err = io.err;
        stage_io.progress = plan.progress;
        auto start = Clock::now();
        registry.at(plan.stages[0].name).run(plan.stages[0].args, stage_io);
        if (plan.progress)
            print_progress(0, stage_io,
                           std::chrono::duration<double, std::milli>(Clock::now() - start).count());
        return;
    }

    struct StageResult {
        std::exception_ptr error;
        bool upstream_failed = false;
        StageIo io;
        double millis = 0.0;
        std::ostringstream errors;  // stderr buffer, replayed in stage order
    };
    std::vector<std::unique_ptr<RowChannel>> channels;
    for (std::size_t i = 0; i + 1 < stage_count; ++i)
        channels.push_back(std::make_unique<RowChannel>(1024));
    std::vector<StageResult> results(stage_count);
    std::vector<std::thread> workers;
    workers.reserve(stage_count);

    for (std::size_t i = 0; i < stage_count; ++i) {
        workers.emplace_back([&, i] {
            StageResult& result = results[i];
            std::optional<ChannelSource> upstream;
            std::optional<ChannelRowSink> downstream;
            if (i > 0) {
                upstream.emplace(*channels[i - 1]);
                result.io.upstream = &*upstream;
            } else {
                result.io.in = io.in;
            }
            if (i + 1 < stage_count) {
                downstream.emplace(*channels[i]);
                result.io.downstream = &*downstream;
            } else {
                result.io.out = io.out;
            }
            result.io.err = &result.errors;
            result.io.progress = plan.progress;

            auto start = Clock::now();
            try {
                registry.at(plan.stages[i].name).run(plan.stages[i].args, result.io);
                if (i + 1 < stage_count) channels[i]->close_producer(false);
            } catch (const UpstreamFailed&) {
                result.upstream_failed = true;
                if (i + 1 < stage_count) channels[i]->close_producer(true);
            } catch (...) {
                result.error = std::current_exception();
                if (i + 1 < stage_count) channels[i]->close_producer(true);
            }
            if (i > 0) channels[i - 1]->close_consumer();
            result.millis =
                std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        });
    }
    for (std::thread& worker : workers) worker.join();

    for (std::size_t i = 0; i < stage_count; ++i) *io.err << results[i].errors.str();
    if (plan.progress)
        for (std::size_t i = 0; i < stage_count; ++i) print_progress(i, results[i].io, results[i].millis);

    for (std::size_t i = 0; i < stage_count; ++i) {
        if (!results[i].error) continue;
        std::string message;
        int code = exit_code_of(results[i].error, message);
        throw StageFailure(i, code,
                           "stage " + std::to_string(i + 1) + " (" + plan.stages[i].name +
                               "): " + message);
    }
}

int run_cli(const std::vector<std::string>& args, CliStreams io) {
    try {
        if (args.empty()) {
            *io.err << usage_text();
            return 1;
        }
        if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
            *io.out << usage_text();
            return 0;
        }
        PipelinePlan plan = parse_pipeline(args);
        run_pipeline(plan, io);
        return 0;
    } catch (const HelpRequested& help) {
        *io.out << help.text;
        return 0;
    } catch (const std::exception& error) {
        *io.err << "kgtk: " << error.what() << "\n";
        io.err->flush();
        return exit_code_for(error);
    }
}

}  // namespace kgtk
