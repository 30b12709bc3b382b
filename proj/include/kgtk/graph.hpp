#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgtk/edge_io.hpp"

namespace kgtk {

// In-memory graph over raw cell text. Node identity is the exact node1/node2
// cell; labels are interned separately. Adjacency is CSR; when the graph is
// built undirected, the adjacency (not the edge list) holds both directions.
struct GraphIndex {
    struct Edge {
        std::uint32_t src;
        std::uint32_t label;
        std::uint32_t dst;
    };

    bool directed = true;
    std::vector<std::string> node_names;
    std::unordered_map<std::string, std::uint32_t> node_ids;
    std::vector<std::string> label_names;
    std::unordered_map<std::string, std::uint32_t> label_ids;
    std::vector<Edge> edges;  // one per input row, as given

    std::vector<std::uint32_t> out_offsets, out_targets, out_labels;
    std::vector<std::uint32_t> in_offsets, in_targets, in_labels;

    std::size_t node_count() const { return node_names.size(); }
    std::size_t edge_count() const { return edges.size(); }
    const std::string& node(std::uint32_t id) const { return node_names[id]; }
    std::optional<std::uint32_t> find_node(std::string_view name) const;
    std::optional<std::uint32_t> find_label(std::string_view name) const;
    std::uint32_t out_degree(std::uint32_t v) const {
        return out_offsets[v + 1] - out_offsets[v];
    }
    std::uint32_t in_degree(std::uint32_t v) const {
        return in_offsets[v + 1] - in_offsets[v];
    }
};

struct BuildOptions {
    bool directed = true;
};

// Drains the stream. Throws OutOfMemory with the counts reached so far if
// allocation fails mid-build.
GraphIndex build_graph(EdgeSource& source, const BuildOptions& options = {});

enum class Metric { PageRank, Hub, Authority, InDegree, OutDegree };

// Property name used when per-node values are emitted as edges.
std::string_view metric_property(Metric metric);
bool metric_is_integer(Metric metric);

struct ScoreVector {
    Metric metric = Metric::PageRank;
    std::vector<double> values;  // aligned to interning indices
};

struct PagerankOptions {
    double damping = 0.85;
    double tolerance = 1e-8;
    int max_iterations = 100;
};

struct PagerankResult {
    ScoreVector scores;
    int iterations = 0;
    bool converged = false;
};

// Power iteration with dangling mass spread uniformly; scores sum to 1.
// Parallel edges weight the transition multiply. Throws EmptyInput on an
// empty graph.
PagerankResult pagerank(const GraphIndex& graph, const PagerankOptions& options = {});

struct HitsOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
};

struct HitsResult {
    ScoreVector hub;
    ScoreVector authority;
    int iterations = 0;
    bool converged = false;
};

// Alternating authority/hub updates, L2-normalized each half step.
// Throws EmptyInput when the graph has no edges.
HitsResult hits(const GraphIndex& graph, const HitsOptions& options = {});

// Multiset counts; for a directed graph sum(in) == sum(out) == edge count.
std::pair<ScoreVector, ScoreVector> degrees(const GraphIndex& graph);

// Breadth-first closure from each root following only edges whose label is in
// props (empty props = every label). Emits (root, "reachable", node) rows; a
// root appears in its own closure only when a cycle leads back to it. Unknown
// roots are skipped and appended to *unknown_roots when given. Duplicate
// roots are traversed once.
VectorEdgeSource reachable_nodes(const GraphIndex& graph,
                                 const std::vector<std::string>& roots,
                                 const std::vector<std::string>& props,
                                 std::vector<std::string>* unknown_roots = nullptr);

// Union-find over the edge list treated as undirected, keeping only labels in
// restrict_props when non-empty. Emits (node, "connected_component", id) for
// every node on a considered edge; the id is the lexicographically smallest
// member symbol.
VectorEdgeSource connected_components(const GraphIndex& graph,
                                      const std::vector<std::string>& restrict_props = {});

struct MetricStats {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    std::vector<std::pair<std::string, double>> top;  // value desc, symbol asc
};

struct GraphSummary {
    std::uint64_t node_count = 0;
    std::uint64_t edge_count = 0;
    std::vector<std::pair<std::string, std::uint64_t>> top_labels;  // count desc, label asc
    std::vector<MetricStats> metrics;
};

GraphSummary summarize(const GraphIndex& graph,
                       const std::vector<const ScoreVector*>& metrics,
                       std::size_t top_k = 5);

std::string render_summary_text(const GraphSummary& summary);

// One (node, property, value) row per node per metric, nodes in intern order.
VectorEdgeSource metric_edges(const GraphIndex& graph,
                              const std::vector<const ScoreVector*>& metrics);

}  // namespace kgtk
