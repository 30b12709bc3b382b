#include "kgtk/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "kgtk/errors.hpp"
#include "kgtk/values.hpp"

namespace kgtk {

namespace {

std::uint32_t intern(std::vector<std::string>& names,
                     std::unordered_map<std::string, std::uint32_t>& ids,
                     std::string_view text) {
    auto [it, inserted] = ids.try_emplace(std::string(text),
                                          std::uint32_t(names.size()));
    if (inserted) names.push_back(it->first);
    return it->second;
}

void build_csr(std::size_t node_count, const std::vector<GraphIndex::Edge>& adjacency,
               bool reverse, std::vector<std::uint32_t>& offsets,
               std::vector<std::uint32_t>& targets, std::vector<std::uint32_t>& labels) {
    offsets.assign(node_count + 1, 0);
    for (const auto& e : adjacency) ++offsets[(reverse ? e.dst : e.src) + 1];
    for (std::size_t i = 1; i <= node_count; ++i) offsets[i] += offsets[i - 1];
    targets.resize(adjacency.size());
    labels.resize(adjacency.size());
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& e : adjacency) {
        std::uint32_t from = reverse ? e.dst : e.src;
        std::uint32_t to = reverse ? e.src : e.dst;
        std::uint32_t pos = cursor[from]++;
        targets[pos] = to;
        labels[pos] = e.label;
    }
}

Header three_column_header() {
    return resolve_header({"node1", "label", "node2"}, {});
}

EdgeRecord make_row(std::string node1, std::string label, std::string node2) {
    EdgeRecord rec;
    rec.cells = {std::move(node1), std::move(label), std::move(node2)};
    rec.line_number = 0;
    return rec;
}

// Label filter: empty selection allows everything.
std::vector<char> label_mask(const GraphIndex& graph, const std::vector<std::string>& props) {
    std::vector<char> allow(graph.label_names.size(), props.empty() ? 1 : 0);
    for (const auto& p : props)
        if (auto id = graph.find_label(p)) allow[*id] = 1;
    return allow;
}

double l2_delta(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

void l2_normalize(std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    double norm = std::sqrt(sum);
    if (norm > 0.0)
        for (double& x : v) x /= norm;
}

std::string format_metric_value(Metric metric, double value) {
    if (metric_is_integer(metric)) return std::to_string(static_cast<long long>(value));
    return format_double(value);
}

}  // namespace

std::optional<std::uint32_t> GraphIndex::find_node(std::string_view name) const {
    auto it = node_ids.find(std::string(name));
    if (it == node_ids.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> GraphIndex::find_label(std::string_view name) const {
    auto it = label_ids.find(std::string(name));
    if (it == label_ids.end()) return std::nullopt;
    return it->second;
}

GraphIndex build_graph(EdgeSource& source, const BuildOptions& options) {
    GraphIndex graph;
    graph.directed = options.directed;
    const Header& header = source.header();
    try {
        EdgeRecord rec;
        while (source.next(rec)) {
            std::uint32_t src = intern(graph.node_names, graph.node_ids, rec.cell(header.node1));
            std::uint32_t dst = intern(graph.node_names, graph.node_ids, rec.cell(header.node2));
            std::uint32_t label = intern(graph.label_names, graph.label_ids, rec.cell(header.label));
            graph.edges.push_back({src, label, dst});
        }
        std::vector<GraphIndex::Edge> adjacency = graph.edges;
        if (!options.directed) {
            adjacency.reserve(adjacency.size() * 2);
            for (std::size_t i = 0, n = graph.edges.size(); i < n; ++i) {
                const auto& e = graph.edges[i];
                adjacency.push_back({e.dst, e.label, e.src});
            }
        }
        build_csr(graph.node_count(), adjacency, false,
                  graph.out_offsets, graph.out_targets, graph.out_labels);
        build_csr(graph.node_count(), adjacency, true,
                  graph.in_offsets, graph.in_targets, graph.in_labels);
    } catch (const std::bad_alloc&) {
        throw OutOfMemory("graph build ran out of memory after " +
                          std::to_string(graph.node_names.size()) + " nodes, " +
                          std::to_string(graph.edges.size()) + " edges");
    }
    return graph;
}

std::string_view metric_property(Metric metric) {
    switch (metric) {
        case Metric::PageRank: return "vertex_pagerank";
        case Metric::Hub: return "vertex_hubs";
        case Metric::Authority: return "vertex_auth";
        case Metric::InDegree: return "vertex_in_degree";
        case Metric::OutDegree: return "vertex_out_degree";
    }
    return "vertex_unknown";
}

bool metric_is_integer(Metric metric) {
    return metric == Metric::InDegree || metric == Metric::OutDegree;
}

PagerankResult pagerank(const GraphIndex& graph, const PagerankOptions& options) {
    const std::size_t n = graph.node_count();
    if (n == 0) throw EmptyInput("pagerank needs a non-empty graph");
    std::vector<double> rank(n, 1.0 / double(n));
    std::vector<double> next(n);
    PagerankResult result;
    int iter = 0;
    while (iter < options.max_iterations) {
        double dangling = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            if (graph.out_degree(std::uint32_t(v)) == 0) dangling += rank[v];
        const double base =
            (1.0 - options.damping) / double(n) + options.damping * dangling / double(n);
        double delta = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            double acc = 0.0;
            for (std::uint32_t i = graph.in_offsets[v]; i < graph.in_offsets[v + 1]; ++i) {
                std::uint32_t u = graph.in_targets[i];
                acc += rank[u] / double(graph.out_degree(u));
            }
            next[v] = base + options.damping * acc;
            delta += std::abs(next[v] - rank[v]);
        }
        rank.swap(next);
        ++iter;
        if (delta < options.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.iterations = iter;
    result.scores = {Metric::PageRank, std::move(rank)};
    return result;
}

HitsResult hits(const GraphIndex& graph, const HitsOptions& options) {
    if (graph.edge_count() == 0) throw EmptyInput("hits needs at least one edge");
    const std::size_t n = graph.node_count();
    std::vector<double> hub(n, 1.0 / std::sqrt(double(n)));
    std::vector<double> auth(n, 0.0);
    std::vector<double> new_hub(n), new_auth(n);
    HitsResult result;
    int iter = 0;
    while (iter < options.max_iterations) {
        for (std::size_t v = 0; v < n; ++v) {
            double acc = 0.0;
            for (std::uint32_t i = graph.in_offsets[v]; i < graph.in_offsets[v + 1]; ++i)
                acc += hub[graph.in_targets[i]];
            new_auth[v] = acc;
        }
        l2_normalize(new_auth);
        for (std::size_t v = 0; v < n; ++v) {
            double acc = 0.0;
            for (std::uint32_t i = graph.out_offsets[v]; i < graph.out_offsets[v + 1]; ++i)
                acc += new_auth[graph.out_targets[i]];
            new_hub[v] = acc;
        }
        l2_normalize(new_hub);
        double delta = std::max(l2_delta(new_auth, auth), l2_delta(new_hub, hub));
        auth.swap(new_auth);
        hub.swap(new_hub);
        ++iter;
        if (delta < options.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.iterations = iter;
    result.hub = {Metric::Hub, std::move(hub)};
    result.authority = {Metric::Authority, std::move(auth)};
    return result;
}

std::pair<ScoreVector, ScoreVector> degrees(const GraphIndex& graph) {
    const std::size_t n = graph.node_count();
    ScoreVector in{Metric::InDegree, std::vector<double>(n)};
    ScoreVector out{Metric::OutDegree, std::vector<double>(n)};
    for (std::size_t v = 0; v < n; ++v) {
        in.values[v] = graph.in_degree(std::uint32_t(v));
        out.values[v] = graph.out_degree(std::uint32_t(v));
    }
    return {std::move(in), std::move(out)};
}

VectorEdgeSource reachable_nodes(const GraphIndex& graph,
                                 const std::vector<std::string>& roots,
                                 const std::vector<std::string>& props,
                                 std::vector<std::string>* unknown_roots) {
    std::vector<char> allow = label_mask(graph, props);
    std::vector<EdgeRecord> rows;
    // visited is an epoch stamp so one buffer serves every root
    std::vector<std::uint32_t> visited(graph.node_count(), 0);
    std::uint32_t epoch = 0;
    std::vector<std::uint32_t> queue;
    std::unordered_set<std::string> seen_roots;
    for (const auto& root : roots) {
        if (!seen_roots.insert(root).second) continue;
        auto root_id = graph.find_node(root);
        if (!root_id) {
            if (unknown_roots) unknown_roots->push_back(root);
            continue;
        }
        ++epoch;
        queue.clear();
        std::size_t head = 0;
        auto expand = [&](std::uint32_t u) {
            for (std::uint32_t i = graph.out_offsets[u]; i < graph.out_offsets[u + 1]; ++i) {
                if (!allow[graph.out_labels[i]]) continue;
                std::uint32_t t = graph.out_targets[i];
                if (visited[t] == epoch) continue;
                visited[t] = epoch;
                queue.push_back(t);
            }
        };
        // the root joins its own closure only by coming back through a cycle
        expand(*root_id);
        while (head < queue.size()) {
            std::uint32_t v = queue[head++];
            rows.push_back(make_row(root, "reachable", graph.node(v)));
            expand(v);
        }
    }
    return VectorEdgeSource(three_column_header(), std::move(rows));
}

namespace {

std::uint32_t uf_find(std::vector<std::uint32_t>& parent, std::uint32_t v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}

}  // namespace

VectorEdgeSource connected_components(const GraphIndex& graph,
                                      const std::vector<std::string>& restrict_props) {
    std::vector<char> allow = label_mask(graph, restrict_props);
    const std::size_t n = graph.node_count();
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::uint32_t> rank(n, 0);
    std::vector<char> participates(n, 0);
    for (const auto& e : graph.edges) {
        if (!allow[e.label]) continue;
        participates[e.src] = participates[e.dst] = 1;
        std::uint32_t a = uf_find(parent, e.src);
        std::uint32_t b = uf_find(parent, e.dst);
        if (a == b) continue;
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b]) ++rank[a];
    }
    std::vector<const std::string*> smallest(n, nullptr);
    for (std::uint32_t v = 0; v < n; ++v) {
        if (!participates[v]) continue;
        std::uint32_t root = uf_find(parent, v);
        if (!smallest[root] || graph.node(v) < *smallest[root])
            smallest[root] = &graph.node(v);
    }
    std::vector<EdgeRecord> rows;
    for (std::uint32_t v = 0; v < n; ++v) {
        if (!participates[v]) continue;
        rows.push_back(make_row(graph.node(v), "connected_component",
                                *smallest[uf_find(parent, v)]));
    }
    return VectorEdgeSource(three_column_header(), std::move(rows));
}

GraphSummary summarize(const GraphIndex& graph,
                       const std::vector<const ScoreVector*>& metrics,
                       std::size_t top_k) {
    GraphSummary summary;
    summary.node_count = graph.node_count();
    summary.edge_count = graph.edge_count();

    std::vector<std::uint64_t> freq(graph.label_names.size(), 0);
    for (const auto& e : graph.edges) ++freq[e.label];
    std::vector<std::pair<std::string, std::uint64_t>> labels;
    for (std::size_t i = 0; i < freq.size(); ++i)
        labels.emplace_back(graph.label_names[i], freq[i]);
    std::sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (labels.size() > top_k) labels.resize(top_k);
    summary.top_labels = std::move(labels);

    for (const ScoreVector* metric : metrics) {
        MetricStats stats;
        stats.name = std::string(metric_property(metric->metric));
        const auto& values = metric->values;
        if (!values.empty()) {
            stats.min = values[0];
            stats.max = values[0];
            double sum = 0.0;
            for (double v : values) {
                stats.min = std::min(stats.min, v);
                stats.max = std::max(stats.max, v);
                sum += v;
            }
            stats.mean = sum / double(values.size());
            std::vector<std::pair<std::string, double>> top;
            for (std::size_t v = 0; v < values.size(); ++v)
                top.emplace_back(graph.node_names[v], values[v]);
            std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
            });
            if (top.size() > top_k) top.resize(top_k);
            stats.top = std::move(top);
        }
        summary.metrics.push_back(std::move(stats));
    }
    return summary;
}

std::string render_summary_text(const GraphSummary& summary) {
    std::string out;
    out += "nodes: " + std::to_string(summary.node_count) + "\n";
    out += "edges: " + std::to_string(summary.edge_count) + "\n";
    if (!summary.top_labels.empty()) {
        out += "top labels:\n";
        for (const auto& [label, count] : summary.top_labels)
            out += "  " + label + ": " + std::to_string(count) + "\n";
    }
    for (const auto& metric : summary.metrics) {
        out += metric.name + ": min=" + format_double(metric.min) +
               " max=" + format_double(metric.max) +
               " mean=" + format_double(metric.mean) + "\n";
        for (const auto& [node, value] : metric.top)
            out += "  " + node + ": " + format_double(value) + "\n";
    }
    return out;
}

VectorEdgeSource metric_edges(const GraphIndex& graph,
                              const std::vector<const ScoreVector*>& metrics) {
    std::vector<EdgeRecord> rows;
    for (const ScoreVector* metric : metrics) {
        std::string property(metric_property(metric->metric));
        for (std::size_t v = 0; v < metric->values.size(); ++v)
            rows.push_back(make_row(graph.node_names[v], property,
                                    format_metric_value(metric->metric, metric->values[v])));
    }
    return VectorEdgeSource(three_column_header(), std::move(rows));
}

}  // namespace kgtk
