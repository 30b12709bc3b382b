#include "kgtk/transforms.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

namespace fs = std::filesystem;

namespace kgtk {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::optional<std::unordered_set<std::string>> parse_pattern_set(std::string_view segment) {
    segment = trim(segment);
    if (segment.empty()) return std::nullopt;
    std::unordered_set<std::string> items;
    std::size_t pos = 0;
    for (;;) {
        std::size_t comma = segment.find(',', pos);
        std::string_view item = comma == std::string_view::npos
                                    ? segment.substr(pos)
                                    : segment.substr(pos, comma - pos);
        item = trim(item);
        if (!item.empty()) items.emplace(item);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (items.empty()) return std::nullopt;
    return items;
}

}  // namespace

FilterPattern parse_pattern(std::string_view text) {
    std::vector<std::string_view> segments;
    std::size_t pos = 0;
    for (;;) {
        std::size_t semi = text.find(';', pos);
        if (semi == std::string_view::npos) {
            segments.push_back(text.substr(pos));
            break;
        }
        segments.push_back(text.substr(pos, semi - pos));
        pos = semi + 1;
    }
    if (segments.size() != 3)
        throw PatternSyntax("pattern must be \"subject ; predicate ; object\", found " +
                            std::to_string(segments.size() - 1) + " ';' separator(s)");
    FilterPattern pattern;
    pattern.subject = parse_pattern_set(segments[0]);
    pattern.predicate = parse_pattern_set(segments[1]);
    pattern.object = parse_pattern_set(segments[2]);
    return pattern;
}

bool FilterSource::next(EdgeRecord& out) {
    const Header& h = inner_.header();
    auto matches = [](const std::optional<std::unordered_set<std::string>>& set,
                      std::string_view cell) {
        return !set || set->count(std::string(cell)) > 0;
    };
    while (inner_.next(out)) {
        if (matches(pattern_.subject, out.cell(h.node1)) &&
            matches(pattern_.predicate, out.cell(h.label)) &&
            matches(pattern_.object, out.cell(h.node2)))
            return true;
    }
    return false;
}

// ------------------------------------------------------------------ sort ---

namespace {

std::optional<double> leading_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') ++begin;
    double value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) return std::nullopt;
    return value;
}

}  // namespace

int compare_cells(std::string_view a, std::string_view b, bool numeric) {
    if (numeric) {
        auto na = leading_number(a);
        auto nb = leading_number(b);
        if (na && nb) {
            if (*na < *nb) return -1;
            if (*na > *nb) return 1;
        } else if (na) {
            return -1;  // numeric cells order before everything else
        } else if (nb) {
            return 1;
        }
    }
    int c = a.compare(b);
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

std::size_t resolve_column(const Header& header, const std::string& selector) {
    std::size_t index = header.find(selector);
    if (index != npos) return index;
    if (!selector.empty() &&
        std::all_of(selector.begin(), selector.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        std::size_t position = 0;
        std::from_chars(selector.data(), selector.data() + selector.size(), position);
        if (position >= 1 && position <= header.columns.size()) return position - 1;
    }
    throw UnknownColumn("unknown column '" + selector + "'");
}

namespace {

fs::path temp_base(const std::string& configured) {
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("KGTK_TMPDIR"); env && *env) return env;
    return fs::temp_directory_path();
}

std::size_t row_cost(const EdgeRecord& row) {
    std::size_t cost = 48;
    for (const auto& cell : row.cells) cost += cell.size() + 32;
    return cost;
}

void write_run_line(std::ostream& out, const EdgeRecord& row) {
    for (std::size_t i = 0; i < row.cells.size(); ++i) {
        if (i) out.put('\t');
        out.write(row.cells[i].data(), std::streamsize(row.cells[i].size()));
    }
    out.put('\n');
}

bool read_run_line(std::istream& in, EdgeRecord& row) {
    std::string line;
    if (!std::getline(in, line)) return false;
    row.cells.clear();
    std::size_t start = 0;
    for (;;) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            row.cells.emplace_back(line.substr(start));
            return true;
        }
        row.cells.emplace_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

constexpr std::size_t kMergeFanIn = 256;

}  // namespace

struct SortedSource::Impl {
    std::vector<SortSelector> keys;
    std::vector<std::size_t> indices;

    std::vector<EdgeRecord> rows;  // in-memory path
    std::size_t next_row = 0;

    fs::path dir;
    std::vector<fs::path> runs;
    std::uint64_t run_counter = 0;

    struct RunReader {
        std::ifstream in;
        EdgeRecord current;
    };
    std::vector<std::unique_ptr<RunReader>> readers;
    std::vector<std::size_t> heap;  // reader indices, min-heap by (key, index)

    int compare_rows(const EdgeRecord& a, const EdgeRecord& b) const {
        for (std::size_t k = 0; k < indices.size(); ++k) {
            int c = compare_cells(a.cell(indices[k]), b.cell(indices[k]), keys[k].numeric);
            if (keys[k].descending) c = -c;
            if (c != 0) return c;
        }
        return 0;
    }

    void sort_batch(std::vector<EdgeRecord>& batch) const {
        std::stable_sort(batch.begin(), batch.end(),
                         [this](const EdgeRecord& a, const EdgeRecord& b) {
                             return compare_rows(a, b) < 0;
                         });
    }

    void ensure_dir(const std::string& configured) {
        if (!dir.empty()) return;
        dir = temp_base(configured) /
              ("kgtk-sort-" + std::to_string(::getpid()) + "-" +
               std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoFailure("cannot create temp directory " + dir.string());
    }

    fs::path spill(std::vector<EdgeRecord>& batch, const std::string& configured) {
        ensure_dir(configured);
        sort_batch(batch);
        fs::path path = dir / ("run-" + std::to_string(run_counter++) + ".tsv");
        std::ofstream out(path, std::ios::binary);
        if (!out.is_open()) throw IoFailure("cannot create temp run " + path.string());
        for (const EdgeRecord& row : batch) write_run_line(out, row);
        out.flush();
        if (!out) throw TempSpaceExhausted("temp space exhausted writing " + path.string());
        batch.clear();
        batch.shrink_to_fit();
        return path;
    }

    // Heap order: smallest key first; ties resolved toward the earlier run,
    // which preserves the global input order for equal keys.
    bool heap_less(std::size_t a, std::size_t b) const {
        int c = compare_rows(readers[a]->current, readers[b]->current);
        if (c != 0) return c < 0;
        return a < b;
    }
    void heap_push(std::size_t value) {
        heap.push_back(value);
        std::size_t i = heap.size() - 1;
        while (i > 0) {
            std::size_t parent = (i - 1) / 2;
            if (!heap_less(heap[i], heap[parent])) break;
            std::swap(heap[i], heap[parent]);
            i = parent;
        }
    }
    std::size_t heap_pop() {
        std::size_t top = heap[0];
        heap[0] = heap.back();
        heap.pop_back();
        std::size_t i = 0;
        for (;;) {
            std::size_t l = 2 * i + 1, r = 2 * i + 2, smallest = i;
            if (l < heap.size() && heap_less(heap[l], heap[smallest])) smallest = l;
            if (r < heap.size() && heap_less(heap[r], heap[smallest])) smallest = r;
            if (smallest == i) break;
            std::swap(heap[i], heap[smallest]);
            i = smallest;
        }
        return top;
    }

    void open_merge(const std::vector<fs::path>& paths) {
        readers.clear();
        heap.clear();
        readers.reserve(paths.size());
        for (const fs::path& path : paths) {
            auto reader = std::make_unique<RunReader>();
            reader->in.open(path, std::ios::binary);
            if (!reader->in.is_open()) throw IoFailure("cannot reopen temp run " + path.string());
            readers.push_back(std::move(reader));
        }
        for (std::size_t i = 0; i < readers.size(); ++i)
            if (read_run_line(readers[i]->in, readers[i]->current)) heap_push(i);
    }

    // Collapses runs until one merge pass can take them all.
    void reduce_runs(const std::string& configured) {
        while (runs.size() > kMergeFanIn) {
            std::vector<fs::path> merged;
            for (std::size_t start = 0; start < runs.size(); start += kMergeFanIn) {
                std::size_t count = std::min(kMergeFanIn, runs.size() - start);
                if (count == 1) {
                    merged.push_back(runs[start]);
                    continue;
                }
                std::vector<fs::path> group(runs.begin() + long(start),
                                            runs.begin() + long(start + count));
                open_merge(group);
                fs::path path = dir / ("run-" + std::to_string(run_counter++) + ".tsv");
                std::ofstream out(path, std::ios::binary);
                if (!out.is_open())
                    throw IoFailure("cannot create temp run " + path.string());
                while (!heap.empty()) {
                    std::size_t idx = heap_pop();
                    write_run_line(out, readers[idx]->current);
                    if (read_run_line(readers[idx]->in, readers[idx]->current)) heap_push(idx);
                }
                out.flush();
                if (!out) throw TempSpaceExhausted("temp space exhausted writing " + path.string());
                readers.clear();
                for (const fs::path& old : group) {
                    std::error_code ec;
                    fs::remove(old, ec);
                }
                merged.push_back(path);
            }
            runs = std::move(merged);
        }
        (void)configured;
    }
};

SortedSource::SortedSource(EdgeSource& inner, SortOptions options)
    : inner_(inner), options_(std::move(options)), impl_(std::make_unique<Impl>()) {
    if (options_.keys.empty())
        options_.keys = {{"node1", false, false}, {"label", false, false},
                         {"node2", false, false}};
    impl_->keys = options_.keys;
    for (const SortSelector& key : options_.keys)
        impl_->indices.push_back(resolve_column(inner_.header(), key.column));
}

SortedSource::~SortedSource() {
    if (impl_ && !impl_->dir.empty()) {
        std::error_code ec;
        fs::remove_all(impl_->dir, ec);
    }
}

void SortedSource::prime() {
    primed_ = true;
    std::vector<EdgeRecord> batch;
    std::size_t bytes = 0;
    EdgeRecord rec;
    while (inner_.next(rec)) {
        bytes += row_cost(rec);
        batch.push_back(std::move(rec));
        if (bytes >= options_.memory_budget) {
            impl_->runs.push_back(impl_->spill(batch, options_.temp_dir));
            bytes = 0;
        }
    }
    if (impl_->runs.empty()) {
        impl_->sort_batch(batch);
        impl_->rows = std::move(batch);
        return;
    }
    if (!batch.empty()) impl_->runs.push_back(impl_->spill(batch, options_.temp_dir));
    spilled_runs_ = impl_->runs.size();
    impl_->reduce_runs(options_.temp_dir);
    impl_->open_merge(impl_->runs);
}

bool SortedSource::next(EdgeRecord& out) {
    if (!primed_) prime();
    Impl& impl = *impl_;
    if (impl.readers.empty()) {
        if (impl.next_row >= impl.rows.size()) return false;
        out = std::move(impl.rows[impl.next_row++]);
        return true;
    }
    if (impl.heap.empty()) return false;
    std::size_t idx = impl.heap_pop();
    out = std::move(impl.readers[idx]->current);
    if (read_run_line(impl.readers[idx]->in, impl.readers[idx]->current)) impl.heap_push(idx);
    return true;
}

// ------------------------------------------------------------------ join ---

struct MergeJoinSource::Side {
    EdgeSource* source = nullptr;
    std::unique_ptr<SortedSource> presorted;
    std::vector<std::size_t> key_indices;
    const char* name = "";
    std::size_t cap = 0;

    EdgeRecord lookahead;
    bool has_lookahead = false;
    bool exhausted = false;
    std::vector<EdgeRecord> group;
    std::vector<std::string> group_key;
    bool has_prev_key = false;

    void extract_key(const EdgeRecord& row, std::vector<std::string>& key) const {
        key.clear();
        for (std::size_t index : key_indices) key.emplace_back(row.cell(index));
    }

    static int compare_keys(const std::vector<std::string>& a,
                            const std::vector<std::string>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            int c = compare_cells(a[i], b[i], false);
            if (c != 0) return c;
        }
        return 0;
    }

    bool load_group() {
        group.clear();
        if (!has_lookahead) {
            if (exhausted || !source->next(lookahead)) {
                exhausted = true;
                return false;
            }
            has_lookahead = true;
        }
        std::vector<std::string> key;
        extract_key(lookahead, key);
        if (has_prev_key && compare_keys(key, group_key) < 0)
            throw UnsortedInput(std::string(name) +
                                " input is not sorted on its join keys (use --presort)");
        group_key = std::move(key);
        has_prev_key = true;
        group.push_back(std::move(lookahead));
        has_lookahead = false;

        EdgeRecord rec;
        std::vector<std::string> rec_key;
        while (source->next(rec)) {
            extract_key(rec, rec_key);
            int c = compare_keys(rec_key, group_key);
            if (c < 0)
                throw UnsortedInput(std::string(name) +
                                    " input is not sorted on its join keys (use --presort)");
            if (c > 0) {
                lookahead = std::move(rec);
                has_lookahead = true;
                return true;
            }
            if (group.size() >= cap)
                throw DataError("join group for key '" + group_key.front() +
                                "' exceeds the group cap of " + std::to_string(cap));
            group.push_back(std::move(rec));
        }
        exhausted = true;
        return true;
    }
};

MergeJoinSource::MergeJoinSource(EdgeSource& left, EdgeSource& right, JoinOptions options)
    : options_(std::move(options)), left_(std::make_unique<Side>()),
      right_(std::make_unique<Side>()) {
    std::vector<std::string> left_keys = options_.left_keys;
    std::vector<std::string> right_keys = options_.right_keys;
    if (left_keys.size() != right_keys.size())
        throw KeyArityMismatch("left key list has " + std::to_string(left_keys.size()) +
                               " columns, right has " + std::to_string(right_keys.size()));
    if (left_keys.empty()) {
        left_keys.push_back(options_.join_on_id ? "id" : "node1");
        if (options_.add_label) left_keys.push_back("label");
        if (options_.add_node2) left_keys.push_back("node2");
        right_keys = left_keys;
    }

    auto setup = [&](Side& side, EdgeSource& source, const std::vector<std::string>& keys,
                     const char* name) {
        side.name = name;
        side.cap = options_.group_cap;
        if (options_.presort) {
            SortOptions sort_options = options_.presort_options;
            sort_options.keys.clear();
            for (const std::string& key : keys) sort_options.keys.push_back({key, false, false});
            side.presorted = std::make_unique<SortedSource>(source, std::move(sort_options));
            side.source = side.presorted.get();
        } else {
            side.source = &source;
        }
        for (const std::string& key : keys)
            side.key_indices.push_back(resolve_column(source.header(), key));
    };
    setup(*left_, left, left_keys, "left");
    setup(*right_, right, right_keys, "right");

    // Output columns: all left columns, then right columns minus the right
    // keys; name collisions get a "right." prefix.
    const Header& lh = left.header();
    const Header& rh = right.header();
    header_ = lh;
    std::vector<bool> is_right_key(rh.columns.size(), false);
    for (std::size_t index : right_->key_indices) is_right_key[index] = true;

    right_out_.assign(rh.columns.size(), npos);
    for (std::size_t i = 0; i < rh.columns.size(); ++i) {
        if (is_right_key[i]) continue;
        std::string name = rh.columns[i];
        while (header_.find(name) != npos) name = "right." + name;
        right_out_[i] = header_.columns.size();
        header_.columns.push_back(std::move(name));
    }
    header_.extras.clear();
    for (std::size_t i = 0; i < header_.columns.size(); ++i)
        if (!header_.is_role(i)) header_.extras.push_back(i);

    left_width_ = lh.columns.size();
    left_has_group_ = left_->load_group();
    right_has_group_ = right_->load_group();
}

MergeJoinSource::~MergeJoinSource() = default;

void MergeJoinSource::emit_left(const EdgeRecord& row) {
    EdgeRecord out;
    out.cells.reserve(header_.columns.size());
    for (std::size_t i = 0; i < left_width_; ++i) out.cells.emplace_back(row.cell(i));
    out.cells.resize(header_.columns.size());
    ready_.push_back(std::move(out));
}

void MergeJoinSource::emit_right(const EdgeRecord& row) {
    EdgeRecord out;
    out.cells.assign(header_.columns.size(), "");
    for (std::size_t k = 0; k < right_->key_indices.size(); ++k)
        out.cells[left_->key_indices[k]] = std::string(row.cell(right_->key_indices[k]));
    for (std::size_t i = 0; i < right_out_.size(); ++i)
        if (right_out_[i] != npos) out.cells[right_out_[i]] = std::string(row.cell(i));
    ready_.push_back(std::move(out));
}

void MergeJoinSource::emit_pair(const EdgeRecord& l, const EdgeRecord& r) {
    EdgeRecord out;
    out.cells.reserve(header_.columns.size());
    for (std::size_t i = 0; i < left_width_; ++i) out.cells.emplace_back(l.cell(i));
    out.cells.resize(header_.columns.size());
    for (std::size_t i = 0; i < right_out_.size(); ++i)
        if (right_out_[i] != npos) out.cells[right_out_[i]] = std::string(r.cell(i));
    ready_.push_back(std::move(out));
}

void MergeJoinSource::refill() {
    while (ready_.empty()) {
        if (!left_has_group_ && !right_has_group_) {
            done_ = true;
            return;
        }
        int c;
        if (!left_has_group_)
            c = 1;
        else if (!right_has_group_)
            c = -1;
        else
            c = Side::compare_keys(left_->group_key, right_->group_key);

        if (c < 0) {
            if (options_.type == JoinType::Left || options_.type == JoinType::Full)
                for (const EdgeRecord& row : left_->group) emit_left(row);
            left_has_group_ = left_->load_group();
        } else if (c > 0) {
            if (options_.type == JoinType::Right || options_.type == JoinType::Full)
                for (const EdgeRecord& row : right_->group) emit_right(row);
            right_has_group_ = right_->load_group();
        } else {
            for (const EdgeRecord& l : left_->group)
                for (const EdgeRecord& r : right_->group) emit_pair(l, r);
            left_has_group_ = left_->load_group();
            right_has_group_ = right_->load_group();
        }
    }
}

bool MergeJoinSource::next(EdgeRecord& out) {
    if (ready_.empty() && !done_) refill();
    if (ready_.empty()) return false;
    out = std::move(ready_.front());
    ready_.pop_front();
    return true;
}

// ------------------------------------------------------------------- cat ---

CatSource::CatSource(std::vector<std::unique_ptr<EdgeSource>> inputs)
    : inputs_(std::move(inputs)) {
    header_.columns = {"node1", "label", "node2"};
    header_.node1 = 0;
    header_.label = 1;
    header_.node2 = 2;
    bool any_id = false;
    for (const auto& input : inputs_) any_id = any_id || input->header().has_id();
    if (any_id) {
        header_.id = 3;
        header_.columns.push_back("id");
    }
    for (const auto& input : inputs_) {
        const Header& h = input->header();
        std::vector<std::size_t> map(h.columns.size(), npos);
        map[h.node1] = header_.node1;
        map[h.label] = header_.label;
        map[h.node2] = header_.node2;
        if (h.has_id()) map[h.id] = header_.id;
        for (std::size_t extra : h.extras) {
            std::size_t out_index = header_.find(h.columns[extra]);
            if (out_index == npos) {
                out_index = header_.columns.size();
                header_.columns.push_back(h.columns[extra]);
                header_.extras.push_back(out_index);
            }
            map[extra] = out_index;
        }
        cell_map_.push_back(std::move(map));
    }
}

bool CatSource::next(EdgeRecord& out) {
    while (current_ < inputs_.size()) {
        EdgeRecord rec;
        if (!inputs_[current_]->next(rec)) {
            ++current_;
            continue;
        }
        const std::vector<std::size_t>& map = cell_map_[current_];
        out.cells.assign(header_.columns.size(), "");
        out.line_number = rec.line_number;
        for (std::size_t i = 0; i < rec.cells.size() && i < map.size(); ++i)
            if (map[i] != npos) out.cells[map[i]] = std::move(rec.cells[i]);
        return true;
    }
    return false;
}

// --------------------------------------------------------------- columns ---

RemoveColumnsSource::RemoveColumnsSource(EdgeSource& inner, RemoveColumnsOptions options)
    : inner_(inner) {
    const Header& h = inner.header();
    std::vector<bool> drop(h.columns.size(), false);
    for (const std::string& name : options.columns) {
        std::size_t index = h.find(name);
        if (index == npos) {
            if (options.strict_unknown) throw UnknownColumn("unknown column '" + name + "'");
            warnings_.push_back("unknown column '" + name + "'");
            continue;
        }
        if (index == h.node1 || index == h.label || index == h.node2)
            throw ProtectedColumn("column '" + h.columns[index] + "' cannot be removed");
        drop[index] = true;
    }
    for (std::size_t i = 0; i < h.columns.size(); ++i)
        if (!drop[i]) kept_.push_back(i);

    auto position = [&](std::size_t old_index) -> std::size_t {
        for (std::size_t i = 0; i < kept_.size(); ++i)
            if (kept_[i] == old_index) return i;
        return npos;
    };
    header_.columns.clear();
    for (std::size_t old_index : kept_) header_.columns.push_back(h.columns[old_index]);
    header_.node1 = position(h.node1);
    header_.label = position(h.label);
    header_.node2 = position(h.node2);
    header_.id = h.has_id() ? position(h.id) : npos;
    for (std::size_t i = 0; i < header_.columns.size(); ++i)
        if (!header_.is_role(i)) header_.extras.push_back(i);
}

bool RemoveColumnsSource::next(EdgeRecord& out) {
    EdgeRecord rec;
    if (!inner_.next(rec)) return false;
    out.cells.clear();
    out.cells.reserve(kept_.size());
    for (std::size_t index : kept_) out.cells.emplace_back(rec.cell(index));
    out.line_number = rec.line_number;
    return true;
}

}  // namespace kgtk
