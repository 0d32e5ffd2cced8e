#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "argnn/matrix.hpp"

namespace argnn {

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using EdgeList = std::vector<std::pair<int, int>>;

struct Splits {
    std::vector<int> train, val, test;               // node task
    EdgeList train_pos, val_pos, test_pos;           // edge task
    bool has_node_splits() const { return !train.empty() || !val.empty() || !test.empty(); }
    bool has_edge_splits() const {
        return !train_pos.empty() || !val_pos.empty() || !test_pos.empty();
    }
    bool empty() const { return !has_node_splits() && !has_edge_splits(); }
};

// Immutable after load. Edges are undirected, stored once in canonical
// (min,max) order; neighbor lists are symmetric and sorted.
struct Graph {
    int num_nodes = 0;
    int num_features = 0;
    int num_classes = 0;
    EdgeList edges;
    std::vector<std::vector<int>> neighbors;
    std::vector<int> degrees;
    Matrix features;  // num_nodes x num_features
    std::vector<int> labels;
    Splits splits;

    int num_edges() const { return static_cast<int>(edges.size()); }
};

namespace detail {

inline void check_node_index(int v, int num_nodes, const std::string& where) {
    if (v < 0 || v >= num_nodes)
        throw DatasetError(where + ": node index " + std::to_string(v) + " out of range [0," +
                           std::to_string(num_nodes) + ")");
}

}  // namespace detail

// Canonicalizes, deduplicates, drops self-loops, and builds adjacency.
// Accepts directed or duplicated input edge lists.
inline Graph build_graph(int num_nodes, int num_features, int num_classes, const EdgeList& raw_edges,
                         Matrix features, std::vector<int> labels, Splits splits = {}) {
    if (num_nodes <= 0) throw DatasetError("build_graph: num_nodes must be positive");
    if (features.rows != static_cast<std::size_t>(num_nodes) ||
        features.cols != static_cast<std::size_t>(num_features))
        throw DatasetError("build_graph: feature matrix is " + shape_str(features) + ", expected " +
                           std::to_string(num_nodes) + "x" + std::to_string(num_features));
    if (labels.size() != static_cast<std::size_t>(num_nodes))
        throw DatasetError("build_graph: expected " + std::to_string(num_nodes) + " labels, got " +
                           std::to_string(labels.size()));
    for (int y : labels)
        if (y < 0 || y >= num_classes)
            throw DatasetError("build_graph: label " + std::to_string(y) + " out of range [0," +
                               std::to_string(num_classes) + ")");

    std::set<std::pair<int, int>> canon;
    for (auto [a, b] : raw_edges) {
        detail::check_node_index(a, num_nodes, "build_graph");
        detail::check_node_index(b, num_nodes, "build_graph");
        if (a == b) continue;  // self-loops dropped
        canon.emplace(std::min(a, b), std::max(a, b));
    }

    Graph g;
    g.num_nodes = num_nodes;
    g.num_features = num_features;
    g.num_classes = num_classes;
    g.edges.assign(canon.begin(), canon.end());
    g.features = std::move(features);
    g.labels = std::move(labels);
    g.neighbors.assign(num_nodes, {});
    for (auto [a, b] : g.edges) {
        g.neighbors[a].push_back(b);
        g.neighbors[b].push_back(a);
    }
    for (auto& nb : g.neighbors) std::sort(nb.begin(), nb.end());
    g.degrees.resize(num_nodes);
    for (int i = 0; i < num_nodes; ++i) g.degrees[i] = static_cast<int>(g.neighbors[i].size());

    auto check_idx_set = [&](const std::vector<int>& idx, const char* name) {
        for (int v : idx) detail::check_node_index(v, num_nodes, std::string("splits.") + name);
    };
    check_idx_set(splits.train, "train");
    check_idx_set(splits.val, "val");
    check_idx_set(splits.test, "test");
    if (splits.has_node_splits()) {
        std::vector<int> seen(num_nodes, 0);
        for (const auto* part : {&splits.train, &splits.val, &splits.test})
            for (int v : *part)
                if (seen[v]++)
                    throw DatasetError("splits: node " + std::to_string(v) +
                                       " appears in more than one split");
    }
    for (const auto* part : {&splits.train_pos, &splits.val_pos, &splits.test_pos})
        for (auto [a, b] : *part) {
            detail::check_node_index(a, num_nodes, "splits(edge)");
            detail::check_node_index(b, num_nodes, "splits(edge)");
        }
    g.splits = std::move(splits);
    return g;
}

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DatasetError("missing file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline long parse_int(const std::string& tok, const std::string& where) {
    try {
        std::size_t pos = 0;
        long v = std::stol(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw DatasetError(where + ": malformed integer '" + tok + "'");
    }
}

inline double parse_real(const std::string& tok, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw DatasetError(where + ": malformed real '" + tok + "'");
    }
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    // trailing blank lines are tolerated
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

inline std::vector<std::string> split_on(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

// Dataset directory layout:
//   meta.json     {num_nodes, num_features, num_classes, directed}
//   edges.tsv     src<TAB>dst per line
//   features.csv  num_nodes lines of num_features comma-separated reals
//   labels.tsv    num_nodes lines, one class index each
//   splits.json   optional; {train,val,test} or {train_pos,val_pos,test_pos}
inline Graph load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw DatasetError("missing dataset directory: " + dir);

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(detail::read_file(root / "meta.json"));
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError("meta.json: " + std::string(e.what()));
    }
    for (const char* key : {"num_nodes", "num_features", "num_classes"})
        if (!meta.contains(key) || !meta[key].is_number_integer())
            throw DatasetError(std::string("meta.json: missing integer field '") + key + "'");
    const int n = meta["num_nodes"].get<int>();
    const int f = meta["num_features"].get<int>();
    const int c = meta["num_classes"].get<int>();

    EdgeList raw;
    {
        auto lines = detail::split_lines(detail::read_file(root / "edges.tsv"));
        for (std::size_t ln = 0; ln < lines.size(); ++ln) {
            if (lines[ln].empty()) continue;
            auto where = "edges.tsv line " + std::to_string(ln + 1);
            auto toks = detail::split_on(lines[ln], '\t');
            if (toks.size() != 2) throw DatasetError(where + ": expected 'src<TAB>dst'");
            int a = static_cast<int>(detail::parse_int(toks[0], where));
            int b = static_cast<int>(detail::parse_int(toks[1], where));
            detail::check_node_index(a, n, where);
            detail::check_node_index(b, n, where);
            raw.emplace_back(a, b);
        }
    }

    Matrix features(n, f);
    {
        auto lines = detail::split_lines(detail::read_file(root / "features.csv"));
        if (lines.size() != static_cast<std::size_t>(n))
            throw DatasetError("features.csv: meta/content mismatch (" + std::to_string(lines.size()) +
                               " lines, meta says " + std::to_string(n) + " nodes)");
        for (int i = 0; i < n; ++i) {
            auto where = "features.csv line " + std::to_string(i + 1);
            auto toks = detail::split_on(lines[i], ',');
            if (toks.size() != static_cast<std::size_t>(f))
                throw DatasetError(where + ": meta/content mismatch (" + std::to_string(toks.size()) +
                                   " values, meta says " + std::to_string(f) + " features)");
            for (int j = 0; j < f; ++j) features(i, j) = detail::parse_real(toks[j], where);
        }
    }

    std::vector<int> labels(n);
    {
        auto lines = detail::split_lines(detail::read_file(root / "labels.tsv"));
        if (lines.size() != static_cast<std::size_t>(n))
            throw DatasetError("labels.tsv: meta/content mismatch (" + std::to_string(lines.size()) +
                               " lines, meta says " + std::to_string(n) + " nodes)");
        for (int i = 0; i < n; ++i) {
            auto where = "labels.tsv line " + std::to_string(i + 1);
            long y = detail::parse_int(lines[i], where);
            if (y < 0 || y >= c)
                throw DatasetError(where + ": label " + std::to_string(y) + " out of range [0," +
                                   std::to_string(c) + ")");
            labels[i] = static_cast<int>(y);
        }
    }

    Splits splits;
    if (fs::exists(root / "splits.json")) {
        nlohmann::json sj;
        try {
            sj = nlohmann::json::parse(detail::read_file(root / "splits.json"));
        } catch (const nlohmann::json::exception& e) {
            throw DatasetError("splits.json: " + std::string(e.what()));
        }
        auto read_idx = [&](const char* key, std::vector<int>& out) {
            if (sj.contains(key)) out = sj[key].get<std::vector<int>>();
        };
        read_idx("train", splits.train);
        read_idx("val", splits.val);
        read_idx("test", splits.test);
        auto read_pairs = [&](const char* key, EdgeList& out) {
            if (!sj.contains(key)) return;
            for (const auto& p : sj[key]) {
                if (!p.is_array() || p.size() != 2)
                    throw DatasetError(std::string("splits.json: '") + key + "' entries must be [i,j]");
                out.emplace_back(p[0].get<int>(), p[1].get<int>());
            }
        };
        read_pairs("train_pos", splits.train_pos);
        read_pairs("val_pos", splits.val_pos);
        read_pairs("test_pos", splits.test_pos);
    }

    return build_graph(n, f, c, raw, std::move(features), std::move(labels), std::move(splits));
}

// Inverse of load_dataset. Reals are written with max_digits10 precision so
// load(save(g)) is exact.
inline void save_dataset(const Graph& g, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path root(dir);

    {
        nlohmann::json meta{{"num_nodes", g.num_nodes},
                            {"num_features", g.num_features},
                            {"num_classes", g.num_classes},
                            {"directed", false}};
        std::ofstream out(root / "meta.json");
        out << meta.dump(2) << "\n";
    }
    {
        std::ofstream out(root / "edges.tsv");
        for (auto [a, b] : g.edges) out << a << "\t" << b << "\n";
    }
    {
        std::ofstream out(root / "features.csv");
        char buf[40];
        for (int i = 0; i < g.num_nodes; ++i) {
            for (int j = 0; j < g.num_features; ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", g.features(i, j));
                out << (j ? "," : "") << buf;
            }
            out << "\n";
        }
    }
    {
        std::ofstream out(root / "labels.tsv");
        for (int y : g.labels) out << y << "\n";
    }
    if (!g.splits.empty()) {
        nlohmann::json sj;
        if (g.splits.has_node_splits()) {
            sj["train"] = g.splits.train;
            sj["val"] = g.splits.val;
            sj["test"] = g.splits.test;
        }
        auto put_pairs = [&](const char* key, const EdgeList& e) {
            if (e.empty()) return;
            nlohmann::json arr = nlohmann::json::array();
            for (auto [a, b] : e) arr.push_back({a, b});
            sj[key] = arr;
        };
        put_pairs("train_pos", g.splits.train_pos);
        put_pairs("val_pos", g.splits.val_pos);
        put_pairs("test_pos", g.splits.test_pos);
        std::ofstream out(root / "splits.json");
        out << sj.dump(2) << "\n";
    }
}

// Fraction of canonical undirected edges whose endpoints share a label.
inline double homophily_ratio(const Graph& g) {
    if (g.edges.empty()) throw std::invalid_argument("homophily_ratio: empty edge set");
    std::size_t same = 0;
    for (auto [a, b] : g.edges) same += (g.labels[a] == g.labels[b]);
    return static_cast<double>(same) / static_cast<double>(g.edges.size());
}

// Stratified per-class split with a seeded shuffle. Remainders after the
// train/val cut go to test so every node lands somewhere.
inline Splits make_stratified_splits(const Graph& g, double train_frac, double val_frac,
                                     std::uint64_t seed) {
    if (train_frac <= 0 || val_frac < 0 || train_frac + val_frac >= 1.0)
        throw std::invalid_argument("make_stratified_splits: invalid fractions");
    std::vector<std::vector<int>> by_class(g.num_classes);
    for (int i = 0; i < g.num_nodes; ++i) by_class[g.labels[i]].push_back(i);
    Rng rng(seed);
    Splits s;
    for (auto& idx : by_class) {
        rng.shuffle(idx);
        const std::size_t n = idx.size();
        const auto n_train = static_cast<std::size_t>(std::floor(train_frac * n));
        const auto n_val = static_cast<std::size_t>(std::floor(val_frac * n));
        for (std::size_t k = 0; k < n; ++k) {
            if (k < n_train)
                s.train.push_back(idx[k]);
            else if (k < n_train + n_val)
                s.val.push_back(idx[k]);
            else
                s.test.push_back(idx[k]);
        }
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

}  // namespace argnn
