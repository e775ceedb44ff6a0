#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spinglass/errors.hpp"
#include "spinglass/rng.hpp"

namespace spinglass {

// Undirected simple graph, immutable after construction. Edges are stored
// once as (i, j) with i < j, sorted; adjacency lists are sorted as well.
struct InteractionGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> degrees;
    std::vector<std::vector<int>> adjacency;
    // Set when a sparse random draw with an isolated vertex was tolerated.
    bool isolated_warning = false;

    std::size_t edge_count() const { return edges.size(); }
    double avg_degree() const { return 2.0 * static_cast<double>(edges.size()) / n; }
    int max_degree() const { return degrees.empty() ? 0 : *std::max_element(degrees.begin(), degrees.end()); }
    // Empirical C in d_max <= C*d. Reported, not asserted.
    double degree_ratio() const { return static_cast<double>(max_degree()) / avg_degree(); }

    bool has_edge(int i, int j) const {
        if (i == j) return false;
        const auto& nbr = adjacency[i];
        return std::binary_search(nbr.begin(), nbr.end(), j);
    }
};

struct VertexSubset {
    std::vector<int> members;  // strictly increasing
    int parent_n = 0;

    std::size_t size() const { return members.size(); }
    std::vector<char> mask() const {
        std::vector<char> in(static_cast<std::size_t>(parent_n), 0);
        for (const int v : members) in[static_cast<std::size_t>(v)] = 1;
        return in;
    }
};

// Validates and normalizes an edge set into a graph. Downstream coupling
// construction needs d_avg > 0, so edgeless inputs are rejected here.
inline InteractionGraph make_graph(int n, std::vector<std::pair<int, int>> edges,
                                   bool isolated_warning = false) {
    if (n < 2) throw InvalidSizeError("graph needs at least 2 vertices, got " + std::to_string(n));
    if (edges.empty()) throw DegenerateGraphError("graph has no edges (average degree 0)");
    for (auto& e : edges) {
        if (e.first == e.second)
            throw SelfLoopError("self-loop at vertex " + std::to_string(e.first));
        if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n)
            throw ParseError("edge endpoint out of range");
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t k = 1; k < edges.size(); ++k)
        if (edges[k] == edges[k - 1])
            throw DuplicateEdgeError("duplicate edge " + std::to_string(edges[k].first) + " " +
                                     std::to_string(edges[k].second));
    InteractionGraph g;
    g.n = n;
    g.edges = std::move(edges);
    g.isolated_warning = isolated_warning;
    g.degrees.assign(static_cast<std::size_t>(n), 0);
    g.adjacency.assign(static_cast<std::size_t>(n), {});
    for (const auto& [i, j] : g.edges) {
        ++g.degrees[static_cast<std::size_t>(i)];
        ++g.degrees[static_cast<std::size_t>(j)];
        g.adjacency[static_cast<std::size_t>(i)].push_back(j);
        g.adjacency[static_cast<std::size_t>(j)].push_back(i);
    }
    for (auto& nbr : g.adjacency) std::sort(nbr.begin(), nbr.end());
    return g;
}

inline InteractionGraph gen_complete(int n) {
    if (n < 2) throw InvalidSizeError("complete graph needs n >= 2");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return make_graph(n, std::move(edges));
}

// G(n, p). Deterministic per (n, p, seed). Draws with an isolated vertex are
// redrawn (derived sub-seed) when the expected degree p(n-1) >= 8; in the
// sparser regime they are returned as-is with the warning flag. Draws with no
// edges at all are always redrawn.
inline InteractionGraph gen_erdos_renyi(int n, double p, std::uint64_t seed) {
    if (n < 2) throw InvalidSizeError("Erdos-Renyi graph needs n >= 2");
    if (!(p > 0.0) || p > 1.0) throw ConfigError("edge probability must be in (0, 1]");
    const bool reject_isolated = p * (n - 1) >= 8.0;
    constexpr int kMaxAttempts = 100;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
        std::vector<std::pair<int, int>> edges;
        std::vector<int> degree(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform() < p) {
                    edges.emplace_back(i, j);
                    ++degree[static_cast<std::size_t>(i)];
                    ++degree[static_cast<std::size_t>(j)];
                }
        if (edges.empty()) continue;
        const bool isolated = std::find(degree.begin(), degree.end(), 0) != degree.end();
        if (isolated && reject_isolated) continue;
        return make_graph(n, std::move(edges), isolated);
    }
    throw DegenerateGraphError("no acceptable G(n,p) draw in " + std::to_string(kMaxAttempts) +
                               " attempts (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
}

// Reads "i j" pairs, one per line; '#' starts a comment; n = 1 + max index.
inline InteractionGraph load_edge_list(std::istream& in) {
    std::vector<std::pair<int, int>> edges;
    std::set<std::pair<int, int>> seen;
    int max_index = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long i, j;
        if (!(ls >> i)) continue;  // blank / comment-only line
        if (!(ls >> j))
            throw ParseError("line " + std::to_string(line_no) + ": expected two indices");
        long extra;
        if (ls >> extra)
            throw ParseError("line " + std::to_string(line_no) + ": trailing tokens");
        if (i < 0 || j < 0)
            throw ParseError("line " + std::to_string(line_no) + ": negative vertex index");
        if (i == j)
            throw SelfLoopError("line " + std::to_string(line_no) + ": self-loop at " + std::to_string(i));
        const int lo = static_cast<int>(std::min(i, j));
        const int hi = static_cast<int>(std::max(i, j));
        if (!seen.insert({lo, hi}).second)
            throw DuplicateEdgeError("line " + std::to_string(line_no) + ": duplicate edge " +
                                     std::to_string(lo) + " " + std::to_string(hi));
        edges.emplace_back(lo, hi);
        max_index = std::max(max_index, hi);
    }
    if (edges.empty()) throw DegenerateGraphError("edge list is empty");
    return make_graph(max_index + 1, std::move(edges));
}

inline void save_edge_list(const InteractionGraph& g, std::ostream& out,
                           const std::vector<std::string>& comments = {}) {
    for (const auto& c : comments) out << "# " << c << '\n';
    for (const auto& [i, j] : g.edges) out << i << ' ' << j << '\n';
}

// d_i^out(Q): neighbors of i outside Q.
inline int out_degree(const InteractionGraph& g, int i, const VertexSubset& q) {
    if (i < 0 || i >= g.n) throw InvalidSizeError("vertex index out of range");
    const auto in_q = q.mask();
    int count = 0;
    for (const int j : g.adjacency[static_cast<std::size_t>(i)])
        if (!in_q[static_cast<std::size_t>(j)]) ++count;
    return count;
}

inline std::size_t crossing_edge_count(const InteractionGraph& g, const std::vector<char>& in_s) {
    std::size_t count = 0;
    for (const auto& [i, j] : g.edges)
        if (in_s[static_cast<std::size_t>(i)] != in_s[static_cast<std::size_t>(j)]) ++count;
    return count;
}

namespace detail {

// Uniform k-subset via partial Fisher-Yates.
inline std::vector<char> sample_subset_mask(int n, int k, Rng& rng) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int t = 0; t < k; ++t) {
        const int j = t + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - t)));
        std::swap(perm[static_cast<std::size_t>(t)], perm[static_cast<std::size_t>(j)]);
    }
    std::vector<char> mask(static_cast<std::size_t>(n), 0);
    for (int t = 0; t < k; ++t) mask[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])] = 1;
    return mask;
}

inline VertexSubset subset_from_mask(const std::vector<char>& mask, int n) {
    VertexSubset s;
    s.parent_n = n;
    for (int v = 0; v < n; ++v)
        if (mask[static_cast<std::size_t>(v)]) s.members.push_back(v);
    return s;
}

// Greedy pairwise-swap ascent on the cut size, from the given balanced mask:
// swap the (i in S, j outside) pair with the largest cut gain, ties broken by
// the smallest (i, j), until 2*cut >= |E| or no further improvement. Capped at
// n^2 swaps. Returns whether the bound was reached.
inline bool greedy_improve_cut(const InteractionGraph& g, std::vector<char>& mask) {
    const std::size_t edge_total = g.edges.size();
    // out[v] counts neighbors of v on the other side
    std::vector<int> out(static_cast<std::size_t>(g.n), 0);
    for (int v = 0; v < g.n; ++v)
        for (const int w : g.adjacency[static_cast<std::size_t>(v)])
            if (mask[static_cast<std::size_t>(v)] != mask[static_cast<std::size_t>(w)])
                ++out[static_cast<std::size_t>(v)];
    std::size_t cut = crossing_edge_count(g, mask);
    const long swap_cap = static_cast<long>(g.n) * g.n;
    for (long step = 0; step < swap_cap && 2 * cut < edge_total; ++step) {
        // Gain of swapping i in S with j outside: moving v across changes the
        // cut by deg(v) - 2*out(v); an (i,j) edge stays crossing, hence +2.
        long best_gain = 0;
        int best_i = -1, best_j = -1;
        for (int i = 0; i < g.n; ++i) {
            if (!mask[static_cast<std::size_t>(i)]) continue;
            const long di = g.degrees[static_cast<std::size_t>(i)] - 2L * out[static_cast<std::size_t>(i)];
            for (int j = 0; j < g.n; ++j) {
                if (mask[static_cast<std::size_t>(j)]) continue;
                const long dj = g.degrees[static_cast<std::size_t>(j)] - 2L * out[static_cast<std::size_t>(j)];
                const long gain = di + dj + (g.has_edge(i, j) ? 2L : 0L);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_i < 0) return false;  // no improving swap left
        mask[static_cast<std::size_t>(best_i)] = 0;
        mask[static_cast<std::size_t>(best_j)] = 1;
        // Neighbors of i see it leave S; neighbors of j see it arrive. The two
        // moved vertices themselves are recomputed outright below.
        for (const int w : g.adjacency[static_cast<std::size_t>(best_i)])
            out[static_cast<std::size_t>(w)] += mask[static_cast<std::size_t>(w)] ? 1 : -1;
        for (const int w : g.adjacency[static_cast<std::size_t>(best_j)])
            out[static_cast<std::size_t>(w)] += mask[static_cast<std::size_t>(w)] ? -1 : 1;
        for (const int v : {best_i, best_j}) {
            int o = 0;
            for (const int w : g.adjacency[static_cast<std::size_t>(v)])
                if (mask[static_cast<std::size_t>(v)] != mask[static_cast<std::size_t>(w)]) ++o;
            out[static_cast<std::size_t>(v)] = o;
        }
        cut = crossing_edge_count(g, mask);
    }
    return 2 * cut >= edge_total;
}

}  // namespace detail

// Returns S with |S| = floor(n/2) and crossing-edge count >= |E|/2.
// Strategy: 64 uniform subset draws; if all fall short, greedy pairwise-swap
// ascent from the best draw (swap maximizing the cut gain, ties broken by the
// smallest (i, j)). The bound is re-checked before returning, never assumed.
inline VertexSubset balanced_cut(const InteractionGraph& g, std::uint64_t seed) {
    if (g.n < 2 || g.edges.empty()) throw InvalidSizeError("balanced_cut needs n >= 2 and at least one edge");
    const int k = g.n / 2;
    const std::size_t edge_total = g.edges.size();
    const auto satisfies = [&](std::size_t cut) { return 2 * cut >= edge_total; };

    Rng rng(seed);
    std::vector<char> best_mask;
    std::size_t best_cut = 0;
    constexpr int kSampleAttempts = 64;
    for (int attempt = 0; attempt < kSampleAttempts; ++attempt) {
        auto mask = detail::sample_subset_mask(g.n, k, rng);
        const std::size_t cut = crossing_edge_count(g, mask);
        if (cut >= best_cut || best_mask.empty()) {
            best_cut = cut;
            best_mask = mask;
        }
        if (satisfies(cut)) return detail::subset_from_mask(mask, g.n);
    }

    std::vector<char> mask = std::move(best_mask);
    if (!detail::greedy_improve_cut(g, mask) || !satisfies(crossing_edge_count(g, mask)))
        throw ConstructionFailedError("balanced_cut: could not certify |E(S,S^c)| >= |E|/2");
    return detail::subset_from_mask(mask, g.n);
}

// T = { i in S : d_i^out(S) >= d_avg/4 } for S from balanced_cut. Certifies
// |T| >= n/(16*ratio_c) and min out-degree relative to T >= d_avg/4 before
// returning (out-degrees can only grow when shrinking S to T).
inline VertexSubset good_set(const InteractionGraph& g, std::uint64_t seed) {
    const VertexSubset s = balanced_cut(g, seed);
    const double threshold = g.avg_degree() / 4.0;

    const auto in_s = s.mask();
    VertexSubset t;
    t.parent_n = g.n;
    for (const int v : s.members) {
        int o = 0;
        for (const int w : g.adjacency[static_cast<std::size_t>(v)])
            if (!in_s[static_cast<std::size_t>(w)]) ++o;
        if (static_cast<double>(o) >= threshold) t.members.push_back(v);
    }

    const double size_bound = static_cast<double>(g.n) / (16.0 * g.degree_ratio());
    if (static_cast<double>(t.members.size()) < size_bound)
        throw ConstructionFailedError("good_set: |T| = " + std::to_string(t.members.size()) +
                                      " below n/(16C) = " + std::to_string(size_bound));
    const auto in_t = t.mask();
    for (const int v : t.members) {
        int o = 0;
        for (const int w : g.adjacency[static_cast<std::size_t>(v)])
            if (!in_t[static_cast<std::size_t>(w)]) ++o;
        if (static_cast<double>(o) < threshold)
            throw ConstructionFailedError("good_set: vertex " + std::to_string(v) +
                                          " has out-degree " + std::to_string(o) +
                                          " below d/4 = " + std::to_string(threshold));
    }
    return t;
}

}  // namespace spinglass
