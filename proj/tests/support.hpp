#pragma once

// Independent reference computations for the tests.  Nothing here calls
// into the library's linear algebra; matrices are plain int grids.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "detnet/network.hpp"
#include "detnet/rational.hpp"

namespace oracle {

using Grid = std::vector<std::vector<int>>;

inline std::size_t rank(Grid m) {
    std::size_t r = 0;
    const std::size_t cols = m.empty() ? 0 : m[0].size();
    for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
        std::size_t p = r;
        while (p < m.size() && m[p][c] == 0) ++p;
        if (p == m.size()) continue;
        std::swap(m[p], m[r]);
        for (std::size_t i = 0; i < m.size(); ++i)
            if (i != r && m[i][c] == 1)
                for (std::size_t j = 0; j < cols; ++j) m[i][j] ^= m[r][j];
        ++r;
    }
    return r;
}

/// Entry (i, j) is 1 when output position i copies input position j.
inline Grid shift(int q, int n) {
    Grid m(static_cast<std::size_t>(q), std::vector<int>(static_cast<std::size_t>(q), 0));
    for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(q - n + j)][static_cast<std::size_t>(j)] = 1;
    return m;
}

/// Transfer from near-side transmitters to far-side receivers, built link
/// by link from the gains.
inline std::size_t cut_rank(const detnet::DetNetwork& net, const std::vector<bool>& near) {
    const auto q = static_cast<std::size_t>(net.q());
    std::vector<std::size_t> tx, rx;
    for (std::size_t v = 0; v < net.node_count(); ++v) (near[v] ? tx : rx).push_back(v);
    Grid m(rx.size() * q, std::vector<int>(tx.size() * q, 0));
    for (std::size_t a = 0; a < rx.size(); ++a)
        for (std::size_t b = 0; b < tx.size(); ++b) {
            const int g = net.gain(tx[b], rx[a]);
            if (g == 0) continue;
            const Grid s = shift(net.q(), g);
            for (std::size_t i = 0; i < q; ++i)
                for (std::size_t j = 0; j < q; ++j) m[a * q + i][b * q + j] ^= s[i][j];
        }
    if (m.empty() || tx.empty()) return 0;
    return rank(m);
}

/// Minimum over all node colorings with the source near and destination far.
inline std::size_t min_cut(const detnet::DetNetwork& net, std::size_t pair) {
    const auto& sk = net.skeleton();
    const std::size_t n = sk.node_count();
    std::size_t best = SIZE_MAX;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<bool> near(n);
        for (std::size_t v = 0; v < n; ++v) near[v] = ((mask >> v) & 1U) != 0;
        if (!near[sk.source(pair)] || near[sk.destination(pair)]) continue;
        best = std::min(best, cut_rank(net, near));
    }
    return best;
}

/// Smallest over node colorings of the cut rank plus the min-cuts of the
/// pairs the coloring leaves unseparated, and the plain sum of min-cuts.
inline std::size_t sum_upper(const detnet::DetNetwork& net) {
    const auto& sk = net.skeleton();
    const std::size_t n = sk.node_count();
    std::vector<std::size_t> single(sk.pair_count());
    std::size_t best = 0;
    for (std::size_t p = 0; p < sk.pair_count(); ++p) best += single[p] = min_cut(net, p);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<bool> near(n);
        for (std::size_t v = 0; v < n; ++v) near[v] = ((mask >> v) & 1U) != 0;
        std::size_t rest = 0;
        bool any = false;
        for (std::size_t p = 0; p < sk.pair_count(); ++p) {
            if (near[sk.source(p)] && !near[sk.destination(p)]) {
                any = true;
            } else {
                rest += single[p];
            }
        }
        if (any) best = std::min(best, cut_rank(net, near) + rest);
    }
    return best;
}

inline std::size_t count_paths(const detnet::Skeleton& sk, detnet::NodeIndex from, detnet::NodeIndex to) {
    if (from == to) return 1;
    std::size_t total = 0;
    for (auto w : sk.out_neighbors(from)) total += count_paths(sk, w, to);
    return total;
}

/// Smallest c such that some assignment of c colors leaves no edge
/// monochromatic, by trying every assignment.
inline std::size_t chromatic_number(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    if (n == 0) return 0;
    for (std::size_t c = 1;; ++c) {
        std::vector<std::size_t> color(n, 0);
        while (true) {
            bool ok = true;
            for (auto [a, b] : edges) ok = ok && color[a] != color[b];
            if (ok) return c;
            std::size_t i = 0;
            while (i < n && ++color[i] == c) color[i++] = 0;
            if (i == n) break;
        }
    }
}

}  // namespace oracle

namespace fixture {

inline detnet::DetNetwork build(int layers, const std::vector<std::pair<std::string, int>>& nodes,
                                const std::vector<detnet::LinkSpec>& links,
                                const std::vector<std::pair<std::string, std::string>>& pairs) {
    detnet::NetworkSpec spec;
    spec.layers = layers;
    for (const auto& [id, layer] : nodes) spec.nodes.push_back({id, layer});
    spec.links = links;
    for (const auto& [s, d] : pairs) spec.pairs.push_back({s, d});
    return detnet::build_network(spec);
}

/// s -> v1 -> ... -> d with the given gains.
inline detnet::DetNetwork path(const std::vector<int>& gains) {
    const int layers = static_cast<int>(gains.size()) + 1;
    std::vector<std::pair<std::string, int>> nodes{{"s", 0}};
    for (int l = 1; l + 1 < layers; ++l) nodes.push_back({"v" + std::to_string(l), l});
    nodes.push_back({"d", layers - 1});
    std::vector<detnet::LinkSpec> links;
    for (std::size_t i = 0; i < gains.size(); ++i) links.push_back({nodes[i].first, nodes[i + 1].first, gains[i]});
    return build(layers, nodes, links, {{"s", "d"}});
}

/// Two relays, both sources to both relays, both relays to both destinations.
inline detnet::DetNetwork full_222(int gain = 1) {
    return build(3, {{"s1", 0}, {"s2", 0}, {"r1", 1}, {"r2", 1}, {"d1", 2}, {"d2", 2}},
                 {{"s1", "r1", gain},
                  {"s1", "r2", gain},
                  {"s2", "r1", gain},
                  {"s2", "r2", gain},
                  {"r1", "d1", gain},
                  {"r1", "d2", gain},
                  {"r2", "d1", gain},
                  {"r2", "d2", gain}},
                 {{"s1", "d1"}, {"s2", "d2"}});
}

inline detnet::Rational r(long p, long q = 1) { return detnet::Rational(p) / q; }

}  // namespace fixture
