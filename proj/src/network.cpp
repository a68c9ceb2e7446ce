#include "detnet/network.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

#include "detnet/errors.hpp"

namespace detnet {

Skeleton::Skeleton(int layers, std::vector<Node> nodes, std::vector<Edge> edges, std::vector<NodeIndex> sources,
                   std::vector<NodeIndex> destinations)
    : layers_(layers),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      sources_(std::move(sources)),
      destinations_(std::move(destinations)),
      out_(nodes_.size()),
      in_(nodes_.size()) {
    std::sort(edges_.begin(), edges_.end());
    for (const auto& e : edges_) {
        out_[e.from].push_back(e.to);
        in_[e.to].push_back(e.from);
    }
    for (auto& list : in_) std::sort(list.begin(), list.end());
    for (NodeIndex v = 0; v < nodes_.size(); ++v) by_id_.emplace(nodes_[v].id, v);
}

bool Skeleton::has_edge(NodeIndex from, NodeIndex to) const { return edge_index(from, to).has_value(); }

std::optional<std::size_t> Skeleton::edge_index(NodeIndex from, NodeIndex to) const {
    const Edge key{from, to};
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
}

std::optional<NodeIndex> Skeleton::find(const std::string& id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

NodeIndex Skeleton::index_of(const std::string& id) const {
    const auto v = find(id);
    if (!v) throw InvalidArgument("unknown node id '" + id + "'");
    return *v;
}

bool Skeleton::is_source(NodeIndex v) const {
    return std::find(sources_.begin(), sources_.end(), v) != sources_.end();
}

bool Skeleton::is_destination(NodeIndex v) const {
    return std::find(destinations_.begin(), destinations_.end(), v) != destinations_.end();
}

int DetNetwork::gain(NodeIndex from, NodeIndex to) const {
    const auto idx = skeleton_.edge_index(from, to);
    return idx ? links_[*idx].gain : 0;
}

DetNetwork DetNetwork::with_gains(std::span<const int> gains) const {
    if (gains.size() != links_.size()) throw InvalidArgument("with_gains: expected one gain per link");
    DetNetwork out = *this;
    out.q_ = 0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        if (gains[i] < 1) throw InvalidArgument("with_gains: gains must be positive");
        out.links_[i].gain = gains[i];
        out.q_ = std::max(out.q_, gains[i]);
    }
    return out;
}

DetNetwork build_network(const NetworkSpec& spec) {
    if (spec.layers < 2) throw InvalidNetwork("network needs at least two layers");
    const int last = spec.layers - 1;

    std::vector<std::size_t> order(spec.nodes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return spec.nodes[a].layer < spec.nodes[b].layer; });
    std::vector<Node> nodes;
    std::set<std::string> seen;
    for (auto i : order) {
        const auto& n = spec.nodes[i];
        if (n.id.empty()) throw InvalidNetwork("empty node id");
        if (n.layer < 0 || n.layer > last)
            throw InvalidNetwork("node '" + n.id + "' has layer " + std::to_string(n.layer) + " outside [0, " +
                                 std::to_string(last) + "]");
        if (!seen.insert(n.id).second) throw InvalidNetwork("duplicate node '" + n.id + "'");
        nodes.push_back({n.id, n.layer});
    }
    auto lookup = [&](const std::string& id) -> NodeIndex {
        for (NodeIndex v = 0; v < nodes.size(); ++v)
            if (nodes[v].id == id) return v;
        throw InvalidNetwork("unknown node '" + id + "'");
    };

    if (spec.pairs.empty()) throw InvalidNetwork("source/destination count mismatch: no unicast pairs");
    std::vector<NodeIndex> sources;
    std::vector<NodeIndex> destinations;
    for (const auto& p : spec.pairs) {
        const NodeIndex s = lookup(p.source);
        const NodeIndex d = lookup(p.destination);
        if (nodes[s].layer != 0) throw InvalidNetwork("source '" + p.source + "' is not in layer 0");
        if (nodes[d].layer != last) throw InvalidNetwork("destination '" + p.destination + "' is not in the last layer");
        if (std::find(sources.begin(), sources.end(), s) != sources.end())
            throw InvalidNetwork("source/destination count mismatch: source '" + p.source + "' paired twice");
        if (std::find(destinations.begin(), destinations.end(), d) != destinations.end())
            throw InvalidNetwork("source/destination count mismatch: destination '" + p.destination + "' paired twice");
        sources.push_back(s);
        destinations.push_back(d);
    }

    std::vector<Link> links;
    std::set<Edge> edges_seen;
    for (const auto& l : spec.links) {
        const NodeIndex u = lookup(l.from);
        const NodeIndex v = lookup(l.to);
        if (nodes[v].layer != nodes[u].layer + 1)
            throw InvalidNetwork("non-layered link " + l.from + " -> " + l.to);
        if (!edges_seen.insert(Edge{u, v}).second) throw InvalidNetwork("duplicate link " + l.from + " -> " + l.to);
        if (l.gain < 0) throw InvalidNetwork("negative gain on link " + l.from + " -> " + l.to);
        if (l.gain > 0) links.push_back({u, v, static_cast<int>(l.gain)});
    }
    std::sort(links.begin(), links.end());
    int q = 0;
    for (const auto& l : links) q = std::max(q, l.gain);
    if (q == 0) throw InvalidNetwork("empty network: q = 0");

    std::vector<Edge> edges;
    edges.reserve(links.size());
    for (const auto& l : links) edges.push_back(l.edge());

    DetNetwork net;
    net.skeleton_ = Skeleton(spec.layers, std::move(nodes), std::move(edges), std::move(sources), std::move(destinations));
    net.links_ = std::move(links);
    net.q_ = q;
    return net;
}

GF2Matrix shift_matrix(int q, int n) {
    if (q < 1) throw InvalidArgument("shift_matrix: q must be positive");
    if (n < 0 || n > q) throw InvalidArgument("shift_matrix: n out of range [0, q]");
    const auto uq = static_cast<std::size_t>(q);
    const auto un = static_cast<std::size_t>(n);
    GF2Matrix m(uq, uq);
    for (std::size_t j = 0; j < un; ++j) m.set(uq - un + j, j);
    return m;
}

Signals propagate(const DetNetwork& network, const Signals& transmit) {
    const auto q = static_cast<std::size_t>(network.q());
    Signals received(network.node_count(), Bits(q, 0));
    for (const auto& link : network.links()) {
        if (link.from >= transmit.size() || transmit[link.from].empty()) continue;
        const Bits& x = transmit[link.from];
        if (x.size() != q) throw InvalidArgument("propagate: transmit vector length differs from q");
        const auto n = static_cast<std::size_t>(link.gain);
        Bits& y = received[link.to];
        for (std::size_t j = 0; j < n; ++j) y[q - n + j] ^= x[j];
    }
    return received;
}

std::size_t cut_rank(const DetNetwork& network, const Cut& cut, std::span<const std::size_t> active_pairs) {
    const auto& sk = network.skeleton();
    if (cut.near.size() != sk.node_count()) throw InvalidArgument("cut_rank: cut size differs from node count");
    for (auto p : active_pairs) {
        if (p >= sk.pair_count()) throw InvalidArgument("cut_rank: pair index out of range");
        if (!cut.near[sk.source(p)] || cut.near[sk.destination(p)])
            throw InvalidArgument("cut_rank: cut does not separate pair " + std::to_string(p));
    }
    std::vector<std::size_t> row_of(sk.node_count(), 0);
    std::vector<std::size_t> col_of(sk.node_count(), 0);
    std::vector<bool> has_row(sk.node_count(), false);
    std::vector<bool> has_col(sk.node_count(), false);
    std::size_t rows = 0;
    std::size_t cols = 0;
    for (const auto& l : network.links()) {
        if (!cut.near[l.from] || cut.near[l.to]) continue;
        if (!has_col[l.from]) {
            has_col[l.from] = true;
            col_of[l.from] = cols++;
        }
        if (!has_row[l.to]) {
            has_row[l.to] = true;
            row_of[l.to] = rows++;
        }
    }
    if (rows == 0) return 0;
    const auto q = static_cast<std::size_t>(network.q());
    GF2Matrix transfer(rows * q, cols * q);
    for (const auto& l : network.links()) {
        if (!cut.near[l.from] || cut.near[l.to]) continue;
        transfer.set_block(row_of[l.to] * q, col_of[l.from] * q, shift_matrix(network.q(), l.gain));
    }
    return transfer.rank();
}

std::vector<bool> nodes_between(const Skeleton& skeleton, std::span<const NodeIndex> from,
                                std::span<const NodeIndex> to) {
    const std::size_t n = skeleton.node_count();
    std::vector<bool> forward(n, false);
    std::vector<bool> backward(n, false);
    // Nodes are sorted by layer, so one sweep in each direction suffices.
    for (auto s : from) forward[s] = true;
    for (NodeIndex v = 0; v < n; ++v)
        if (forward[v])
            for (auto w : skeleton.out_neighbors(v)) forward[w] = true;
    for (auto d : to) backward[d] = true;
    for (NodeIndex v = n; v-- > 0;)
        if (backward[v])
            for (auto u : skeleton.in_neighbors(v)) backward[u] = true;
    std::vector<bool> both(n);
    for (NodeIndex v = 0; v < n; ++v) both[v] = forward[v] && backward[v];
    return both;
}

std::size_t unicast_min_cut(const DetNetwork& network, std::size_t pair, std::size_t node_cap) {
    const auto& sk = network.skeleton();
    if (pair >= sk.pair_count()) throw InvalidArgument("unicast_min_cut: pair index out of range");
    const NodeIndex s = sk.source(pair);
    const NodeIndex d = sk.destination(pair);
    const std::array<NodeIndex, 1> src{s};
    const std::array<NodeIndex, 1> dst{d};
    const auto relevant = nodes_between(sk, src, dst);
    if (!relevant[s]) return 0;

    // Nodes off every s-d path can be fixed without loss: those that cannot
    // reach d go to the near side, the rest to the far side.
    std::vector<NodeIndex> all(sk.node_count());
    std::iota(all.begin(), all.end(), NodeIndex{0});
    const auto can_reach_d = nodes_between(sk, all, dst);
    std::vector<NodeIndex> free_nodes;
    Cut cut{std::vector<bool>(sk.node_count(), false)};
    for (NodeIndex v = 0; v < sk.node_count(); ++v) {
        if (v == s) {
            cut.near[v] = true;
        } else if (v == d) {
            cut.near[v] = false;
        } else if (relevant[v]) {
            free_nodes.push_back(v);
        } else {
            cut.near[v] = !can_reach_d[v];
        }
    }
    if (free_nodes.size() > node_cap || free_nodes.size() >= 63)
        throw CapExceeded("unicast_min_cut: free nodes", free_nodes.size(), node_cap);

    const std::array<std::size_t, 1> active{pair};
    std::size_t best = cut_rank(network, cut, active);
    const std::uint64_t total = std::uint64_t{1} << free_nodes.size();
    for (std::uint64_t mask = 1; mask < total && best > 0; ++mask) {
        for (std::size_t i = 0; i < free_nodes.size(); ++i) cut.near[free_nodes[i]] = (mask >> i) & 1U;
        best = std::min(best, cut_rank(network, cut, active));
    }
    return best;
}

namespace {

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw InvalidNetwork(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw InvalidNetwork(where + ": unknown field '" + key + "'");
    }
}

template <typename T>
T required(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw InvalidNetwork(where + ": missing field '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidNetwork(where + ": bad field '" + key + "': " + e.what());
    }
}

}  // namespace

NetworkSpec network_spec_from_json(const nlohmann::json& doc) {
    reject_unknown(doc, {"layers", "nodes", "links", "pairs"}, "network");
    NetworkSpec spec;
    spec.layers = required<int>(doc, "layers", "network");
    for (const auto& n : required<nlohmann::json>(doc, "nodes", "network")) {
        reject_unknown(n, {"id", "layer"}, "node");
        spec.nodes.push_back({required<std::string>(n, "id", "node"), required<int>(n, "layer", "node")});
    }
    for (const auto& l : required<nlohmann::json>(doc, "links", "network")) {
        reject_unknown(l, {"from", "to", "gain"}, "link");
        if (!l.contains("gain") || !l.at("gain").is_number_integer()) throw InvalidNetwork("link: gain must be an integer");
        spec.links.push_back({required<std::string>(l, "from", "link"), required<std::string>(l, "to", "link"),
                              required<long>(l, "gain", "link")});
    }
    for (const auto& p : required<nlohmann::json>(doc, "pairs", "network")) {
        reject_unknown(p, {"source", "destination"}, "pair");
        spec.pairs.push_back({required<std::string>(p, "source", "pair"), required<std::string>(p, "destination", "pair")});
    }
    return spec;
}

DetNetwork network_from_json(const nlohmann::json& doc) { return build_network(network_spec_from_json(doc)); }

NetworkSpec to_spec(const DetNetwork& network) {
    const auto& sk = network.skeleton();
    NetworkSpec spec;
    spec.layers = sk.layers();
    for (const auto& n : sk.nodes()) spec.nodes.push_back({n.id, n.layer});
    for (const auto& l : network.links()) spec.links.push_back({sk.node(l.from).id, sk.node(l.to).id, l.gain});
    for (std::size_t p = 0; p < sk.pair_count(); ++p)
        spec.pairs.push_back({sk.node(sk.source(p)).id, sk.node(sk.destination(p)).id});
    return spec;
}

nlohmann::json network_to_json(const DetNetwork& network) {
    const NetworkSpec spec = to_spec(network);
    nlohmann::json doc;
    doc["layers"] = spec.layers;
    doc["nodes"] = nlohmann::json::array();
    for (const auto& n : spec.nodes) doc["nodes"].push_back({{"id", n.id}, {"layer", n.layer}});
    doc["links"] = nlohmann::json::array();
    for (const auto& l : spec.links) doc["links"].push_back({{"from", l.from}, {"to", l.to}, {"gain", l.gain}});
    doc["pairs"] = nlohmann::json::array();
    for (const auto& p : spec.pairs) doc["pairs"].push_back({{"source", p.source}, {"destination", p.destination}});
    return doc;
}

}  // namespace detnet
