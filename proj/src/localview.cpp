#include "detnet/localview.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "detnet/errors.hpp"

namespace detnet {

std::vector<Edge> Route::links() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) out.push_back({nodes[i], nodes[i + 1]});
    return out;
}

bool Route::contains(NodeIndex v) const { return std::find(nodes.begin(), nodes.end(), v) != nodes.end(); }

std::vector<Route> enumerate_routes(const Skeleton& skeleton, std::size_t source_pair, std::size_t destination_pair) {
    if (source_pair >= skeleton.pair_count() || destination_pair >= skeleton.pair_count())
        throw InvalidArgument("enumerate_routes: pair index out of range");
    const NodeIndex target = skeleton.destination(destination_pair);
    std::vector<Route> routes;
    std::vector<NodeIndex> path{skeleton.source(source_pair)};
    // Depth-first over ascending neighbor lists yields lexicographic order.
    auto dfs = [&](auto&& self, NodeIndex v) -> void {
        if (v == target) {
            routes.push_back({source_pair, destination_pair, path});
            return;
        }
        for (auto w : skeleton.out_neighbors(v)) {
            path.push_back(w);
            self(self, w);
            path.pop_back();
        }
    };
    dfs(dfs, path.front());
    return routes;
}

std::vector<Route> enumerate_routes(const DetNetwork& network, std::size_t source_pair, std::size_t destination_pair) {
    return enumerate_routes(network.skeleton(), source_pair, destination_pair);
}

namespace {

void absorb(LocalView& into, const LocalView& from) {
    into.known_gains.insert(from.known_gains.begin(), from.known_gains.end());
    std::set<Route> routes(into.known_routes.begin(), into.known_routes.end());
    routes.insert(from.known_routes.begin(), from.known_routes.end());
    into.known_routes.assign(routes.begin(), routes.end());
}

}  // namespace

LocalView source_view(const DetNetwork& network, std::size_t pair) {
    const auto& sk = network.skeleton();
    if (pair >= sk.pair_count()) throw InvalidArgument("source_view: pair index out of range");
    LocalView view{sk.source(pair), sk, {}, {}};
    for (std::size_t d = 0; d < sk.pair_count(); ++d) {
        for (auto& r : enumerate_routes(sk, pair, d)) {
            for (const auto& e : r.links()) view.known_gains.emplace(e, network.gain(e.from, e.to));
            view.known_routes.push_back(std::move(r));
        }
    }
    std::sort(view.known_routes.begin(), view.known_routes.end());
    return view;
}

LocalView node_view(const DetNetwork& network, NodeIndex node) {
    const auto& sk = network.skeleton();
    if (node >= sk.node_count()) throw InvalidArgument("node_view: node index out of range");
    for (std::size_t p = 0; p < sk.pair_count(); ++p)
        if (sk.source(p) == node) return source_view(network, p);
    LocalView view{node, sk, {}, {}};
    for (std::size_t p = 0; p < sk.pair_count(); ++p) {
        const std::array<NodeIndex, 1> from{sk.source(p)};
        if (nodes_between(sk, from, sk.destinations())[node]) absorb(view, source_view(network, p));
    }
    return view;
}

LocalView merged_view(const DetNetwork& network) {
    const auto& sk = network.skeleton();
    LocalView view{std::nullopt, sk, {}, {}};
    for (NodeIndex v = 0; v < sk.node_count(); ++v) absorb(view, node_view(network, v));
    return view;
}

nlohmann::json view_to_json(const LocalView& view) {
    nlohmann::json doc;
    doc["owner"] = view.owner ? nlohmann::json(view.skeleton.node(*view.owner).id) : nlohmann::json(nullptr);
    doc["known_gains"] = nlohmann::json::array();
    for (const auto& [edge, gain] : view.known_gains)
        doc["known_gains"].push_back(
            {{"from", view.skeleton.node(edge.from).id}, {"to", view.skeleton.node(edge.to).id}, {"gain", gain}});
    doc["route_count"] = view.known_routes.size();
    return doc;
}

ConsistencyClass make_class(const LocalView& view, int q) {
    ConsistencyClass cls{view, {}};
    for (int g = 1; g <= q; ++g) cls.gain_domain.push_back(g);
    return cls;
}

DetNetwork network_from_skeleton(const Skeleton& skeleton, std::span<const int> gains) {
    if (gains.size() != skeleton.edges().size()) throw InvalidArgument("network_from_skeleton: one gain per edge");
    NetworkSpec spec;
    spec.layers = skeleton.layers();
    for (const auto& n : skeleton.nodes()) spec.nodes.push_back({n.id, n.layer});
    for (std::size_t i = 0; i < gains.size(); ++i) {
        const auto& e = skeleton.edges()[i];
        if (gains[i] < 1) throw InvalidArgument("network_from_skeleton: gains must be positive");
        spec.links.push_back({skeleton.node(e.from).id, skeleton.node(e.to).id, gains[i]});
    }
    for (std::size_t p = 0; p < skeleton.pair_count(); ++p)
        spec.pairs.push_back({skeleton.node(skeleton.source(p)).id, skeleton.node(skeleton.destination(p)).id});
    return build_network(spec);
}

ConsistentNetworks::ConsistentNetworks(const ConsistencyClass& cls, std::uint64_t cap) : skeleton_(cls.view.skeleton) {
    std::set<int> domain(cls.gain_domain.begin(), cls.gain_domain.end());
    if (domain.empty()) throw InvalidArgument("consistent_networks: empty gain domain");
    if (*domain.begin() < 1) throw InvalidArgument("consistent_networks: gain domain must be positive");
    domain_.assign(domain.begin(), domain.end());

    const auto& edges = skeleton_.edges();
    base_gains_.assign(edges.size(), domain_.front());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto it = cls.view.known_gains.find(edges[i]);
        if (it != cls.view.known_gains.end()) {
            base_gains_[i] = it->second;
        } else {
            unknown_slots_.push_back(i);
            unknown_.push_back(edges[i]);
        }
    }
    for (std::size_t i = 0; i < unknown_slots_.size(); ++i) {
        if (size_ > UINT64_MAX / domain_.size()) {
            size_ = UINT64_MAX;
            break;
        }
        size_ *= domain_.size();
    }
    if (size_ > cap) throw CapExceeded("consistent_networks: class size", size_, cap);
    template_ = network_from_skeleton(skeleton_, base_gains_);
}

DetNetwork ConsistentNetworks::at(std::uint64_t index) const {
    if (index >= size_) throw InvalidArgument("consistent_networks: index out of range");
    std::vector<int> gains = base_gains_;
    for (std::size_t i = unknown_slots_.size(); i-- > 0;) {
        gains[unknown_slots_[i]] = domain_[index % domain_.size()];
        index /= domain_.size();
    }
    return template_.with_gains(gains);
}

}  // namespace detnet
