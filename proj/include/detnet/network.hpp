#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "detnet/gf2.hpp"

namespace detnet {

using NodeIndex = std::size_t;

struct NodeSpec {
    std::string id;
    int layer = 0;
};

struct LinkSpec {
    std::string from;
    std::string to;
    long gain = 0;
};

struct PairSpec {
    std::string source;
    std::string destination;
};

/// Unvalidated network description, as read from a network file.
/// `layers` is the number of node layers; nodes live in layers
/// 0 .. layers-1, sources in layer 0 and destinations in the last layer.
struct NetworkSpec {
    int layers = 0;
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    std::vector<PairSpec> pairs;
};

struct Node {
    std::string id;
    int layer = 0;
    friend bool operator==(const Node&, const Node&) = default;
};

/// Connectivity without a gain.
struct Edge {
    NodeIndex from = 0;
    NodeIndex to = 0;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Link {
    NodeIndex from = 0;
    NodeIndex to = 0;
    int gain = 0;
    Edge edge() const { return {from, to}; }
    friend auto operator<=>(const Link&, const Link&) = default;
};

/// Topology of a layered network with every gain erased.  This is the part
/// of the network state that every node knows.
class Skeleton {
public:
    Skeleton() = default;
    Skeleton(int layers, std::vector<Node> nodes, std::vector<Edge> edges, std::vector<NodeIndex> sources,
             std::vector<NodeIndex> destinations);

    int layers() const noexcept { return layers_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t pair_count() const noexcept { return sources_.size(); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const Node& node(NodeIndex v) const { return nodes_.at(v); }
    /// Edges sorted by (from, to).
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<NodeIndex>& sources() const noexcept { return sources_; }
    const std::vector<NodeIndex>& destinations() const noexcept { return destinations_; }
    NodeIndex source(std::size_t pair) const { return sources_.at(pair); }
    NodeIndex destination(std::size_t pair) const { return destinations_.at(pair); }

    const std::vector<NodeIndex>& out_neighbors(NodeIndex v) const { return out_.at(v); }
    const std::vector<NodeIndex>& in_neighbors(NodeIndex v) const { return in_.at(v); }
    bool has_edge(NodeIndex from, NodeIndex to) const;
    /// Position of the edge in edges(), if present.
    std::optional<std::size_t> edge_index(NodeIndex from, NodeIndex to) const;
    std::optional<NodeIndex> find(const std::string& id) const;
    NodeIndex index_of(const std::string& id) const;
    bool is_source(NodeIndex v) const;
    bool is_destination(NodeIndex v) const;

    friend bool operator==(const Skeleton& a, const Skeleton& b) {
        return a.layers_ == b.layers_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.sources_ == b.sources_ &&
               a.destinations_ == b.destinations_;
    }

private:
    int layers_ = 0;
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<NodeIndex> sources_;
    std::vector<NodeIndex> destinations_;
    std::vector<std::vector<NodeIndex>> out_;
    std::vector<std::vector<NodeIndex>> in_;
    std::unordered_map<std::string, NodeIndex> by_id_;
};

/// Layered acyclic linear deterministic network over GF(2).
///
/// Every node transmits a q-bit vector; a link of gain n delivers the top n
/// bits of its transmitter's vector, shifted into the bottom n positions at
/// the receiver.  Receivers see the XOR of all incoming contributions.  The
/// network is immutable once built.
class DetNetwork {
public:
    const Skeleton& skeleton() const noexcept { return skeleton_; }
    int q() const noexcept { return q_; }
    int layers() const noexcept { return skeleton_.layers(); }
    std::size_t node_count() const noexcept { return skeleton_.node_count(); }
    std::size_t pair_count() const noexcept { return skeleton_.pair_count(); }
    /// Links in the order of skeleton().edges().
    const std::vector<Link>& links() const noexcept { return links_; }
    /// Gain of the link, 0 when absent.
    int gain(NodeIndex from, NodeIndex to) const;

    /// Same topology, new gains (one per edge, in edge order, each >= 1).
    DetNetwork with_gains(std::span<const int> gains) const;

    friend bool operator==(const DetNetwork& a, const DetNetwork& b) {
        return a.skeleton_ == b.skeleton_ && a.links_ == b.links_ && a.q_ == b.q_;
    }

private:
    friend DetNetwork build_network(const NetworkSpec& spec);
    Skeleton skeleton_;
    std::vector<Link> links_;
    int q_ = 0;
};

/// Validates and normalizes a network description.  Gain-0 links are
/// dropped; q is the maximum remaining gain.  Throws InvalidNetwork.
DetNetwork build_network(const NetworkSpec& spec);

/// The q x q down-shift operator for a link of gain n: the top n input bits
/// land in the bottom n output positions.
GF2Matrix shift_matrix(int q, int n);

/// Signals indexed by NodeIndex.  An empty entry means the node is silent.
using Signals = std::vector<Bits>;

/// One network use: every node's received q-bit vector, the XOR over
/// incoming links of shift(q, gain) applied to the transmitter's vector.
Signals propagate(const DetNetwork& network, const Signals& transmit);

/// Two-coloring of the nodes; `near[v]` is true on the transmitting side.
struct Cut {
    std::vector<bool> near;
};

/// GF(2) rank of the transfer matrix from near-side transmitters to
/// far-side receivers.  Every pair in `active_pairs` must have its source
/// on the near side and its destination on the far side.
std::size_t cut_rank(const DetNetwork& network, const Cut& cut, std::span<const std::size_t> active_pairs);

/// Largest number of nodes whose colorings are enumerated exhaustively.
inline constexpr std::size_t kDefaultCutNodeCap = 20;

/// Minimum cut rank over all cuts separating the pair's source from its
/// destination; 0 when no route exists.  Throws CapExceeded when more than
/// `node_cap` nodes are free to color.
std::size_t unicast_min_cut(const DetNetwork& network, std::size_t pair, std::size_t node_cap = kDefaultCutNodeCap);

/// Nodes that lie on some directed path from one of `from` to one of `to`.
std::vector<bool> nodes_between(const Skeleton& skeleton, std::span<const NodeIndex> from,
                                std::span<const NodeIndex> to);

NetworkSpec network_spec_from_json(const nlohmann::json& doc);
DetNetwork network_from_json(const nlohmann::json& doc);
nlohmann::json network_to_json(const DetNetwork& network);
NetworkSpec to_spec(const DetNetwork& network);

}  // namespace detnet
