#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "detnet/network.hpp"

namespace detnet {

/// A directed path from a source to a destination, one node per layer.
/// `source` and `destination` are pair indices; the route serves unicast
/// pair `source` only when the two are equal.
struct Route {
    std::size_t source = 0;
    std::size_t destination = 0;
    std::vector<NodeIndex> nodes;

    std::vector<Edge> links() const;
    std::size_t hops() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    bool serves_pair() const { return source == destination; }
    bool contains(NodeIndex v) const;
    friend auto operator<=>(const Route&, const Route&) = default;
};

/// All routes from the source of `source_pair` to the destination of
/// `destination_pair`, lexicographic in node order.
std::vector<Route> enumerate_routes(const Skeleton& skeleton, std::size_t source_pair, std::size_t destination_pair);
std::vector<Route> enumerate_routes(const DetNetwork& network, std::size_t source_pair, std::size_t destination_pair);

/// What one node knows: the common topology skeleton plus the gains of
/// every link on the routes it knows.  A view without an owner is the union
/// of all nodes' views.
struct LocalView {
    std::optional<NodeIndex> owner;
    Skeleton skeleton;
    std::map<Edge, int> known_gains;
    std::vector<Route> known_routes;

    friend bool operator==(const LocalView& a, const LocalView& b) {
        return a.owner == b.owner && a.skeleton == b.skeleton && a.known_gains == b.known_gains &&
               a.known_routes == b.known_routes;
    }
};

/// Routes from the source to every destination in the network, and the
/// gains of all links on them.
LocalView source_view(const DetNetwork& network, std::size_t pair);
/// Union of the source views of every source that has a route through
/// `node` (to any destination).  Sources get their own source view.
LocalView node_view(const DetNetwork& network, NodeIndex node);
/// Union over all nodes; constrains a network exactly as all views jointly.
LocalView merged_view(const DetNetwork& network);

nlohmann::json view_to_json(const LocalView& view);

/// Networks that no holder of `view` can tell apart from the true one:
/// unknown gains range over `gain_domain`.
struct ConsistencyClass {
    LocalView view;
    std::vector<int> gain_domain;
};

/// Class with the default domain {1, ..., q}.
ConsistencyClass make_class(const LocalView& view, int q);

inline constexpr std::uint64_t kDefaultClassCap = 4096;

/// Deterministic, random-access enumeration of a consistency class.  The
/// first unknown link (in edge order) is the most significant digit; domain
/// values are visited in ascending order.
class ConsistentNetworks {
public:
    /// Throws CapExceeded when the class has more than `cap` members and
    /// InvalidArgument when the domain is empty or non-positive.
    explicit ConsistentNetworks(const ConsistencyClass& cls, std::uint64_t cap = kDefaultClassCap);

    std::uint64_t size() const noexcept { return size_; }
    const std::vector<Edge>& unknown_links() const noexcept { return unknown_; }
    DetNetwork at(std::uint64_t index) const;

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::uint64_t i = 0; i < size_; ++i) fn(i, at(i));
    }

private:
    Skeleton skeleton_;
    std::vector<int> base_gains_;
    std::vector<std::size_t> unknown_slots_;
    std::vector<Edge> unknown_;
    std::vector<int> domain_;
    std::uint64_t size_ = 1;
    DetNetwork template_;
};

/// Network with the given topology and one gain per skeleton edge.
DetNetwork network_from_skeleton(const Skeleton& skeleton, std::span<const int> gains);

}  // namespace detnet
