#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "detnet/caps.hpp"
#include "detnet/localview.hpp"
#include "detnet/network.hpp"
#include "detnet/rational.hpp"

namespace detnet {

/// Undirected conflict graph; vertices carry printable labels.
class ConflictGraph {
public:
    explicit ConflictGraph(std::vector<std::string> labels = {});

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    void add_edge(std::size_t a, std::size_t b);
    bool adjacent(std::size_t a, std::size_t b) const;
    /// Edges (a, b) with a < b, sorted.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;
    bool is_independent(std::span<const std::size_t> vertices) const;

    friend bool operator==(const ConflictGraph&, const ConflictGraph&) = default;

private:
    std::vector<std::string> labels_;
    std::vector<bool> adj_;
};

nlohmann::json graph_to_json(const ConflictGraph& graph);

/// Concurrent activation of the two routes could leak signal into a
/// receiver of the other: they share a node, or the skeleton links a
/// non-destination node of one to a non-source node of the other by a link
/// that is not on the other route.
bool route_conflict(const Route& a, const Route& b, const Skeleton& skeleton);

/// The links share a transmitter or a receiver, or one transmitter is
/// linked to the other's receiver.
bool link_conflict(const Edge& a, const Edge& b, const Skeleton& skeleton);

/// Exact minimum coloring; returns the lexicographically smallest color
/// vector among colorings with the fewest colors.  Throws CapExceeded above
/// `vertex_cap` vertices.
std::vector<std::size_t> minimum_coloring(const ConflictGraph& graph, std::size_t vertex_cap);

/// Greedy coloring in vertex order; not optimal in general.
std::vector<std::size_t> greedy_coloring(const ConflictGraph& graph);

/// All maximal independent sets, each sorted, in lexicographic order.
std::vector<std::vector<std::size_t>> maximal_independent_sets(const ConflictGraph& graph);

enum class Granularity { kPair, kRoute, kLink };

/// One hop of one pair's assigned route.
struct Usage {
    std::size_t pair = 0;
    std::size_t hop = 0;
    friend auto operator<=>(const Usage&, const Usage&) = default;
};

/// Periodic time-slotted activation.  Each slot lists the hops active in
/// it; whole-route (kRoute, kPair) schedules activate every hop of a route
/// in the same slot.  Relays buffer between slots and across periods.
struct Schedule {
    std::string strategy;
    Granularity granularity = Granularity::kLink;
    std::vector<std::optional<Route>> routes;  // per pair
    std::size_t period = 1;
    std::vector<std::vector<Usage>> slots;
    bool exact = true;  // false when a search cap forced a greedy fallback

    /// Number of slots in which the hop is active.
    std::size_t active_slots(const Usage& usage) const;
};

struct RateReport {
    std::string strategy;
    std::vector<Rational> per_pair;
    Rational sum;
};

/// Graph whose vertices are the usages of the schedule's assigned routes.
std::vector<Usage> schedule_usages(const Schedule& schedule);
ConflictGraph usage_conflict_graph(const Skeleton& skeleton, std::span<const std::optional<Route>> routes,
                                   std::span<const Usage> usages);
ConflictGraph pair_conflict_graph(const Skeleton& skeleton, std::span<const std::size_t> pairs);
ConflictGraph route_conflict_graph(const Skeleton& skeleton, std::span<const Route> routes);

/// Throws InvalidArgument if a slot is not independent in the usage
/// conflict graph or a route is malformed for the skeleton.
void validate_schedule(const Schedule& schedule, const Skeleton& skeleton);

/// Schedules computed from the skeleton alone, so every node derives the
/// same one.
Schedule mis_plan(const Skeleton& skeleton, const SearchCaps& caps = {});
Schedule mir_plan(const Skeleton& skeleton, const SearchCaps& caps = {});
Schedule mil_plan(const Skeleton& skeleton, const SearchCaps& caps = {});

/// Pair rate over its route: min over hops of (active fraction x gain),
/// with gains looked up in `gains` (edge -> gain).
RateReport rates_from_gains(const Schedule& schedule, const std::function<int(const Edge&)>& gains);

struct ScheduleResult {
    Schedule schedule;
    RateReport rates;
};

/// Distributed evaluation: the schedule comes from the common skeleton of
/// `views`, and each pair's rate from the gains its source knows.  `views`
/// must hold a view owned by every source.
ScheduleResult mis_schedule(std::span<const LocalView> views, const SearchCaps& caps = {});
ScheduleResult mir_schedule(std::span<const LocalView> views, const SearchCaps& caps = {});
ScheduleResult mil_schedule(std::span<const LocalView> views, const SearchCaps& caps = {});

/// Every node's view of the network.
std::vector<LocalView> all_views(const DetNetwork& network);

struct ScheduleSimulation {
    std::vector<std::uint64_t> claimed;    // bits per pair over the run
    std::vector<std::uint64_t> delivered;  // bits decoded in order, correctly
    bool ok = true;
    std::string failure;
};

/// Bit-level simulation.  Each pair's source gets its per-period quota of
/// fresh random bits at the start of every period for `periods` periods;
/// every slot propagates the active transmitters layer by layer through
/// propagate(); relays keep FIFO buffers.  Passes when all bits arrive
/// uncorrupted within periods + hops periods and cumulative delivery keeps
/// pace with the quota.  `quota_override` replaces the per-period quota
/// claimed by the closed form.
ScheduleSimulation simulate_schedule(const Schedule& schedule, const DetNetwork& network, std::uint64_t seed,
                                     std::size_t periods = 4,
                                     std::optional<std::vector<std::uint64_t>> quota_override = std::nullopt);

/// Closed-form rates against the true gains, confirmed by `trials`
/// simulations.  Throws InvalidArgument for links absent from the network
/// and Error when simulation disagrees with the closed form.
RateReport achieved_rates(const Schedule& schedule, const DetNetwork& network, std::size_t trials = 1,
                          std::uint64_t seed = 1);

std::string usage_label(const Skeleton& skeleton, const Route& route, std::size_t hop);
std::string route_label(const Skeleton& skeleton, const Route& route);

nlohmann::json schedule_to_json(const Schedule& schedule, const Skeleton& skeleton,
                                const std::optional<RateReport>& rates = std::nullopt);
nlohmann::json rates_to_json(const RateReport& rates);

/// Schedule families for worst-case search.  kRouteFamily slots activate
/// maximal route-independent sets; kLinkFamily slots maximal
/// link-independent sets.  Each pair is assigned at most one route.
enum class Family { kRouteFamily, kLinkFamily };

/// Calls `fn` on every schedule of the family with period in
/// [1, caps.family_period].  Throws CapExceeded above caps.family_schedules.
void for_each_family_schedule(const Skeleton& skeleton, Family family, const SearchCaps& caps,
                              const std::function<void(const Schedule&)>& fn);
std::uint64_t family_size(const Skeleton& skeleton, Family family, const SearchCaps& caps);

}  // namespace detnet
