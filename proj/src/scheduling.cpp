#include "detnet/scheduling.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "detnet/errors.hpp"
#include "detnet/exact_lp.hpp"
#include "detnet/prng.hpp"

namespace detnet {

// ---------------------------------------------------------------- graphs

ConflictGraph::ConflictGraph(std::vector<std::string> labels)
    : labels_(std::move(labels)), adj_(labels_.size() * labels_.size(), false) {}

void ConflictGraph::add_edge(std::size_t a, std::size_t b) {
    if (a == b) throw InvalidArgument("ConflictGraph: self-loop");
    adj_.at(a * size() + b) = true;
    adj_.at(b * size() + a) = true;
}

bool ConflictGraph::adjacent(std::size_t a, std::size_t b) const { return adj_.at(a * size() + b); }

std::vector<std::pair<std::size_t, std::size_t>> ConflictGraph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t a = 0; a < size(); ++a)
        for (std::size_t b = a + 1; b < size(); ++b)
            if (adjacent(a, b)) out.emplace_back(a, b);
    return out;
}

bool ConflictGraph::is_independent(std::span<const std::size_t> vertices) const {
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = i + 1; j < vertices.size(); ++j)
            if (vertices[i] == vertices[j] || adjacent(vertices[i], vertices[j])) return false;
    return true;
}

nlohmann::json graph_to_json(const ConflictGraph& graph) {
    nlohmann::json doc;
    doc["vertices"] = graph.labels();
    doc["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : graph.edges()) doc["edges"].push_back({a, b});
    return doc;
}

bool route_conflict(const Route& a, const Route& b, const Skeleton& skeleton) {
    if (a == b) throw InvalidArgument("route_conflict: routes must differ");
    for (auto v : a.nodes)
        if (b.contains(v)) return true;
    auto leaks = [&](const Route& from, const Route& into) {
        const auto into_links = into.links();
        for (std::size_t i = 0; i + 1 < from.nodes.size(); ++i) {
            for (std::size_t j = 1; j < into.nodes.size(); ++j) {
                const Edge e{from.nodes[i], into.nodes[j]};
                if (skeleton.has_edge(e.from, e.to) &&
                    std::find(into_links.begin(), into_links.end(), e) == into_links.end())
                    return true;
            }
        }
        return false;
    };
    return leaks(a, b) || leaks(b, a);
}

bool link_conflict(const Edge& a, const Edge& b, const Skeleton& skeleton) {
    if (a == b) throw InvalidArgument("link_conflict: links must differ");
    return a.from == b.from || a.to == b.to || skeleton.has_edge(a.from, b.to) || skeleton.has_edge(b.from, a.to);
}

namespace {

std::vector<std::uint64_t> adjacency_masks(const ConflictGraph& graph) {
    if (graph.size() > 64) throw CapExceeded("conflict graph vertices (bitmask limit)", graph.size(), 64);
    std::vector<std::uint64_t> masks(graph.size(), 0);
    for (std::size_t a = 0; a < graph.size(); ++a)
        for (std::size_t b = 0; b < graph.size(); ++b)
            if (a != b && graph.adjacent(a, b)) masks[a] |= std::uint64_t{1} << b;
    return masks;
}

bool color_with(const std::vector<std::uint64_t>& adj, std::size_t colors, std::size_t v, std::size_t used,
                std::vector<std::size_t>& assignment) {
    if (v == adj.size()) return true;
    const std::size_t limit = std::min(colors, used + 1);
    for (std::size_t c = 0; c < limit; ++c) {
        bool ok = true;
        for (std::size_t u = 0; u < v && ok; ++u)
            if (assignment[u] == c && ((adj[v] >> u) & 1U)) ok = false;
        if (!ok) continue;
        assignment[v] = c;
        if (color_with(adj, colors, v + 1, std::max(used, c + 1), assignment)) return true;
    }
    return false;
}

}  // namespace

std::vector<std::size_t> minimum_coloring(const ConflictGraph& graph, std::size_t vertex_cap) {
    if (graph.size() > vertex_cap) throw CapExceeded("minimum_coloring: vertices", graph.size(), vertex_cap);
    const auto adj = adjacency_masks(graph);
    std::vector<std::size_t> assignment(graph.size(), 0);
    for (std::size_t colors = 1; colors <= graph.size(); ++colors)
        if (color_with(adj, colors, 0, 0, assignment)) return assignment;
    return assignment;
}

std::vector<std::size_t> greedy_coloring(const ConflictGraph& graph) {
    std::vector<std::size_t> assignment(graph.size(), 0);
    for (std::size_t v = 0; v < graph.size(); ++v) {
        std::set<std::size_t> taken;
        for (std::size_t u = 0; u < v; ++u)
            if (graph.adjacent(u, v)) taken.insert(assignment[u]);
        std::size_t c = 0;
        while (taken.count(c)) ++c;
        assignment[v] = c;
    }
    return assignment;
}

std::vector<std::vector<std::size_t>> maximal_independent_sets(const ConflictGraph& graph) {
    const auto adj = adjacency_masks(graph);
    const std::size_t n = graph.size();
    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    std::vector<std::uint64_t> found;
    // Bron-Kerbosch on the complement graph: cliques there are independent
    // sets here.
    auto expand = [&](auto&& self, std::uint64_t r, std::uint64_t p, std::uint64_t x) -> void {
        if (p == 0 && x == 0) {
            found.push_back(r);
            return;
        }
        while (p != 0) {
            const auto v = static_cast<std::size_t>(std::countr_zero(p));
            const std::uint64_t bit = std::uint64_t{1} << v;
            const std::uint64_t non_neighbors = all & ~adj[v] & ~bit;
            self(self, r | bit, p & non_neighbors, x & non_neighbors);
            p &= ~bit;
            x |= bit;
        }
    };
    expand(expand, 0, all, 0);
    std::vector<std::vector<std::size_t>> sets;
    for (auto mask : found) {
        std::vector<std::size_t> s;
        for (std::size_t v = 0; v < n; ++v)
            if ((mask >> v) & 1U) s.push_back(v);
        sets.push_back(std::move(s));
    }
    std::sort(sets.begin(), sets.end());
    return sets;
}

// ---------------------------------------------------------------- labels

std::string route_label(const Skeleton& skeleton, const Route& route) {
    std::string out = "p" + std::to_string(route.source) + ":";
    for (std::size_t i = 0; i < route.nodes.size(); ++i) {
        if (i > 0) out += ">";
        out += skeleton.node(route.nodes[i]).id;
    }
    return out;
}

std::string usage_label(const Skeleton& skeleton, const Route& route, std::size_t hop) {
    return "p" + std::to_string(route.source) + ":" + skeleton.node(route.nodes.at(hop)).id + ">" +
           skeleton.node(route.nodes.at(hop + 1)).id;
}

// ------------------------------------------------------------- schedules

std::size_t Schedule::active_slots(const Usage& usage) const {
    std::size_t count = 0;
    for (const auto& slot : slots)
        if (std::find(slot.begin(), slot.end(), usage) != slot.end()) ++count;
    return count;
}

std::vector<Usage> schedule_usages(const Schedule& schedule) {
    std::vector<Usage> usages;
    for (std::size_t p = 0; p < schedule.routes.size(); ++p)
        if (schedule.routes[p])
            for (std::size_t h = 0; h < schedule.routes[p]->hops(); ++h) usages.push_back({p, h});
    return usages;
}

ConflictGraph usage_conflict_graph(const Skeleton& skeleton, std::span<const std::optional<Route>> routes,
                                   std::span<const Usage> usages) {
    std::vector<std::string> labels;
    std::vector<Edge> links;
    for (const auto& u : usages) {
        const Route& r = routes[u.pair].value();
        labels.push_back(usage_label(skeleton, r, u.hop));
        links.push_back(r.links().at(u.hop));
    }
    ConflictGraph graph(std::move(labels));
    for (std::size_t a = 0; a < usages.size(); ++a)
        for (std::size_t b = a + 1; b < usages.size(); ++b)
            if (links[a] == links[b] || link_conflict(links[a], links[b], skeleton)) graph.add_edge(a, b);
    return graph;
}

ConflictGraph pair_conflict_graph(const Skeleton& skeleton, std::span<const std::size_t> pairs) {
    std::vector<std::string> labels;
    for (auto p : pairs) labels.push_back("p" + std::to_string(p));
    ConflictGraph graph(std::move(labels));
    for (std::size_t a = 0; a < pairs.size(); ++a) {
        for (std::size_t b = a + 1; b < pairs.size(); ++b) {
            const auto i = pairs[a];
            const auto j = pairs[b];
            if (skeleton.has_edge(skeleton.source(i), skeleton.destination(j)) ||
                skeleton.has_edge(skeleton.source(j), skeleton.destination(i)))
                graph.add_edge(a, b);
        }
    }
    return graph;
}

ConflictGraph route_conflict_graph(const Skeleton& skeleton, std::span<const Route> routes) {
    std::vector<std::string> labels;
    for (const auto& r : routes) labels.push_back(route_label(skeleton, r));
    ConflictGraph graph(std::move(labels));
    for (std::size_t a = 0; a < routes.size(); ++a)
        for (std::size_t b = a + 1; b < routes.size(); ++b)
            if (route_conflict(routes[a], routes[b], skeleton)) graph.add_edge(a, b);
    return graph;
}

void validate_schedule(const Schedule& schedule, const Skeleton& skeleton) {
    if (schedule.period == 0 || schedule.slots.size() != schedule.period)
        throw InvalidArgument("schedule: slot count differs from period");
    if (schedule.routes.size() != skeleton.pair_count()) throw InvalidArgument("schedule: one route entry per pair");
    for (std::size_t p = 0; p < schedule.routes.size(); ++p) {
        if (!schedule.routes[p]) continue;
        const Route& r = *schedule.routes[p];
        if (r.source != p || r.destination != p || r.nodes.empty() || r.nodes.front() != skeleton.source(p) ||
            r.nodes.back() != skeleton.destination(p))
            throw InvalidArgument("schedule: route of pair " + std::to_string(p) + " does not join its endpoints");
        for (const auto& e : r.links())
            if (!skeleton.has_edge(e.from, e.to)) throw InvalidArgument("schedule references unknown link");
    }
    const auto usages = schedule_usages(schedule);
    const auto graph = usage_conflict_graph(skeleton, schedule.routes, usages);
    for (const auto& slot : schedule.slots) {
        std::vector<std::size_t> ids;
        for (const auto& u : slot) {
            const auto it = std::find(usages.begin(), usages.end(), u);
            if (it == usages.end()) throw InvalidArgument("schedule: slot activates a hop of no assigned route");
            ids.push_back(static_cast<std::size_t>(it - usages.begin()));
        }
        if (!graph.is_independent(ids)) throw InvalidArgument("schedule: slot is not an independent set");
    }
}

namespace {

std::vector<Usage> route_usages(std::size_t pair, const Route& route) {
    std::vector<Usage> out;
    for (std::size_t h = 0; h < route.hops(); ++h) out.push_back({pair, h});
    return out;
}

// Colors `graph`, honoring the cap or falling back to greedy when allowed.
std::vector<std::size_t> color_graph(const ConflictGraph& graph, const SearchCaps& caps, bool& exact) {
    if (graph.size() > caps.coloring_vertices && caps.allow_greedy) {
        exact = false;
        return greedy_coloring(graph);
    }
    return minimum_coloring(graph, caps.coloring_vertices);
}

Schedule from_coloring(std::string strategy, Granularity granularity, std::vector<std::optional<Route>> routes,
                       std::span<const std::size_t> colored_pairs, std::span<const std::size_t> colors, bool exact) {
    Schedule s;
    s.strategy = std::move(strategy);
    s.granularity = granularity;
    s.routes = std::move(routes);
    s.exact = exact;
    std::size_t period = 1;
    for (auto c : colors) period = std::max(period, c + 1);
    s.period = period;
    s.slots.assign(period, {});
    for (std::size_t i = 0; i < colored_pairs.size(); ++i) {
        const auto p = colored_pairs[i];
        for (const auto& u : route_usages(p, *s.routes[p])) s.slots[colors[i]].push_back(u);
    }
    for (auto& slot : s.slots) std::sort(slot.begin(), slot.end());
    return s;
}

std::vector<std::vector<Route>> pair_routes(const Skeleton& skeleton) {
    std::vector<std::vector<Route>> out;
    for (std::size_t p = 0; p < skeleton.pair_count(); ++p) out.push_back(enumerate_routes(skeleton, p, p));
    return out;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
    return a * b;
}

}  // namespace

Schedule mis_plan(const Skeleton& skeleton, const SearchCaps& caps) {
    if (skeleton.layers() != 2) throw InvalidArgument("mis_schedule: network must have a single layer of links");
    std::vector<std::optional<Route>> routes(skeleton.pair_count());
    std::vector<std::size_t> active;
    for (std::size_t p = 0; p < skeleton.pair_count(); ++p) {
        if (skeleton.has_edge(skeleton.source(p), skeleton.destination(p))) {
            routes[p] = Route{p, p, {skeleton.source(p), skeleton.destination(p)}};
            active.push_back(p);
        }
    }
    bool exact = true;
    const auto colors = color_graph(pair_conflict_graph(skeleton, active), caps, exact);
    return from_coloring("MIS", Granularity::kPair, std::move(routes), active, colors, exact);
}

Schedule mir_plan(const Skeleton& skeleton, const SearchCaps& caps) {
    const auto candidates = pair_routes(skeleton);
    std::vector<std::size_t> active;
    std::uint64_t count = 1;
    for (std::size_t p = 0; p < candidates.size(); ++p) {
        if (candidates[p].empty()) continue;
        active.push_back(p);
        count = saturating_mul(count, candidates[p].size());
    }
    if (count > caps.route_selections) throw CapExceeded("mir_schedule: route selections", count, caps.route_selections);

    std::vector<std::size_t> choice(active.size(), 0);
    std::optional<Schedule> best;
    while (true) {
        std::vector<Route> selected;
        std::vector<std::optional<Route>> routes(skeleton.pair_count());
        for (std::size_t i = 0; i < active.size(); ++i) {
            selected.push_back(candidates[active[i]][choice[i]]);
            routes[active[i]] = selected.back();
        }
        bool exact = true;
        const auto colors = color_graph(route_conflict_graph(skeleton, selected), caps, exact);
        Schedule s = from_coloring("MIR", Granularity::kRoute, std::move(routes), active, colors, exact);
        if (!best || s.period < best->period) best = std::move(s);
        if (best->period == 1) break;
        // Odometer, last pair fastest: lexicographic over choices.
        std::size_t i = active.size();
        while (i > 0) {
            --i;
            if (++choice[i] < candidates[active[i]].size()) break;
            choice[i] = 0;
            if (i == 0) {
                i = active.size() + 1;
                break;
            }
        }
        if (i == active.size() + 1 || active.empty()) break;
    }
    return *best;
}

Schedule mil_plan(const Skeleton& skeleton, const SearchCaps& caps) {
    const Schedule base = mir_plan(skeleton, caps);
    Schedule s;
    s.strategy = "MIL";
    s.granularity = Granularity::kLink;
    s.routes = base.routes;
    s.exact = base.exact;
    const auto usages = schedule_usages(s);
    if (usages.empty()) {
        s.period = 1;
        s.slots.assign(1, {});
        return s;
    }
    if (usages.size() > caps.mil_links) throw CapExceeded("mil_schedule: link usages", usages.size(), caps.mil_links);
    const auto graph = usage_conflict_graph(skeleton, s.routes, usages);
    const auto sets = maximal_independent_sets(graph);
    const std::size_t m = sets.size();

    std::vector<std::vector<std::size_t>> sets_of(usages.size());
    for (std::size_t k = 0; k < m; ++k)
        for (auto u : sets[k]) sets_of[u].push_back(k);
    std::vector<std::size_t> selected_pairs;
    for (std::size_t p = 0; p < s.routes.size(); ++p)
        if (s.routes[p]) selected_pairs.push_back(p);

    // Stage 1: maximize the smallest route activity t.
    //   variables: w_0..w_{m-1}, t
    std::vector<lp::Row> rows;
    {
        lp::Row total{std::vector<Rational>(m + 1), lp::Sense::kEqual, 1};
        for (std::size_t k = 0; k < m; ++k) total.coeffs[k] = 1;
        rows.push_back(total);
        for (std::size_t u = 0; u < usages.size(); ++u) {
            lp::Row r{std::vector<Rational>(m + 1), lp::Sense::kLessEqual, 0};
            r.coeffs[m] = 1;
            for (auto k : sets_of[u]) r.coeffs[k] = -1;
            rows.push_back(std::move(r));
        }
    }
    std::vector<Rational> objective(m + 1);
    objective[m] = 1;
    const auto stage1 = lp::maximize(objective, rows);
    if (stage1.status != lp::Status::kOptimal) throw Error("mil_schedule: max-min program not optimal");
    const Rational t_star = stage1.value;

    // Stage 2: keep every route at >= t*, maximize total route activity.
    //   variables: w_0..w_{m-1}, F_r per selected route
    const std::size_t nvars = m + selected_pairs.size();
    rows.clear();
    {
        lp::Row total{std::vector<Rational>(nvars), lp::Sense::kEqual, 1};
        for (std::size_t k = 0; k < m; ++k) total.coeffs[k] = 1;
        rows.push_back(total);
        for (std::size_t u = 0; u < usages.size(); ++u) {
            const auto r_idx = static_cast<std::size_t>(
                std::find(selected_pairs.begin(), selected_pairs.end(), usages[u].pair) - selected_pairs.begin());
            lp::Row r{std::vector<Rational>(nvars), lp::Sense::kLessEqual, 0};
            r.coeffs[m + r_idx] = 1;
            for (auto k : sets_of[u]) r.coeffs[k] = -1;
            rows.push_back(std::move(r));
        }
        for (std::size_t i = 0; i < selected_pairs.size(); ++i) {
            lp::Row r{std::vector<Rational>(nvars), lp::Sense::kGreaterEqual, t_star};
            r.coeffs[m + i] = 1;
            rows.push_back(std::move(r));
        }
    }
    objective.assign(nvars, 0);
    for (std::size_t i = 0; i < selected_pairs.size(); ++i) objective[m + i] = 1;
    const auto stage2 = lp::maximize(objective, rows);
    if (stage2.status != lp::Status::kOptimal) throw Error("mil_schedule: total-activity program not optimal");

    Integer period = 1;
    for (std::size_t k = 0; k < m; ++k) {
        const Integer den = boost::multiprecision::denominator(stage2.x[k]);
        period = period / boost::multiprecision::gcd(period, den) * den;
    }
    if (period > caps.mil_period)
        throw CapExceeded("mil_schedule: period", static_cast<std::uint64_t>(period), caps.mil_period);
    s.period = static_cast<std::size_t>(period);
    for (std::size_t k = 0; k < m; ++k) {
        const Rational reps = stage2.x[k] * Rational(period);
        const auto count = static_cast<std::size_t>(boost::multiprecision::numerator(reps));
        std::vector<Usage> slot;
        for (auto u : sets[k]) slot.push_back(usages[u]);
        std::sort(slot.begin(), slot.end());
        for (std::size_t c = 0; c < count; ++c) s.slots.push_back(slot);
    }
    return s;
}

namespace {

Rational pair_rate(const Schedule& schedule, std::size_t pair, const std::function<int(const Edge&)>& gains) {
    if (!schedule.routes.at(pair)) return 0;
    const Route& r = *schedule.routes[pair];
    const auto links = r.links();
    std::optional<Rational> rate;
    for (std::size_t h = 0; h < links.size(); ++h) {
        const int g = gains(links[h]);
        const Rational hop_rate(Integer(schedule.active_slots({pair, h})) * g, Integer(schedule.period));
        if (!rate || hop_rate < *rate) rate = hop_rate;
    }
    return rate.value_or(0);
}

const Skeleton& common_skeleton(std::span<const LocalView> views) {
    if (views.empty()) throw InvalidArgument("schedule: no views given");
    for (const auto& v : views)
        if (!(v.skeleton == views.front().skeleton)) throw InvalidArgument("schedule: views disagree on the skeleton");
    return views.front().skeleton;
}

RateReport rates_from_views(const Schedule& schedule, std::span<const LocalView> views) {
    const Skeleton& sk = views.front().skeleton;
    RateReport report{schedule.strategy, {}, 0};
    for (std::size_t p = 0; p < sk.pair_count(); ++p) {
        const auto it = std::find_if(views.begin(), views.end(),
                                     [&](const LocalView& v) { return v.owner == sk.source(p); });
        if (it == views.end()) throw InvalidArgument("schedule: missing the view of the source of pair " + std::to_string(p));
        const LocalView& view = *it;
        const Rational rate = pair_rate(schedule, p, [&](const Edge& e) {
            const auto g = view.known_gains.find(e);
            if (g == view.known_gains.end()) throw InvalidArgument("schedule: source does not know a gain on its route");
            return g->second;
        });
        report.per_pair.push_back(rate);
        report.sum += rate;
    }
    return report;
}

}  // namespace

RateReport rates_from_gains(const Schedule& schedule, const std::function<int(const Edge&)>& gains) {
    RateReport report{schedule.strategy, {}, 0};
    for (std::size_t p = 0; p < schedule.routes.size(); ++p) {
        report.per_pair.push_back(pair_rate(schedule, p, gains));
        report.sum += report.per_pair.back();
    }
    return report;
}

ScheduleResult mis_schedule(std::span<const LocalView> views, const SearchCaps& caps) {
    Schedule s = mis_plan(common_skeleton(views), caps);
    RateReport r = rates_from_views(s, views);
    return {std::move(s), std::move(r)};
}

ScheduleResult mir_schedule(std::span<const LocalView> views, const SearchCaps& caps) {
    Schedule s = mir_plan(common_skeleton(views), caps);
    RateReport r = rates_from_views(s, views);
    return {std::move(s), std::move(r)};
}

ScheduleResult mil_schedule(std::span<const LocalView> views, const SearchCaps& caps) {
    Schedule s = mil_plan(common_skeleton(views), caps);
    RateReport r = rates_from_views(s, views);
    return {std::move(s), std::move(r)};
}

std::vector<LocalView> all_views(const DetNetwork& network) {
    std::vector<LocalView> views;
    for (NodeIndex v = 0; v < network.node_count(); ++v) views.push_back(node_view(network, v));
    return views;
}

// ------------------------------------------------------------ simulation

ScheduleSimulation simulate_schedule(const Schedule& schedule, const DetNetwork& network, std::uint64_t seed,
                                     std::size_t periods, std::optional<std::vector<std::uint64_t>> quota_override) {
    const auto& sk = network.skeleton();
    if (schedule.routes.size() != sk.pair_count()) throw InvalidArgument("simulate_schedule: one route entry per pair");
    const auto q = static_cast<std::size_t>(network.q());
    const std::size_t k = sk.pair_count();

    std::vector<std::vector<int>> gains(k);
    std::vector<std::uint64_t> quota(k, 0);
    std::size_t max_hops = 0;
    for (std::size_t p = 0; p < k; ++p) {
        if (!schedule.routes[p]) continue;
        const Route& r = *schedule.routes[p];
        std::optional<std::uint64_t> bottleneck;
        for (std::size_t h = 0; h < r.hops(); ++h) {
            const int g = network.gain(r.nodes[h], r.nodes[h + 1]);
            if (g == 0) throw InvalidArgument("schedule references unknown link");
            gains[p].push_back(g);
            const std::uint64_t cap = schedule.active_slots({p, h}) * static_cast<std::uint64_t>(g);
            bottleneck = bottleneck ? std::min(*bottleneck, cap) : cap;
        }
        quota[p] = bottleneck.value_or(0);
        max_hops = std::max(max_hops, r.hops());
    }
    if (quota_override) {
        if (quota_override->size() != k) throw InvalidArgument("simulate_schedule: one quota per pair");
        quota = *quota_override;
    }

    ScheduleSimulation sim;
    sim.claimed.resize(k);
    sim.delivered.assign(k, 0);
    for (std::size_t p = 0; p < k; ++p) sim.claimed[p] = quota[p] * periods;

    SplitMix64 rng(seed);
    std::vector<std::vector<std::uint8_t>> stream(k);
    std::vector<std::vector<std::deque<std::uint8_t>>> buffers(k);
    for (std::size_t p = 0; p < k; ++p)
        if (schedule.routes[p]) buffers[p].resize(schedule.routes[p]->hops());

    auto fail = [&](std::string why) {
        if (sim.ok) {
            sim.ok = false;
            sim.failure = std::move(why);
        }
    };

    const std::size_t horizon = periods + max_hops;
    const auto layers = static_cast<std::size_t>(sk.layers());
    for (std::size_t period = 0; period < horizon && sim.ok; ++period) {
        if (period < periods) {
            for (std::size_t p = 0; p < k; ++p) {
                if (!schedule.routes[p]) continue;
                for (std::uint64_t b = 0; b < quota[p]; ++b) {
                    stream[p].push_back(static_cast<std::uint8_t>(rng.bit()));
                    buffers[p][0].push_back(stream[p].back());
                }
            }
        }
        for (const auto& slot : schedule.slots) {
            for (std::size_t layer = 0; layer + 1 < layers; ++layer) {
                Signals transmit(sk.node_count());
                struct Sent {
                    Usage usage;
                    NodeIndex receiver;
                    std::size_t bits;
                };
                std::vector<Sent> sent;
                for (const auto& u : slot) {
                    if (u.hop != layer || !schedule.routes.at(u.pair)) continue;
                    const Route& r = *schedule.routes[u.pair];
                    const NodeIndex tx = r.nodes[u.hop];
                    const auto g = static_cast<std::size_t>(gains[u.pair][u.hop]);
                    auto& buf = buffers[u.pair][u.hop];
                    const std::size_t n = std::min(g, buf.size());
                    Bits x(q, 0);
                    for (std::size_t j = 0; j < n; ++j) {
                        x[j] = buf.front();
                        buf.pop_front();
                    }
                    if (!transmit[tx].empty()) fail("two hops share transmitter " + sk.node(tx).id + " in one slot");
                    transmit[tx] = std::move(x);
                    sent.push_back({u, r.nodes[u.hop + 1], n});
                }
                if (sent.empty()) continue;
                const Signals received = propagate(network, transmit);
                for (const auto& s : sent) {
                    const auto g = static_cast<std::size_t>(gains[s.usage.pair][s.usage.hop]);
                    const Bits& y = received[s.receiver];
                    const std::size_t hops = schedule.routes[s.usage.pair]->hops();
                    for (std::size_t j = 0; j < s.bits; ++j) {
                        const std::uint8_t bit = y[q - g + j];
                        if (s.usage.hop + 1 < hops) {
                            buffers[s.usage.pair][s.usage.hop + 1].push_back(bit);
                            continue;
                        }
                        auto& count = sim.delivered[s.usage.pair];
                        if (count >= stream[s.usage.pair].size() || stream[s.usage.pair][count] != bit) {
                            fail("pair " + std::to_string(s.usage.pair) + " decoded a corrupted bit");
                            break;
                        }
                        ++count;
                    }
                }
            }
        }
        for (std::size_t p = 0; p < k && sim.ok; ++p) {
            if (!schedule.routes[p]) continue;
            const auto hops = static_cast<long long>(schedule.routes[p]->hops());
            const long long due = std::min<long long>(static_cast<long long>(period) + 2 - hops,
                                                      static_cast<long long>(periods));
            if (due > 0 && sim.delivered[p] < static_cast<std::uint64_t>(due) * quota[p])
                fail("pair " + std::to_string(p) + " fell behind its quota in period " + std::to_string(period));
        }
    }
    for (std::size_t p = 0; p < k && sim.ok; ++p)
        if (sim.delivered[p] != sim.claimed[p]) fail("pair " + std::to_string(p) + " delivered fewer bits than claimed");
    return sim;
}

RateReport achieved_rates(const Schedule& schedule, const DetNetwork& network, std::size_t trials, std::uint64_t seed) {
    const RateReport report = rates_from_gains(schedule, [&](const Edge& e) {
        const int g = network.gain(e.from, e.to);
        if (g == 0) throw InvalidArgument("schedule references unknown link");
        return g;
    });
    const SplitMix64 root(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto sim = simulate_schedule(schedule, network, root.split(t).next());
        if (!sim.ok) throw Error("achieved_rates: simulation disagrees with closed form: " + sim.failure);
    }
    return report;
}

// ----------------------------------------------------------------- json

nlohmann::json rates_to_json(const RateReport& rates) {
    nlohmann::json doc;
    doc["strategy"] = rates.strategy;
    doc["per_pair"] = nlohmann::json::array();
    for (const auto& r : rates.per_pair) doc["per_pair"].push_back(to_string(r));
    doc["sum_rate"] = to_string(rates.sum);
    return doc;
}

nlohmann::json schedule_to_json(const Schedule& schedule, const Skeleton& skeleton,
                                const std::optional<RateReport>& rates) {
    nlohmann::json doc;
    doc["strategy"] = schedule.strategy;
    switch (schedule.granularity) {
        case Granularity::kPair: doc["granularity"] = "pair"; break;
        case Granularity::kRoute: doc["granularity"] = "route"; break;
        case Granularity::kLink: doc["granularity"] = "link"; break;
    }
    doc["exact"] = schedule.exact;
    doc["period"] = schedule.period;
    doc["routes"] = nlohmann::json::array();
    for (const auto& r : schedule.routes)
        doc["routes"].push_back(r ? nlohmann::json(route_label(skeleton, *r)) : nlohmann::json(nullptr));
    doc["slots"] = nlohmann::json::array();
    for (const auto& slot : schedule.slots) {
        std::vector<std::string> labels;
        for (const auto& u : slot) {
            const Route& r = *schedule.routes.at(u.pair);
            std::string label;
            switch (schedule.granularity) {
                case Granularity::kPair: label = "p" + std::to_string(u.pair); break;
                case Granularity::kRoute: label = route_label(skeleton, r); break;
                case Granularity::kLink: label = usage_label(skeleton, r, u.hop); break;
            }
            if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
        }
        doc["slots"].push_back(labels);
    }
    if (rates) {
        doc["rates"] = nlohmann::json::array();
        for (const auto& r : rates->per_pair) doc["rates"].push_back(to_string(r));
        doc["sum_rate"] = to_string(rates->sum);
    }
    return doc;
}

// -------------------------------------------------------------- families

namespace {

std::uint64_t multisets(std::uint64_t n, std::uint64_t k) {
    // C(n + k - 1, k), saturating.
    if (n == 0) return k == 0 ? 1 : 0;
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n + i - 1;
        if (result > UINT64_MAX / num) return UINT64_MAX;
        result = result * num / i;
    }
    return result;
}

struct FamilyAssignment {
    std::vector<std::optional<Route>> routes;
    std::vector<std::vector<Usage>> slot_options;  // maximal sets as usages
};

template <typename Fn>
void for_each_assignment(const Skeleton& skeleton, Family family, Fn&& fn) {
    const auto candidates = pair_routes(skeleton);
    const std::size_t k = skeleton.pair_count();
    std::vector<std::size_t> choice(k, 0);  // 0 = silent, i = route i-1
    while (true) {
        FamilyAssignment a;
        a.routes.resize(k);
        std::vector<Route> selected;
        std::vector<std::size_t> selected_pairs;
        for (std::size_t p = 0; p < k; ++p) {
            if (choice[p] == 0) continue;
            a.routes[p] = candidates[p][choice[p] - 1];
            selected.push_back(*a.routes[p]);
            selected_pairs.push_back(p);
        }
        if (selected.empty()) {
            a.slot_options.push_back({});
        } else if (family == Family::kRouteFamily) {
            for (const auto& set : maximal_independent_sets(route_conflict_graph(skeleton, selected))) {
                std::vector<Usage> slot;
                for (auto i : set)
                    for (const auto& u : route_usages(selected_pairs[i], selected[i])) slot.push_back(u);
                std::sort(slot.begin(), slot.end());
                a.slot_options.push_back(std::move(slot));
            }
        } else {
            Schedule probe;
            probe.routes = a.routes;
            const auto usages = schedule_usages(probe);
            for (const auto& set : maximal_independent_sets(usage_conflict_graph(skeleton, a.routes, usages))) {
                std::vector<Usage> slot;
                for (auto i : set) slot.push_back(usages[i]);
                std::sort(slot.begin(), slot.end());
                a.slot_options.push_back(std::move(slot));
            }
        }
        fn(a);
        std::size_t p = k;
        bool done = true;
        while (p > 0) {
            --p;
            if (++choice[p] <= candidates[p].size()) {
                done = false;
                break;
            }
            choice[p] = 0;
        }
        if (done) return;
    }
}

}  // namespace

std::uint64_t family_size(const Skeleton& skeleton, Family family, const SearchCaps& caps) {
    std::uint64_t total = 0;
    for_each_assignment(skeleton, family, [&](const FamilyAssignment& a) {
        for (int t = 1; t <= caps.family_period; ++t) {
            const auto n = multisets(a.slot_options.size(), static_cast<std::uint64_t>(t));
            total = (UINT64_MAX - total < n) ? UINT64_MAX : total + n;
        }
    });
    return total;
}

void for_each_family_schedule(const Skeleton& skeleton, Family family, const SearchCaps& caps,
                              const std::function<void(const Schedule&)>& fn) {
    const std::uint64_t size = family_size(skeleton, family, caps);
    if (size > caps.family_schedules) throw CapExceeded("schedule family size", size, caps.family_schedules);
    const std::string name = family == Family::kRouteFamily ? "MIR-family" : "MIL-family";
    const Granularity granularity = family == Family::kRouteFamily ? Granularity::kRoute : Granularity::kLink;
    for_each_assignment(skeleton, family, [&](const FamilyAssignment& a) {
        const std::size_t m = a.slot_options.size();
        for (int t = 1; t <= caps.family_period; ++t) {
            const auto period = static_cast<std::size_t>(t);
            std::vector<std::size_t> pick(period, 0);
            while (true) {
                Schedule s;
                s.strategy = name;
                s.granularity = granularity;
                s.routes = a.routes;
                s.period = period;
                for (auto i : pick) s.slots.push_back(a.slot_options[i]);
                fn(s);
                // Next nondecreasing sequence.
                std::size_t i = period;
                while (i > 0 && pick[i - 1] + 1 == m) --i;
                if (i == 0) break;
                ++pick[i - 1];
                for (std::size_t j = i; j < period; ++j) pick[j] = pick[i - 1];
            }
        }
    });
}

}  // namespace detnet
