// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure.  Optional arguments select criteria by number (C5 then only
// summarizes the simulations the selected criteria produced).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "detnet/capacity.hpp"
#include "detnet/coding.hpp"
#include "detnet/errors.hpp"
#include "detnet/experiment.hpp"
#include "detnet/localview.hpp"
#include "detnet/prng.hpp"
#include "detnet/scheduling.hpp"
#include "support.hpp"

using namespace detnet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kTrials = 100;

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> problems;

    void fail(const std::string& why) {
        pass = false;
        if (problems.size() < 10) problems.push_back(why);
    }
};

/// Simulation bookkeeping shared by every criterion.
struct SimulationLog {
    std::uint64_t schedules = 0;
    std::uint64_t strategies = 0;
    std::uint64_t failures = 0;
    std::vector<std::string> problems;

    void failure(const std::string& why) {
        ++failures;
        if (problems.size() < 10) problems.push_back(why);
    }
};

SimulationLog sims;

std::function<int(const Edge&)> gains_of(const DetNetwork& net) {
    return [&net](const Edge& e) { return net.gain(e.from, e.to); };
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Simulates the schedule `kTrials` times and checks the closed form.
void simulate(const Schedule& plan, const DetNetwork& net, const std::string& what) {
    ++sims.schedules;
    try {
        const RateReport closed = rates_from_gains(plan, gains_of(net));
        const RateReport got = achieved_rates(plan, net, kTrials, 7);
        if (got.sum != closed.sum) sims.failure(what + ": simulated rates differ from the closed form");
    } catch (const Error& e) {
        sims.failure(what + ": " + e.what());
    }
}

/// Verifies a trimmed strategy over `kTrials` random message trials.
void verify(const DetNetwork& net, const LinearStrategy& strategy, const std::string& what) {
    ++sims.strategies;
    const VerifyReport v = verify_strategy(net, strategy, kTrials, 11);
    if (!v.ok) sims.failure(what + ": " + v.failure);
}

std::optional<DetNetwork> random_layered(SplitMix64& rng, int pairs, int max_layers, int max_width, int max_gain,
                                         double min_density) {
    RandomLayeredParams p;
    p.layers = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_layers - 1)));
    p.width = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_width)));
    p.pairs = pairs;
    p.max_gain = max_gain;
    p.density = min_density + (1.0 - min_density) * rng.unit();
    try {
        return gen_random_layered(rng.next(), p);
    } catch (const InvalidNetwork&) {
        return std::nullopt;
    }
}

std::string skeleton_key(const DetNetwork& net) {
    std::string key = std::to_string(net.node_count()) + ":";
    for (const auto& l : net.links()) key += std::to_string(l.from) + ">" + std::to_string(l.to) + ",";
    return key;
}

nlohmann::json load_witnesses() {
    std::ifstream in(std::string(DETNET_FIXTURE_DIR) + "/witnesses.json");
    if (!in) throw Error("cannot read witnesses.json");
    return nlohmann::json::parse(in);
}

// ------------------------------------------------------------------ C1

Outcome criterion1() {
    const auto start = Clock::now();
    Outcome out;
    SplitMix64 rng(1);
    std::size_t instances = 0;
    std::size_t positive = 0;
    std::size_t block2_done = 0;
    std::size_t block2_refused = 0;
    while (instances < 240) {
        const auto net = random_layered(rng, 1, 4, 3, 3, 0.3);
        if (!net) continue;
        ++instances;
        const std::string id = "C1 instance " + std::to_string(instances);
        const std::size_t cut = unicast_min_cut(*net, 0);
        if (cut > 0) ++positive;
        std::optional<Rational> best;
        for (int block = 1; block <= 2; ++block) {
            SearchOptions options;
            options.block = block;
            try {
                const SearchResult r = strategy_search(*net, options);
                if (block == 2) ++block2_done;
                if (r.rates.sum > Rational(static_cast<long>(cut)))
                    out.fail(id + ": T=" + std::to_string(block) + " rate " + to_string(r.rates.sum) +
                             " exceeds the min cut " + std::to_string(cut));
                if (!best || r.rates.sum > *best) best = r.rates.sum;
                verify(*net, r.strategy, id + " T=" + std::to_string(block));
            } catch (const CapExceeded& e) {
                if (block == 1) {
                    out.fail(id + ": T=1 search refused: " + e.what());
                } else {
                    ++block2_refused;
                }
            }
        }
        if (best && *best != Rational(static_cast<long>(cut)))
            out.fail(id + ": best rate " + to_string(*best) + " != min cut " + std::to_string(cut));
    }
    const double elapsed = seconds_since(start);
    if (elapsed > 600) out.fail("runtime " + std::to_string(elapsed) + " s exceeds 10 minutes");
    std::ostringstream d;
    d << instances << " networks (" << positive << " with positive min cut); best over T<=2 equals the min cut"
      << "; T=2 completed on " << block2_done << ", refused by the search cap on " << block2_refused << "; "
      << static_cast<int>(elapsed) << " s";
    out.detail = d.str();
    return out;
}

// ------------------------------------------------------------------ C2

struct Plans {
    Schedule mir;
    Schedule mil;
};

Outcome criterion2() {
    const auto start = Clock::now();
    Outcome out;
    std::map<std::string, Plans> cache;
    std::uint64_t instances = 0;
    std::uint64_t searched = 0;
    std::uint64_t mil_over_mir = 0;
    std::uint64_t coding_over_mil = 0;

    auto check = [&](const DetNetwork& net, const std::string& id, bool search, bool simulate_all) {
        ++instances;
        const std::string key = skeleton_key(net);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, Plans{mir_plan(net.skeleton()), mil_plan(net.skeleton())}).first;
        const Plans& plans = it->second;
        const Rational mir = rates_from_gains(plans.mir, gains_of(net)).sum;
        const Rational mil = rates_from_gains(plans.mil, gains_of(net)).sum;
        if (mil < mir) out.fail(id + ": MIL " + to_string(mil) + " < MIR " + to_string(mir));
        if (mil > mir) ++mil_over_mir;

        // Best coding: every linear strategy at hand, rated by its transfer map.
        const LinearStrategy compiled_mil = trim_strategy(net, compile_schedule(plans.mil, net));
        const LinearStrategy compiled_mir = trim_strategy(net, compile_schedule(plans.mir, net));
        Rational coding = std::max(strategy_rates(net, compiled_mil).sum, strategy_rates(net, compiled_mir).sum);
        std::optional<SearchResult> found;
        if (search) {
            ++searched;
            found = strategy_search(net, SearchOptions{});
            coding = std::max(coding, found->rates.sum);
        }
        if (coding < mil) out.fail(id + ": best coding " + to_string(coding) + " < MIL " + to_string(mil));
        if (coding > mil) ++coding_over_mil;
        if (simulate_all) {
            simulate(plans.mil, net, id + " MIL");
            simulate(plans.mir, net, id + " MIR");
            verify(net, compiled_mil, id + " compiled MIL");
            if (found) verify(net, found->strategy, id + " searched");
        }
    };

    for (int k = 1; k <= 3; ++k) {
        ExperimentConfig config;
        config.generator.name = "k2k_exhaustive";
        config.generator.params = {{"k", k}, {"max_gain", 2}};
        std::uint64_t tuples = 1;
        for (int i = 0; i < 4 * k; ++i) tuples *= 3;
        config.generator.count = tuples;
        // k = 3 searches and simulates a seeded sample; the sweep covers all tuples.
        SplitMix64 pick(3);
        std::set<std::uint64_t> sample;
        if (k == 3)
            while (sample.size() < 2000) sample.insert(pick.below(tuples));
        for (std::uint64_t i = 0; i < tuples; ++i) {
            DetNetwork net;
            try {
                net = generate_instance(config, i);
            } catch (const InvalidNetwork&) {
                continue;
            }
            const bool full = k < 3 || sample.count(i) != 0;
            check(net, "k=" + std::to_string(k) + " #" + std::to_string(i), full, full);
        }
    }

    // Pinned strict witnesses.
    const auto w = load_witnesses();
    std::size_t pinned = 0;
    for (const auto& entry : w.at("coding_over_mil")) {
        const DetNetwork net = network_from_json(entry.at("network"));
        const LinearStrategy s = strategy_from_json(entry.at("strategy"), net);
        const Rational coding = strategy_rates(net, s).sum;
        const Rational mil = rates_from_gains(mil_plan(net.skeleton()), gains_of(net)).sum;
        const Rational searched_rate = strategy_search(net, SearchOptions{}).rates.sum;
        if (to_string(coding) != entry.at("coding_sum_rate").get<std::string>() ||
            to_string(mil) != entry.at("mil_sum_rate").get<std::string>() || searched_rate != coding || !(coding > mil))
            out.fail("pinned coding witness " + std::to_string(pinned) + " does not reproduce");
        verify(net, s, "pinned coding witness");
        simulate(mil_plan(net.skeleton()), net, "pinned coding witness MIL");
        ++pinned;
    }
    std::size_t pinned_schedules = 0;
    for (const auto& entry : w.at("mil_over_mir")) {
        const DetNetwork net = network_from_json(entry.at("network"));
        const auto& sk = net.skeleton();
        const Schedule mil = mil_plan(sk);
        const Schedule mir = mir_plan(sk);
        const RateReport mil_rates = rates_from_gains(mil, gains_of(net));
        const RateReport mir_rates = rates_from_gains(mir, gains_of(net));
        if (schedule_to_json(mil, sk, mil_rates) != entry.at("mil") ||
            schedule_to_json(mir, sk, mir_rates) != entry.at("mir") || !(mil_rates.sum > mir_rates.sum))
            out.fail("pinned MIL witness " + std::to_string(pinned_schedules) + " does not reproduce");
        simulate(mil, net, "pinned MIL witness");
        simulate(mir, net, "pinned MIR witness");
        ++pinned_schedules;
    }
    if (pinned == 0 || pinned_schedules == 0) out.fail("missing pinned witnesses");

    const double elapsed = seconds_since(start);
    if (elapsed > 900) out.fail("runtime " + std::to_string(elapsed) + " s exceeds 15 minutes");
    std::ostringstream d;
    d << instances << " k x 2 x k instances (k <= 3, gains <= 2, every gain tuple), " << cache.size()
      << " topologies; coding search on " << searched << "; strict MIL > MIR on " << mil_over_mir
      << ", coding > MIL on " << coding_over_mil << "; pinned witnesses " << pinned << " coding, "
      << pinned_schedules << " MIL; " << static_cast<int>(elapsed) << " s";
    out.detail = d.str();
    return out;
}

// ------------------------------------------------------------------ C3

/// Disjoint source-to-destination paths of random lengths and gains.
DetNetwork disjoint_paths(SplitMix64& rng, int k, int layers) {
    std::vector<std::pair<std::string, int>> nodes;
    std::vector<LinkSpec> links;
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < k; ++i) {
        const std::string tag = std::to_string(i + 1);
        std::string prev = "s" + tag;
        nodes.push_back({prev, 0});
        for (int l = 1; l < layers; ++l) {
            const std::string cur = l + 1 == layers ? "d" + tag : "v" + tag + "_" + std::to_string(l);
            nodes.push_back({cur, l});
            links.push_back({prev, cur, 1 + static_cast<long>(rng.below(3))});
            prev = cur;
        }
        pairs.push_back({"s" + tag, "d" + tag});
    }
    return fixture::build(layers, nodes, links, pairs);
}

std::set<std::string> members_of(const ConsistencyClass& cls) {
    std::set<std::string> out;
    ConsistentNetworks(cls).for_each([&](std::uint64_t, const DetNetwork& m) { out.insert(network_to_json(m).dump()); });
    return out;
}

Outcome criterion3() {
    const auto start = Clock::now();
    Outcome out;
    std::uint64_t reports = 0;
    std::uint64_t free_reports = 0;
    auto record = [&](const AlphaReport& rep, const std::string& id) {
        ++reports;
        if (rep.alpha < 0 || rep.alpha > 1) out.fail(id + ": alpha " + to_string(rep.alpha) + " outside [0, 1]");
        for (const auto& m : rep.members)
            if (m.ratio < 0 || m.ratio > 1) out.fail(id + ": member ratio " + to_string(m.ratio) + " outside [0, 1]");
    };
    const std::vector<Runner> multi_hop{Runner::kMIR, Runner::kMIL, Runner::kCompiledCoding, Runner::kSilent};

    // Reports over local views of k x 2 x k and random layered instances.
    SplitMix64 rng(3);
    int classes = 0;
    while (classes < 60) {
        std::optional<DetNetwork> net;
        if (classes % 2 == 0) {
            ExperimentConfig config;
            config.generator.name = "k2k";
            config.generator.count = 1;
            config.generator.params = {{"k", 2}, {"max_gain", 2}};
            config.seed = rng.next();
            try {
                net = generate_instance(config, 0);
            } catch (const InvalidNetwork&) {
                continue;
            }
        } else {
            net = random_layered(rng, 2, 3, 2, 2, 0.5);
            if (!net) continue;
        }
        const auto& sk = net->skeleton();
        std::vector<LocalView> views{merged_view(*net)};
        for (NodeIndex v = 0; v < sk.node_count(); ++v) views.push_back(node_view(*net, v));
        for (const auto& view : views) {
            const ConsistencyClass cls = make_class(view, net->q());
            const std::string id = "C3 class " + std::to_string(classes);
            try {
                const ClassCapacity capacity = class_capacity(cls);
                for (auto runner : multi_hop) record(normalized_sum_rate(runner, cls, {}, &capacity), id);
                if (sk.layers() == 2) record(normalized_sum_rate(Runner::kMIS, cls, {}, &capacity), id);
            } catch (const CapExceeded&) {
                continue;
            }
        }
        ++classes;
    }

    // Interference-free instances: alpha is exactly 1 for every strategy.
    for (int trial = 0; trial < 30; ++trial) {
        const int k = 1 + static_cast<int>(rng.below(3));
        DetNetwork net;
        std::vector<Runner> runners{Runner::kMIR, Runner::kMIL, Runner::kCompiledCoding};
        if (trial % 2 == 0) {
            std::vector<std::vector<int>> gains(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k), 0));
            for (int i = 0; i < k; ++i) gains[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng.below(3));
            net = gen_interference(gains);
            runners.push_back(Runner::kMIS);
        } else {
            net = disjoint_paths(rng, k, 2 + static_cast<int>(rng.below(3)));
        }
        std::vector<LocalView> views{merged_view(net)};
        for (std::size_t p = 0; p < net.skeleton().pair_count(); ++p) views.push_back(source_view(net, p));
        for (const auto& view : views) {
            const ConsistencyClass cls = make_class(view, net.q());
            const ClassCapacity capacity = class_capacity(cls);
            for (auto runner : runners) {
                const AlphaReport rep = normalized_sum_rate(runner, cls, {}, &capacity);
                record(rep, "C3 interference-free " + std::to_string(trial));
                ++free_reports;
                if (rep.alpha != 1)
                    out.fail("interference-free instance " + std::to_string(trial) + ": " + runner_name(runner) +
                             " alpha " + to_string(rep.alpha));
            }
        }
    }

    // Nested classes: wide domain, narrow domain, then the merged view.
    int triples = 0;
    int strict = 0;
    while (triples < 24) {
        const auto net = random_layered(rng, 2, 3, 2, 2, 0.6);
        if (!net) continue;
        const auto& sk = net->skeleton();
        const NodeIndex owner = sk.source(rng.below(sk.pair_count()));
        const LocalView view = node_view(*net, owner);
        const ConsistencyClass wide{view, {1, 2, 3}};
        const ConsistencyClass mid{view, {1, 2}};
        const ConsistencyClass inner{merged_view(*net), {1, 2}};
        std::set<std::string> a, b, c;
        try {
            a = members_of(wide);
            b = members_of(mid);
            c = members_of(inner);
        } catch (const CapExceeded&) {
            continue;
        }
        const std::string id = "C3 triple " + std::to_string(triples);
        if (!std::includes(a.begin(), a.end(), b.begin(), b.end()) ||
            !std::includes(b.begin(), b.end(), c.begin(), c.end())) {
            out.fail(id + ": classes are not nested");
            continue;
        }
        if (a.size() > b.size() && b.size() > c.size()) ++strict;
        for (auto runner : {Runner::kMIR, Runner::kMIL, Runner::kCompiledCoding}) {
            const AlphaReport ra = normalized_sum_rate(runner, wide);
            const AlphaReport rb = normalized_sum_rate(runner, mid);
            const AlphaReport rc = normalized_sum_rate(runner, inner);
            record(ra, id);
            record(rb, id);
            record(rc, id);
            if (ra.alpha > rb.alpha || rb.alpha > rc.alpha)
                out.fail(id + ": " + runner_name(runner) + " alpha " + to_string(ra.alpha) + ", " +
                         to_string(rb.alpha) + ", " + to_string(rc.alpha) + " is not monotone");
        }
        ++triples;
    }
    std::ostringstream d;
    d << reports << " alpha reports in [0, 1]; " << free_reports << " interference-free reports all 1; " << triples
      << " nested class triples monotone (" << strict << " strictly nested); " << static_cast<int>(seconds_since(start))
      << " s";
    out.detail = d.str();
    return out;
}

// ------------------------------------------------------------------ C4

/// Conflict graphs and plans derived from a skeleton, serialized.
std::string derive(const Skeleton& sk) {
    nlohmann::json doc;
    std::vector<Route> routes;
    for (std::size_t p = 0; p < sk.pair_count(); ++p) {
        const auto own = enumerate_routes(sk, p, p);
        routes.insert(routes.end(), own.begin(), own.end());
    }
    doc["route_graph"] = graph_to_json(route_conflict_graph(sk, routes));
    if (sk.layers() == 2) {
        std::vector<std::size_t> pairs(sk.pair_count());
        for (std::size_t p = 0; p < pairs.size(); ++p) pairs[p] = p;
        doc["pair_graph"] = graph_to_json(pair_conflict_graph(sk, pairs));
        doc["MIS"] = schedule_to_json(mis_plan(sk), sk);
    }
    const Schedule mil = mil_plan(sk);
    const auto usages = schedule_usages(mil);
    doc["link_graph"] = graph_to_json(usage_conflict_graph(sk, mil.routes, usages));
    doc["MIR"] = schedule_to_json(mir_plan(sk), sk);
    doc["MIL"] = schedule_to_json(mil, sk);
    return doc.dump();
}

Outcome criterion4() {
    const auto start = Clock::now();
    Outcome out;
    SplitMix64 rng(4);
    int instances = 0;
    std::uint64_t comparisons = 0;
    while (instances < 60) {
        std::optional<DetNetwork> net;
        if (instances % 3 == 0) {
            ExperimentConfig config;
            config.generator.name = "k2k";
            config.generator.params = {{"k", 2 + static_cast<int>(rng.below(2))}, {"max_gain", 2}};
            config.seed = rng.next();
            try {
                net = generate_instance(config, 0);
            } catch (const InvalidNetwork&) {
                continue;
            }
        } else {
            net = random_layered(rng, 2 + static_cast<int>(rng.below(2)), 4, 3, 3, 0.4);
            if (!net) continue;
        }
        const std::string id = "C4 instance " + std::to_string(instances);
        std::string central;
        try {
            central = derive(net->skeleton());
        } catch (const CapExceeded&) {
            continue;
        }
        for (NodeIndex v = 0; v < net->node_count(); ++v) {
            ++comparisons;
            if (derive(node_view(*net, v).skeleton) != central)
                out.fail(id + ": node " + net->skeleton().node(v).id + " derives a different schedule");
        }
        // Per-source rates from local gains equal the central closed form.
        const auto views = all_views(*net);
        const auto& sk = net->skeleton();
        const ScheduleResult mil = mil_schedule(views);
        const ScheduleResult mir = mir_schedule(views);
        if (rates_to_json(mil.rates) != rates_to_json(rates_from_gains(mil_plan(sk), gains_of(*net))) ||
            rates_to_json(mir.rates) != rates_to_json(rates_from_gains(mir_plan(sk), gains_of(*net))))
            out.fail(id + ": distributed rates differ from the central ones");
        simulate(mil.schedule, *net, id + " MIL");
        simulate(mir.schedule, *net, id + " MIR");
        if (sk.layers() == 2) simulate(mis_schedule(views).schedule, *net, id + " MIS");
        ++instances;
    }
    std::ostringstream d;
    d << instances << " instances, " << comparisons
      << " per-node recomputations of conflict graphs and MIS/MIR/MIL schedules byte-identical; "
      << static_cast<int>(seconds_since(start)) << " s";
    out.detail = d.str();
    return out;
}

// ------------------------------------------------------------------ C5

Outcome criterion5() {
    Outcome out;
    if (sims.failures > 0) out.pass = false;
    out.problems = sims.problems;
    if (sims.schedules == 0 || sims.strategies == 0) out.fail("nothing was simulated");
    std::ostringstream d;
    d << sims.schedules << " schedules and " << sims.strategies << " coding strategies, " << kTrials
      << " random-message trials each, " << sims.failures << " failures";
    out.detail = d.str();
    return out;
}

// ------------------------------------------------------------------ C6

Outcome criterion6() {
    const auto start = Clock::now();
    Outcome out;
    SplitMix64 rng(6);

    int triples = 0;
    while (triples < 1000) {
        const auto net = random_layered(rng, 1 + static_cast<int>(rng.below(3)), 4, 3, 4, 0.3);
        if (!net) continue;
        const auto q = static_cast<std::size_t>(net->q());
        Signals x(net->node_count(), Bits(q));
        Signals y(net->node_count(), Bits(q));
        Signals sum(net->node_count(), Bits(q));
        for (std::size_t v = 0; v < net->node_count(); ++v)
            for (std::size_t b = 0; b < q; ++b) {
                x[v][b] = static_cast<std::uint8_t>(rng.bit());
                y[v][b] = static_cast<std::uint8_t>(rng.bit());
                sum[v][b] = static_cast<std::uint8_t>(x[v][b] ^ y[v][b]);
            }
        const Signals px = propagate(*net, x);
        const Signals py = propagate(*net, y);
        const Signals ps = propagate(*net, sum);
        for (std::size_t v = 0; v < net->node_count(); ++v)
            for (std::size_t b = 0; b < q; ++b)
                if (ps[v][b] != (px[v][b] ^ py[v][b]))
                    out.fail("propagate is not linear on triple " + std::to_string(triples));
        ++triples;
    }

    int shifts = 0;
    for (int q = 1; q <= 4; ++q)
        for (int n = 0; n <= q; ++n) {
            ++shifts;
            if (shift_matrix(q, n).rank() != static_cast<std::size_t>(n) ||
                oracle::rank(oracle::shift(q, n)) != static_cast<std::size_t>(n))
                out.fail("shift(" + std::to_string(q) + "," + std::to_string(n) + ") has the wrong rank");
        }

    // Random network, random missing link between consecutive layers, random
    // cut that the link crosses.
    int additions = 0;
    int decreases = 0;
    std::string first_decrease;
    while (additions < 100) {
        const auto net = random_layered(rng, 1 + static_cast<int>(rng.below(2)), 4, 3, 3, 0.3);
        if (!net) continue;
        const auto& sk = net->skeleton();
        std::vector<std::pair<NodeIndex, NodeIndex>> missing;
        for (NodeIndex u = 0; u < sk.node_count(); ++u)
            for (NodeIndex v = 0; v < sk.node_count(); ++v)
                if (sk.node(v).layer == sk.node(u).layer + 1 && !sk.has_edge(u, v)) missing.push_back({u, v});
        if (missing.empty()) continue;
        const auto [u, v] = missing[rng.below(missing.size())];
        auto spec = to_spec(*net);
        spec.links.push_back({sk.node(u).id, sk.node(v).id, 1 + static_cast<long>(rng.below(3))});
        const DetNetwork bigger = build_network(spec);
        Cut cut{std::vector<bool>(sk.node_count())};
        for (std::size_t w = 0; w < sk.node_count(); ++w) cut.near[w] = rng.bit();
        cut.near[u] = true;
        cut.near[v] = false;
        cut.near[sk.source(0)] = true;
        cut.near[sk.destination(0)] = false;
        const std::array<std::size_t, 1> active{0};
        const std::size_t before = cut_rank(*net, cut, active);
        const std::size_t after = cut_rank(bigger, cut, active);
        if (before != oracle::cut_rank(*net, cut.near) || after != oracle::cut_rank(bigger, cut.near))
            out.fail("cut rank disagrees with the oracle on addition " + std::to_string(additions));
        if (after < before) {
            if (decreases == 0)
                first_decrease = "adding " + sk.node(u).id + "->" + sk.node(v).id + " lowers the rank " +
                                 std::to_string(before) + " -> " + std::to_string(after) + " on " +
                                 network_to_json(bigger).dump();
            ++decreases;
        }
        ++additions;
    }
    if (decreases > 0)
        out.fail(std::to_string(decreases) + " of " + std::to_string(additions) +
                 " link additions lower the cut rank; first: " + first_decrease);

    std::ostringstream d;
    d << triples << " linearity triples; " << shifts << " shift ranks; " << additions << " link additions, "
      << decreases << " lowered the cut rank; " << static_cast<int>(seconds_since(start)) << " s";
    out.detail = d.str();
    return out;
}

// ------------------------------------------------------------------ C7

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream text;
        text << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = text.str();
    }
    return files;
}

Outcome criterion7() {
    const auto start = Clock::now();
    Outcome out;
    const fs::path base = fs::temp_directory_path() / "detnet-acceptance-c7";
    fs::remove_all(base);
    std::size_t files = 0;
    int configs = 0;
    for (const char* name : {"k2k.json", "layered.json"}) {
        std::ifstream in(std::string(DETNET_FIXTURE_DIR) + "/" + name);
        const ExperimentConfig config = config_from_json(nlohmann::json::parse(in));
        std::vector<std::map<std::string, std::string>> runs;
        for (unsigned jobs : {1U, 1U, 3U}) {
            const fs::path dir = base / (std::string(name) + "-" + std::to_string(runs.size()));
            run_experiment(config, dir, jobs);
            runs.push_back(tree(dir));
        }
        for (std::size_t i = 1; i < runs.size(); ++i)
            if (runs[i] != runs[0]) out.fail(std::string(name) + ": run " + std::to_string(i) + " differs from run 0");
        files += runs[0].size();
        ++configs;
    }
    // The command line tool, twice with different worker counts.
    const std::string config = std::string(DETNET_FIXTURE_DIR) + "/k2k.json";
    std::vector<std::map<std::string, std::string>> cli;
    for (const char* jobs : {"1", "4"}) {
        const fs::path dir = base / (std::string("cli-") + jobs);
        const std::string cmd = std::string("\"") + DETNET_CLI + "\" run --config \"" + config + "\" --out \"" +
                                dir.string() + "\" --jobs " + jobs + " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) {
            out.fail(std::string("command line run with ") + jobs + " jobs failed");
            continue;
        }
        cli.push_back(tree(dir));
    }
    if (cli.size() == 2 && cli[0] != cli[1]) out.fail("command line runs differ");
    fs::remove_all(base);
    std::ostringstream d;
    d << configs << " configs run three times (1, 1, 3 workers) plus two command line runs (1, 4 workers); " << files
      << " report files byte-identical across runs; " << static_cast<int>(seconds_since(start)) << " s";
    out.detail = d.str();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    const std::vector<std::pair<int, Outcome (*)()>> criteria{{1, criterion1}, {2, criterion2}, {3, criterion3},
                                                              {4, criterion4}, {5, criterion5}, {6, criterion6},
                                                              {7, criterion7}};
    bool all = true;
    for (const auto& [n, run] : criteria) {
        if (!selected.empty() && !selected.count(n)) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        all = all && o.pass;
        std::cout << "C" << n << " " << (o.pass ? "PASS" : "FAIL") << ": " << o.detail << "\n";
        for (const auto& p : o.problems) std::cout << "    " << p << "\n";
        std::cout.flush();
    }
    return all ? 0 : 1;
}
