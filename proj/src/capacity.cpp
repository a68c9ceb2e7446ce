#include "detnet/capacity.hpp"

#include <algorithm>

#include "detnet/errors.hpp"

namespace detnet {

namespace {

Rational ratio_of(const Rational& rate, const Rational& upper) {
    if (upper == 0) {
        if (rate != 0) throw Error("normalized_sum_rate: positive rate " + to_string(rate) + " on a zero-capacity network");
        return 1;
    }
    return rate / upper;
}

std::function<int(const Edge&)> gains_of(const DetNetwork& network) {
    return [&network](const Edge& e) { return network.gain(e.from, e.to); };
}

}  // namespace

Rational sum_capacity_upper(const DetNetwork& network, const SearchCaps& caps, std::vector<std::string>* notes) {
    const auto& sk = network.skeleton();
    const std::size_t k = sk.pair_count();
    const std::size_t n = sk.node_count();
    auto note = [&](std::string text) {
        if (notes) notes->push_back(std::move(text));
    };

    std::vector<std::size_t> unicast(k, 0);
    for (std::size_t p = 0; p < k; ++p) {
        try {
            unicast[p] = unicast_min_cut(network, p, caps.cut_nodes);
        } catch (const CapExceeded&) {
            Cut cut{std::vector<bool>(n, false)};
            cut.near[sk.source(p)] = true;
            const std::array<std::size_t, 1> active{p};
            unicast[p] = cut_rank(network, cut, active);
            note("pair " + std::to_string(p) + ": unicast bound from the source cut only");
        }
    }
    std::size_t best = 0;
    for (auto u : unicast) best += u;

    if (n > caps.cut_nodes || n >= 63) {
        note("cut enumeration skipped: " + std::to_string(n) + " nodes exceed the cap");
        return Rational(Integer(best));
    }
    Cut cut{std::vector<bool>(n, false)};
    std::vector<std::size_t> separated;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (std::size_t v = 0; v < n; ++v) cut.near[v] = ((mask >> v) & 1U) != 0;
        separated.clear();
        std::size_t outside = 0;
        for (std::size_t p = 0; p < k; ++p) {
            if (cut.near[sk.source(p)] && !cut.near[sk.destination(p)]) {
                separated.push_back(p);
            } else {
                outside += unicast[p];
            }
        }
        if (separated.empty() || outside >= best) continue;
        best = std::min(best, cut_rank(network, cut, separated) + outside);
    }
    return Rational(Integer(best));
}

CapacityBracket sum_capacity_bracket(const DetNetwork& network, const SearchCaps& caps) {
    CapacityBracket b;
    b.upper = sum_capacity_upper(network, caps, &b.notes);
    b.lower = 0;
    b.lower_by = "silent";
    auto offer = [&](const Rational& value, const std::string& by) {
        if (value > b.lower) {
            b.lower = value;
            b.lower_by = by;
        }
    };
    for (int t = 1; t <= caps.coding_block; ++t) {
        try {
            SearchOptions options;
            options.block = t;
            offer(strategy_search(network, options, caps).rates.sum, "coding-T" + std::to_string(t));
        } catch (const CapExceeded& e) {
            b.notes.push_back(std::string("coding search skipped: ") + e.what());
        }
    }
    const auto& sk = network.skeleton();
    std::vector<Runner> runners{Runner::kMIR, Runner::kMIL};
    if (sk.layers() == 2) runners.insert(runners.begin(), Runner::kMIS);
    for (auto r : runners) {
        try {
            const Schedule plan = runner_plan(r, sk, caps);
            offer(strategy_rates(network, compile_schedule(plan, network)).sum, plan.strategy + "-compiled");
        } catch (const CapExceeded& e) {
            b.notes.push_back(runner_name(r) + " skipped: " + e.what());
        }
    }
    if (b.lower > b.upper)
        throw Error("sum_capacity_bracket: achievable " + to_string(b.lower) + " exceeds the cut bound " +
                    to_string(b.upper));
    b.exact = b.lower == b.upper;
    return b;
}

std::string runner_name(Runner runner) {
    switch (runner) {
        case Runner::kMIS: return "MIS";
        case Runner::kMIR: return "MIR";
        case Runner::kMIL: return "MIL";
        case Runner::kCompiledCoding: return "coding";
        case Runner::kSilent: return "silent";
    }
    return "?";
}

Runner runner_from_name(const std::string& name) {
    for (auto r : {Runner::kMIS, Runner::kMIR, Runner::kMIL, Runner::kCompiledCoding, Runner::kSilent})
        if (runner_name(r) == name) return r;
    throw InvalidArgument("unknown strategy '" + name + "'");
}

Schedule silent_schedule(const Skeleton& skeleton) {
    Schedule s;
    s.strategy = "silent";
    s.granularity = Granularity::kLink;
    s.routes.assign(skeleton.pair_count(), std::nullopt);
    s.period = 1;
    s.slots.assign(1, {});
    return s;
}

Schedule runner_plan(Runner runner, const Skeleton& skeleton, const SearchCaps& caps) {
    switch (runner) {
        case Runner::kMIS: return mis_plan(skeleton, caps);
        case Runner::kMIR: return mir_plan(skeleton, caps);
        case Runner::kMIL:
        case Runner::kCompiledCoding: return mil_plan(skeleton, caps);
        case Runner::kSilent: return silent_schedule(skeleton);
    }
    throw InvalidArgument("unknown runner");
}

Rational runner_sum_rate(Runner runner, const Schedule& plan, const DetNetwork& member) {
    if (runner == Runner::kSilent) return 0;
    if (runner == Runner::kCompiledCoding) return strategy_rates(member, compile_schedule(plan, member)).sum;
    return rates_from_gains(plan, gains_of(member)).sum;
}

ClassCapacity class_capacity(const ConsistencyClass& cls, const SearchCaps& caps, bool with_brackets) {
    const ConsistentNetworks members(cls, caps.class_members);
    ClassCapacity c;
    members.for_each([&](std::uint64_t, const DetNetwork& member) {
        if (with_brackets) {
            CapacityBracket b = sum_capacity_bracket(member, caps);
            c.upper.push_back(b.upper);
            c.brackets.emplace_back(std::move(b));
        } else {
            c.upper.push_back(sum_capacity_upper(member, caps));
            c.brackets.emplace_back(std::nullopt);
        }
    });
    return c;
}

AlphaReport normalized_sum_rate(Runner runner, const ConsistencyClass& cls, const SearchCaps& caps,
                                const ClassCapacity* capacity) {
    const ConsistentNetworks members(cls, caps.class_members);
    std::optional<ClassCapacity> own;
    if (!capacity) {
        own = class_capacity(cls, caps, true);
        capacity = &*own;
    }
    if (capacity->upper.size() != members.size()) throw InvalidArgument("normalized_sum_rate: capacity size mismatch");
    const Schedule plan = runner_plan(runner, cls.view.skeleton, caps);

    AlphaReport report;
    report.strategy = runner_name(runner);
    std::optional<Rational> alpha;
    members.for_each([&](std::uint64_t i, const DetNetwork& member) {
        MemberResult m;
        m.index = i;
        m.sum_rate = runner_sum_rate(runner, plan, member);
        m.upper = capacity->upper[i];
        m.ratio = ratio_of(m.sum_rate, m.upper);
        if (capacity->brackets[i]) m.exact = capacity->brackets[i]->exact;
        if (!alpha || m.ratio < *alpha) {
            alpha = m.ratio;
            report.witness_index = i;
            report.witness = member;
        }
        report.members.push_back(std::move(m));
    });
    report.alpha = alpha.value_or(1);
    return report;
}

Rational schedule_alpha(const Schedule& schedule, const ConsistencyClass& cls, const ClassCapacity& capacity,
                        const SearchCaps& caps) {
    const ConsistentNetworks members(cls, caps.class_members);
    std::optional<Rational> alpha;
    members.for_each([&](std::uint64_t i, const DetNetwork& member) {
        const Rational r = ratio_of(rates_from_gains(schedule, gains_of(member)).sum, capacity.upper.at(i));
        if (!alpha || r < *alpha) alpha = r;
    });
    return alpha.value_or(1);
}

namespace {

class BoundTracker {
public:
    BoundTracker(const ConsistencyClass& cls, const SearchCaps& caps, const ClassCapacity* capacity) {
        const ConsistentNetworks members(cls, caps.class_members);
        members.for_each([&](std::uint64_t, const DetNetwork& member) { members_.push_back(member); });
        if (capacity) {
            upper_ = capacity->upper;
        } else {
            for (const auto& m : members_) upper_.push_back(sum_capacity_upper(m, caps));
        }
        if (upper_.size() != members_.size()) throw InvalidArgument("alpha_upper_bound: capacity size mismatch");
    }

    void offer(const Schedule& s) {
        ++bound_.schedules;
        std::optional<Rational> alpha;
        for (std::size_t i = 0; i < members_.size(); ++i) {
            const Rational r = ratio_of(rates_from_gains(s, gains_of(members_[i])).sum, upper_[i]);
            if (!alpha || r < *alpha) alpha = r;
            // Cannot beat the incumbent any more.
            if (bound_.best && *alpha <= bound_.alpha) return;
        }
        const Rational a = alpha.value_or(1);
        if (!bound_.best || a > bound_.alpha) {
            bound_.alpha = a;
            bound_.best = s;
        }
    }

    FamilyBound result() const { return bound_; }

private:
    std::vector<DetNetwork> members_;
    std::vector<Rational> upper_;
    FamilyBound bound_;
};

}  // namespace

FamilyBound alpha_upper_bound(const ConsistencyClass& cls, Family family, const SearchCaps& caps,
                              const ClassCapacity* capacity) {
    BoundTracker tracker(cls, caps, capacity);
    for_each_family_schedule(cls.view.skeleton, family, caps, [&](const Schedule& s) { tracker.offer(s); });
    return tracker.result();
}

FamilyBound alpha_upper_bound(const ConsistencyClass& cls, std::span<const Schedule> schedules,
                              const SearchCaps& caps, const ClassCapacity* capacity) {
    if (schedules.empty()) throw InvalidArgument("alpha_upper_bound: empty strategy family");
    BoundTracker tracker(cls, caps, capacity);
    for (const auto& s : schedules) tracker.offer(s);
    return tracker.result();
}

nlohmann::json bracket_to_json(const CapacityBracket& bracket) {
    return {{"lower", to_string(bracket.lower)},
            {"upper", to_string(bracket.upper)},
            {"exact", bracket.exact},
            {"lower_by", bracket.lower_by},
            {"notes", bracket.notes}};
}

nlohmann::json alpha_to_json(const AlphaReport& report) {
    nlohmann::json doc;
    doc["strategy"] = report.strategy;
    doc["alpha"] = to_string(report.alpha);
    doc["witness_index"] = report.witness_index;
    doc["witness"] = network_to_json(report.witness);
    doc["members"] = nlohmann::json::array();
    for (const auto& m : report.members) {
        nlohmann::json row{{"index", m.index},
                           {"sum_rate", to_string(m.sum_rate)},
                           {"upper", to_string(m.upper)},
                           {"ratio", to_string(m.ratio)}};
        row["exact"] = m.exact ? nlohmann::json(*m.exact) : nlohmann::json(nullptr);
        doc["members"].push_back(std::move(row));
    }
    return doc;
}

}  // namespace detnet
