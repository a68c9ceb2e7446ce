#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "detnet/caps.hpp"
#include "detnet/coding.hpp"
#include "detnet/localview.hpp"
#include "detnet/network.hpp"
#include "detnet/rational.hpp"
#include "detnet/scheduling.hpp"

namespace detnet {

/// Full-information sum-capacity bracket.
struct CapacityBracket {
    Rational lower;
    Rational upper;
    bool exact = false;
    std::string lower_by;            // strategy attaining `lower`
    std::vector<std::string> notes;  // caps that loosened either side
};

/// min over cuts of [cut rank + sum of unicast min-cuts of the pairs the
/// cut does not separate], and the plain sum of unicast min-cuts.  Falls
/// back to single-source cuts (noted) when the node count exceeds the cap.
Rational sum_capacity_upper(const DetNetwork& network, const SearchCaps& caps = {},
                            std::vector<std::string>* notes = nullptr);

/// lower: best of the coding search for T = 1..caps.coding_block and the
/// compiled MIS / MIR / MIL schedules.  Throws Error if lower > upper.
CapacityBracket sum_capacity_bracket(const DetNetwork& network, const SearchCaps& caps = {});

enum class Runner { kMIS, kMIR, kMIL, kCompiledCoding, kSilent };

std::string runner_name(Runner runner);
Runner runner_from_name(const std::string& name);

/// Plan computed from the class skeleton alone (every node derives it).
Schedule runner_plan(Runner runner, const Skeleton& skeleton, const SearchCaps& caps = {});

/// Sum-rate the runner's plan achieves on a member network.
Rational runner_sum_rate(Runner runner, const Schedule& plan, const DetNetwork& member);

struct MemberResult {
    std::uint64_t index = 0;
    Rational sum_rate;
    Rational upper;
    Rational ratio;
    std::optional<bool> exact;  // bracket exactness, when brackets were computed
};

struct AlphaReport {
    std::string strategy;
    Rational alpha;
    std::uint64_t witness_index = 0;
    DetNetwork witness;
    std::vector<MemberResult> members;
};

/// Per-member capacity information shared by every runner of one class.
struct ClassCapacity {
    std::vector<Rational> upper;
    std::vector<std::optional<CapacityBracket>> brackets;
};

/// `with_brackets` also computes each member's lower bound (for exact flags).
ClassCapacity class_capacity(const ConsistencyClass& cls, const SearchCaps& caps = {}, bool with_brackets = true);

/// alpha = min over members of sum_rate / upper, with 0/0 = 1; a positive
/// rate over a zero upper bound throws Error.  The witness is the first
/// minimizer in class order.
AlphaReport normalized_sum_rate(Runner runner, const ConsistencyClass& cls, const SearchCaps& caps = {},
                                const ClassCapacity* capacity = nullptr);

/// Same metric for an explicit, fixed schedule.
Rational schedule_alpha(const Schedule& schedule, const ConsistencyClass& cls, const ClassCapacity& capacity,
                        const SearchCaps& caps = {});

struct FamilyBound {
    Rational alpha;
    std::optional<Schedule> best;
    std::uint64_t schedules = 0;
};

/// Largest alpha over every schedule of the family (periods up to
/// caps.family_period).
FamilyBound alpha_upper_bound(const ConsistencyClass& cls, Family family, const SearchCaps& caps = {},
                              const ClassCapacity* capacity = nullptr);
/// Largest alpha over the given schedules.
FamilyBound alpha_upper_bound(const ConsistencyClass& cls, std::span<const Schedule> schedules,
                              const SearchCaps& caps = {}, const ClassCapacity* capacity = nullptr);

/// Schedule that activates nothing.
Schedule silent_schedule(const Skeleton& skeleton);

nlohmann::json bracket_to_json(const CapacityBracket& bracket);
nlohmann::json alpha_to_json(const AlphaReport& report);

}  // namespace detnet
