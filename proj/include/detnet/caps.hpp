#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace detnet {

/// Size limits for every exhaustive search.  Exceeding one raises
/// CapExceeded unless a labeled fallback is allowed.
struct SearchCaps {
    std::size_t coloring_vertices = 12;   // exact minimum coloring
    std::size_t mil_links = 16;           // link usages in the MIL program
    std::uint64_t route_selections = 4096;
    std::uint64_t mil_period = 720;
    std::size_t cut_nodes = 20;
    std::uint64_t class_members = 4096;
    std::uint64_t coding_strategies = 2'000'000;
    int coding_block = 1;                 // largest block length tried for brackets
    int family_period = 4;
    std::uint64_t family_schedules = 200'000;
    bool allow_greedy = false;            // greedy coloring when over the cap

    /// Sets one field by name; throws InvalidArgument on unknown keys or
    /// non-positive values.
    void set(const std::string& key, const std::string& value);
};

SearchCaps caps_from_json(const nlohmann::json& doc);
nlohmann::json caps_to_json(const SearchCaps& caps);

}  // namespace detnet
