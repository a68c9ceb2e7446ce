#include "detnet/caps.hpp"

#include <charconv>

#include "detnet/errors.hpp"

namespace detnet {

namespace {

std::uint64_t parse_positive(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end || out == 0)
        throw InvalidArgument("cap '" + key + "' needs a positive integer, got '" + value + "'");
    return out;
}

}  // namespace

void SearchCaps::set(const std::string& key, const std::string& value) {
    if (key == "allow_greedy") {
        if (value != "true" && value != "false") throw InvalidArgument("cap 'allow_greedy' must be true or false");
        allow_greedy = value == "true";
        return;
    }
    const std::uint64_t v = parse_positive(key, value);
    if (key == "coloring_vertices") {
        coloring_vertices = v;
    } else if (key == "mil_links") {
        mil_links = v;
    } else if (key == "route_selections") {
        route_selections = v;
    } else if (key == "mil_period") {
        mil_period = v;
    } else if (key == "cut_nodes") {
        cut_nodes = v;
    } else if (key == "class_members") {
        class_members = v;
    } else if (key == "coding_strategies") {
        coding_strategies = v;
    } else if (key == "coding_block") {
        coding_block = static_cast<int>(v);
    } else if (key == "family_period") {
        family_period = static_cast<int>(v);
    } else if (key == "family_schedules") {
        family_schedules = v;
    } else {
        throw InvalidArgument("unknown cap '" + key + "'");
    }
}

SearchCaps caps_from_json(const nlohmann::json& doc) {
    SearchCaps caps;
    if (doc.is_null()) return caps;
    if (!doc.is_object()) throw InvalidArgument("caps must be an object");
    for (const auto& [key, value] : doc.items()) {
        if (value.is_boolean()) {
            caps.set(key, value.get<bool>() ? "true" : "false");
        } else if (value.is_number_integer()) {
            caps.set(key, std::to_string(value.get<long long>()));
        } else {
            throw InvalidArgument("cap '" + key + "' must be an integer or boolean");
        }
    }
    return caps;
}

nlohmann::json caps_to_json(const SearchCaps& caps) {
    return {{"coloring_vertices", caps.coloring_vertices}, {"mil_links", caps.mil_links},
            {"route_selections", caps.route_selections},   {"mil_period", caps.mil_period},
            {"cut_nodes", caps.cut_nodes},                 {"class_members", caps.class_members},
            {"coding_strategies", caps.coding_strategies}, {"coding_block", caps.coding_block},
            {"family_period", caps.family_period},         {"family_schedules", caps.family_schedules},
            {"allow_greedy", caps.allow_greedy}};
}

}  // namespace detnet
