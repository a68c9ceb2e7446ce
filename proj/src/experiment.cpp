#include "detnet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "detnet/capacity.hpp"
#include "detnet/coding.hpp"
#include "detnet/errors.hpp"
#include "detnet/localview.hpp"
#include "detnet/prng.hpp"
#include "detnet/rational.hpp"
#include "detnet/scheduling.hpp"

namespace detnet {

namespace {

std::string numbered(const std::string& prefix, int i) { return prefix + std::to_string(i + 1); }

void require_matrix(const std::vector<std::vector<int>>& m, std::size_t rows, std::size_t cols, const std::string& what) {
    if (m.size() != rows) throw InvalidArgument(what + ": expected " + std::to_string(rows) + " rows");
    for (const auto& row : m) {
        if (row.size() != cols) throw InvalidArgument(what + ": expected " + std::to_string(cols) + " columns");
        for (auto g : row)
            if (g < 0) throw InvalidArgument(what + ": gains must be nonnegative");
    }
}

std::vector<std::vector<int>> random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols, int max_gain) {
    std::vector<std::vector<int>> m(rows, std::vector<int>(cols));
    for (auto& row : m)
        for (auto& g : row) g = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_gain) + 1));
    return m;
}

int param_int(const nlohmann::json& params, const std::string& key, int fallback) {
    if (!params.contains(key)) return fallback;
    if (!params.at(key).is_number_integer()) throw InvalidArgument("generator parameter '" + key + "' must be an integer");
    return params.at(key).get<int>();
}

void check_keys(const nlohmann::json& doc, const std::set<std::string>& allowed, const std::string& where) {
    if (!doc.is_object()) throw InvalidArgument(where + " must be an object");
    for (const auto& [key, value] : doc.items())
        if (!allowed.count(key)) throw InvalidArgument(where + ": unknown field '" + key + "'");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

const std::vector<std::string> kColumns{"instance", "strategy", "sum_rate",      "alpha",
                                        "lower",    "upper",    "bracket_exact", "members_exact",
                                        "status"};

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string summary_csv(const std::vector<std::vector<std::string>>& rows) {
    std::string text = std::string("# ") + kSummaryVersion + "\n";
    for (std::size_t i = 0; i < kColumns.size(); ++i) text += (i ? "," : "") + kColumns[i];
    text += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + csv_field(row[i]);
        text += "\n";
    }
    return text;
}

}  // namespace

// ------------------------------------------------------------ generators

DetNetwork gen_k2k(int k, const std::vector<std::vector<int>>& to_relays,
                   const std::vector<std::vector<int>>& from_relays) {
    if (k < 1) throw InvalidArgument("gen_k2k: k must be at least 1");
    const auto ku = static_cast<std::size_t>(k);
    require_matrix(to_relays, ku, 2, "gen_k2k source gains");
    require_matrix(from_relays, 2, ku, "gen_k2k relay gains");
    NetworkSpec spec;
    spec.layers = 3;
    for (int i = 0; i < k; ++i) spec.nodes.push_back({numbered("s", i), 0});
    spec.nodes.push_back({"r1", 1});
    spec.nodes.push_back({"r2", 1});
    for (int i = 0; i < k; ++i) spec.nodes.push_back({numbered("d", i), 2});
    for (int i = 0; i < k; ++i)
        for (int r = 0; r < 2; ++r)
            spec.links.push_back({numbered("s", i), numbered("r", r), to_relays[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)]});
    for (int r = 0; r < 2; ++r)
        for (int i = 0; i < k; ++i)
            spec.links.push_back({numbered("r", r), numbered("d", i), from_relays[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)]});
    for (int i = 0; i < k; ++i) spec.pairs.push_back({numbered("s", i), numbered("d", i)});
    return build_network(spec);
}

DetNetwork gen_interference(const std::vector<std::vector<int>>& gains) {
    const std::size_t k = gains.size();
    if (k == 0) throw InvalidArgument("gen_interference: empty gain matrix");
    require_matrix(gains, k, k, "gen_interference gains");
    NetworkSpec spec;
    spec.layers = 2;
    for (std::size_t i = 0; i < k; ++i) spec.nodes.push_back({numbered("s", static_cast<int>(i)), 0});
    for (std::size_t i = 0; i < k; ++i) spec.nodes.push_back({numbered("d", static_cast<int>(i)), 1});
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            spec.links.push_back({numbered("s", static_cast<int>(i)), numbered("d", static_cast<int>(j)), gains[i][j]});
    for (std::size_t i = 0; i < k; ++i)
        spec.pairs.push_back({numbered("s", static_cast<int>(i)), numbered("d", static_cast<int>(i))});
    return build_network(spec);
}

DetNetwork gen_random_layered(std::uint64_t seed, const RandomLayeredParams& params) {
    if (params.layers < 2 || params.width < 1 || params.max_gain < 1 || params.pairs < 1)
        throw InvalidArgument("gen_random_layered: parameters must be positive (layers >= 2)");
    if (!(params.density >= 0.0 && params.density <= 1.0))
        throw InvalidArgument("gen_random_layered: density must lie in [0, 1]");
    SplitMix64 rng(seed);
    NetworkSpec spec;
    spec.layers = params.layers;
    std::vector<std::vector<std::string>> layer_ids(static_cast<std::size_t>(params.layers));
    for (int i = 0; i < params.pairs; ++i) layer_ids.front().push_back(numbered("s", i));
    for (int l = 1; l + 1 < params.layers; ++l)
        for (int j = 0; j < params.width; ++j)
            layer_ids[static_cast<std::size_t>(l)].push_back("v" + std::to_string(l) + "_" + std::to_string(j + 1));
    for (int i = 0; i < params.pairs; ++i) layer_ids.back().push_back(numbered("d", i));
    for (std::size_t l = 0; l < layer_ids.size(); ++l)
        for (const auto& id : layer_ids[l]) spec.nodes.push_back({id, static_cast<int>(l)});
    for (std::size_t l = 0; l + 1 < layer_ids.size(); ++l) {
        for (const auto& from : layer_ids[l]) {
            for (const auto& to : layer_ids[l + 1]) {
                // Draw both values every time so one link's fate never shifts
                // the stream of the others.
                const bool present = rng.unit() < params.density;
                const int gain = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(params.max_gain)));
                if (present) spec.links.push_back({from, to, gain});
            }
        }
    }
    for (int i = 0; i < params.pairs; ++i) spec.pairs.push_back({numbered("s", i), numbered("d", i)});
    return build_network(spec);
}

// ---------------------------------------------------------------- config

ExperimentConfig config_from_json(const nlohmann::json& doc) {
    check_keys(doc,
               {"generator", "strategies", "gain_domain", "view", "caps", "seed", "output", "alpha_bounds", "timing",
                "simulation_trials"},
               "config");
    ExperimentConfig c;
    const auto& g = doc.at("generator");
    check_keys(g, {"name", "count", "params"}, "generator");
    c.generator.name = g.at("name").get<std::string>();
    if (g.contains("count")) c.generator.count = g.at("count").get<std::uint64_t>();
    if (g.contains("params")) c.generator.params = g.at("params");
    static const std::set<std::string> kGenerators{"k2k", "k2k_exhaustive", "interference", "random_layered", "files"};
    if (!kGenerators.count(c.generator.name))
        throw InvalidArgument("unknown generator '" + c.generator.name + "'");
    if (c.generator.name == "files") c.generator.count = c.generator.params.at("paths").size();
    if (doc.contains("strategies")) c.strategies = doc.at("strategies").get<std::vector<std::string>>();
    for (const auto& s : c.strategies)
        if (s != "coding") runner_from_name(s);
    if (doc.contains("gain_domain") && !doc.at("gain_domain").is_null()) {
        c.gain_domain = doc.at("gain_domain").get<std::vector<int>>();
        if (c.gain_domain->empty()) throw InvalidArgument("gain_domain must not be empty");
        for (auto v : *c.gain_domain)
            if (v < 1) throw InvalidArgument("gain_domain values must be positive");
    }
    if (doc.contains("view")) c.view = doc.at("view").get<std::string>();
    if (doc.contains("caps")) c.caps = caps_from_json(doc.at("caps"));
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("output")) c.output = doc.at("output").get<std::string>();
    if (doc.contains("alpha_bounds")) c.alpha_bounds = doc.at("alpha_bounds").get<bool>();
    if (doc.contains("timing")) c.timing = doc.at("timing").get<bool>();
    if (doc.contains("simulation_trials")) c.simulation_trials = doc.at("simulation_trials").get<std::size_t>();
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json doc;
    doc["generator"] = {{"name", c.generator.name}, {"count", c.generator.count}, {"params", c.generator.params}};
    doc["strategies"] = c.strategies;
    doc["gain_domain"] = c.gain_domain ? nlohmann::json(*c.gain_domain) : nlohmann::json(nullptr);
    doc["view"] = c.view;
    doc["caps"] = caps_to_json(c.caps);
    doc["seed"] = c.seed;
    doc["output"] = c.output;
    doc["alpha_bounds"] = c.alpha_bounds;
    doc["timing"] = c.timing;
    doc["simulation_trials"] = c.simulation_trials;
    return doc;
}

std::string instance_id(std::uint64_t index) {
    std::string digits = std::to_string(index);
    if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
    return "inst-" + digits;
}

DetNetwork generate_instance(const ExperimentConfig& config, std::uint64_t index) {
    const auto& name = config.generator.name;
    const auto& params = config.generator.params;
    if (index >= config.generator.count) throw InvalidArgument("instance index out of range");
    SplitMix64 rng = SplitMix64(config.seed).split(index);
    if (name == "k2k") {
        const int k = param_int(params, "k", 2);
        if (params.contains("to_relays") || params.contains("from_relays"))
            return gen_k2k(k, params.at("to_relays").get<std::vector<std::vector<int>>>(),
                           params.at("from_relays").get<std::vector<std::vector<int>>>());
        const int max_gain = param_int(params, "max_gain", 2);
        if (k < 1 || max_gain < 1) throw InvalidArgument("k2k: k and max_gain must be positive");
        auto to = random_matrix(rng, static_cast<std::size_t>(k), 2, max_gain);
        auto from = random_matrix(rng, 2, static_cast<std::size_t>(k), max_gain);
        return gen_k2k(k, to, from);
    }
    if (name == "k2k_exhaustive") {
        // Instance index read as the gain tuple in base max_gain + 1.
        const int k = param_int(params, "k", 1);
        const int max_gain = param_int(params, "max_gain", 2);
        if (k < 1 || max_gain < 1) throw InvalidArgument("k2k_exhaustive: k and max_gain must be positive");
        const auto ku = static_cast<std::size_t>(k);
        std::vector<std::vector<int>> to(ku, std::vector<int>(2));
        std::vector<std::vector<int>> from(2, std::vector<int>(ku));
        std::uint64_t rest = index;
        const auto base = static_cast<std::uint64_t>(max_gain) + 1;
        for (auto& row : to)
            for (auto& g : row) {
                g = static_cast<int>(rest % base);
                rest /= base;
            }
        for (auto& row : from)
            for (auto& g : row) {
                g = static_cast<int>(rest % base);
                rest /= base;
            }
        if (rest != 0) throw InvalidArgument("k2k_exhaustive: index beyond the gain tuples");
        return gen_k2k(k, to, from);
    }
    if (name == "interference") {
        const int k = param_int(params, "k", 2);
        if (params.contains("gains")) return gen_interference(params.at("gains").get<std::vector<std::vector<int>>>());
        const int max_gain = param_int(params, "max_gain", 2);
        if (k < 1 || max_gain < 1) throw InvalidArgument("interference: k and max_gain must be positive");
        return gen_interference(random_matrix(rng, static_cast<std::size_t>(k), static_cast<std::size_t>(k), max_gain));
    }
    if (name == "random_layered") {
        RandomLayeredParams p;
        p.layers = param_int(params, "layers", p.layers);
        p.width = param_int(params, "width", p.width);
        p.max_gain = param_int(params, "max_gain", p.max_gain);
        p.pairs = param_int(params, "pairs", p.pairs);
        if (params.contains("density")) p.density = params.at("density").get<double>();
        return gen_random_layered(rng.next(), p);
    }
    if (name == "files") {
        const auto path = params.at("paths").at(index).get<std::string>();
        std::ifstream in(path);
        if (!in) throw InvalidArgument("cannot read network file " + path);
        return network_from_json(nlohmann::json::parse(in));
    }
    throw InvalidArgument("unknown generator '" + name + "'");
}

// ---------------------------------------------------------------- runner

InstanceResult run_instance(const ExperimentConfig& config, std::uint64_t index) {
    const auto start = std::chrono::steady_clock::now();
    InstanceResult res;
    res.id = instance_id(index);
    auto& rep = res.report;
    rep["id"] = res.id;
    rep["refusals"] = nlohmann::json::array();
    auto refuse = [&](const std::string& what, const std::exception& e) {
        res.refusals.push_back(what + ": " + e.what());
        rep["refusals"].push_back(res.refusals.back());
    };
    auto finish = [&]() {
        res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rep["summary_rows"] = res.rows;
        return res;
    };

    std::optional<DetNetwork> net;
    try {
        net = generate_instance(config, index);
    } catch (const Error& e) {
        refuse("generator", e);
        res.rows.push_back({res.id, "", "", "", "", "", "", "", "refused"});
        return finish();
    }
    const auto& sk = net->skeleton();
    rep["network"] = network_to_json(*net);

    std::optional<CapacityBracket> bracket;
    try {
        bracket = sum_capacity_bracket(*net, config.caps);
        rep["bracket"] = bracket_to_json(*bracket);
    } catch (const Error& e) {
        refuse("bracket", e);
    }

    std::optional<ConsistencyClass> cls;
    std::optional<ClassCapacity> capacity;
    try {
        const LocalView view = config.view == "union" ? merged_view(*net) : node_view(*net, sk.index_of(config.view));
        rep["view"] = view_to_json(view);
        cls = make_class(view, net->q());
        if (config.gain_domain) cls->gain_domain = *config.gain_domain;
        rep["class_size"] = ConsistentNetworks(*cls, config.caps.class_members).size();
        if (!config.strategies.empty() || config.alpha_bounds) capacity = class_capacity(*cls, config.caps, true);
    } catch (const Error& e) {
        refuse("class", e);
    }

    std::string members_exact;
    if (capacity) {
        bool all = true;
        for (const auto& b : capacity->brackets) all = all && b && b->exact;
        members_exact = all ? "true" : "false";
    }
    const std::string lower = bracket ? to_string(bracket->lower) : "";
    const std::string upper = bracket ? to_string(bracket->upper) : "";
    const std::string exact = bracket ? (bracket->exact ? "true" : "false") : "";

    rep["strategies"] = nlohmann::json::object();
    for (const auto& name : config.strategies) {
        nlohmann::json entry;
        std::string sum_rate;
        std::string alpha;
        std::string status = "ok";
        try {
            const Runner runner = name == "coding" ? Runner::kCompiledCoding : runner_from_name(name);
            if (name == "coding") {
                std::optional<SearchResult> best;
                for (int t = 1; t <= config.caps.coding_block; ++t) {
                    SearchOptions options;
                    options.block = t;
                    SearchResult r = strategy_search(*net, options, config.caps);
                    if (!best || r.rates.sum > best->rates.sum) best = std::move(r);
                }
                const VerifyReport check =
                    verify_strategy(*net, best->strategy, std::max<std::size_t>(config.simulation_trials, 1), config.seed);
                if (!check.ok) throw Error("coding strategy failed simulation: " + check.failure);
                entry["search"] = strategy_to_json(best->strategy, sk);
                entry["engine"] = best->engine;
                entry["evaluated"] = best->evaluated;
                entry["rates"] = rates_to_json(best->rates);
                sum_rate = to_string(best->rates.sum);
            } else {
                const Schedule plan = runner_plan(runner, sk, config.caps);
                const RateReport rates = runner == Runner::kSilent
                                             ? rates_from_gains(plan, [](const Edge&) { return 0; })
                                             : achieved_rates(plan, *net, config.simulation_trials, config.seed);
                entry["schedule"] = schedule_to_json(plan, sk, rates);
                sum_rate = to_string(rates.sum);
            }
            if (cls && capacity) {
                const AlphaReport a = normalized_sum_rate(runner, *cls, config.caps, &*capacity);
                entry["alpha"] = alpha_to_json(a);
                alpha = to_string(a.alpha);
            }
        } catch (const Error& e) {
            refuse(name, e);
            status = "refused";
        }
        rep["strategies"][name] = entry;
        res.rows.push_back({res.id, name, sum_rate, alpha, lower, upper, exact, members_exact, status});
    }
    if (config.strategies.empty())
        res.rows.push_back({res.id, "", "", "", lower, upper, exact, members_exact, res.refusals.empty() ? "ok" : "refused"});

    if (config.alpha_bounds && cls && capacity) {
        for (auto [family, label] : {std::pair{Family::kRouteFamily, "MIR-family"}, std::pair{Family::kLinkFamily, "MIL-family"}}) {
            try {
                const FamilyBound b = alpha_upper_bound(*cls, family, config.caps, &*capacity);
                rep["alpha_bounds"][label] = {{"alpha", to_string(b.alpha)},
                                              {"schedules", b.schedules},
                                              {"best", b.best ? schedule_to_json(*b.best, sk) : nlohmann::json(nullptr)}};
                res.rows.push_back({res.id, label, "", to_string(b.alpha), lower, upper, exact, members_exact, "ok"});
            } catch (const Error& e) {
                refuse(label, e);
                res.rows.push_back({res.id, label, "", "", lower, upper, exact, members_exact, "refused"});
            }
        }
    }
    return finish();
}

RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out, unsigned jobs) {
    const std::uint64_t count = config.generator.count;
    std::vector<InstanceResult> results(count);
    std::atomic<std::uint64_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr failure;
    auto worker = [&]() {
        while (true) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                results[i] = run_instance(config, i);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1U, jobs);
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::filesystem::create_directories(out / "instances");
    RunSummary summary;
    std::vector<std::vector<std::string>> rows;
    std::string timing = "instance,wall_seconds\n";
    for (const auto& r : results) {
        write_file(out / "instances" / (r.id + ".json"), r.report.dump(2) + "\n");
        rows.insert(rows.end(), r.rows.begin(), r.rows.end());
        summary.refusals += r.refusals.size();
        ++summary.instances;
        timing += r.id + "," + std::to_string(r.wall_seconds) + "\n";
    }
    write_file(out / "summary.csv", summary_csv(rows));
    write_file(out / "config.json", config_to_json(config).dump(2) + "\n");
    if (config.timing) write_file(out / "timing.csv", timing);
    return summary;
}

std::uint64_t generate_networks(const ExperimentConfig& config, const std::filesystem::path& out) {
    std::filesystem::create_directories(out / "networks");
    std::uint64_t written = 0;
    for (std::uint64_t i = 0; i < config.generator.count; ++i) {
        const DetNetwork net = generate_instance(config, i);
        write_file(out / "networks" / (instance_id(i) + ".json"), network_to_json(net).dump(2) + "\n");
        ++written;
    }
    return written;
}

std::vector<std::string> summarize_reports(const std::filesystem::path& out) {
    std::vector<std::filesystem::path> files;
    const auto dir = out / "instances";
    if (!std::filesystem::is_directory(dir)) throw InvalidArgument("no instances directory under " + out.string());
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    struct Aggregate {
        std::uint64_t rows = 0;
        std::uint64_t refused = 0;
        std::optional<Rational> min_alpha;
        std::optional<Rational> max_alpha;
        Rational total_rate = 0;
    };
    std::map<std::string, Aggregate> by_strategy;
    std::vector<std::vector<std::string>> rows;
    for (const auto& f : files) {
        std::ifstream in(f);
        const auto doc = nlohmann::json::parse(in);
        for (const auto& row : doc.at("summary_rows")) {
            auto cells = row.get<std::vector<std::string>>();
            rows.push_back(cells);
            auto& agg = by_strategy[cells[1]];
            ++agg.rows;
            if (cells[8] != "ok") ++agg.refused;
            if (!cells[2].empty()) agg.total_rate += parse_rational(cells[2]);
            if (!cells[3].empty()) {
                const Rational a = parse_rational(cells[3]);
                if (!agg.min_alpha || a < *agg.min_alpha) agg.min_alpha = a;
                if (!agg.max_alpha || a > *agg.max_alpha) agg.max_alpha = a;
            }
        }
    }
    write_file(out / "summary.csv", summary_csv(rows));
    std::vector<std::string> lines;
    for (const auto& [name, agg] : by_strategy) {
        std::string line = (name.empty() ? std::string("(capacity)") : name) + ": rows=" + std::to_string(agg.rows) +
                           " refused=" + std::to_string(agg.refused) + " total_sum_rate=" + to_string(agg.total_rate);
        if (agg.min_alpha) line += " alpha_min=" + to_string(*agg.min_alpha) + " alpha_max=" + to_string(*agg.max_alpha);
        lines.push_back(line);
    }
    return lines;
}

}  // namespace detnet
