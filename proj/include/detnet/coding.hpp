#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "detnet/caps.hpp"
#include "detnet/gf2.hpp"
#include "detnet/localview.hpp"
#include "detnet/network.hpp"
#include "detnet/scheduling.hpp"

namespace detnet {

/// How a relay's block output may depend on its received block.
///
/// kPipelined: a node in layer l handles message block b during block time
/// b + l, so its map may use the whole block it received one block time
/// earlier; any qT x qT map is allowed.
/// kStrict: the whole network handles one block in T slots; the slot-t
/// output may use only slots received before t, so maps must be strictly
/// block-lower-triangular.
enum class Causality { kPipelined, kStrict };

/// Linear relay strategy over GF(2) with block length T.  Vectors of one
/// node over a block stack the T slot vectors, slot 0 on top.
struct LinearStrategy {
    int block = 1;
    Causality causality = Causality::kPipelined;
    std::vector<GF2Matrix> injection;            // per pair: qT x m_i
    std::vector<std::optional<GF2Matrix>> maps;  // per node: qT x qT, nullopt = silent
    std::string label;

    std::size_t message_bits(std::size_t pair) const { return injection.at(pair).cols(); }
};

/// All-silent strategy for the network.
LinearStrategy silent_strategy(const DetNetwork& network, int block = 1);

/// Throws InvalidArgument on dimension mismatch and Error("causality
/// violation ...") when a strict map uses a current or future slot.
void validate_strategy(const DetNetwork& network, const LinearStrategy& strategy);

/// to_dest[i][d]: qT x m_i map from the message of pair i to the block
/// received by the destination of pair d.
struct TransferMap {
    std::vector<std::vector<GF2Matrix>> to_dest;
};

TransferMap end_to_end_transfer(const DetNetwork& network, const LinearStrategy& strategy);

/// rank([G_int | G_sig]) - rank(G_int) at the destination of `pair`.
std::size_t decodable_rate(const TransferMap& transfer, std::size_t pair);

/// Per-pair rates decodable_rate / T.
RateReport strategy_rates(const DetNetwork& network, const LinearStrategy& strategy);

enum class Objective { kSum, kMinPair };

struct SearchOptions {
    int block = 1;
    Objective objective = Objective::kSum;
    /// When set, every other source stays silent.
    std::optional<std::size_t> only_pair;
};

struct SearchResult {
    LinearStrategy strategy;  // trimmed: m_i equals the decodable bits
    RateReport rates;
    std::uint64_t evaluated = 0;
    std::string engine;
};

/// Exhaustive search over all linear pipelined strategies with block T:
/// every injection subspace at each active source and every qT x qT map at
/// each relay on a path between active endpoints.  One active pair uses a
/// layer-by-layer subspace dynamic program, which is exact for that case;
/// more pairs enumerate the product space.  Ties keep the first strategy
/// found.  Throws CapExceeded over caps.coding_strategies.
SearchResult strategy_search(const DetNetwork& network, const SearchOptions& options, const SearchCaps& caps = {});

/// Product-space size the multi-pair engine would enumerate.
std::uint64_t search_space_size(const DetNetwork& network, const SearchOptions& options);

/// Drops injection columns that the destination cannot separate from
/// interference, so every m_i equals its decodable bit count.
LinearStrategy trim_strategy(const DetNetwork& network, const LinearStrategy& strategy);

/// Decoder for `pair`: D with D * y = m for every message tuple, where y
/// is the block received by the pair's destination.  Requires a trimmed
/// strategy.
GF2Matrix decoder(const TransferMap& transfer, std::size_t pair);

struct VerifyReport {
    bool ok = true;
    std::vector<std::size_t> decoded_bits;  // per pair, per block
    std::string failure;
};

/// Random-message simulation through propagate(), slot by slot: kPipelined
/// strategies run several message blocks back to back, kStrict strategies
/// one block at a time.  Each trial checks that the linear decoders return
/// every pair's message exactly.  The strategy must be trimmed.
VerifyReport verify_strategy(const DetNetwork& network, const LinearStrategy& strategy, std::size_t trials,
                             std::uint64_t seed = 1);

/// Compiles a schedule into on/off forwarding with block = period: each
/// relay forwards, in order, the first Q bits it hears on its route's hop
/// into its next hop's slots, where Q is the pair's per-period quota.
LinearStrategy compile_schedule(const Schedule& schedule, const DetNetwork& network);

/// Whether each node's map is a function of its local view: the search,
/// rerun on every member of the node's consistency class, returns the same
/// map for that node.  nullopt when the class or search exceeds the caps.
struct DistributednessEntry {
    NodeIndex node = 0;
    std::uint64_t class_size = 0;
    std::optional<bool> view_computable;
};
std::vector<DistributednessEntry> distributedness_report(const DetNetwork& network, const SearchOptions& options,
                                                         const SearchCaps& caps = {});

nlohmann::json strategy_to_json(const LinearStrategy& strategy, const Skeleton& skeleton);
LinearStrategy strategy_from_json(const nlohmann::json& doc, const DetNetwork& network);

}  // namespace detnet
