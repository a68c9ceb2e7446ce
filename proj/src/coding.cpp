#include "detnet/coding.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <functional>
#include <map>
#include <set>
#include <unordered_set>

#include "detnet/errors.hpp"
#include "detnet/prng.hpp"

namespace detnet {

namespace {

std::size_t block_bits(const DetNetwork& network, int block) {
    if (block < 1) throw InvalidArgument("block length must be positive");
    return static_cast<std::size_t>(network.q()) * static_cast<std::size_t>(block);
}

// Block-diagonal shift for T slots.
GF2Matrix block_shift(int q, int gain, int block) {
    const GF2Matrix s = shift_matrix(q, gain);
    GF2Matrix out(static_cast<std::size_t>(q * block), static_cast<std::size_t>(q * block));
    for (int t = 0; t < block; ++t) out.set_block(static_cast<std::size_t>(t * q), static_cast<std::size_t>(t * q), s);
    return out;
}

GF2Matrix interference_of(const TransferMap& transfer, std::size_t pair) {
    std::vector<GF2Matrix> parts;
    for (std::size_t j = 0; j < transfer.to_dest.size(); ++j)
        if (j != pair) parts.push_back(transfer.to_dest[j][pair]);
    return GF2Matrix::hstack(parts, transfer.to_dest[pair][pair].rows());
}

// ------------------------------------------------- word-packed helpers

// Reduced echelon basis with leading (highest) bits as pivots, rows in
// descending pivot order.  Unique for each subspace.
std::vector<std::uint64_t> canonical_basis(std::span<const std::uint64_t> vectors) {
    std::array<std::uint64_t, 64> pivot{};
    std::uint64_t have = 0;
    for (auto x : vectors) {
        while (x != 0) {
            const int top = 63 - std::countl_zero(x);
            if (!((have >> top) & 1U)) {
                pivot[static_cast<std::size_t>(top)] = x;
                have |= std::uint64_t{1} << top;
                break;
            }
            x ^= pivot[static_cast<std::size_t>(top)];
        }
    }
    for (int b = 0; b < 64; ++b) {
        if (!((have >> b) & 1U)) continue;
        for (int b2 = b + 1; b2 < 64; ++b2)
            if (((have >> b2) & 1U) && ((pivot[static_cast<std::size_t>(b2)] >> b) & 1U))
                pivot[static_cast<std::size_t>(b2)] ^= pivot[static_cast<std::size_t>(b)];
    }
    std::vector<std::uint64_t> out;
    for (int b = 63; b >= 0; --b)
        if ((have >> b) & 1U) out.push_back(pivot[static_cast<std::size_t>(b)]);
    return out;
}

std::size_t rank_of(std::span<const std::uint64_t> rows) {
    std::array<std::uint64_t, 64> pivot{};
    std::uint64_t have = 0;
    std::size_t rank = 0;
    for (auto x : rows) {
        while (x != 0) {
            const int top = 63 - std::countl_zero(x);
            if (!((have >> top) & 1U)) {
                pivot[static_cast<std::size_t>(top)] = x;
                have |= std::uint64_t{1} << top;
                ++rank;
                break;
            }
            x ^= pivot[static_cast<std::size_t>(top)];
        }
    }
    return rank;
}

// True when every vector of `inner` lies in the span of the canonical basis.
bool spans(std::span<const std::uint64_t> basis, std::span<const std::uint64_t> inner) {
    for (auto x : inner) {
        for (auto b : basis) {
            const int top = 63 - std::countl_zero(b);
            if ((x >> top) & 1U) x ^= b;
        }
        if (x != 0) return false;
    }
    return true;
}

// Rows of the matrix with the given enumeration index: row r holds bits
// [r*n, (r+1)*n) of the index.
std::vector<std::uint64_t> matrix_rows(std::uint64_t index, std::size_t n) {
    std::vector<std::uint64_t> rows(n);
    const std::uint64_t mask = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    for (std::size_t r = 0; r < n; ++r) rows[r] = (index >> (r * n)) & mask;
    return rows;
}

GF2Matrix rows_to_matrix(std::span<const std::uint64_t> rows, std::size_t cols) {
    GF2Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if ((rows[r] >> c) & 1U) m.set(r, c);
    return m;
}

// Every subspace of GF(2)^n as a list of basis column vectors: dimensions
// in descending order, then canonical bases in ascending order.
std::vector<std::vector<std::uint64_t>> all_subspaces(std::size_t n) {
    std::vector<std::vector<std::uint64_t>> out;
    // Grow subspaces dimension by dimension; fine for n <= 6.
    std::vector<std::vector<std::uint64_t>> frontier{{}};
    std::vector<std::vector<std::vector<std::uint64_t>>> by_dim{frontier};
    for (std::size_t d = 1; d <= n; ++d) {
        std::set<std::vector<std::uint64_t>> next;
        for (const auto& basis : by_dim.back()) {
            for (std::uint64_t v = 1; v < (std::uint64_t{1} << n); ++v) {
                if (spans(basis, std::array<std::uint64_t, 1>{v})) continue;
                auto grown = basis;
                grown.push_back(v);
                next.insert(canonical_basis(grown));
            }
        }
        by_dim.emplace_back(next.begin(), next.end());
    }
    for (std::size_t d = n + 1; d-- > 0;)
        for (const auto& b : by_dim[d]) out.push_back(b);
    return out;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
    return a * b;
}

std::uint64_t matrix_count(std::size_t n) {
    return n * n >= 64 ? UINT64_MAX : std::uint64_t{1} << (n * n);
}

std::uint64_t subspace_count(std::size_t n) {
    // Sum of Gaussian binomials [n choose d]_2.
    std::uint64_t total = 0;
    for (std::size_t d = 0; d <= n; ++d) {
        long double num = 1;
        for (std::size_t i = 0; i < d; ++i)
            num = num * static_cast<long double>((std::uint64_t{1} << (n - i)) - 1) /
                  static_cast<long double>((std::uint64_t{1} << (i + 1)) - 1);
        total += static_cast<std::uint64_t>(num + 0.5L);
    }
    return total;
}

struct Scope {
    std::vector<std::size_t> pairs;  // active pairs
    std::vector<NodeIndex> relays;   // relays on a path between active endpoints
};

Scope search_scope(const DetNetwork& network, const SearchOptions& options) {
    const auto& sk = network.skeleton();
    Scope scope;
    if (options.only_pair) {
        if (*options.only_pair >= sk.pair_count()) throw InvalidArgument("strategy_search: pair index out of range");
        scope.pairs.push_back(*options.only_pair);
    } else {
        for (std::size_t p = 0; p < sk.pair_count(); ++p) scope.pairs.push_back(p);
    }
    std::vector<NodeIndex> src;
    std::vector<NodeIndex> dst;
    for (auto p : scope.pairs) {
        src.push_back(sk.source(p));
        dst.push_back(sk.destination(p));
    }
    const auto between = nodes_between(sk, src, dst);
    for (NodeIndex v = 0; v < sk.node_count(); ++v)
        if (between[v] && !sk.is_source(v) && !sk.is_destination(v)) scope.relays.push_back(v);
    return scope;
}

// Word-packed evaluation of a strategy: signals are nb rows, each a mask
// over all message columns.
class FastEvaluator {
public:
    FastEvaluator(const DetNetwork& network, int block)
        : q_(static_cast<std::size_t>(network.q())), block_(static_cast<std::size_t>(block)),
          nb_(q_ * block_), sk_(network.skeleton()), in_(sk_.node_count()) {
        for (const auto& l : network.links()) in_[l.to].push_back({l.from, l.gain});
        src_pair_.assign(sk_.node_count(), SIZE_MAX);
        for (std::size_t p = 0; p < sk_.pair_count(); ++p) src_pair_[sk_.source(p)] = p;
        x_.assign(sk_.node_count(), std::vector<std::uint64_t>(nb_, 0));
        y_.assign(sk_.node_count(), std::vector<std::uint64_t>(nb_, 0));
    }

    // injection[p]: nb rows over the message columns of all pairs.
    // maps[v]: nb rows over nb input bits, or null for silence.
    void run(const std::vector<std::vector<std::uint64_t>>& injection,
             const std::vector<const std::vector<std::uint64_t>*>& maps) {
        for (NodeIndex v = 0; v < sk_.node_count(); ++v) {
            auto& y = y_[v];
            std::fill(y.begin(), y.end(), 0);
            for (const auto& [u, g] : in_[v]) {
                const auto& xu = x_[u];
                const auto gain = static_cast<std::size_t>(g);
                for (std::size_t s = 0; s < block_; ++s)
                    for (std::size_t j = 0; j < gain; ++j) y[s * q_ + q_ - gain + j] ^= xu[s * q_ + j];
            }
            auto& x = x_[v];
            if (src_pair_[v] != SIZE_MAX) {
                x = injection[src_pair_[v]];
                continue;
            }
            const auto* e = maps[v];
            if (e == nullptr) {
                std::fill(x.begin(), x.end(), 0);
                continue;
            }
            for (std::size_t r = 0; r < nb_; ++r) {
                std::uint64_t acc = 0;
                std::uint64_t sel = (*e)[r];
                while (sel != 0) {
                    const auto c = static_cast<std::size_t>(std::countr_zero(sel));
                    acc ^= y[c];
                    sel &= sel - 1;
                }
                x[r] = acc;
            }
        }
    }

    std::size_t decodable(std::size_t pair, std::uint64_t pair_mask) const {
        const auto& y = y_[sk_.destination(pair)];
        std::array<std::uint64_t, 64> masked{};
        for (std::size_t r = 0; r < nb_; ++r) masked[r] = y[r] & ~pair_mask;
        return rank_of(y) - rank_of(std::span<const std::uint64_t>(masked.data(), nb_));
    }

private:
    std::size_t q_;
    std::size_t block_;
    std::size_t nb_;
    const Skeleton& sk_;
    std::vector<std::vector<std::pair<NodeIndex, int>>> in_;
    std::vector<std::size_t> src_pair_;
    std::vector<std::vector<std::uint64_t>> x_;
    std::vector<std::vector<std::uint64_t>> y_;
};

RateReport rates_of(const std::vector<std::size_t>& bits, int block, std::string name) {
    RateReport r{std::move(name), {}, 0};
    for (auto b : bits) {
        r.per_pair.emplace_back(Integer(b), Integer(block));
        r.sum += r.per_pair.back();
    }
    return r;
}

// Objective over active pairs: sum, or min with the sum as no tie-breaker.
std::size_t objective_value(const std::vector<std::size_t>& bits, const Scope& scope, Objective objective) {
    if (objective == Objective::kSum) {
        std::size_t s = 0;
        for (auto p : scope.pairs) s += bits[p];
        return s;
    }
    std::size_t m = SIZE_MAX;
    for (auto p : scope.pairs) m = std::min(m, bits[p]);
    return scope.pairs.empty() ? 0 : m;
}

// ---------------------------------------------------- single-pair engine
//
// With one active pair the source may send its raw block (identity
// injection) without loss, and the destination rank is all that counts.
// A state is the subspace of stacked signals of one layer, taken over all
// messages; relays are applied one at a time.  A relay's effect on a state
// depends only on where it sends a basis of what it hears, and only output
// positions that some out-link delivers matter, so those images are what
// gets enumerated.  A state contained in another is dropped, and so is any
// state of dimension below the target rank, since no map raises dimension.
// Targets run down from the cut bound; the first reachable one is optimal.

struct RelayShape {
    NodeIndex node = 0;
    std::size_t shift = 0;               // block offset in the stacked layer
    std::vector<std::size_t> out_bits;   // output positions some out-link delivers
    std::size_t in_bits = 0;             // positions some in-link can reach
};

// Basis of the relay's projection plus the coordinates of each state
// vector in it (bit k = coefficient of basis vector k).
struct Projection {
    std::vector<std::uint64_t> basis;
    std::vector<std::uint64_t> coords;
};

Projection project(std::span<const std::uint64_t> state, std::size_t shift, std::uint64_t block_mask) {
    Projection p;
    std::vector<std::uint64_t> parts;
    for (auto v : state) parts.push_back((v >> shift) & block_mask);
    p.basis = canonical_basis(parts);
    for (auto w : parts) {
        std::uint64_t c = 0;
        for (std::size_t k = 0; k < p.basis.size(); ++k) {
            const int pivot = 63 - std::countl_zero(p.basis[k]);
            if ((w >> pivot) & 1U) c |= std::uint64_t{1} << k;
        }
        p.coords.push_back(c);
    }
    return p;
}

// Image of basis vector k under `choice`, spread over the output positions.
std::uint64_t image_of(std::uint64_t choice, std::size_t k, const RelayShape& shape) {
    const std::size_t e = shape.out_bits.size();
    std::uint64_t out = 0;
    for (std::size_t j = 0; j < e; ++j)
        if ((choice >> (k * e + j)) & 1U) out |= std::uint64_t{1} << shape.out_bits[j];
    return out;
}

// Relay map rows realizing `choice` on the projection basis: a vector in
// the span has coefficient k equal to its bit at pivot k.
std::vector<std::uint64_t> map_rows(const Projection& p, std::uint64_t choice, const RelayShape& shape,
                                    std::size_t nb) {
    std::vector<std::uint64_t> rows(nb, 0);
    for (std::size_t k = 0; k < p.basis.size(); ++k) {
        const auto pivot = static_cast<std::size_t>(63 - std::countl_zero(p.basis[k]));
        const std::uint64_t img = image_of(choice, k, shape);
        for (std::size_t o = 0; o < nb; ++o)
            if ((img >> o) & 1U) rows[o] |= std::uint64_t{1} << pivot;
    }
    return rows;
}

SearchResult single_pair_search(const DetNetwork& network, std::size_t pair, const SearchOptions& options,
                                const SearchCaps& caps) {
    const auto& sk = network.skeleton();
    const auto q = static_cast<std::size_t>(network.q());
    const auto block = static_cast<std::size_t>(options.block);
    const std::size_t nb = q * block;
    const NodeIndex s = sk.source(pair);
    const NodeIndex d = sk.destination(pair);
    const std::array<NodeIndex, 1> src{s};
    const std::array<NodeIndex, 1> dst{d};
    const auto between = nodes_between(sk, src, dst);

    std::vector<std::vector<NodeIndex>> layer_nodes(static_cast<std::size_t>(sk.layers()));
    for (NodeIndex v = 0; v < sk.node_count(); ++v)
        if (between[v]) layer_nodes[static_cast<std::size_t>(sk.node(v).layer)].push_back(v);
    for (const auto& layer : layer_nodes)
        if (layer.size() * nb > 64) throw CapExceeded("strategy_search: stacked layer bits", layer.size() * nb, 64);

    // Largest gain on links inside the search scope.
    auto max_gain = [&](NodeIndex v, bool outgoing) {
        int g = 0;
        for (const auto& l : network.links())
            if (between[l.from] && between[l.to] && (outgoing ? l.from : l.to) == v) g = std::max(g, l.gain);
        return static_cast<std::size_t>(g);
    };
    std::vector<std::vector<RelayShape>> shapes(layer_nodes.size());
    for (std::size_t l = 1; l + 1 < layer_nodes.size(); ++l) {
        for (std::size_t pos = 0; pos < layer_nodes[l].size(); ++pos) {
            RelayShape shape;
            shape.node = layer_nodes[l][pos];
            shape.shift = pos * nb;
            const std::size_t go = max_gain(shape.node, true);
            for (std::size_t t = 0; t < block; ++t)
                for (std::size_t j = 0; j < go; ++j) shape.out_bits.push_back(t * q + j);
            shape.in_bits = std::min(nb, block * max_gain(shape.node, false));
            const std::size_t exponent = shape.out_bits.size() * shape.in_bits;
            if (exponent >= 63)
                throw CapExceeded("strategy_search: relay image bits", exponent, 62);
            shapes[l].push_back(std::move(shape));
        }
    }

    LinearStrategy strategy = silent_strategy(network, options.block);
    strategy.label = "coding";
    SearchResult result;
    result.engine = "single-pair subspace program";

    if (!between[d]) {
        result.strategy = trim_strategy(network, strategy);
        result.rates = strategy_rates(network, result.strategy);
        return result;
    }

    // Map from stacked transmissions of layer l to stacked receptions of l+1.
    auto layer_map = [&](std::size_t l) {
        std::vector<std::pair<std::size_t, std::size_t>> xor_pairs;  // (in bit, out bit)
        const auto& from = layer_nodes[l];
        const auto& to = layer_nodes[l + 1];
        for (std::size_t jv = 0; jv < to.size(); ++jv) {
            for (std::size_t iu = 0; iu < from.size(); ++iu) {
                const auto g = static_cast<std::size_t>(network.gain(from[iu], to[jv]));
                for (std::size_t t = 0; t < block; ++t)
                    for (std::size_t j = 0; j < g; ++j)
                        xor_pairs.emplace_back(iu * nb + t * q + j, jv * nb + t * q + q - g + j);
            }
        }
        return xor_pairs;
    };
    auto apply_pairs = [](const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::uint64_t x) {
        std::uint64_t out = 0;
        for (const auto& [a, b] : pairs)
            if ((x >> a) & 1U) out ^= std::uint64_t{1} << b;
        return out;
    };
    const std::uint64_t block_mask = nb == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << nb) - 1;

    std::size_t bound = nb;
    try {
        bound = std::min(bound, unicast_min_cut(network, pair, caps.cut_nodes) * block);
    } catch (const CapExceeded&) {
    }

    // Operations in order: receptions of layer l+1, then each relay of it.
    struct Op {
        std::optional<std::vector<std::pair<std::size_t, std::size_t>>> receive;
        const RelayShape* relay = nullptr;
    };
    std::vector<Op> ops;
    for (std::size_t l = 0; l + 1 < layer_nodes.size(); ++l) {
        ops.push_back({layer_map(l), nullptr});
        for (const auto& shape : shapes[l + 1]) ops.push_back({std::nullopt, &shape});
    }

    std::uint64_t evaluated = 0;
    std::size_t target = 0;
    // Per operation: states already shown unable to reach the target.
    std::vector<std::set<std::vector<std::uint64_t>>> failed(ops.size() + 1);
    std::vector<std::uint64_t> chosen(ops.size(), 0);
    std::size_t reached = 0;

    auto known_failure = [&](std::size_t op, const std::vector<std::uint64_t>& basis) {
        for (const auto& f : failed[op])
            if (f.size() >= basis.size() && spans(f, basis)) return true;
        return false;
    };
    std::function<bool(std::size_t, const std::vector<std::uint64_t>&)> dfs =
        [&](std::size_t op, const std::vector<std::uint64_t>& basis) -> bool {
        if (basis.size() < target) return false;
        if (op == ops.size()) {
            reached = basis.size();
            return true;
        }
        if (known_failure(op, basis)) return false;
        const Op& o = ops[op];
        if (o.receive) {
            std::vector<std::uint64_t> image;
            for (auto v : basis) image.push_back(apply_pairs(*o.receive, v));
            if (dfs(op + 1, canonical_basis(image))) return true;
        } else {
            const RelayShape& shape = *o.relay;
            const std::uint64_t keep_mask = ~(block_mask << shape.shift);
            const Projection proj = project(basis, shape.shift, block_mask);
            const std::uint64_t choices = std::uint64_t{1} << (proj.basis.size() * shape.out_bits.size());
            std::vector<std::uint64_t> images(proj.basis.size());
            std::vector<std::uint64_t> mapped(basis.size());
            for (std::uint64_t c = 0; c < choices; ++c) {
                ++evaluated;
                if (evaluated > caps.coding_strategies)
                    throw CapExceeded("strategy_search: relay images evaluated", evaluated, caps.coding_strategies);
                for (std::size_t k = 0; k < images.size(); ++k) images[k] = image_of(c, k, shape);
                for (std::size_t b = 0; b < basis.size(); ++b) {
                    std::uint64_t out = 0;
                    for (std::uint64_t sel = proj.coords[b]; sel != 0; sel &= sel - 1)
                        out ^= images[static_cast<std::size_t>(std::countr_zero(sel))];
                    mapped[b] = (basis[b] & keep_mask) | (out << shape.shift);
                }
                chosen[op] = c;
                if (dfs(op + 1, canonical_basis(mapped))) return true;
            }
        }
        failed[op].insert(basis);
        return false;
    };

    std::vector<std::uint64_t> full;
    for (std::size_t b = 0; b < nb; ++b) full.push_back(std::uint64_t{1} << b);
    const auto start = canonical_basis(full);
    for (target = bound;; --target) {
        for (auto& f : failed) f.clear();
        if (dfs(0, start)) break;
    }
    const std::size_t best_rank = reached;

    // Replay the successful choices to recover each relay map.
    {
        auto basis = start;
        for (std::size_t op = 0; op < ops.size(); ++op) {
            const Op& o = ops[op];
            std::vector<std::uint64_t> next;
            if (o.receive) {
                for (auto v : basis) next.push_back(apply_pairs(*o.receive, v));
            } else {
                const RelayShape& shape = *o.relay;
                const Projection proj = project(basis, shape.shift, block_mask);
                const auto rows = map_rows(proj, chosen[op], shape, nb);
                strategy.maps[shape.node] = rows_to_matrix(rows, nb);
                for (auto v : basis) {
                    std::uint64_t out = 0;
                    for (std::size_t r = 0; r < nb; ++r)
                        if (std::popcount(rows[r] & ((v >> shape.shift) & block_mask)) & 1)
                            out |= std::uint64_t{1} << r;
                    next.push_back((v & ~(block_mask << shape.shift)) | (out << shape.shift));
                }
            }
            basis = canonical_basis(next);
        }
        if (basis.size() != best_rank) throw Error("strategy_search: replay of the subspace program diverged");
    }
    strategy.injection[pair] = GF2Matrix::identity(nb);

    result.strategy = trim_strategy(network, strategy);
    result.rates = strategy_rates(network, result.strategy);
    result.evaluated = evaluated;
    const TransferMap check = end_to_end_transfer(network, result.strategy);
    if (decodable_rate(check, pair) != best_rank)
        throw Error("strategy_search: subspace program and transfer map disagree");
    return result;
}

// ------------------------------------------------------ product engine

SearchResult product_search(const DetNetwork& network, const Scope& scope, const SearchOptions& options,
                            const SearchCaps& caps) {
    const auto& sk = network.skeleton();
    const std::size_t nb = block_bits(network, options.block);
    const std::uint64_t size = search_space_size(network, options);
    if (size > caps.coding_strategies) throw CapExceeded("strategy_search: strategies", size, caps.coding_strategies);
    if (nb * scope.pairs.size() > 64)
        throw CapExceeded("strategy_search: message bits", nb * scope.pairs.size(), 64);

    const auto subspaces = all_subspaces(nb);
    const std::uint64_t per_relay = matrix_count(nb);

    FastEvaluator eval(network, options.block);
    std::vector<std::size_t> src_digit(scope.pairs.size(), 0);
    std::vector<std::uint64_t> relay_digit(scope.relays.size(), 0);
    std::vector<std::vector<std::uint64_t>> relay_rows(scope.relays.size(), matrix_rows(0, nb));
    std::vector<const std::vector<std::uint64_t>*> maps(sk.node_count(), nullptr);
    for (std::size_t r = 0; r < scope.relays.size(); ++r) maps[scope.relays[r]] = &relay_rows[r];

    std::optional<std::size_t> best_value;
    std::vector<std::size_t> best_src;
    std::vector<std::uint64_t> best_relay;
    std::uint64_t evaluated = 0;
    std::vector<std::size_t> bits(sk.pair_count(), 0);

    while (true) {
        // Injection rows and column masks for this source choice.
        std::vector<std::vector<std::uint64_t>> injection(sk.pair_count(), std::vector<std::uint64_t>(nb, 0));
        std::vector<std::uint64_t> mask(sk.pair_count(), 0);
        std::size_t offset = 0;
        for (std::size_t i = 0; i < scope.pairs.size(); ++i) {
            const auto& basis = subspaces[src_digit[i]];
            const auto p = scope.pairs[i];
            for (std::size_t c = 0; c < basis.size(); ++c) {
                mask[p] |= std::uint64_t{1} << (offset + c);
                for (std::size_t r = 0; r < nb; ++r)
                    if ((basis[c] >> r) & 1U) injection[p][r] |= std::uint64_t{1} << (offset + c);
            }
            offset += basis.size();
        }
        std::fill(relay_digit.begin(), relay_digit.end(), 0);
        for (auto& rows : relay_rows) rows = matrix_rows(0, nb);
        while (true) {
            ++evaluated;
            eval.run(injection, maps);
            for (auto p : scope.pairs) bits[p] = eval.decodable(p, mask[p]);
            const std::size_t value = objective_value(bits, scope, options.objective);
            if (!best_value || value > *best_value) {
                best_value = value;
                best_src = src_digit;
                best_relay = relay_digit;
            }
            std::size_t r = scope.relays.size();
            bool wrapped = true;
            while (r > 0) {
                --r;
                if (++relay_digit[r] < per_relay) {
                    relay_rows[r] = matrix_rows(relay_digit[r], nb);
                    wrapped = false;
                    break;
                }
                relay_digit[r] = 0;
                relay_rows[r] = matrix_rows(0, nb);
            }
            if (wrapped) break;
        }
        std::size_t i = scope.pairs.size();
        bool done = true;
        while (i > 0) {
            --i;
            if (++src_digit[i] < subspaces.size()) {
                done = false;
                break;
            }
            src_digit[i] = 0;
        }
        if (done) break;
    }

    LinearStrategy strategy = silent_strategy(network, options.block);
    strategy.label = "coding";
    for (std::size_t i = 0; i < scope.pairs.size(); ++i) {
        const auto& basis = subspaces[best_src[i]];
        GF2Matrix a(nb, basis.size());
        for (std::size_t c = 0; c < basis.size(); ++c)
            for (std::size_t r = 0; r < nb; ++r)
                if ((basis[c] >> r) & 1U) a.set(r, c);
        strategy.injection[scope.pairs[i]] = a;
    }
    for (std::size_t r = 0; r < scope.relays.size(); ++r)
        strategy.maps[scope.relays[r]] = rows_to_matrix(matrix_rows(best_relay[r], nb), nb);

    SearchResult result;
    result.engine = "product enumeration";
    result.evaluated = evaluated;
    result.strategy = trim_strategy(network, strategy);
    result.rates = strategy_rates(network, result.strategy);
    std::vector<std::size_t> final_bits(sk.pair_count(), 0);
    const TransferMap check = end_to_end_transfer(network, result.strategy);
    for (auto p : scope.pairs) final_bits[p] = decodable_rate(check, p);
    if (objective_value(final_bits, scope, options.objective) != best_value.value_or(0))
        throw Error("strategy_search: evaluator and transfer map disagree");
    return result;
}

}  // namespace

// ------------------------------------------------------------ public API

LinearStrategy silent_strategy(const DetNetwork& network, int block) {
    const std::size_t nb = block_bits(network, block);
    LinearStrategy s;
    s.block = block;
    s.injection.assign(network.pair_count(), GF2Matrix(nb, 0));
    s.maps.assign(network.node_count(), std::nullopt);
    s.label = "silent";
    return s;
}

void validate_strategy(const DetNetwork& network, const LinearStrategy& strategy) {
    const std::size_t nb = block_bits(network, strategy.block);
    const auto& sk = network.skeleton();
    if (strategy.injection.size() != sk.pair_count()) throw InvalidArgument("strategy: one injection per pair required");
    if (strategy.maps.size() != sk.node_count()) throw InvalidArgument("strategy: one map entry per node required");
    for (const auto& a : strategy.injection)
        if (a.rows() != nb) throw InvalidArgument("strategy: injection rows differ from q*T");
    const auto q = static_cast<std::size_t>(network.q());
    for (NodeIndex v = 0; v < sk.node_count(); ++v) {
        const auto& e = strategy.maps[v];
        if (!e) continue;
        if (sk.is_source(v)) throw InvalidArgument("strategy: source " + sk.node(v).id + " cannot carry a relay map");
        if (e->rows() != nb || e->cols() != nb) throw InvalidArgument("strategy: relay map is not qT x qT");
        if (strategy.causality == Causality::kStrict) {
            for (std::size_t r = 0; r < nb; ++r)
                for (std::size_t c = 0; c < nb; ++c)
                    if (e->get(r, c) && c / q >= r / q)
                        throw Error("causality violation: node " + sk.node(v).id + " slot " + std::to_string(r / q) +
                                    " uses received slot " + std::to_string(c / q));
        }
    }
}

TransferMap end_to_end_transfer(const DetNetwork& network, const LinearStrategy& strategy) {
    validate_strategy(network, strategy);
    const auto& sk = network.skeleton();
    const std::size_t nb = block_bits(network, strategy.block);
    std::map<int, GF2Matrix> shifts;
    for (const auto& l : network.links())
        if (!shifts.count(l.gain)) shifts.emplace(l.gain, block_shift(network.q(), l.gain, strategy.block));

    TransferMap out;
    out.to_dest.resize(sk.pair_count());
    for (std::size_t i = 0; i < sk.pair_count(); ++i) {
        const std::size_t m = strategy.injection[i].cols();
        std::vector<GF2Matrix> x(sk.node_count(), GF2Matrix(nb, m));
        std::vector<GF2Matrix> y(sk.node_count(), GF2Matrix(nb, m));
        for (NodeIndex v = 0; v < sk.node_count(); ++v) {
            for (auto u : sk.in_neighbors(v)) y[v] += shifts.at(network.gain(u, v)) * x[u];
            if (sk.is_source(v)) {
                const auto p = static_cast<std::size_t>(
                    std::find(sk.sources().begin(), sk.sources().end(), v) - sk.sources().begin());
                if (p == i) x[v] = strategy.injection[i];
            } else if (strategy.maps[v]) {
                x[v] = *strategy.maps[v] * y[v];
            }
        }
        for (std::size_t d = 0; d < sk.pair_count(); ++d) out.to_dest[i].push_back(y[sk.destination(d)]);
    }
    return out;
}

std::size_t decodable_rate(const TransferMap& transfer, std::size_t pair) {
    if (pair >= transfer.to_dest.size()) throw InvalidArgument("decodable_rate: pair index out of range");
    const GF2Matrix& sig = transfer.to_dest[pair][pair];
    const GF2Matrix interference = interference_of(transfer, pair);
    const std::array<GF2Matrix, 2> both{interference, sig};
    return GF2Matrix::hstack(both, sig.rows()).rank() - interference.rank();
}

RateReport strategy_rates(const DetNetwork& network, const LinearStrategy& strategy) {
    const TransferMap t = end_to_end_transfer(network, strategy);
    std::vector<std::size_t> bits;
    for (std::size_t p = 0; p < network.pair_count(); ++p) bits.push_back(decodable_rate(t, p));
    return rates_of(bits, strategy.block, strategy.label);
}

std::uint64_t search_space_size(const DetNetwork& network, const SearchOptions& options) {
    const std::size_t nb = block_bits(network, options.block);
    const Scope scope = search_scope(network, options);
    std::uint64_t size = 1;
    for (std::size_t i = 0; i < scope.pairs.size(); ++i) size = saturating_mul(size, subspace_count(nb));
    for (std::size_t i = 0; i < scope.relays.size(); ++i) size = saturating_mul(size, matrix_count(nb));
    return size;
}

SearchResult strategy_search(const DetNetwork& network, const SearchOptions& options, const SearchCaps& caps) {
    const Scope scope = search_scope(network, options);
    // With one active pair both objectives coincide.
    if (scope.pairs.size() == 1) return single_pair_search(network, scope.pairs.front(), options, caps);
    return product_search(network, scope, options, caps);
}

LinearStrategy trim_strategy(const DetNetwork& network, const LinearStrategy& strategy) {
    const TransferMap t = end_to_end_transfer(network, strategy);
    LinearStrategy out = strategy;
    for (std::size_t p = 0; p < network.pair_count(); ++p) {
        const GF2Matrix w = interference_of(t, p).left_null_space();
        const GF2Matrix projected = w * t.to_dest[p][p];
        const auto keep = projected.pivot_columns();
        out.injection[p] = strategy.injection[p].select_columns(keep);
    }
    return out;
}

GF2Matrix decoder(const TransferMap& transfer, std::size_t pair) {
    const GF2Matrix w = interference_of(transfer, pair).left_null_space();
    const GF2Matrix projected = w * transfer.to_dest[pair][pair];
    if (projected.rank() != projected.cols())
        throw InvalidArgument("decoder: pair " + std::to_string(pair) + " carries undecodable message bits");
    return projected.left_inverse() * w;
}

VerifyReport verify_strategy(const DetNetwork& network, const LinearStrategy& strategy, std::size_t trials,
                             std::uint64_t seed) {
    const TransferMap transfer = end_to_end_transfer(network, strategy);
    const auto& sk = network.skeleton();
    const auto q = static_cast<std::size_t>(network.q());
    const auto block = static_cast<std::size_t>(strategy.block);
    const std::size_t nb = q * block;
    const std::size_t k = sk.pair_count();
    // Destinations hear block b at block time b + lag.
    const auto lag = static_cast<std::size_t>(sk.layers() - 2);

    VerifyReport report;
    std::vector<GF2Matrix> dec;
    for (std::size_t p = 0; p < k; ++p) {
        dec.push_back(decoder(transfer, p));
        report.decoded_bits.push_back(strategy.injection[p].cols());
    }

    auto pair_of_source = [&](NodeIndex v) {
        return static_cast<std::size_t>(std::find(sk.sources().begin(), sk.sources().end(), v) - sk.sources().begin());
    };
    // One network use per slot; `blocks[v]` is node v's stacked block.
    auto run_slot = [&](const std::vector<Bits>& blocks, std::size_t slot, std::vector<Bits>& received) {
        Signals tx(sk.node_count());
        for (NodeIndex v = 0; v < sk.node_count(); ++v)
            if (!blocks[v].empty()) tx[v].assign(blocks[v].begin() + static_cast<std::ptrdiff_t>(slot * q),
                                                 blocks[v].begin() + static_cast<std::ptrdiff_t>((slot + 1) * q));
        const Signals rx = propagate(network, tx);
        for (NodeIndex v = 0; v < sk.node_count(); ++v)
            std::copy(rx[v].begin(), rx[v].end(), received[v].begin() + static_cast<std::ptrdiff_t>(slot * q));
    };

    const SplitMix64 root(seed);
    for (std::size_t trial = 0; trial < trials && report.ok; ++trial) {
        SplitMix64 rng = root.split(trial);
        const std::size_t message_blocks = strategy.causality == Causality::kPipelined ? 3 : 1;
        std::vector<std::vector<Bits>> messages(k);
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t b = 0; b < message_blocks; ++b) {
                Bits m(strategy.injection[p].cols());
                for (auto& bit : m) bit = static_cast<std::uint8_t>(rng.bit());
                messages[p].push_back(std::move(m));
            }
        auto check = [&](std::size_t p, std::size_t b, const Bits& y) {
            const Bits got = dec[p].apply(y);
            if (got != messages[p][b]) {
                report.ok = false;
                report.failure = "trial " + std::to_string(trial) + ": pair " + std::to_string(p) + " block " +
                                 std::to_string(b) + " decoded wrongly";
            }
        };

        if (strategy.causality == Causality::kPipelined) {
            std::vector<Bits> received(sk.node_count(), Bits(nb, 0));
            const std::size_t horizon = message_blocks + lag;
            for (std::size_t t = 0; t < horizon && report.ok; ++t) {
                std::vector<Bits> blocks(sk.node_count());
                for (NodeIndex v = 0; v < sk.node_count(); ++v) {
                    if (sk.is_source(v)) {
                        const auto p = pair_of_source(v);
                        blocks[v] = t < message_blocks ? strategy.injection[p].apply(messages[p][t]) : Bits(nb, 0);
                    } else if (strategy.maps[v]) {
                        blocks[v] = strategy.maps[v]->apply(received[v]);
                    }
                }
                std::vector<Bits> now(sk.node_count(), Bits(nb, 0));
                for (std::size_t slot = 0; slot < block; ++slot) run_slot(blocks, slot, now);
                received = std::move(now);
                if (t >= lag)
                    for (std::size_t p = 0; p < k && report.ok; ++p) check(p, t - lag, received[sk.destination(p)]);
            }
        } else {
            std::vector<Bits> received(sk.node_count(), Bits(nb, 0));
            for (std::size_t slot = 0; slot < block; ++slot) {
                std::vector<Bits> blocks(sk.node_count());
                for (NodeIndex v = 0; v < sk.node_count(); ++v) {
                    if (sk.is_source(v)) {
                        const auto p = pair_of_source(v);
                        blocks[v] = strategy.injection[p].apply(messages[p][0]);
                    } else if (strategy.maps[v]) {
                        // Strictly lower-triangular: later slots of `received` are
                        // still zero and unused.
                        blocks[v] = strategy.maps[v]->apply(received[v]);
                    }
                }
                run_slot(blocks, slot, received);
            }
            for (std::size_t p = 0; p < k && report.ok; ++p) check(p, 0, received[sk.destination(p)]);
        }
    }
    return report;
}

LinearStrategy compile_schedule(const Schedule& schedule, const DetNetwork& network) {
    const auto& sk = network.skeleton();
    validate_schedule(schedule, sk);
    const auto q = static_cast<std::size_t>(network.q());
    const int block = static_cast<int>(schedule.period);
    const std::size_t nb = block_bits(network, block);
    LinearStrategy s = silent_strategy(network, block);
    s.label = schedule.strategy + "-compiled";

    for (std::size_t p = 0; p < sk.pair_count(); ++p) {
        if (!schedule.routes[p]) continue;
        const Route& route = *schedule.routes[p];
        std::vector<std::size_t> gains;
        std::uint64_t quota = UINT64_MAX;
        for (std::size_t h = 0; h < route.hops(); ++h) {
            const int g = network.gain(route.nodes[h], route.nodes[h + 1]);
            if (g == 0) throw InvalidArgument("schedule references unknown link");
            gains.push_back(static_cast<std::size_t>(g));
            quota = std::min<std::uint64_t>(quota, schedule.active_slots({p, h}) * gains.back());
        }
        // Rows carrying hop h: top positions when sending, bottom when heard.
        auto sent_rows = [&](std::size_t h) {
            std::vector<std::size_t> rows;
            for (std::size_t t = 0; t < schedule.period; ++t)
                if (std::find(schedule.slots[t].begin(), schedule.slots[t].end(), Usage{p, h}) !=
                    schedule.slots[t].end())
                    for (std::size_t j = 0; j < gains[h]; ++j) rows.push_back(t * q + j);
            rows.resize(quota);
            return rows;
        };
        auto heard_rows = [&](std::size_t h) {
            std::vector<std::size_t> rows;
            for (std::size_t t = 0; t < schedule.period; ++t)
                if (std::find(schedule.slots[t].begin(), schedule.slots[t].end(), Usage{p, h}) !=
                    schedule.slots[t].end())
                    for (std::size_t j = 0; j < gains[h]; ++j) rows.push_back(t * q + q - gains[h] + j);
            rows.resize(quota);
            return rows;
        };
        GF2Matrix a(nb, quota);
        const auto first = sent_rows(0);
        for (std::size_t j = 0; j < quota; ++j) a.set(first[j], j);
        s.injection[p] = a;
        for (std::size_t h = 1; h < route.hops(); ++h) {
            const NodeIndex v = route.nodes[h];
            if (!s.maps[v]) s.maps[v] = GF2Matrix(nb, nb);
            const auto in = heard_rows(h - 1);
            const auto out = sent_rows(h);
            for (std::size_t j = 0; j < quota; ++j) s.maps[v]->set(out[j], in[j]);
        }
    }
    return s;
}

std::vector<DistributednessEntry> distributedness_report(const DetNetwork& network, const SearchOptions& options,
                                                         const SearchCaps& caps) {
    const auto& sk = network.skeleton();
    const SearchResult base = strategy_search(network, options, caps);
    const std::uint64_t search_size = search_space_size(network, options);
    std::vector<DistributednessEntry> out;
    for (NodeIndex v = 0; v < sk.node_count(); ++v) {
        if (sk.is_destination(v)) continue;
        DistributednessEntry entry{v, 0, std::nullopt};
        const ConsistencyClass cls = make_class(node_view(network, v), network.q());
        std::uint64_t size = 1;
        try {
            size = ConsistentNetworks(cls, caps.class_members).size();
        } catch (const CapExceeded& e) {
            entry.class_size = e.required();
            out.push_back(entry);
            continue;
        }
        entry.class_size = size;
        if (saturating_mul(size, search_size) > caps.coding_strategies) {
            out.push_back(entry);
            continue;
        }
        const ConsistentNetworks members(cls, caps.class_members);
        const bool is_src = sk.is_source(v);
        const auto pair = is_src ? static_cast<std::size_t>(std::find(sk.sources().begin(), sk.sources().end(), v) -
                                                            sk.sources().begin())
                                 : 0;
        bool same = true;
        members.for_each([&](std::uint64_t, const DetNetwork& member) {
            if (!same) return;
            const SearchResult r = strategy_search(member, options, caps);
            if (is_src) {
                same = r.strategy.injection[pair] == base.strategy.injection[pair];
            } else {
                same = r.strategy.maps[v] == base.strategy.maps[v];
            }
        });
        entry.view_computable = same;
        out.push_back(entry);
    }
    return out;
}

namespace {

nlohmann::json hex_rows(const GF2Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row_hex(r));
    return rows;
}

GF2Matrix parse_rows(const nlohmann::json& rows, std::size_t cols) {
    return GF2Matrix::from_hex_rows(rows.get<std::vector<std::string>>(), cols);
}

}  // namespace

nlohmann::json strategy_to_json(const LinearStrategy& strategy, const Skeleton& skeleton) {
    nlohmann::json doc;
    doc["label"] = strategy.label;
    doc["block"] = strategy.block;
    doc["causality"] = strategy.causality == Causality::kPipelined ? "pipelined" : "strict";
    doc["pairs"] = nlohmann::json::array();
    for (std::size_t p = 0; p < strategy.injection.size(); ++p) {
        doc["pairs"].push_back({{"source", skeleton.node(skeleton.source(p)).id},
                                {"message_bits", strategy.injection[p].cols()},
                                {"injection", hex_rows(strategy.injection[p])}});
    }
    doc["maps"] = nlohmann::json::array();
    for (NodeIndex v = 0; v < strategy.maps.size(); ++v)
        if (strategy.maps[v]) doc["maps"].push_back({{"node", skeleton.node(v).id}, {"map", hex_rows(*strategy.maps[v])}});
    return doc;
}

LinearStrategy strategy_from_json(const nlohmann::json& doc, const DetNetwork& network) {
    const auto& sk = network.skeleton();
    LinearStrategy s = silent_strategy(network, doc.at("block").get<int>());
    s.label = doc.value("label", std::string("coding"));
    const auto causality = doc.value("causality", std::string("pipelined"));
    if (causality == "strict") {
        s.causality = Causality::kStrict;
    } else if (causality != "pipelined") {
        throw InvalidArgument("strategy: unknown causality '" + causality + "'");
    }
    const std::size_t nb = block_bits(network, s.block);
    const auto& pairs = doc.at("pairs");
    if (pairs.size() != sk.pair_count()) throw InvalidArgument("strategy: one entry per pair required");
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (pairs[p].at("source").get<std::string>() != sk.node(sk.source(p)).id)
            throw InvalidArgument("strategy: pair order differs from the network");
        const auto m = pairs[p].at("message_bits").get<std::size_t>();
        s.injection[p] = parse_rows(pairs[p].at("injection"), m);
        if (s.injection[p].rows() != nb) throw InvalidArgument("strategy: injection rows differ from q*T");
    }
    for (const auto& entry : doc.at("maps")) {
        const NodeIndex v = sk.index_of(entry.at("node").get<std::string>());
        s.maps[v] = parse_rows(entry.at("map"), nb);
    }
    validate_strategy(network, s);
    return s;
}

}  // namespace detnet
