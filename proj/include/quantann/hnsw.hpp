// Copyright 2026-present the quantann project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Hierarchical Navigable Small World graph over float32 or int8 vectors.
//
// Construction follows the usual formulation: every node draws a level
// floor(-ln(U) * level_mult) up front from a seeded generator, then nodes are
// inserted in id order. An insertion descends greedily from the entry point
// to level + 1, runs a beam search of width ef_construction on each of its
// own layers, links to at most M neighbors chosen by the diversity heuristic
// and adds the reverse edges, re-pruning any list that overflows its cap
// (M on upper layers, 2M on layer 0).
//
// Adjacency lives in fixed-capacity slot arrays, the same layout the index
// file uses, so graph memory depends only on the levels and M.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "quantann/dataset.hpp"
#include "quantann/detail/binary_io.hpp"
#include "quantann/detail/parallel.hpp"
#include "quantann/distance.hpp"
#include "quantann/error.hpp"
#include "quantann/exact_search.hpp"

namespace quantann {

struct HnswConfig {
    std::uint32_t m = 32;                 ///< out-degree cap on upper layers; 2m on layer 0
    std::uint32_t ef_construction = 300;  ///< beam width while inserting
    std::uint64_t seed = 42;              ///< level-assignment seed
    double level_mult = 0.0;              ///< 0 selects 1 / ln(m)
    std::uint8_t code_bits = 0;           ///< bits per stored value; 0 selects 32 or 8 by kind

    double
    effective_level_mult() const {
        return level_mult > 0.0 ? level_mult : 1.0 / std::log(static_cast<double>(m));
    }

    void
    validate() const {
        if (m < 2) {
            throw Error(ErrorCode::kInvalidArgument, "M must be at least 2");
        }
        if (ef_construction < m) {
            throw Error(ErrorCode::kInvalidArgument, "EFC must be at least M");
        }
        if (!(level_mult >= 0.0) || !std::isfinite(level_mult)) {
            throw Error(ErrorCode::kInvalidArgument, "level multiplier must be positive");
        }
    }

    friend bool
    operator==(const HnswConfig&, const HnswConfig&) = default;
};

struct SearchParams {
    std::size_t ef_search = 300;
    std::size_t k = 100;

    void
    validate() const {
        if (k < 1) {
            throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
        }
        if (ef_search < k) {
            throw Error(ErrorCode::kInvalidArgument, "EFS (" + std::to_string(ef_search) +
                                                         ") must be at least k (" +
                                                         std::to_string(k) + ")");
        }
    }
};

/// Byte counts of the index file layout; total_bytes equals the saved file size.
struct MemoryReport {
    std::uint64_t header_bytes = 0;
    std::uint64_t vector_bytes = 0;
    std::uint64_t graph_bytes = 0;  ///< level array plus every adjacency slot array
    std::uint64_t norm_bytes = 0;   ///< per-node norms, angular metric only
    std::uint64_t total_bytes = 0;

    friend bool
    operator==(const MemoryReport&, const MemoryReport&) = default;
};

constexpr std::uint64_t
vector_storage_bytes(std::uint64_t n, std::uint64_t d, ElemKind kind) {
    return n * d * element_bytes(kind);
}

inline constexpr std::string_view kIndexMagic = "QHNSW1";
inline constexpr std::uint8_t kIndexVersion = 1;
inline constexpr std::uint64_t kIndexHeaderBytes = 46;
inline constexpr std::uint32_t kEmptySlot = 0xFFFFFFFFU;
inline constexpr unsigned kMaxLevel = 255;

/// Levels floor(-ln(U) * level_mult) with U uniform in (0, 1], one per node.
inline std::vector<std::uint8_t>
assign_levels(std::size_t n, double level_mult, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> levels(n);
    for (auto& level : levels) {
        // 53 random mantissa bits; 1 - u keeps U away from zero.
        const double u = 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double l = std::floor(-std::log(u) * level_mult);
        level = static_cast<std::uint8_t>(std::min<double>(l, kMaxLevel));
    }
    return levels;
}

/// Adjacency bytes for the given levels: the level array, then for each node
/// and layer a u32 degree plus cap u32 slots.
inline std::uint64_t
graph_storage_bytes(std::span<const std::uint8_t> levels, std::uint32_t m) {
    std::uint64_t bytes = levels.size();
    for (const auto level : levels) {
        bytes += 4ULL * (1 + 2ULL * m);
        bytes += std::uint64_t{level} * 4ULL * (1 + m);
    }
    return bytes;
}

namespace detail {

/// Epoch-tagged visited set, reused across searches on one thread.
class VisitedList {
public:
    void
    reset(std::size_t n) {
        if (tags_.size() < n) {
            tags_.assign(n, 0);
            epoch_ = 0;
        }
        if (++epoch_ == 0) {
            std::fill(tags_.begin(), tags_.end(), 0);
            epoch_ = 1;
        }
    }

    /// Marks i and returns whether it was already marked.
    bool
    test_and_set(std::uint32_t i) {
        if (tags_[i] == epoch_) {
            return true;
        }
        tags_[i] = epoch_;
        return false;
    }

private:
    std::vector<std::uint32_t> tags_;
    std::uint32_t epoch_ = 0;
};

inline VisitedList&
thread_visited_list() {
    thread_local VisitedList visited;
    return visited;
}

inline bool
worse_first(const Neighbor& a, const Neighbor& b) {
    return a < b;
}

inline bool
closer_first(const Neighbor& a, const Neighbor& b) {
    return b < a;
}

}  // namespace detail

template <Element T>
class HnswIndex {
public:
    using value_type = T;

    /// Builds the graph. With threads == 1 the result is a pure function of
    /// (corpus, config, metric); parallel builds share levels but not edges.
    static HnswIndex
    build(const Dataset<T>& corpus, const HnswConfig& config, Metric metric, unsigned threads = 1) {
        config.validate();
        if (corpus.empty()) {
            throw Error(ErrorCode::kEmptyCorpus, "cannot build an index over an empty corpus");
        }
        if (corpus.size() >= kEmptySlot) {
            throw Error(ErrorCode::kInvalidArgument, "corpus too large for 32-bit ids");
        }
        if constexpr (kElemKind<T> == ElemKind::kInt8) {
            check_int8_dim(corpus.dim());
        }

        HnswIndex index;
        index.n_ = corpus.size();
        index.d_ = corpus.dim();
        index.metric_ = metric;
        index.config_ = config;
        index.code_bits_ = config.code_bits != 0 ? config.code_bits : default_code_bits();
        if (index.code_bits_ == default_code_bits()) {
            index.config_.code_bits = 0;
        }
        index.vectors_.assign(corpus.values().begin(), corpus.values().end());
        if (metric == Metric::kAngular) {
            index.norms_ = row_norms(corpus, true);
        }
        index.levels_ = assign_levels(index.n_, config.effective_level_mult(), config.seed);
        index.allocate_links();

        index.entry_ = 0;
        index.max_level_ = index.levels_[0];
        if (threads <= 1) {
            Builder<false> builder(index);
            for (std::size_t i = 1; i < index.n_; ++i) {
                builder.insert(static_cast<std::uint32_t>(i));
            }
        } else {
            Builder<true> builder(index);
            detail::parallel_for(1, index.n_, threads, [&](std::size_t i) {
                builder.insert(static_cast<std::uint32_t>(i));
            });
        }
        return index;
    }

    /// Greedy descent through the upper layers, then a beam of width
    /// max(ef_search, k) on layer 0. Safe to call concurrently.
    TopK
    search(std::span<const T> query, const SearchParams& params) const {
        params.validate();
        if (query.size() != d_) {
            throw Error(ErrorCode::kDimensionMismatch, "query has d = " +
                                                           std::to_string(query.size()) +
                                                           ", index has d = " + std::to_string(d_));
        }
        float query_norm = 0.0F;
        if (metric_ == Metric::kAngular) {
            query_norm = norm(query);
            if (!(query_norm > 0.0F)) {
                throw Error(ErrorCode::kZeroNorm, "query has zero norm under the angular metric");
            }
        }
        const T* q = query.data();
        Neighbor cur{entry_, distance_to(q, query_norm, entry_)};
        for (int layer = static_cast<int>(max_level_); layer > 0; --layer) {
            greedy_step<false>(q, query_norm, cur, layer);
        }
        std::vector<Neighbor> eps{cur};
        auto found = search_layer<false>(q, query_norm, eps, std::max(params.ef_search, params.k),
                                         0, kEmptySlot);
        if (found.size() > params.k) {
            found.resize(params.k);
        }
        return found;
    }

    MemoryReport
    memory_report() const {
        MemoryReport r;
        r.header_bytes = kIndexHeaderBytes;
        r.vector_bytes = vector_storage_bytes(n_, d_, kElemKind<T>);
        r.graph_bytes = graph_storage_bytes(levels_, config_.m);
        r.norm_bytes = norms_.size() * sizeof(float);
        r.total_bytes = r.header_bytes + r.vector_bytes + r.graph_bytes + r.norm_bytes;
        return r;
    }

    // Index file, little-endian:
    //   "QHNSW1" | u8 version | u8 elem kind | u8 metric | u8 code bits | u32 d |
    //   u64 n | u32 M | u32 EFC | u64 seed | u32 entry point | u32 max level |
    //   n x u8 level |
    //   for each node, for layers 0..level: u32 degree, cap x u32 ids (unused = 0xFFFFFFFF) |
    //   n x d vector payload | n x f32 norms (angular only)
    std::vector<std::byte>
    serialize() const {
        detail::ByteWriter w;
        w.put_bytes(kIndexMagic);
        w.put(kIndexVersion);
        w.put(static_cast<std::uint8_t>(kElemKind<T>));
        w.put(static_cast<std::uint8_t>(metric_));
        w.put(code_bits_);
        w.put(static_cast<std::uint32_t>(d_));
        w.put(static_cast<std::uint64_t>(n_));
        w.put(config_.m);
        w.put(config_.ef_construction);
        w.put(config_.seed);
        w.put(entry_);
        w.put(max_level_);
        w.put_span(std::span<const std::uint8_t>(levels_));
        for (std::size_t i = 0; i < n_; ++i) {
            for (unsigned layer = 0; layer <= levels_[i]; ++layer) {
                w.put_span(slot_array(static_cast<std::uint32_t>(i), layer));
            }
        }
        w.put_span(std::span<const T>(vectors_));
        w.put_span(std::span<const float>(norms_));
        return w.bytes();
    }

    static HnswIndex
    deserialize(std::span<const std::byte> bytes) {
        detail::ByteReader r(bytes, ErrorCode::kCorrupt);
        if (bytes.size() < kIndexMagic.size() ||
            std::memcmp(bytes.data(), kIndexMagic.data(), kIndexMagic.size()) != 0) {
            throw Error(ErrorCode::kBadMagic, "not a quantann HNSW index");
        }
        r.take(kIndexMagic.size());
        const auto version = r.get<std::uint8_t>();
        if (version != kIndexVersion) {
            throw Error(ErrorCode::kUnsupportedVersion,
                        "index version " + std::to_string(version) + " is not supported");
        }
        const auto kind = r.get<std::uint8_t>();
        if (kind != static_cast<std::uint8_t>(kElemKind<T>)) {
            throw Error(ErrorCode::kElementKindMismatch,
                        "index stores element kind " + std::to_string(kind));
        }
        HnswIndex index;
        const auto metric = r.get<std::uint8_t>();
        if (metric > static_cast<std::uint8_t>(Metric::kAngular)) {
            throw Error(ErrorCode::kCorrupt, "metric code " + std::to_string(metric));
        }
        index.metric_ = static_cast<Metric>(metric);
        index.code_bits_ = r.get<std::uint8_t>();
        index.d_ = r.get<std::uint32_t>();
        const auto n = r.get<std::uint64_t>();
        index.config_.m = r.get<std::uint32_t>();
        index.config_.ef_construction = r.get<std::uint32_t>();
        index.config_.seed = r.get<std::uint64_t>();
        index.config_.code_bits = index.code_bits_ == default_code_bits() ? 0 : index.code_bits_;
        index.entry_ = r.get<std::uint32_t>();
        index.max_level_ = r.get<std::uint32_t>();
        if (n == 0 || n >= kEmptySlot || index.d_ == 0 || index.config_.m < 2 ||
            index.config_.m > (1U << 20)) {
            throw Error(ErrorCode::kCorrupt, "implausible header");
        }
        index.n_ = static_cast<std::size_t>(n);
        if (n > r.remaining()) {
            throw Error(ErrorCode::kCorrupt, "file too short for the level array");
        }
        index.levels_.resize(index.n_);
        r.get_into(std::span<std::uint8_t>(index.levels_));

        // The payload size is fully determined by the header and levels.
        const std::uint64_t expected = graph_storage_bytes(index.levels_, index.config_.m) -
                                       index.n_ +
                                       vector_storage_bytes(n, index.d_, kElemKind<T>) +
                                       (index.metric_ == Metric::kAngular ? 4 * n : 0);
        if (expected != r.remaining()) {
            throw Error(ErrorCode::kCorrupt, "payload is " + std::to_string(r.remaining()) +
                                                 " bytes, header implies " +
                                                 std::to_string(expected));
        }
        if (index.entry_ >= n || index.levels_[index.entry_] != index.max_level_ ||
            *std::max_element(index.levels_.begin(), index.levels_.end()) != index.max_level_) {
            throw Error(ErrorCode::kCorrupt, "entry point is not on the top layer");
        }

        index.allocate_links();
        for (std::size_t i = 0; i < index.n_; ++i) {
            for (unsigned layer = 0; layer <= index.levels_[i]; ++layer) {
                auto slots = index.slot_array(static_cast<std::uint32_t>(i), layer);
                r.get_into(slots);
                const auto cap = index.cap(layer);
                if (slots[0] > cap) {
                    throw Error(ErrorCode::kCorrupt, "node " + std::to_string(i) +
                                                         " exceeds its degree cap");
                }
                for (std::uint32_t s = 1; s <= cap; ++s) {
                    const auto id = slots[s];
                    const bool used = s <= slots[0];
                    if (used ? (id >= n || id == i || index.levels_[id] < layer)
                             : id != kEmptySlot) {
                        throw Error(ErrorCode::kCorrupt, "bad edge slot at node " +
                                                             std::to_string(i));
                    }
                }
            }
        }
        index.vectors_.resize(index.n_ * index.d_);
        r.get_into(std::span<T>(index.vectors_));
        if (index.metric_ == Metric::kAngular) {
            index.norms_.resize(index.n_);
            r.get_into(std::span<float>(index.norms_));
        }
        return index;
    }

    void
    save(const std::filesystem::path& path) const {
        detail::ByteWriter w;
        const auto bytes = serialize();
        w.put_span(std::span<const std::byte>(bytes));
        w.write_to(path);
    }

    static HnswIndex
    load(const std::filesystem::path& path) {
        return deserialize(detail::read_file(path));
    }

    std::size_t
    size() const noexcept {
        return n_;
    }

    std::size_t
    dim() const noexcept {
        return d_;
    }

    Metric
    metric() const noexcept {
        return metric_;
    }

    const HnswConfig&
    config() const noexcept {
        return config_;
    }

    std::uint8_t
    code_bits() const noexcept {
        return code_bits_;
    }

    std::uint32_t
    entry_point() const noexcept {
        return entry_;
    }

    unsigned
    max_level() const noexcept {
        return max_level_;
    }

    unsigned
    level(std::uint32_t id) const {
        return levels_.at(id);
    }

    std::span<const std::uint8_t>
    levels() const noexcept {
        return levels_;
    }

    std::span<const std::uint32_t>
    neighbors(std::uint32_t id, unsigned layer) const {
        if (id >= n_ || layer > levels_[id]) {
            throw Error(ErrorCode::kInvalidArgument, "node " + std::to_string(id) +
                                                         " has no layer " + std::to_string(layer));
        }
        const std::uint32_t* list = links(id, layer);
        return {list + 1, list[0]};
    }

    std::span<const T>
    vector(std::uint32_t id) const {
        return {vectors_.data() + std::size_t{id} * d_, d_};
    }

    /// Maximum degree on a layer: 2M on layer 0, M above.
    std::uint32_t
    cap(unsigned layer) const noexcept {
        return layer == 0 ? 2 * config_.m : config_.m;
    }

    friend bool
    operator==(const HnswIndex&, const HnswIndex&) = default;

private:
    HnswIndex() = default;

    static constexpr std::uint8_t
    default_code_bits() {
        return kElemKind<T> == ElemKind::kFloat32 ? 32 : 8;
    }

    void
    allocate_links() {
        const std::size_t stride0 = 1 + 2 * std::size_t{config_.m};
        layer0_.assign(n_ * stride0, kEmptySlot);
        upper_.assign(n_, {});
        for (std::size_t i = 0; i < n_; ++i) {
            layer0_[i * stride0] = 0;
            if (levels_[i] > 0) {
                const std::size_t stride = 1 + config_.m;
                upper_[i].assign(levels_[i] * stride, kEmptySlot);
                for (unsigned l = 0; l < levels_[i]; ++l) {
                    upper_[i][l * stride] = 0;
                }
            }
        }
    }

    // Degree followed by cap slots.
    std::uint32_t*
    links(std::uint32_t id, unsigned layer) {
        if (layer == 0) {
            return layer0_.data() + std::size_t{id} * (1 + 2 * std::size_t{config_.m});
        }
        return upper_[id].data() + std::size_t{layer - 1} * (1 + config_.m);
    }

    const std::uint32_t*
    links(std::uint32_t id, unsigned layer) const {
        return const_cast<HnswIndex*>(this)->links(id, layer);
    }

    std::span<std::uint32_t>
    slot_array(std::uint32_t id, unsigned layer) {
        return {links(id, layer), 1 + std::size_t{cap(layer)}};
    }

    std::span<const std::uint32_t>
    slot_array(std::uint32_t id, unsigned layer) const {
        return {links(id, layer), 1 + std::size_t{cap(layer)}};
    }

    float
    norm_of(std::uint32_t id) const {
        return norms_.empty() ? 0.0F : norms_[id];
    }

    Score
    distance_to(const T* q, float q_norm, std::uint32_t id) const {
        return detail::distance_kernel(metric_, q, vectors_.data() + std::size_t{id} * d_, d_,
                                       q_norm, norm_of(id));
    }

    Score
    distance_between(std::uint32_t a, std::uint32_t b) const {
        return distance_to(vectors_.data() + std::size_t{a} * d_, norm_of(a), b);
    }

    // Reads a neighbor list; during a concurrent build the copy is taken under
    // the node's lock.
    template <bool kConcurrent>
    std::span<const std::uint32_t>
    read_links(std::uint32_t id, unsigned layer, std::vector<std::uint32_t>& scratch) const {
        if constexpr (kConcurrent) {
            std::lock_guard lock(build_locks_.table[id]);
            const std::uint32_t* list = links(id, layer);
            scratch.assign(list + 1, list + 1 + list[0]);
            return scratch;
        } else {
            const std::uint32_t* list = links(id, layer);
            return {list + 1, list[0]};
        }
    }

    template <bool kConcurrent>
    void
    greedy_step(const T* q, float q_norm, Neighbor& cur, unsigned layer) const {
        std::vector<std::uint32_t> scratch;
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto e : read_links<kConcurrent>(cur.id, layer, scratch)) {
                const Neighbor cand{e, distance_to(q, q_norm, e)};
                if (cand < cur) {
                    cur = cand;
                    changed = true;
                }
            }
        }
    }

    // Beam search on one layer. Returns up to ef neighbors, ascending.
    // `exclude` is never reported (the node being inserted).
    template <bool kConcurrent>
    std::vector<Neighbor>
    search_layer(const T* q, float q_norm, const std::vector<Neighbor>& entry_points,
                 std::size_t ef, unsigned layer, std::uint32_t exclude) const {
        auto& visited = detail::thread_visited_list();
        visited.reset(n_);
        std::vector<Neighbor> candidates;  // min-heap
        std::vector<Neighbor> top;         // max-heap, worst at front
        candidates.reserve(ef * 2);
        top.reserve(ef + 1);

        auto admit = [&](const Neighbor& nb) {
            candidates.push_back(nb);
            std::push_heap(candidates.begin(), candidates.end(), detail::closer_first);
            if (nb.id == exclude) {
                return;
            }
            top.push_back(nb);
            std::push_heap(top.begin(), top.end(), detail::worse_first);
            if (top.size() > ef) {
                std::pop_heap(top.begin(), top.end(), detail::worse_first);
                top.pop_back();
            }
        };

        for (const auto& ep : entry_points) {
            if (!visited.test_and_set(ep.id)) {
                admit(ep);
            }
        }
        if (exclude != kEmptySlot) {
            visited.test_and_set(exclude);
        }

        std::vector<std::uint32_t> scratch;
        while (!candidates.empty()) {
            const Neighbor c = candidates.front();
            if (top.size() >= ef && top.front() < c) {
                break;
            }
            std::pop_heap(candidates.begin(), candidates.end(), detail::closer_first);
            candidates.pop_back();
            for (const auto e : read_links<kConcurrent>(c.id, layer, scratch)) {
                if (visited.test_and_set(e)) {
                    continue;
                }
                const Neighbor nb{e, distance_to(q, q_norm, e)};
                if (top.size() < ef || nb < top.front()) {
                    admit(nb);
                }
            }
        }
        std::sort(top.begin(), top.end());
        return top;
    }

    // Diversity heuristic over ascending candidates: a candidate is kept only
    // if no already-kept neighbor is strictly closer to it than the base node.
    // Lists that already fit under the cap are kept whole.
    void
    select_neighbors(std::vector<Neighbor>& sorted, std::size_t cap) const {
        if (sorted.size() <= cap) {
            return;
        }
        std::vector<Neighbor> kept;
        kept.reserve(cap);
        for (const auto& c : sorted) {
            if (kept.size() >= cap) {
                break;
            }
            bool diverse = true;
            for (const auto& r : kept) {
                if (distance_between(c.id, r.id) < c.score) {
                    diverse = false;
                    break;
                }
            }
            if (diverse) {
                kept.push_back(c);
            }
        }
        sorted = std::move(kept);
    }

    void
    write_links(std::uint32_t id, unsigned layer, const std::vector<Neighbor>& chosen) {
        std::uint32_t* list = links(id, layer);
        const auto c = cap(layer);
        list[0] = static_cast<std::uint32_t>(chosen.size());
        for (std::uint32_t s = 0; s < c; ++s) {
            list[1 + s] = s < chosen.size() ? chosen[s].id : kEmptySlot;
        }
    }

    template <bool kConcurrent>
    class Builder {
    public:
        explicit Builder(HnswIndex& index) : index_(index) {
            if constexpr (kConcurrent) {
                locks_ = std::vector<std::mutex>(index_.n_);
                index_.build_locks_.table = locks_.data();
            }
        }

        ~Builder() {
            index_.build_locks_.table = nullptr;
        }

        Builder(const Builder&) = delete;
        Builder&
        operator=(const Builder&) = delete;

        void
        insert(std::uint32_t id) {
            auto& ix = index_;
            const unsigned level = ix.levels_[id];
            std::unique_lock<std::mutex> global(entry_mutex_, std::defer_lock);
            if constexpr (kConcurrent) {
                global.lock();
            }
            const unsigned top_level = ix.max_level_;
            const std::uint32_t entry = ix.entry_;
            if (global.owns_lock() && level <= top_level) {
                global.unlock();
            }

            const T* q = ix.vectors_.data() + std::size_t{id} * ix.d_;
            const float q_norm = ix.norm_of(id);
            Neighbor cur{entry, ix.distance_to(q, q_norm, entry)};
            for (unsigned layer = top_level; layer > level; --layer) {
                ix.template greedy_step<kConcurrent>(q, q_norm, cur, layer);
            }

            std::vector<Neighbor> eps{cur};
            for (int layer = static_cast<int>(std::min(level, top_level)); layer >= 0; --layer) {
                const auto l = static_cast<unsigned>(layer);
                auto found = ix.template search_layer<kConcurrent>(
                    q, q_norm, eps, ix.config_.ef_construction, l, id);
                auto chosen = found;
                ix.select_neighbors(chosen, ix.config_.m);
                {
                    auto lock = lock_node(id);
                    if constexpr (kConcurrent) {
                        keep_concurrent_links(id, l, chosen);
                    }
                    ix.write_links(id, l, chosen);
                }
                for (const auto& nb : chosen) {
                    link_back(nb.id, id, l);
                }
                eps = std::move(found);
            }

            if (level > top_level) {
                ix.entry_ = id;
                ix.max_level_ = level;
            }
        }

    private:
        std::unique_lock<std::mutex>
        lock_node(std::uint32_t id) {
            if constexpr (kConcurrent) {
                return std::unique_lock<std::mutex>(locks_[id]);
            } else {
                return {};
            }
        }

        // Another insertion may have linked back to `id` before its own list
        // was written. Those edges are merged in so the other node stays
        // reachable. Caller holds the node's lock.
        void
        keep_concurrent_links(std::uint32_t id, unsigned layer, std::vector<Neighbor>& chosen) {
            auto& ix = index_;
            const std::uint32_t* list = ix.links(id, layer);
            if (list[0] == 0) {
                return;
            }
            for (std::uint32_t s = 1; s <= list[0]; ++s) {
                const bool present = std::ranges::any_of(
                    chosen, [&](const Neighbor& nb) { return nb.id == list[s]; });
                if (!present) {
                    chosen.push_back({list[s], ix.distance_between(id, list[s])});
                }
            }
            std::sort(chosen.begin(), chosen.end());
            ix.select_neighbors(chosen, ix.cap(layer));
        }

        void
        link_back(std::uint32_t from, std::uint32_t to, unsigned layer) {
            auto& ix = index_;
            auto lock = lock_node(from);
            std::uint32_t* list = ix.links(from, layer);
            const std::uint32_t degree = list[0];
            for (std::uint32_t s = 1; s <= degree; ++s) {
                if (list[s] == to) {
                    return;
                }
            }
            if (degree < ix.cap(layer)) {
                list[1 + degree] = to;
                list[0] = degree + 1;
                return;
            }
            std::vector<Neighbor> pool;
            pool.reserve(degree + 1);
            for (std::uint32_t s = 1; s <= degree; ++s) {
                pool.push_back({list[s], ix.distance_between(from, list[s])});
            }
            pool.push_back({to, ix.distance_between(from, to)});
            std::sort(pool.begin(), pool.end());
            ix.select_neighbors(pool, ix.cap(layer));
            ix.write_links(from, layer, pool);
        }

        HnswIndex& index_;
        std::vector<std::mutex> locks_;
        std::mutex entry_mutex_;
    };

    std::size_t n_ = 0;
    std::size_t d_ = 0;
    Metric metric_ = Metric::kL2Squared;
    HnswConfig config_;
    std::uint8_t code_bits_ = 0;
    std::uint32_t entry_ = 0;
    std::uint32_t max_level_ = 0;
    std::vector<T> vectors_;
    std::vector<float> norms_;
    std::vector<std::uint8_t> levels_;
    std::vector<std::uint32_t> layer0_;
    std::vector<std::vector<std::uint32_t>> upper_;

    // Points at the builder's per-node locks while a concurrent build runs.
    struct BuildLocks {
        std::mutex* table = nullptr;

        friend bool
        operator==(const BuildLocks&, const BuildLocks&) {
            return true;
        }
    };
    BuildLocks build_locks_;
};

using FloatHnswIndex = HnswIndex<float>;
using Int8HnswIndex = HnswIndex<std::int8_t>;
using AnyHnswIndex = std::variant<FloatHnswIndex, Int8HnswIndex>;

/// Element kind recorded in an index file header.
inline ElemKind
peek_index_kind(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open " + path.string());
    }
    char header[8] = {};
    in.read(header, sizeof(header));
    if (in.gcount() < static_cast<std::streamsize>(sizeof(header)) ||
        std::memcmp(header, kIndexMagic.data(), kIndexMagic.size()) != 0) {
        throw Error(ErrorCode::kBadMagic, path.string() + " is not a quantann HNSW index");
    }
    const auto kind = static_cast<std::uint8_t>(header[7]);
    if (kind > static_cast<std::uint8_t>(ElemKind::kInt8)) {
        throw Error(ErrorCode::kCorrupt, "unknown element kind " + std::to_string(kind));
    }
    return static_cast<ElemKind>(kind);
}

inline AnyHnswIndex
load_any_index(const std::filesystem::path& path) {
    if (peek_index_kind(path) == ElemKind::kFloat32) {
        return FloatHnswIndex::load(path);
    }
    return Int8HnswIndex::load(path);
}

}  // namespace quantann
