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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "quantann/dataset.hpp"
#include "quantann/detail/parallel.hpp"
#include "quantann/distance.hpp"
#include "quantann/error.hpp"

namespace quantann {

struct Neighbor {
    std::uint32_t id = 0;
    Score score = 0.0;

    friend bool
    operator==(const Neighbor&, const Neighbor&) = default;
};

/// Total order used everywhere results are ranked: by score, then by id.
inline bool
operator<(const Neighbor& a, const Neighbor& b) {
    return a.score < b.score || (a.score == b.score && a.id < b.id);
}

/// Neighbors in ascending (score, id) order.
using TopK = std::vector<Neighbor>;

inline std::vector<std::uint32_t>
ids_of(const TopK& result) {
    std::vector<std::uint32_t> ids;
    ids.reserve(result.size());
    for (const auto& nb : result) {
        ids.push_back(nb.id);
    }
    return ids;
}

namespace detail {

/// Keeps the k smallest neighbors seen so far in a max-heap.
class BoundedTopK {
public:
    explicit BoundedTopK(std::size_t k) : k_(k) {
        heap_.reserve(k + 1);
    }

    void
    offer(Neighbor nb) {
        if (heap_.size() < k_) {
            heap_.push_back(nb);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (nb < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = nb;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    TopK
    take_sorted() && {
        std::sort_heap(heap_.begin(), heap_.end());
        return std::move(heap_);
    }

private:
    std::size_t k_;
    std::vector<Neighbor> heap_;
};

template <Element T>
void
check_search_inputs(const Dataset<T>& corpus, std::size_t query_dim, std::size_t k) {
    if (corpus.empty()) {
        throw Error(ErrorCode::kEmptyCorpus, "cannot search an empty corpus");
    }
    if (query_dim != corpus.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "query has d = " + std::to_string(query_dim) +
                                                       ", corpus has d = " +
                                                       std::to_string(corpus.dim()));
    }
    if (k == 0) {
        throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
    }
    if constexpr (kElemKind<T> == ElemKind::kInt8) {
        check_int8_dim(corpus.dim());
    }
}

}  // namespace detail

/// Exhaustive scan returning the min(k, n) closest items, ties broken by id.
///
/// For kAngular, `corpus_norms` may carry precomputed row norms; when empty
/// they are computed on the fly.
template <Element T>
TopK
exact_topk(const Dataset<T>& corpus, std::span<const std::type_identity_t<T>> query, std::size_t k,
           Metric metric,
           std::span<const float> corpus_norms = {}) {
    detail::check_search_inputs(corpus, query.size(), k);
    const std::size_t d = corpus.dim();
    float query_norm = 0.0F;
    if (metric == Metric::kAngular) {
        query_norm = norm(query);
        if (!(query_norm > 0.0F)) {
            throw Error(ErrorCode::kZeroNorm, "query has zero norm under the angular metric");
        }
        if (!corpus_norms.empty() && corpus_norms.size() != corpus.size()) {
            throw Error(ErrorCode::kLengthMismatch, "one norm per corpus row is required");
        }
    }

    detail::BoundedTopK top(std::min(k, corpus.size()));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto row = corpus.row(i);
        float row_norm = 0.0F;
        if (metric == Metric::kAngular) {
            row_norm = corpus_norms.empty() ? norm(row) : corpus_norms[i];
            if (!(row_norm > 0.0F)) {
                throw Error(ErrorCode::kZeroNorm, "corpus vector " + std::to_string(i) +
                                                      " has zero norm under the angular metric");
            }
        }
        const Score s = detail::distance_kernel(metric, query.data(), row.data(), d, query_norm,
                                                row_norm);
        top.offer({static_cast<std::uint32_t>(i), s});
    }
    return std::move(top).take_sorted();
}

/// exact_topk for every query; parallel across queries, deterministic output.
template <Element T>
GroundTruth
batch_ground_truth(const Dataset<T>& corpus, const Dataset<T>& queries, std::size_t k,
                   Metric metric, unsigned threads = 1) {
    GroundTruth gt;
    gt.lists.resize(queries.size());
    if (queries.empty()) {
        return gt;
    }
    detail::check_search_inputs(corpus, queries.dim(), k);
    std::vector<float> norms;
    if (metric == Metric::kAngular) {
        norms = row_norms(corpus, true);
    }
    detail::parallel_for(0, queries.size(), threads, [&](std::size_t q) {
        gt.lists[q] = ids_of(exact_topk(corpus, queries.row(q), k, metric, norms));
    });
    return gt;
}

}  // namespace quantann
