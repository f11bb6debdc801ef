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
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "quantann/error.hpp"

namespace quantann {

enum class ElemKind : std::uint8_t {
    kFloat32 = 0,
    kInt8 = 1,
};

constexpr std::string_view
to_string(ElemKind kind) {
    return kind == ElemKind::kFloat32 ? "fp32" : "int8";
}

template <typename T>
concept Element = std::same_as<T, float> || std::same_as<T, std::int8_t>;

template <Element T>
constexpr ElemKind kElemKind = std::same_as<T, float> ? ElemKind::kFloat32 : ElemKind::kInt8;

constexpr std::size_t
element_bytes(ElemKind kind) {
    return kind == ElemKind::kFloat32 ? 4 : 1;
}

// Largest d for which an int8 squared distance, worst case 255^2 per
// coordinate, stays below 2^31 in a 32-bit accumulator. Dot products have
// more headroom (128^2 per coordinate), so this single bound covers both.
inline constexpr std::size_t kMaxInt8Dim = 33025;

inline void
check_int8_dim(std::size_t d) {
    if (d > kMaxInt8Dim) {
        throw Error(ErrorCode::kDimensionTooLarge,
                    "int8 vectors of dimension " + std::to_string(d) +
                        " could overflow 32-bit accumulators (max " +
                        std::to_string(kMaxInt8Dim) + ")");
    }
}

/// Row-major n x d matrix. A default-constructed dataset has d == 0; any
/// non-empty dataset has d >= 1.
template <Element T>
class Dataset {
public:
    using value_type = T;

    Dataset() = default;

    Dataset(std::size_t n, std::size_t d) : Dataset(n, d, std::vector<T>(n * d)) {
    }

    Dataset(std::size_t n, std::size_t d, std::vector<T> values)
        : n_(n), d_(d), data_(std::move(values)) {
        if (n > 0 && d == 0) {
            throw Error(ErrorCode::kNonPositiveDim, "non-empty dataset with d == 0");
        }
        if (data_.size() != n * d) {
            throw Error(ErrorCode::kLengthMismatch,
                        "expected " + std::to_string(n * d) + " values, got " +
                            std::to_string(data_.size()));
        }
    }

    std::size_t
    size() const noexcept {
        return n_;
    }

    std::size_t
    dim() const noexcept {
        return d_;
    }

    bool
    empty() const noexcept {
        return n_ == 0;
    }

    static constexpr ElemKind
    kind() noexcept {
        return kElemKind<T>;
    }

    std::span<const T>
    row(std::size_t i) const {
        return {data_.data() + i * d_, d_};
    }

    std::span<T>
    row(std::size_t i) {
        return {data_.data() + i * d_, d_};
    }

    std::span<const T>
    values() const noexcept {
        return data_;
    }

    std::span<T>
    values() noexcept {
        return data_;
    }

    friend bool
    operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<T> data_;
};

using FloatDataset = Dataset<float>;
using Int8Dataset = Dataset<std::int8_t>;

/// A dataset whose element kind is only known at runtime (file loaders, CLI).
using AnyDataset = std::variant<FloatDataset, Int8Dataset>;

inline ElemKind
kind_of(const AnyDataset& ds) {
    return ds.index() == 0 ? ElemKind::kFloat32 : ElemKind::kInt8;
}

/// Per-query ordered neighbor ids (0-based corpus indices).
struct GroundTruth {
    std::vector<std::vector<std::uint32_t>> lists;

    std::size_t
    size() const noexcept {
        return lists.size();
    }

    /// Shortest list length, i.e. the deepest k every query supports.
    std::size_t
    depth() const noexcept {
        if (lists.empty()) {
            return 0;
        }
        std::size_t k = lists.front().size();
        for (const auto& list : lists) {
            k = std::min(k, list.size());
        }
        return k;
    }

    friend bool
    operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Throws kInvalidValue unless every id is < corpus_size and no list repeats an id.
inline void
validate_ground_truth(const GroundTruth& gt, std::size_t corpus_size) {
    std::unordered_set<std::uint32_t> seen;
    for (std::size_t q = 0; q < gt.lists.size(); ++q) {
        seen.clear();
        for (const auto id : gt.lists[q]) {
            if (id >= corpus_size) {
                throw Error(ErrorCode::kInvalidValue,
                            "query " + std::to_string(q) + " references id " + std::to_string(id) +
                                " outside a corpus of " + std::to_string(corpus_size));
            }
            if (!seen.insert(id).second) {
                throw Error(ErrorCode::kInvalidValue, "query " + std::to_string(q) +
                                                          " lists id " + std::to_string(id) +
                                                          " twice");
            }
        }
    }
}

}  // namespace quantann
