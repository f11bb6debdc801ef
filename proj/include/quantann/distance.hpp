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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quantann/dataset.hpp"
#include "quantann/error.hpp"

namespace quantann {

/// Every metric is a distance: smaller is closer.
enum class Metric : std::uint8_t {
    kInnerProduct = 0,  ///< -dot(a, b)
    kL2Squared = 1,     ///< sum (a_i - b_i)^2
    kAngular = 2,       ///< 1 - dot(a, b) / (|a| |b|)
};

constexpr std::string_view
to_string(Metric metric) {
    switch (metric) {
        case Metric::kInnerProduct:
            return "ip";
        case Metric::kL2Squared:
            return "l2";
        case Metric::kAngular:
            return "angular";
    }
    return "unknown";
}

inline Metric
parse_metric(std::string_view name) {
    if (name == "ip") {
        return Metric::kInnerProduct;
    }
    if (name == "l2") {
        return Metric::kL2Squared;
    }
    if (name == "angular") {
        return Metric::kAngular;
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

/// Comparable distance value. Wide enough to hold every int32 accumulator exactly.
using Score = double;

namespace detail {

// Sixteen independent partial sums let the compiler vectorize the float loop
// without reassociation flags.
inline constexpr std::size_t kLanes = 16;

inline float
dot_kernel(const float* a, const float* b, std::size_t d) {
    float acc[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= d; i += kLanes) {
        for (std::size_t l = 0; l < kLanes; ++l) {
            acc[l] += a[i + l] * b[i + l];
        }
    }
    float sum = 0.0F;
    for (const float v : acc) {
        sum += v;
    }
    for (; i < d; ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

inline float
l2sq_kernel(const float* a, const float* b, std::size_t d) {
    float acc[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= d; i += kLanes) {
        for (std::size_t l = 0; l < kLanes; ++l) {
            const float diff = a[i + l] - b[i + l];
            acc[l] += diff * diff;
        }
    }
    float sum = 0.0F;
    for (const float v : acc) {
        sum += v;
    }
    for (; i < d; ++i) {
        const float diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

// Products are widened to 32 bits before summing. Callers keep d <= kMaxInt8Dim.
inline std::int32_t
dot_kernel(const std::int8_t* a, const std::int8_t* b, std::size_t d) {
    std::int32_t sum = 0;
    for (std::size_t i = 0; i < d; ++i) {
        sum += std::int32_t{a[i]} * std::int32_t{b[i]};
    }
    return sum;
}

inline std::int32_t
l2sq_kernel(const std::int8_t* a, const std::int8_t* b, std::size_t d) {
    std::int32_t sum = 0;
    for (std::size_t i = 0; i < d; ++i) {
        const std::int32_t diff = std::int32_t{a[i]} - std::int32_t{b[i]};
        sum += diff * diff;
    }
    return sum;
}

template <Element T>
Score
distance_kernel(Metric metric, const T* a, const T* b, std::size_t d, float norm_a, float norm_b) {
    switch (metric) {
        case Metric::kInnerProduct:
            return -static_cast<Score>(dot_kernel(a, b, d));
        case Metric::kL2Squared:
            return static_cast<Score>(l2sq_kernel(a, b, d));
        case Metric::kAngular:
            return 1.0 - static_cast<Score>(dot_kernel(a, b, d)) /
                             (static_cast<Score>(norm_a) * static_cast<Score>(norm_b));
    }
    return 0.0;
}

template <Element T>
void
check_pair(std::span<const T> a, std::span<const T> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "vectors have d = " + std::to_string(a.size()) +
                                                       " and " + std::to_string(b.size()));
    }
    if constexpr (kElemKind<T> == ElemKind::kInt8) {
        check_int8_dim(a.size());
    }
}

}  // namespace detail

inline float
dot(std::span<const float> a, std::span<const float> b) {
    detail::check_pair(a, b);
    return detail::dot_kernel(a.data(), b.data(), a.size());
}

inline std::int32_t
dot(std::span<const std::int8_t> a, std::span<const std::int8_t> b) {
    detail::check_pair(a, b);
    return detail::dot_kernel(a.data(), b.data(), a.size());
}

inline float
l2sq(std::span<const float> a, std::span<const float> b) {
    detail::check_pair(a, b);
    return detail::l2sq_kernel(a.data(), b.data(), a.size());
}

inline std::int32_t
l2sq(std::span<const std::int8_t> a, std::span<const std::int8_t> b) {
    detail::check_pair(a, b);
    return detail::l2sq_kernel(a.data(), b.data(), a.size());
}

/// Euclidean norm of the stored representation (integer codes for int8).
template <Element T>
float
norm(std::span<const T> a) {
    if constexpr (kElemKind<T> == ElemKind::kInt8) {
        check_int8_dim(a.size());
    }
    return static_cast<float>(
        std::sqrt(static_cast<double>(detail::dot_kernel(a.data(), a.data(), a.size()))));
}

/// 1 - dot(a, b) / (norm_a * norm_b) with precomputed norms.
template <Element T>
Score
angular(std::span<const T> a, std::span<const T> b, float norm_a, float norm_b) {
    detail::check_pair(a, b);
    if (!(norm_a > 0.0F) || !(norm_b > 0.0F)) {
        throw Error(ErrorCode::kZeroNorm, "angular distance is undefined for zero vectors");
    }
    return detail::distance_kernel(Metric::kAngular, a.data(), b.data(), a.size(), norm_a, norm_b);
}

/// Unified distance. norm_a / norm_b are read only for kAngular.
template <Element T>
Score
distance(Metric metric, std::span<const T> a, std::span<const T> b, float norm_a = 0.0F,
         float norm_b = 0.0F) {
    if (metric == Metric::kAngular) {
        return angular(a, b, norm_a, norm_b);
    }
    detail::check_pair(a, b);
    return detail::distance_kernel(metric, a.data(), b.data(), a.size(), norm_a, norm_b);
}

/// Row norms of a corpus; throws kZeroNorm if `require_nonzero` and a row is all zeros.
template <Element T>
std::vector<float>
row_norms(const Dataset<T>& ds, bool require_nonzero) {
    std::vector<float> norms(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        norms[i] = norm(ds.row(i));
        if (require_nonzero && !(norms[i] > 0.0F)) {
            throw Error(ErrorCode::kZeroNorm,
                        "vector " + std::to_string(i) + " has zero norm under the angular metric");
        }
    }
    return norms;
}

}  // namespace quantann
