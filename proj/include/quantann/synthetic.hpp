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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "quantann/dataset.hpp"
#include "quantann/error.hpp"

namespace quantann {

/// n x d values drawn i.i.d. from Normal(mean, stddev). Pure in its arguments.
inline FloatDataset
generate_synthetic(std::size_t n, std::size_t d, double mean, double stddev, std::uint64_t seed) {
    if (d == 0) {
        throw Error(ErrorCode::kNonPositiveDim, "synthetic dataset needs d >= 1");
    }
    if (!(stddev >= 0.0) || !std::isfinite(stddev) || !std::isfinite(mean)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "need a finite mean and stddev >= 0, got stddev " + std::to_string(stddev));
    }
    std::vector<float> values(n * d);
    if (stddev == 0.0) {
        std::fill(values.begin(), values.end(), static_cast<float>(mean));
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(mean, stddev);
        for (auto& v : values) {
            v = static_cast<float>(normal(rng));
        }
    }
    return FloatDataset(n, d, std::move(values));
}

/// Scales a vector to unit Euclidean length; an all-zero vector is left as is.
inline void
normalize_row(std::span<float> row) {
    double sq = 0.0;
    for (const float v : row) {
        sq += static_cast<double>(v) * v;
    }
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& v : row) {
            v = static_cast<float>(v * inv);
        }
    }
}

inline void
normalize_rows(FloatDataset& ds) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
        normalize_row(ds.row(i));
    }
}

}  // namespace quantann
