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

// Per-dimension clamped linear quantization to signed B-bit codes.
//
// For dimension i with center k, window [lo, hi] and bit width B, a value x
// is mapped to
//
//     x <  lo        ->  -2^(B-1)
//     x >  hi        ->   2^(B-1) - 1
//     otherwise      ->  floor(2^B * (x - k) / (hi - lo)), clamped to the range
//
// The window comes from Gaussian maximum-likelihood statistics of the corpus:
// one standard deviation around each dimension's mean (kSigmaClamp), one pooled
// mean/standard deviation shared by all dimensions (kUniformSigmaClamp), or the
// largest deviation from the mean after trimming the 0.1% tails (kAbsMax).
// Codes are always stored one per signed byte, whatever B is.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quantann/dataset.hpp"
#include "quantann/detail/binary_io.hpp"
#include "quantann/detail/parallel.hpp"
#include "quantann/error.hpp"

namespace quantann {

enum class QuantMode : std::uint8_t {
    kSigmaClamp = 0,
    kAbsMax = 1,
    kUniformSigmaClamp = 2,
};

constexpr std::string_view
to_string(QuantMode mode) {
    switch (mode) {
        case QuantMode::kSigmaClamp:
            return "sigma";
        case QuantMode::kAbsMax:
            return "absmax";
        case QuantMode::kUniformSigmaClamp:
            return "uniform";
    }
    return "unknown";
}

inline QuantMode
parse_quant_mode(std::string_view name) {
    if (name == "sigma") {
        return QuantMode::kSigmaClamp;
    }
    if (name == "absmax") {
        return QuantMode::kAbsMax;
    }
    if (name == "uniform") {
        return QuantMode::kUniformSigmaClamp;
    }
    throw Error(ErrorCode::kInvalidArgument,
                "unknown quantization mode '" + std::string(name) + "'");
}

/// Fraction cut from each tail before taking the AbsMax window.
inline constexpr double kDefaultTrimFraction = 0.001;

/// Windows narrower than this are treated as degenerate.
inline constexpr double kMinWindowWidth = 1e-12;

/// Half-width given to degenerate windows.
inline constexpr double kDegenerateHalfWidth = 1e-6;

struct DimensionStats {
    std::size_t count = 0;  ///< vectors the statistics were estimated from
    std::vector<double> mean;
    std::vector<double> stddev;  ///< population (divide-by-n) estimate
    std::vector<double> min;
    std::vector<double> max;
    std::vector<double> trimmed_absmax;  ///< max |x - mean| inside the trimmed quantile range
    double pooled_mean = 0.0;
    double pooled_stddev = 0.0;

    std::size_t
    dim() const noexcept {
        return mean.size();
    }
};

/// Gaussian MLE per dimension plus pooled statistics over every value.
///
/// The AbsMax statistic keeps values between the order statistics at
/// floor(t * (n - 1)) and ceil((1 - t) * (n - 1)) of each dimension, so for
/// n <= 1 / t nothing is trimmed.
inline DimensionStats
estimate_stats(const FloatDataset& ds, double trim_fraction = kDefaultTrimFraction) {
    const std::size_t n = ds.size();
    const std::size_t d = ds.dim();
    if (n < 2) {
        throw Error(ErrorCode::kTooFewSamples,
                    "need at least 2 vectors to estimate statistics, got " + std::to_string(n));
    }
    if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
        throw Error(ErrorCode::kInvalidArgument, "trim fraction must be in [0, 0.5)");
    }

    DimensionStats stats;
    stats.count = n;
    stats.mean.resize(d);
    stats.stddev.resize(d);
    stats.min.resize(d);
    stats.max.resize(d);
    stats.trimmed_absmax.resize(d);

    const auto lo_rank = static_cast<std::size_t>(std::floor(trim_fraction * double(n - 1)));
    const auto hi_rank = std::min(
        n - 1, static_cast<std::size_t>(std::ceil((1.0 - trim_fraction) * double(n - 1))));

    std::vector<double> column(n);
    double pooled_sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double v = ds.row(i)[j];
            column[i] = v;
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        pooled_sum += sum;
        // Rounding in the sum may push the mean a hair outside [min, max].
        const double mu = std::clamp(sum / double(n), lo, hi);
        double sq = 0.0;
        for (const double v : column) {
            sq += (v - mu) * (v - mu);
        }
        stats.mean[j] = mu;
        stats.stddev[j] = std::sqrt(sq / double(n));
        stats.min[j] = lo;
        stats.max[j] = hi;

        std::nth_element(column.begin(), column.begin() + lo_rank, column.end());
        const double q_lo = column[lo_rank];
        std::nth_element(column.begin(), column.begin() + hi_rank, column.end());
        const double q_hi = column[hi_rank];
        stats.trimmed_absmax[j] = std::max(std::abs(q_lo - mu), std::abs(q_hi - mu));
    }

    const double total = double(n) * double(d);
    stats.pooled_mean = pooled_sum / total;
    double pooled_sq = 0.0;
    for (const float v : ds.values()) {
        pooled_sq += (v - stats.pooled_mean) * (v - stats.pooled_mean);
    }
    stats.pooled_stddev = std::sqrt(pooled_sq / total);
    return stats;
}

/// Fitted per-dimension constants: center k, window [lower, upper], bit width.
struct QuantizerParams {
    std::uint8_t bits = 8;
    QuantMode mode = QuantMode::kSigmaClamp;
    std::vector<float> center;
    std::vector<float> lower;
    std::vector<float> upper;

    std::size_t
    dim() const noexcept {
        return center.size();
    }

    int
    min_code() const noexcept {
        return -(1 << (bits - 1));
    }

    int
    max_code() const noexcept {
        return (1 << (bits - 1)) - 1;
    }

    friend bool
    operator==(const QuantizerParams&, const QuantizerParams&) = default;
};

struct FitResult {
    QuantizerParams params;
    /// Dimensions whose window collapsed and was widened to +-1e-6 around the center.
    std::vector<std::size_t> degenerate_dims;
};

inline void
check_bits(unsigned bits) {
    if (bits < 1 || bits > 8) {
        throw Error(ErrorCode::kInvalidArgument,
                    "bit width must be in [1, 8], got " + std::to_string(bits));
    }
}

inline FitResult
fit(const DimensionStats& stats, unsigned bits, QuantMode mode) {
    check_bits(bits);
    const std::size_t d = stats.dim();
    FitResult result;
    auto& p = result.params;
    p.bits = static_cast<std::uint8_t>(bits);
    p.mode = mode;
    p.center.resize(d);
    p.lower.resize(d);
    p.upper.resize(d);

    constexpr float kInf = std::numeric_limits<float>::infinity();
    for (std::size_t j = 0; j < d; ++j) {
        double mid = stats.mean[j];
        double half = stats.stddev[j];
        if (mode == QuantMode::kUniformSigmaClamp) {
            mid = stats.pooled_mean;
            half = stats.pooled_stddev;
        } else if (mode == QuantMode::kAbsMax) {
            half = stats.trimmed_absmax[j];
        }
        const auto k = static_cast<float>(mid);
        auto lo = static_cast<float>(mid - half);
        auto hi = static_cast<float>(mid + half);
        if (!(double(hi) - double(lo) >= kMinWindowWidth)) {
            lo = static_cast<float>(double(k) - kDegenerateHalfWidth);
            hi = static_cast<float>(double(k) + kDegenerateHalfWidth);
            // Large centers can swallow 1e-6 entirely in float.
            if (!(lo < k)) {
                lo = std::nextafter(k, -kInf);
            }
            if (!(hi > k)) {
                hi = std::nextafter(k, kInf);
            }
            result.degenerate_dims.push_back(j);
        }
        p.center[j] = k;
        p.lower[j] = lo;
        p.upper[j] = hi;
    }
    return result;
}

namespace detail {

inline int
quantize_scalar(double x, double k, double lo, double hi, unsigned bits) {
    const int lo_code = -(1 << (bits - 1));
    const int hi_code = (1 << (bits - 1)) - 1;
    if (x < lo) {
        return lo_code;
    }
    if (x > hi) {
        return hi_code;
    }
    if (std::isnan(x)) {
        return 0;
    }
    const double scaled = std::floor(std::ldexp(x - k, static_cast<int>(bits)) / (hi - lo));
    return static_cast<int>(std::clamp(scaled, double(lo_code), double(hi_code)));
}

}  // namespace detail

/// Code for x in dimension `dim`; always within [min_code(), max_code()].
/// NaN maps to 0.
inline int
quantize_value(double x, std::size_t dim, const QuantizerParams& p) {
    return detail::quantize_scalar(x, p.center[dim], p.lower[dim], p.upper[dim], p.bits);
}

/// Bin-center reconstruction k + (q + 0.5) * (hi - lo) / 2^B.
inline double
dequantize_value(int q, std::size_t dim, const QuantizerParams& p) {
    const double width = double(p.upper[dim]) - double(p.lower[dim]);
    return double(p.center[dim]) + std::ldexp((q + 0.5) * width, -int(p.bits));
}

inline void
quantize_into(std::span<const float> x, const QuantizerParams& p, std::span<std::int8_t> out) {
    if (x.size() != p.dim() || out.size() != p.dim()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "vector has d = " + std::to_string(x.size()) + ", quantizer expects " +
                        std::to_string(p.dim()));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] = static_cast<std::int8_t>(quantize_value(x[j], j, p));
    }
}

inline std::vector<std::int8_t>
quantize_query(std::span<const float> x, const QuantizerParams& p) {
    std::vector<std::int8_t> out(p.dim());
    quantize_into(x, p, out);
    return out;
}

inline Int8Dataset
quantize_dataset(const FloatDataset& ds, const QuantizerParams& p, unsigned threads = 1) {
    if (ds.empty()) {
        return Int8Dataset(0, p.dim());
    }
    if (ds.dim() != p.dim()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "dataset has d = " + std::to_string(ds.dim()) + ", quantizer expects " +
                        std::to_string(p.dim()));
    }
    check_int8_dim(ds.dim());
    Int8Dataset out(ds.size(), ds.dim());
    detail::parallel_for(0, ds.size(), threads,
                         [&](std::size_t i) { quantize_into(ds.row(i), p, out.row(i)); });
    return out;
}

inline std::vector<float>
dequantize_vector(std::span<const std::int8_t> codes, const QuantizerParams& p) {
    if (codes.size() != p.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "code vector does not match quantizer");
    }
    std::vector<float> out(codes.size());
    for (std::size_t j = 0; j < codes.size(); ++j) {
        out[j] = static_cast<float>(dequantize_value(codes[j], j, p));
    }
    return out;
}

// Params file, little-endian:
//   "QZP1" | u8 version=1 | u8 bits | u8 mode | u8 reserved=0 | u32 d |
//   d x (f32 center, f32 lower, f32 upper)

inline constexpr std::string_view kParamsMagic = "QZP1";
inline constexpr std::uint8_t kParamsVersion = 1;

inline std::vector<std::byte>
encode_params(const QuantizerParams& p) {
    detail::ByteWriter w;
    w.put_bytes(kParamsMagic);
    w.put(kParamsVersion);
    w.put(p.bits);
    w.put(static_cast<std::uint8_t>(p.mode));
    w.put(std::uint8_t{0});
    w.put(static_cast<std::uint32_t>(p.dim()));
    for (std::size_t j = 0; j < p.dim(); ++j) {
        w.put(p.center[j]);
        w.put(p.lower[j]);
        w.put(p.upper[j]);
    }
    return w.bytes();
}

inline QuantizerParams
decode_params(std::span<const std::byte> bytes) {
    detail::ByteReader r(bytes, ErrorCode::kTruncatedFile);
    const auto magic = r.take(kParamsMagic.size());
    if (std::memcmp(magic.data(), kParamsMagic.data(), kParamsMagic.size()) != 0) {
        throw Error(ErrorCode::kBadMagic, "not a quantizer params file");
    }
    const auto version = r.get<std::uint8_t>();
    if (version != kParamsVersion) {
        throw Error(ErrorCode::kUnsupportedVersion,
                    "params version " + std::to_string(version) + " is not supported");
    }
    QuantizerParams p;
    p.bits = r.get<std::uint8_t>();
    const auto mode = r.get<std::uint8_t>();
    r.get<std::uint8_t>();  // reserved
    const auto d = r.get<std::uint32_t>();
    if (p.bits < 1 || p.bits > 8) {
        throw Error(ErrorCode::kCorrupt, "bit width " + std::to_string(p.bits));
    }
    if (mode > static_cast<std::uint8_t>(QuantMode::kUniformSigmaClamp)) {
        throw Error(ErrorCode::kCorrupt, "mode code " + std::to_string(mode));
    }
    p.mode = static_cast<QuantMode>(mode);
    if (r.remaining() < std::size_t{d} * 12) {
        throw Error(ErrorCode::kTruncatedFile, "expected " + std::to_string(d) +
                                                   " dimension triples, file is too short");
    }
    p.center.resize(d);
    p.lower.resize(d);
    p.upper.resize(d);
    for (std::uint32_t j = 0; j < d; ++j) {
        p.center[j] = r.get<float>();
        p.lower[j] = r.get<float>();
        p.upper[j] = r.get<float>();
        if (!(p.lower[j] < p.upper[j])) {
            throw Error(ErrorCode::kCorrupt, "dimension " + std::to_string(j) +
                                                 " has an empty window");
        }
    }
    if (r.remaining() != 0) {
        throw Error(ErrorCode::kCorrupt, std::to_string(r.remaining()) + " trailing bytes");
    }
    return p;
}

inline void
save_params(const std::filesystem::path& path, const QuantizerParams& p) {
    detail::ByteWriter w;
    const auto bytes = encode_params(p);
    w.put_span(std::span<const std::byte>(bytes));
    w.write_to(path);
}

inline QuantizerParams
load_params(const std::filesystem::path& path) {
    return decode_params(detail::read_file(path));
}

}  // namespace quantann
