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

// Recall@k, single-thread QPS and fp32-versus-int8 parameter sweeps.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "quantann/dataset.hpp"
#include "quantann/distance.hpp"
#include "quantann/error.hpp"
#include "quantann/exact_search.hpp"
#include "quantann/hnsw.hpp"
#include "quantann/quantizer.hpp"

namespace quantann {

struct RecallReport {
    std::size_t k = 0;
    std::vector<double> per_query;
    double mean = 0.0;
    std::size_t expected_total = 0;  ///< sum of |S_E| over queries
    std::size_t hits = 0;            ///< sum of |S_E intersect S_A| over queries
};

/// |S_E ∩ S_A| / |S_E| per query, with S_E and S_A the first k ids of each
/// list. Order inside a list does not matter.
inline RecallReport
recall_at_k(const GroundTruth& expected, const std::vector<std::vector<std::uint32_t>>& actual,
            std::size_t k) {
    if (k == 0) {
        throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
    }
    if (expected.size() != actual.size()) {
        throw Error(ErrorCode::kLengthMismatch,
                    std::to_string(expected.size()) + " ground-truth lists vs " +
                        std::to_string(actual.size()) + " result lists");
    }
    RecallReport report;
    report.k = k;
    report.per_query.reserve(expected.size());
    std::unordered_set<std::uint32_t> truth;
    for (std::size_t q = 0; q < expected.size(); ++q) {
        const auto& want = expected.lists[q];
        if (want.size() < k) {
            throw Error(ErrorCode::kLengthMismatch, "ground truth for query " +
                                                        std::to_string(q) + " has only " +
                                                        std::to_string(want.size()) + " entries");
        }
        truth.clear();
        truth.insert(want.begin(), want.begin() + static_cast<std::ptrdiff_t>(k));
        const auto& got = actual[q];
        const std::size_t take = std::min(k, got.size());
        std::size_t hits = 0;
        for (std::size_t i = 0; i < take; ++i) {
            hits += truth.erase(got[i]);
        }
        report.per_query.push_back(static_cast<double>(hits) / static_cast<double>(k));
        report.hits += hits;
        report.expected_total += k;
    }
    if (!report.per_query.empty()) {
        double sum = 0.0;
        for (const double r : report.per_query) {
            sum += r;
        }
        report.mean = sum / static_cast<double>(report.per_query.size());
    }
    return report;
}

inline RecallReport
recall_at_k(const GroundTruth& expected, const std::vector<TopK>& actual, std::size_t k) {
    std::vector<std::vector<std::uint32_t>> ids;
    ids.reserve(actual.size());
    for (const auto& result : actual) {
        ids.push_back(ids_of(result));
    }
    return recall_at_k(expected, ids, k);
}

struct ThroughputReport {
    std::size_t queries = 0;
    double seconds = 0.0;
    double qps = 0.0;
    unsigned threads = 1;
};

inline ThroughputReport
make_throughput(std::size_t queries, double seconds) {
    ThroughputReport r;
    r.queries = queries;
    r.seconds = seconds;
    r.qps = static_cast<double>(queries) / std::max(seconds, 1e-12);
    return r;
}

struct TimedRun {
    ThroughputReport throughput;
    std::vector<TopK> results;  ///< one per timed query, in query order
};

/// Runs `search(i)` for i in [0, query_count) on the calling thread and
/// times the loop with a monotonic clock. The first `warmup` calls (cycling
/// through the queries) are untimed and their results dropped.
template <typename SearchFn>
TimedRun
measure_qps(SearchFn&& search, std::size_t query_count, std::size_t warmup) {
    if (query_count == 0) {
        throw Error(ErrorCode::kInvalidArgument, "at least one query is required");
    }
    // volatile keeps the untimed calls from being optimized away.
    volatile std::size_t sink = 0;
    for (std::size_t i = 0; i < warmup; ++i) {
        sink = sink + search(i % query_count).size();
    }
    TimedRun run;
    run.results.resize(query_count);
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t q = 0; q < query_count; ++q) {
        run.results[q] = search(q);
    }
    const auto stop = std::chrono::steady_clock::now();
    run.throughput =
        make_throughput(query_count, std::chrono::duration<double>(stop - start).count());
    return run;
}

struct SweepConfig {
    std::vector<std::uint32_t> m_values{32};
    std::vector<std::uint32_t> efc_values{300};
    std::vector<std::size_t> efs_values{300, 350, 400, 450, 500, 550, 600, 650, 700, 750, 800};
    Metric metric = Metric::kInnerProduct;
    unsigned bits = 8;
    QuantMode mode = QuantMode::kAbsMax;
    std::size_t k = 100;
    std::size_t warmup = 10;
    unsigned repetitions = 3;  ///< QPS is the median over repetitions
    std::uint64_t seed = 42;
    unsigned build_threads = 1;
};

struct SweepRow {
    ElemKind elem = ElemKind::kFloat32;
    Metric metric = Metric::kInnerProduct;
    std::uint32_t m = 0;
    std::uint32_t efc = 0;
    std::size_t efs = 0;
    double recall = 0.0;
    double qps = 0.0;
    double build_seconds = 0.0;
    MemoryReport memory;
};

struct SweepResult {
    QuantizerParams params;
    std::vector<SweepRow> rows;
};

namespace detail {

inline double
median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

template <Element T>
std::pair<double, double>
evaluate_cell(const HnswIndex<T>& index, const Dataset<T>& queries, const GroundTruth& gt,
              std::size_t efs, const SweepConfig& cfg) {
    const SearchParams params{efs, cfg.k};
    std::vector<double> qps;
    double recall = 0.0;
    for (unsigned rep = 0; rep < std::max(1U, cfg.repetitions); ++rep) {
        auto run = measure_qps([&](std::size_t q) { return index.search(queries.row(q), params); },
                               queries.size(), cfg.warmup);
        if (rep == 0) {
            recall = recall_at_k(gt, run.results, cfg.k).mean;
        }
        qps.push_back(run.throughput.qps);
    }
    return {recall, median(std::move(qps))};
}

template <Element T>
std::pair<HnswIndex<T>, double>
timed_build(const Dataset<T>& corpus, const HnswConfig& config, Metric metric, unsigned threads) {
    const auto start = std::chrono::steady_clock::now();
    auto index = HnswIndex<T>::build(corpus, config, metric, threads);
    const auto stop = std::chrono::steady_clock::now();
    return {std::move(index), std::chrono::duration<double>(stop - start).count()};
}

}  // namespace detail

/// Builds an fp32 and an int8 index per (M, EFC) and measures recall, QPS,
/// build time and memory at every EFS. The int8 side uses a quantizer fitted
/// on the corpus and applied to both corpus and queries; recall is always
/// scored against `gt`.
inline SweepResult
run_sweep(const FloatDataset& corpus, const FloatDataset& queries, const GroundTruth& gt,
          const SweepConfig& cfg, std::ostream* log = nullptr) {
    if (queries.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one query");
    }
    if (gt.size() != queries.size()) {
        throw Error(ErrorCode::kLengthMismatch, "ground truth and queries differ in count");
    }
    if (gt.depth() < cfg.k) {
        throw Error(ErrorCode::kLengthMismatch, "ground truth depth " +
                                                    std::to_string(gt.depth()) + " < k = " +
                                                    std::to_string(cfg.k));
    }
    for (const auto efs : cfg.efs_values) {
        SearchParams{efs, cfg.k}.validate();
    }
    validate_ground_truth(gt, corpus.size());

    SweepResult result;
    result.params = fit(estimate_stats(corpus), cfg.bits, cfg.mode).params;
    const auto corpus_i8 = quantize_dataset(corpus, result.params, cfg.build_threads);
    const auto queries_i8 = quantize_dataset(queries, result.params);

    for (const auto m : cfg.m_values) {
        for (const auto efc : cfg.efc_values) {
            HnswConfig hc;
            hc.m = m;
            hc.ef_construction = efc;
            hc.seed = cfg.seed;
            auto [f32, f32_secs] = detail::timed_build(corpus, hc, cfg.metric, cfg.build_threads);
            hc.code_bits = static_cast<std::uint8_t>(cfg.bits);
            auto [i8, i8_secs] = detail::timed_build(corpus_i8, hc, cfg.metric, cfg.build_threads);
            if (log != nullptr) {
                *log << "built M=" << m << " EFC=" << efc << ": fp32 " << f32_secs << " s, int8 "
                     << i8_secs << " s\n";
            }
            for (const auto efs : cfg.efs_values) {
                auto [r32, q32] = detail::evaluate_cell(f32, queries, gt, efs, cfg);
                result.rows.push_back({ElemKind::kFloat32, cfg.metric, m, efc, efs, r32, q32,
                                       f32_secs, f32.memory_report()});
                auto [r8, q8] = detail::evaluate_cell(i8, queries_i8, gt, efs, cfg);
                result.rows.push_back({ElemKind::kInt8, cfg.metric, m, efc, efs, r8, q8, i8_secs,
                                       i8.memory_report()});
                if (log != nullptr) {
                    *log << "  EFS=" << efs << " recall fp32 " << r32 << " int8 " << r8
                         << " | qps fp32 " << q32 << " int8 " << q8 << "\n";
                }
            }
        }
    }
    return result;
}

inline constexpr std::string_view kSweepColumns[] = {
    "elem",   "metric", "M",           "EFC",        "EFS",        "recall",
    "qps",    "build_s", "vector_bytes", "graph_bytes", "total_bytes",
};

/// One header row and one row per cell; `sep` is '\t' for TSV or ',' for CSV.
inline void
write_sweep_table(std::ostream& out, const SweepResult& result, char sep = '\t') {
    for (std::size_t c = 0; c < std::size(kSweepColumns); ++c) {
        out << (c == 0 ? "" : std::string(1, sep)) << kSweepColumns[c];
    }
    out << '\n';
    for (const auto& row : result.rows) {
        std::ostringstream line;
        line << to_string(row.elem) << sep << to_string(row.metric) << sep << row.m << sep
             << row.efc << sep << row.efs << sep << std::fixed << std::setprecision(4)
             << row.recall << sep << std::setprecision(1) << row.qps << sep
             << std::setprecision(3) << row.build_seconds << sep << row.memory.vector_bytes << sep
             << row.memory.graph_bytes << sep << row.memory.total_bytes;
        out << line.str() << '\n';
    }
}

/// Aligned build-time and memory summary, one line per (EFC, M).
inline std::string
format_build_table(const SweepResult& result) {
    std::ostringstream out;
    out << std::left << std::setw(18) << "Config (EFC, M)" << std::right << std::setw(12)
        << "build fp32" << std::setw(12) << "build int8" << std::setw(14) << "MiB fp32"
        << std::setw(14) << "MiB int8" << '\n';
    const SweepRow* f32 = nullptr;
    for (const auto& row : result.rows) {
        if (row.elem == ElemKind::kFloat32) {
            f32 = &row;
            continue;
        }
        if (f32 == nullptr || f32->efs != row.efs || row.efs != result.rows.front().efs) {
            continue;
        }
        std::ostringstream config;
        config << row.efc << ", " << row.m;
        out << std::left << std::setw(18) << config.str() << std::right << std::fixed
            << std::setprecision(2) << std::setw(10) << f32->build_seconds << " s"
            << std::setw(10) << row.build_seconds << " s" << std::setw(14)
            << f32->memory.total_bytes / 1048576.0 << std::setw(14)
            << row.memory.total_bytes / 1048576.0 << '\n';
    }
    return out.str();
}

}  // namespace quantann
