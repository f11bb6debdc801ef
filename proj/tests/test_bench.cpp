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


#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "support.hpp"

using namespace quantann;

namespace {

using Lists = std::vector<std::vector<std::uint32_t>>;

}  // namespace

TEST(Recall, Examples) {
    const GroundTruth gt{{{1, 2, 3, 4}}};
    EXPECT_DOUBLE_EQ(recall_at_k(gt, Lists{{1, 2, 3, 4}}, 4).mean, 1.0);
    EXPECT_DOUBLE_EQ(recall_at_k(gt, Lists{{1, 2, 5, 6}}, 4).mean, 0.5);
    EXPECT_DOUBLE_EQ(recall_at_k(gt, Lists{{7, 8, 9, 10}}, 4).mean, 0.0);
    const auto r = recall_at_k(gt, Lists{{4, 3, 2, 9}}, 4);
    EXPECT_EQ(r.hits, 3U);
    EXPECT_EQ(r.expected_total, 4U);
}

TEST(Recall, UsesFirstKOfEachList) {
    const GroundTruth gt{{{1, 2, 3, 4}}};
    EXPECT_DOUBLE_EQ(recall_at_k(gt, Lists{{1, 9, 2, 3}}, 2).mean, 0.5);
    // A short result list counts missing entries as misses.
    EXPECT_DOUBLE_EQ(recall_at_k(gt, Lists{{1}}, 4).mean, 0.25);
}

TEST(Recall, Errors) {
    const GroundTruth gt{{{1, 2}}};
    auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::kIo;
    };
    EXPECT_EQ(code([&] { recall_at_k(gt, Lists{}, 2); }), ErrorCode::kLengthMismatch);
    EXPECT_EQ(code([&] { recall_at_k(gt, Lists{{1, 2, 3}}, 3); }), ErrorCode::kLengthMismatch);
}

TEST(Recall, Properties) {
    qtest::Rng rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        const auto queries = qtest::uniform_size(rng, 1, 8);
        const auto k = qtest::uniform_size(rng, 1, 20);
        GroundTruth gt;
        Lists actual;
        for (std::size_t q = 0; q < queries; ++q) {
            std::vector<std::uint32_t> ids(60);
            std::iota(ids.begin(), ids.end(), 0U);
            std::shuffle(ids.begin(), ids.end(), rng);
            gt.lists.emplace_back(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
            std::shuffle(ids.begin(), ids.end(), rng);
            actual.emplace_back(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
        }
        EXPECT_DOUBLE_EQ(recall_at_k(gt, gt.lists, k).mean, 1.0);
        const auto r = recall_at_k(gt, actual, k);
        double sum = 0;
        for (const double v : r.per_query) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
            sum += v;
        }
        EXPECT_NEAR(r.mean, sum / double(queries), 1e-12);
        auto permuted = actual;
        for (auto& list : permuted) {
            std::shuffle(list.begin(), list.end(), rng);
        }
        EXPECT_EQ(recall_at_k(gt, permuted, k).per_query, r.per_query);
    }
}

TEST(Throughput, Arithmetic) {
    const auto t = make_throughput(100, 0.5);
    EXPECT_DOUBLE_EQ(t.qps, 200.0);
    EXPECT_EQ(t.threads, 1U);
}

TEST(Throughput, WarmupIsNotTimed) {
    std::size_t calls = 0;
    auto run = measure_qps(
        [&](std::size_t q) {
            ++calls;
            return TopK{{static_cast<std::uint32_t>(q), 0.0}};
        },
        100, 10);
    EXPECT_EQ(calls, 110U);
    EXPECT_EQ(run.throughput.queries, 100U);
    ASSERT_EQ(run.results.size(), 100U);
    EXPECT_EQ(run.results[42][0].id, 42U);
    EXPECT_GT(run.throughput.qps, 0.0);
}

TEST(Throughput, UsesMonotonicWallTime) {
    auto run = measure_qps(
        [](std::size_t) {
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
            return TopK{};
        },
        10, 0);
    EXPECT_GE(run.throughput.seconds, 0.02);
    EXPECT_LE(run.throughput.qps, 500.0);
}

TEST(Throughput, RepeatedRunsReturnSameIds) {
    qtest::Rng rng(62);
    const auto corpus = qtest::random_floats(rng, 2000, 8);
    const auto queries = qtest::random_floats(rng, 30, 8);
    const auto index = FloatHnswIndex::build(corpus, {8, 32}, Metric::kInnerProduct);
    auto search = [&](std::size_t q) { return index.search(queries.row(q), {50, 10}); };
    const auto a = measure_qps(search, queries.size(), 5);
    const auto b = measure_qps(search, queries.size(), 5);
    EXPECT_EQ(a.results, b.results);
}

TEST(Sweep, CellCountMemoryAndDeterminism) {
    const auto corpus = generate_synthetic(3000, 16, 0.0, 0.05, 1);
    const auto queries = generate_synthetic(20, 16, 0.0, 0.05, 2);
    const auto gt = batch_ground_truth(corpus, queries, 10, Metric::kInnerProduct);
    SweepConfig cfg;
    cfg.m_values = {8};
    cfg.efc_values = {32};
    cfg.efs_values = {10, 80};
    cfg.k = 10;
    cfg.repetitions = 1;
    const auto a = run_sweep(corpus, queries, gt, cfg);
    ASSERT_EQ(a.rows.size(), 4U);
    for (std::size_t i = 0; i < a.rows.size(); i += 2) {
        EXPECT_EQ(a.rows[i].elem, ElemKind::kFloat32);
        EXPECT_EQ(a.rows[i + 1].elem, ElemKind::kInt8);
        EXPECT_EQ(a.rows[i].efs, a.rows[i + 1].efs);
        EXPECT_EQ(a.rows[i].memory.vector_bytes, 4 * a.rows[i + 1].memory.vector_bytes);
        EXPECT_EQ(a.rows[i].memory.graph_bytes, a.rows[i + 1].memory.graph_bytes);
    }
    EXPECT_GE(a.rows[2].recall, a.rows[0].recall);
    EXPECT_GT(a.rows[3].recall, 0.6);

    const auto b = run_sweep(corpus, queries, gt, cfg);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].recall, b.rows[i].recall);
    }

    std::ostringstream tsv;
    write_sweep_table(tsv, a);
    std::string line;
    std::istringstream in(tsv.str());
    std::getline(in, line);
    EXPECT_EQ(line,
              "elem\tmetric\tM\tEFC\tEFS\trecall\tqps\tbuild_s\tvector_bytes\tgraph_bytes\ttotal_bytes");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 10);
    }
    EXPECT_EQ(rows, 4U);

    std::ostringstream csv;
    write_sweep_table(csv, a, ',');
    EXPECT_EQ(csv.str().substr(0, 11), "elem,metric");
    EXPECT_NE(format_build_table(a).find("32, 8"), std::string::npos);
}

TEST(Sweep, Validation) {
    const auto corpus = generate_synthetic(100, 4, 0.0, 1.0, 1);
    const auto queries = generate_synthetic(5, 4, 0.0, 1.0, 2);
    const auto gt = batch_ground_truth(corpus, queries, 5, Metric::kL2Squared);
    SweepConfig cfg;
    cfg.k = 10;
    EXPECT_THROW(run_sweep(corpus, queries, gt, cfg), Error);
    cfg.k = 5;
    cfg.efs_values = {3};
    EXPECT_THROW(run_sweep(corpus, queries, gt, cfg), Error);
}
