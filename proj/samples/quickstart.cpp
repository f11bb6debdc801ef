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


// Fits an 8-bit quantizer on a synthetic corpus, builds float and int8
// HNSW indices and compares their recall and memory.

#include <cstdio>

#include "quantann/quantann.hpp"

int
main() {
    using namespace quantann;

    const auto corpus = generate_synthetic(20000, 64, 0.0, 0.05, 1);
    const auto queries = generate_synthetic(200, 64, 0.0, 0.05, 2);
    const auto gt = batch_ground_truth(corpus, queries, 10, Metric::kInnerProduct);

    const auto params = fit(estimate_stats(corpus), 8, QuantMode::kAbsMax).params;
    const auto corpus_i8 = quantize_dataset(corpus, params);
    const auto queries_i8 = quantize_dataset(queries, params);

    HnswConfig config;
    config.m = 16;
    config.ef_construction = 100;
    const auto f32 = FloatHnswIndex::build(corpus, config, Metric::kInnerProduct);
    const auto i8 = Int8HnswIndex::build(corpus_i8, config, Metric::kInnerProduct);

    const SearchParams sp{100, 10};
    std::vector<TopK> r32, r8;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        r32.push_back(f32.search(queries.row(q), sp));
        r8.push_back(i8.search(queries_i8.row(q), sp));
    }
    std::printf("recall@10 fp32 %.3f  int8 %.3f\n", recall_at_k(gt, r32, 10).mean,
                recall_at_k(gt, r8, 10).mean);
    std::printf("index bytes fp32 %llu  int8 %llu\n",
                static_cast<unsigned long long>(f32.memory_report().total_bytes),
                static_cast<unsigned long long>(i8.memory_report().total_bytes));
    return 0;
}
