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


// The quantann command line. Kept in a header so tests can drive run()
// in-process with captured streams.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "quantann/quantann.hpp"

namespace quantann::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// File-format and I/O problems exit with 1; everything the caller could
/// have avoided with different flags or inputs exits with 2.
inline int
exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::kIo:
        case ErrorCode::kTruncatedRecord:
        case ErrorCode::kNonPositiveDim:
        case ErrorCode::kBadMagic:
        case ErrorCode::kUnsupportedVersion:
        case ErrorCode::kTruncatedFile:
        case ErrorCode::kCorrupt:
            return kExitRuntime;
        default:
            return kExitUsage;
    }
}

/// "300:800:50" (inclusive range), "32,48" (list) or "300" (single value).
inline std::vector<std::size_t>
parse_grid(const std::string& text) {
    auto number = [&](const std::string& s) -> std::size_t {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (s.empty() || used != s.size() || s[0] == '-') {
            throw Error(ErrorCode::kInvalidArgument, "bad grid value '" + s + "' in '" + text + "'");
        }
        return static_cast<std::size_t>(v);
    };
    std::vector<std::size_t> values;
    if (const auto c1 = text.find(':'); c1 != std::string::npos) {
        const auto c2 = text.find(':', c1 + 1);
        const std::size_t lo = number(text.substr(0, c1));
        const std::size_t hi =
            number(text.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1));
        const std::size_t step = c2 == std::string::npos ? 1 : number(text.substr(c2 + 1));
        if (step == 0 || hi < lo) {
            throw Error(ErrorCode::kInvalidArgument, "empty grid range '" + text + "'");
        }
        for (std::size_t v = lo; v <= hi; v += step) {
            values.push_back(v);
        }
        return values;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        values.push_back(number(text.substr(start, comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return values;
}

namespace detail {

struct Options {
    std::uint64_t seed = 42;
    unsigned threads = 0;  // 0: QUANTANN_THREADS, then all cores

    std::string input;
    std::string out;
    std::string params;
    std::string corpus;
    std::string queries;
    std::string gt;
    std::string index;
    std::string metric = "l2";
    std::string mode;
    unsigned bits = 8;
    double trim = kDefaultTrimFraction;
    bool normalize = false;
    std::size_t k = 100;
    std::uint32_t m = 32;
    std::uint32_t efc = 300;
    std::size_t efs = 300;
    std::string m_grid = "32";
    std::string efc_grid = "300";
    std::string efs_grid = "300:800:50";
    unsigned reps = 3;
    std::size_t warmup = 10;
    bool csv = false;
};

inline FloatDataset
load_float(const std::string& path, bool normalize) {
    auto ds = load_fvecs(path);
    if (normalize) {
        normalize_rows(ds);
    }
    return ds;
}

inline AnyDataset
load_any(const std::string& path, bool normalize) {
    auto ds = load_vectors(path);
    if (normalize) {
        if (auto* f = std::get_if<FloatDataset>(&ds)) {
            normalize_rows(*f);
        } else {
            throw Error(ErrorCode::kElementKindMismatch, "--normalize applies to fvecs input only");
        }
    }
    return ds;
}

inline int
cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
    const auto mode = parse_quant_mode(o.mode.empty() ? "sigma" : o.mode);
    check_bits(o.bits);
    const auto ds = load_float(o.input, o.normalize);
    const auto stats = estimate_stats(ds, o.trim);
    const auto result = fit(stats, o.bits, mode);
    for (const auto j : result.degenerate_dims) {
        err << "warning: dimension " << j << " has a degenerate window; widened around "
            << result.params.center[j] << "\n";
    }
    save_params(o.out, result.params);
    out << "fit " << to_string(mode) << " B=" << o.bits << " on " << ds.size() << " x "
        << ds.dim() << " vectors, " << result.degenerate_dims.size()
        << " degenerate dimensions -> " << o.out << "\n";
    return kExitOk;
}

inline int
cmd_quantize(const Options& o, std::ostream& out, std::ostream&) {
    const auto params = load_params(o.params);
    VecsReader<float> reader(o.input);
    VecsWriter<std::int8_t> writer(o.out);
    std::vector<float> row;
    std::vector<std::int8_t> codes(params.dim());
    std::size_t rows = 0;
    while (reader.next(row)) {
        if (row.size() != params.dim()) {
            throw Error(ErrorCode::kDimensionMismatch,
                        o.input + " has d = " + std::to_string(row.size()) +
                            ", params expect " + std::to_string(params.dim()));
        }
        if (o.normalize) {
            normalize_row(row);
        }
        quantize_into(row, params, codes);
        writer.write(std::span<const std::int8_t>(codes));
        ++rows;
    }
    writer.close();
    out << "quantized " << rows << " rows of d = " << params.dim() << " -> " << o.out << "\n";
    return kExitOk;
}

inline int
cmd_gt(const Options& o, std::ostream& out, std::ostream&) {
    const auto metric = parse_metric(o.metric);
    if (o.k == 0) {
        throw Error(ErrorCode::kInvalidArgument, "--k must be at least 1");
    }
    const auto corpus = load_vectors(o.corpus);
    const auto queries = load_vectors(o.queries);
    if (kind_of(corpus) != kind_of(queries)) {
        throw Error(ErrorCode::kElementKindMismatch, "corpus and queries differ in element kind");
    }
    const unsigned threads = resolve_threads(o.threads ? std::optional(o.threads) : std::nullopt);
    const auto gt = std::visit(
        [&](const auto& c) {
            using D = std::decay_t<decltype(c)>;
            return batch_ground_truth(c, std::get<D>(queries), o.k, metric, threads);
        },
        corpus);
    save_ivecs(o.out, gt);
    out << "ground truth for " << gt.size() << " queries, k = " << gt.depth() << " -> " << o.out
        << "\n";
    return kExitOk;
}

inline int
cmd_build(const Options& o, std::ostream& out, std::ostream&) {
    const auto metric = parse_metric(o.metric);
    HnswConfig config;
    config.m = o.m;
    config.ef_construction = o.efc;
    config.seed = o.seed;
    config.validate();
    check_bits(o.bits);
    const auto corpus = load_vectors(o.corpus);
    const unsigned threads = resolve_threads(o.threads ? std::optional(o.threads) : std::nullopt);
    const auto start = std::chrono::steady_clock::now();
    const MemoryReport mem = std::visit(
        [&](const auto& c) {
            using D = std::decay_t<decltype(c)>;
            auto cfg = config;
            if constexpr (std::is_same_v<D, Int8Dataset>) {
                cfg.code_bits = static_cast<std::uint8_t>(o.bits);
            }
            const auto index = HnswIndex<typename D::value_type>::build(c, cfg, metric, threads);
            index.save(o.out);
            return index.memory_report();
        },
        corpus);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << "built " << to_string(kind_of(corpus)) << " index M=" << o.m << " EFC=" << o.efc
        << " in " << std::fixed << std::setprecision(3) << secs << " s; vector_bytes "
        << mem.vector_bytes << " graph_bytes " << mem.graph_bytes << " total_bytes "
        << mem.total_bytes << " -> " << o.out << "\n";
    return kExitOk;
}

inline int
cmd_search(const Options& o, std::ostream& out, std::ostream&) {
    const SearchParams sp{o.efs, o.k};
    sp.validate();
    auto index = load_any_index(o.index);
    auto queries = load_vectors(o.queries);

    const bool int8_index = std::holds_alternative<Int8HnswIndex>(index);
    if (int8_index && kind_of(queries) == ElemKind::kFloat32) {
        if (o.params.empty()) {
            throw Error(ErrorCode::kElementKindMismatch,
                        "float queries against an int8 index need --params");
        }
        queries = quantize_dataset(std::get<FloatDataset>(queries), load_params(o.params));
    }
    if ((int8_index ? ElemKind::kInt8 : ElemKind::kFloat32) != kind_of(queries)) {
        throw Error(ErrorCode::kElementKindMismatch, "queries do not match the index element kind");
    }

    const auto run = std::visit(
        [&](const auto& ix) {
            using I = std::decay_t<decltype(ix)>;
            using D = Dataset<typename I::value_type>;
            const auto& qs = std::get<D>(queries);
            return measure_qps([&](std::size_t q) { return ix.search(qs.row(q), sp); }, qs.size(),
                               0);
        },
        index);

    GroundTruth results;
    for (const auto& r : run.results) {
        results.lists.push_back(ids_of(r));
    }
    if (!o.out.empty()) {
        save_ivecs(o.out, results);
    }
    out << "searched " << run.results.size() << " queries EFS=" << o.efs << " k=" << o.k << ": "
        << std::fixed << std::setprecision(1) << run.throughput.qps << " QPS";
    if (!o.gt.empty()) {
        const auto gt = load_ivecs(o.gt);
        out << ", recall@" << o.k << " " << std::setprecision(4)
            << recall_at_k(gt, results.lists, o.k).mean;
    }
    out << "\n";
    return kExitOk;
}

inline int
cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
    SweepConfig cfg;
    cfg.metric = parse_metric(o.metric);
    cfg.mode = parse_quant_mode(o.mode.empty() ? "absmax" : o.mode);
    check_bits(o.bits);
    cfg.bits = o.bits;
    cfg.k = o.k;
    cfg.seed = o.seed;
    cfg.repetitions = o.reps;
    cfg.warmup = o.warmup;
    cfg.m_values.clear();
    for (const auto v : parse_grid(o.m_grid)) {
        cfg.m_values.push_back(static_cast<std::uint32_t>(v));
    }
    cfg.efc_values.clear();
    for (const auto v : parse_grid(o.efc_grid)) {
        cfg.efc_values.push_back(static_cast<std::uint32_t>(v));
    }
    cfg.efs_values = parse_grid(o.efs_grid);
    for (const auto m : cfg.m_values) {
        for (const auto efc : cfg.efc_values) {
            HnswConfig{m, efc, o.seed}.validate();
        }
    }
    for (const auto efs : cfg.efs_values) {
        SearchParams{efs, cfg.k}.validate();
    }
    cfg.build_threads = resolve_threads(o.threads ? std::optional(o.threads) : std::nullopt);

    const auto corpus = load_float(o.corpus, o.normalize);
    const auto queries = load_float(o.queries, o.normalize);
    GroundTruth gt;
    if (o.gt.empty()) {
        gt = batch_ground_truth(corpus, queries, cfg.k, cfg.metric, cfg.build_threads);
    } else {
        gt = load_ivecs(o.gt);
    }
    const auto result = run_sweep(corpus, queries, gt, cfg, &err);
    if (o.out.empty() || o.out == "-") {
        write_sweep_table(out, result, o.csv ? ',' : '\t');
    } else {
        std::ofstream file(o.out);
        if (!file) {
            throw Error(ErrorCode::kIo, "cannot open " + o.out + " for writing");
        }
        write_sweep_table(file, result, o.csv ? ',' : '\t');
        if (!file.flush()) {
            throw Error(ErrorCode::kIo, "write failed on " + o.out);
        }
        out << format_build_table(result);
    }
    return kExitOk;
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int
run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    detail::Options o;
    CLI::App app{"Scalar-quantized nearest-neighbor search toolkit", "quantann"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", o.seed, "RNG seed for level assignment")->capture_default_str();
    app.add_option("--threads", o.threads,
                   "build / ground-truth threads (default: QUANTANN_THREADS, then all cores)");

    auto* fit = app.add_subcommand("fit", "estimate statistics and fit quantizer params");
    fit->add_option("--input", o.input, "float corpus (.fvecs)")->required();
    fit->add_option("--bits", o.bits, "bits per value, 1..8")->capture_default_str();
    fit->add_option("--mode", o.mode, "sigma | absmax | uniform (default sigma)");
    fit->add_option("--trim", o.trim, "quantile trimmed from each tail for absmax")
        ->capture_default_str();
    fit->add_flag("--normalize", o.normalize, "scale rows to unit length first");
    fit->add_option("--out", o.out, "params file")->required();

    auto* quant = app.add_subcommand("quantize", "quantize a float file to i8vecs, row by row");
    quant->add_option("--input", o.input, "float vectors (.fvecs)")->required();
    quant->add_option("--params", o.params, "params file from fit")->required();
    quant->add_flag("--normalize", o.normalize, "scale rows to unit length first");
    quant->add_option("--out", o.out, "output (.i8vecs)")->required();

    auto* gt = app.add_subcommand("gt", "exact top-k ground truth");
    gt->add_option("--corpus", o.corpus, "corpus (.fvecs, .bvecs or .i8vecs)")->required();
    gt->add_option("--queries", o.queries, "queries, same element kind")->required();
    gt->add_option("--k", o.k, "neighbors per query")->capture_default_str();
    gt->add_option("--metric", o.metric, "ip | l2 | angular")->capture_default_str();
    gt->add_option("--out", o.out, "output (.ivecs)")->required();

    auto* build = app.add_subcommand("build", "build and save an HNSW index");
    build->add_option("--corpus", o.corpus, "corpus (.fvecs, .bvecs or .i8vecs)")->required();
    build->add_option("--metric", o.metric, "ip | l2 | angular")->capture_default_str();
    build->add_option("--m", o.m, "max out-degree (2M on layer 0)")->capture_default_str();
    build->add_option("--efc", o.efc, "construction beam width")->capture_default_str();
    build->add_option("--bits", o.bits, "code width recorded for int8 corpora")
        ->capture_default_str();
    build->add_option("--out", o.out, "index file")->required();

    auto* search = app.add_subcommand("search", "query a saved index");
    search->add_option("--index", o.index, "index file")->required();
    search->add_option("--queries", o.queries, "queries (.fvecs, .bvecs or .i8vecs)")->required();
    search->add_option("--efs", o.efs, "search beam width")->capture_default_str();
    search->add_option("--k", o.k, "neighbors per query")->capture_default_str();
    search->add_option("--params", o.params, "quantize float queries for an int8 index");
    search->add_option("--gt", o.gt, "ground truth (.ivecs) to report recall");
    search->add_option("--out", o.out, "result ids (.ivecs)");

    auto* bench = app.add_subcommand("bench", "fp32 vs int8 HNSW sweep");
    bench->add_option("--corpus", o.corpus, "float corpus (.fvecs)")->required();
    bench->add_option("--queries", o.queries, "float queries (.fvecs)")->required();
    bench->add_option("--gt", o.gt, "ground truth (.ivecs); computed exactly when absent");
    bench->add_option("--metric", o.metric, "ip | l2 | angular")->capture_default_str();
    bench->add_option("--bits", o.bits, "bits per value, 1..8")->capture_default_str();
    bench->add_option("--mode", o.mode, "sigma | absmax | uniform (default absmax)");
    bench->add_option("--k", o.k, "recall depth")->capture_default_str();
    bench->add_option("--m", o.m_grid, "M grid")->capture_default_str();
    bench->add_option("--efc", o.efc_grid, "EFC grid")->capture_default_str();
    bench->add_option("--efs", o.efs_grid, "EFS grid, e.g. 300:800:50")->capture_default_str();
    bench->add_option("--reps", o.reps, "QPS repetitions (median reported)")
        ->capture_default_str();
    bench->add_option("--warmup", o.warmup, "untimed queries before each run")
        ->capture_default_str();
    bench->add_flag("--normalize", o.normalize, "scale rows to unit length first");
    bench->add_flag("--csv", o.csv, "comma-separated instead of tab-separated");
    bench->add_option("--out", o.out, "report file (default: stdout)");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*fit) {
            return detail::cmd_fit(o, out, err);
        }
        if (*quant) {
            return detail::cmd_quantize(o, out, err);
        }
        if (*gt) {
            return detail::cmd_gt(o, out, err);
        }
        if (*build) {
            return detail::cmd_build(o, out, err);
        }
        if (*search) {
            return detail::cmd_search(o, out, err);
        }
        return detail::cmd_bench(o, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace quantann::cli
