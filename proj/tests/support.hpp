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


// Shared helpers for the test suites: scratch directories, raw file
// writers, random generators and brute-force reference implementations.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "quantann/quantann.hpp"

namespace qtest {

namespace fs = std::filesystem;

/// Fresh directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("quantann-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }

    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }

    TempDir(const TempDir&) = delete;
    TempDir&
    operator=(const TempDir&) = delete;

    fs::path
    file(const std::string& name) const {
        return path_ / name;
    }

private:
    fs::path path_;
};

/// Little-endian byte buffer for hand-crafted files.
class Bytes {
public:
    template <typename T>
    Bytes&
    put(T v) {
        const auto* p = reinterpret_cast<const unsigned char*>(&v);
        data_.insert(data_.end(), p, p + sizeof(T));
        return *this;
    }

    void
    write(const fs::path& path) const {
        std::ofstream out(path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(data_.data()),
                  static_cast<std::streamsize>(data_.size()));
    }

    const std::vector<unsigned char>&
    data() const {
        return data_;
    }

private:
    std::vector<unsigned char> data_;
};

inline std::vector<unsigned char>
slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void
dump(const fs::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Generators -----------------------------------------------------------------

using Rng = std::mt19937_64;

inline std::size_t
uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double
uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline quantann::FloatDataset
random_floats(Rng& rng, std::size_t n, std::size_t d, double lo = -1.0, double hi = 1.0) {
    std::vector<float> v(n * d);
    for (auto& x : v) {
        x = static_cast<float>(uniform_real(rng, lo, hi));
    }
    return quantann::FloatDataset(n, d, std::move(v));
}

/// Small value alphabet so that score ties actually happen.
inline quantann::FloatDataset
random_tied_floats(Rng& rng, std::size_t n, std::size_t d) {
    std::vector<float> v(n * d);
    for (auto& x : v) {
        x = static_cast<float>(std::uniform_int_distribution<int>(-2, 2)(rng)) * 0.5F;
    }
    return quantann::FloatDataset(n, d, std::move(v));
}

inline quantann::Int8Dataset
random_int8(Rng& rng, std::size_t n, std::size_t d, int lo = -128, int hi = 127) {
    std::vector<std::int8_t> v(n * d);
    std::uniform_int_distribution<int> dist(lo, hi);
    for (auto& x : v) {
        x = static_cast<std::int8_t>(dist(rng));
    }
    return quantann::Int8Dataset(n, d, std::move(v));
}

/// Random valid quantizer params: center inside a window of random width.
inline quantann::QuantizerParams
random_params(Rng& rng, std::size_t d, unsigned bits) {
    quantann::QuantizerParams p;
    p.bits = static_cast<std::uint8_t>(bits);
    p.mode = quantann::QuantMode::kSigmaClamp;
    for (std::size_t j = 0; j < d; ++j) {
        const double k = uniform_real(rng, -10.0, 10.0);
        const double half = std::exp(uniform_real(rng, std::log(1e-4), std::log(10.0)));
        p.center.push_back(static_cast<float>(k));
        p.lower.push_back(static_cast<float>(k - half));
        p.upper.push_back(static_cast<float>(k + half));
    }
    return p;
}

// Oracles ----------------------------------------------------------------------

/// 64-bit integer dot product.
inline std::int64_t
wide_dot(const std::int8_t* a, const std::int8_t* b, std::size_t d) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < d; ++i) {
        s += std::int64_t{a[i]} * std::int64_t{b[i]};
    }
    return s;
}

inline std::int64_t
wide_l2sq(const std::int8_t* a, const std::int8_t* b, std::size_t d) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < d; ++i) {
        const std::int64_t diff = std::int64_t{a[i]} - std::int64_t{b[i]};
        s += diff * diff;
    }
    return s;
}

/// Score every item with the library's own distance, sort all (score, id)
/// pairs and keep the first k.
template <quantann::Element T>
quantann::TopK
full_sort_topk(const quantann::Dataset<T>& corpus, std::span<const std::type_identity_t<T>> query, std::size_t k,
               quantann::Metric metric) {
    using namespace quantann;
    std::vector<Neighbor> all;
    const float qn = metric == Metric::kAngular ? norm(query) : 0.0F;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto row = corpus.row(i);
        const float rn = metric == Metric::kAngular ? norm(row) : 0.0F;
        all.push_back({static_cast<std::uint32_t>(i), distance<T>(metric, query, row, qn, rn)});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.score != b.score ? a.score < b.score : a.id < b.id;
    });
    all.resize(std::min(k, all.size()));
    return all;
}

/// Node ids reachable from the entry point on layer 0.
template <quantann::Element T>
std::size_t
reachable_on_layer0(const quantann::HnswIndex<T>& index) {
    std::vector<char> seen(index.size(), 0);
    std::vector<std::uint32_t> stack{index.entry_point()};
    seen[index.entry_point()] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        const auto id = stack.back();
        stack.pop_back();
        for (const auto e : index.neighbors(id, 0)) {
            if (!seen[e]) {
                seen[e] = 1;
                ++count;
                stack.push_back(e);
            }
        }
    }
    return count;
}

}  // namespace qtest
