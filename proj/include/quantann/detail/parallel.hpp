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
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace quantann {

/// Explicit request, else QUANTANN_THREADS, else every hardware thread.
inline unsigned
resolve_threads(std::optional<unsigned> requested = std::nullopt) {
    if (requested && *requested > 0) {
        return *requested;
    }
    if (const char* env = std::getenv("QUANTANN_THREADS")) {
        try {
            const long value = std::stol(env);
            if (value > 0) {
                return static_cast<unsigned>(value);
            }
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

namespace detail {

/// Runs fn(i) for i in [begin, end). Work is handed out one index at a time,
/// so the assignment of indices to threads is not deterministic. The first
/// exception thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void
parallel_for(std::size_t begin, std::size_t end, unsigned threads, Fn&& fn) {
    if (end <= begin) {
        return;
    }
    const std::size_t count = end - begin;
    threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, threads), count));
    if (threads == 1) {
        for (std::size_t i = begin; i < end; ++i) {
            fn(i);
        }
        return;
    }

    std::atomic<std::size_t> next{begin};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= end) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(end, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& thread : pool) {
        thread.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace detail
}  // namespace quantann
