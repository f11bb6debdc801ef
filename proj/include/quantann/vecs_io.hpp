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

// Readers and writers for the *vecs benchmark formats. Every record is a
// 4-byte little-endian signed dimension d followed by d payload values:
//
//   fvecs   32-bit IEEE-754 floats
//   ivecs   32-bit signed integers (ground-truth neighbor ids)
//   bvecs   unsigned bytes, loaded as signed int8 by subtracting 128
//   i8vecs  signed bytes (quantized corpora written by this library)

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "quantann/dataset.hpp"
#include "quantann/detail/binary_io.hpp"
#include "quantann/error.hpp"

namespace quantann {

enum class VecsFormat {
    kFvecs,
    kIvecs,
    kBvecs,
    kI8vecs,
};

/// Streams records of one *vecs file, checking framing as it goes.
template <typename Payload>
    requires std::is_trivially_copyable_v<Payload> && (sizeof(Payload) == 1 || sizeof(Payload) == 4)
class VecsReader {
public:
    explicit VecsReader(const std::filesystem::path& path)
        : path_(path), in_(path, std::ios::binary) {
        if (!in_) {
            throw Error(ErrorCode::kIo, "cannot open " + path.string());
        }
    }

    /// Reads the next record into `out`. Returns false at a clean end of file.
    bool
    next(std::vector<Payload>& out) {
        std::int32_t d = 0;
        in_.read(reinterpret_cast<char*>(&d), sizeof(d));
        const auto got = in_.gcount();
        if (got == 0 && in_.eof()) {
            return false;
        }
        if (got != sizeof(d)) {
            fail(ErrorCode::kTruncatedRecord, "partial record header");
        }
        if (d <= 0) {
            fail(ErrorCode::kNonPositiveDim, "record declares d = " + std::to_string(d));
        }
        if (dim_ == 0) {
            dim_ = static_cast<std::size_t>(d);
        } else if (static_cast<std::size_t>(d) != dim_) {
            fail(ErrorCode::kDimensionMismatch, "record declares d = " + std::to_string(d) +
                                                    ", first record had " + std::to_string(dim_));
        }
        out.resize(dim_);
        const auto bytes = static_cast<std::streamsize>(dim_ * sizeof(Payload));
        in_.read(reinterpret_cast<char*>(out.data()), bytes);
        if (in_.gcount() != bytes) {
            fail(ErrorCode::kTruncatedRecord, "record payload shorter than d = " +
                                                  std::to_string(dim_));
        }
        ++records_;
        return true;
    }

    /// Dimension of the first record, 0 before any record was read.
    std::size_t
    dim() const noexcept {
        return dim_;
    }

private:
    [[noreturn]] void
    fail(ErrorCode code, const std::string& what) const {
        throw Error(code, path_.string() + " record " + std::to_string(records_) + ": " + what);
    }

    std::filesystem::path path_;
    std::ifstream in_;
    std::size_t dim_ = 0;
    std::size_t records_ = 0;
};

/// Appends records to a *vecs file.
template <typename Payload>
    requires std::is_trivially_copyable_v<Payload> && (sizeof(Payload) == 1 || sizeof(Payload) == 4)
class VecsWriter {
public:
    explicit VecsWriter(const std::filesystem::path& path)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) {
            throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
        }
    }

    void
    write(std::span<const Payload> record) {
        const auto d = static_cast<std::int32_t>(record.size());
        out_.write(reinterpret_cast<const char*>(&d), sizeof(d));
        out_.write(reinterpret_cast<const char*>(record.data()),
                   static_cast<std::streamsize>(record.size_bytes()));
        if (!out_) {
            throw Error(ErrorCode::kIo, "write failed on " + path_.string());
        }
    }

    void
    close() {
        out_.close();
        if (!out_) {
            throw Error(ErrorCode::kIo, "close failed on " + path_.string());
        }
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

namespace detail {

template <typename Payload, Element T, typename Convert>
Dataset<T>
load_rows(const std::filesystem::path& path, Convert convert) {
    VecsReader<Payload> reader(path);
    std::vector<Payload> record;
    std::vector<T> values;
    std::size_t n = 0;
    while (reader.next(record)) {
        for (const auto v : record) {
            values.push_back(convert(v));
        }
        ++n;
    }
    return Dataset<T>(n, reader.dim(), std::move(values));
}

template <Element T>
void
save_rows(const std::filesystem::path& path, const Dataset<T>& ds) {
    VecsWriter<T> writer(path);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        writer.write(ds.row(i));
    }
    writer.close();
}

}  // namespace detail

inline FloatDataset
load_fvecs(const std::filesystem::path& path) {
    return detail::load_rows<float, float>(path, [](float v) { return v; });
}

inline Int8Dataset
load_i8vecs(const std::filesystem::path& path) {
    auto ds = detail::load_rows<std::int8_t, std::int8_t>(path, [](std::int8_t v) { return v; });
    check_int8_dim(ds.dim());
    return ds;
}

/// Unsigned bytes are re-centered into int8 as v - 128 (0 -> -128, 255 -> 127).
inline Int8Dataset
load_bvecs(const std::filesystem::path& path) {
    auto ds = detail::load_rows<std::uint8_t, std::int8_t>(
        path, [](std::uint8_t v) { return static_cast<std::int8_t>(static_cast<int>(v) - 128); });
    check_int8_dim(ds.dim());
    return ds;
}

/// Ids are stored as signed 32-bit integers; a negative id is kInvalidValue.
inline GroundTruth
load_ivecs(const std::filesystem::path& path) {
    VecsReader<std::int32_t> reader(path);
    std::vector<std::int32_t> record;
    GroundTruth gt;
    while (reader.next(record)) {
        auto& list = gt.lists.emplace_back();
        list.reserve(record.size());
        for (const auto id : record) {
            if (id < 0) {
                throw Error(ErrorCode::kInvalidValue,
                            path.string() + ": negative neighbor id " + std::to_string(id));
            }
            list.push_back(static_cast<std::uint32_t>(id));
        }
    }
    return gt;
}

inline void
save_fvecs(const std::filesystem::path& path, const FloatDataset& ds) {
    detail::save_rows(path, ds);
}

inline void
save_i8vecs(const std::filesystem::path& path, const Int8Dataset& ds) {
    detail::save_rows(path, ds);
}

inline void
save_fvecs(const std::filesystem::path& path, const AnyDataset& ds) {
    if (kind_of(ds) != ElemKind::kFloat32) {
        throw Error(ErrorCode::kElementKindMismatch, "fvecs requires a float32 dataset");
    }
    save_fvecs(path, std::get<FloatDataset>(ds));
}

inline void
save_i8vecs(const std::filesystem::path& path, const AnyDataset& ds) {
    if (kind_of(ds) != ElemKind::kInt8) {
        throw Error(ErrorCode::kElementKindMismatch, "i8vecs requires an int8 dataset");
    }
    save_i8vecs(path, std::get<Int8Dataset>(ds));
}

/// Every list must fit in a signed 32-bit record; ids above INT32_MAX are rejected.
inline void
save_ivecs(const std::filesystem::path& path, const GroundTruth& gt) {
    VecsWriter<std::int32_t> writer(path);
    std::vector<std::int32_t> record;
    for (const auto& list : gt.lists) {
        if (list.empty()) {
            throw Error(ErrorCode::kInvalidValue, "ivecs cannot encode an empty neighbor list");
        }
        record.clear();
        for (const auto id : list) {
            if (id > static_cast<std::uint32_t>(INT32_MAX)) {
                throw Error(ErrorCode::kInvalidValue, "id " + std::to_string(id) +
                                                          " does not fit in ivecs");
            }
            record.push_back(static_cast<std::int32_t>(id));
        }
        writer.write(record);
    }
    writer.close();
}

/// Chooses the format from the file extension (.fvecs, .ivecs, .bvecs, .i8vecs).
inline VecsFormat
format_from_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".fvecs") {
        return VecsFormat::kFvecs;
    }
    if (ext == ".ivecs") {
        return VecsFormat::kIvecs;
    }
    if (ext == ".bvecs") {
        return VecsFormat::kBvecs;
    }
    if (ext == ".i8vecs") {
        return VecsFormat::kI8vecs;
    }
    throw Error(ErrorCode::kInvalidArgument,
                "cannot infer vector format from '" + path.string() +
                    "' (expected .fvecs, .bvecs or .i8vecs)");
}

/// Loads a vector file of any element kind, dispatching on its extension.
inline AnyDataset
load_vectors(const std::filesystem::path& path) {
    switch (format_from_extension(path)) {
        case VecsFormat::kFvecs:
            return load_fvecs(path);
        case VecsFormat::kBvecs:
            return load_bvecs(path);
        case VecsFormat::kI8vecs:
            return load_i8vecs(path);
        case VecsFormat::kIvecs:
            break;
    }
    throw Error(ErrorCode::kInvalidArgument, "ivecs holds neighbor ids, not vectors");
}

}  // namespace quantann
