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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "quantann/error.hpp"

// All on-disk formats are little-endian; values are copied byte-for-byte.
static_assert(std::endian::native == std::endian::little,
              "quantann file formats assume a little-endian host");

namespace quantann::detail {

inline std::vector<std::byte>
read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open " + path.string());
    }
    const auto size = static_cast<std::size_t>(in.tellg());
    std::vector<std::byte> bytes(size);
    in.seekg(0);
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()),
                             static_cast<std::streamsize>(size))) {
        throw Error(ErrorCode::kIo, "read failed on " + path.string());
    }
    return bytes;
}

/// Append-only little-endian encoder.
class ByteWriter {
public:
    template <typename T>
        requires std::is_trivially_copyable_v<T>
    void
    put(const T& value) {
        const auto* p = reinterpret_cast<const std::byte*>(&value);
        buffer_.insert(buffer_.end(), p, p + sizeof(T));
    }

    template <typename T>
        requires std::is_trivially_copyable_v<T>
    void
    put_span(std::span<const T> values) {
        const auto* p = reinterpret_cast<const std::byte*>(values.data());
        buffer_.insert(buffer_.end(), p, p + values.size_bytes());
    }

    void
    put_bytes(std::string_view raw) {
        const auto* p = reinterpret_cast<const std::byte*>(raw.data());
        buffer_.insert(buffer_.end(), p, p + raw.size());
    }

    const std::vector<std::byte>&
    bytes() const {
        return buffer_;
    }

    void
    write_to(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
        }
        out.write(reinterpret_cast<const char*>(buffer_.data()),
                  static_cast<std::streamsize>(buffer_.size()));
        if (!out) {
            throw Error(ErrorCode::kIo, "write failed on " + path.string());
        }
    }

private:
    std::vector<std::byte> buffer_;
};

/// Bounds-checked little-endian decoder; `shortfall` is raised on overrun.
class ByteReader {
public:
    ByteReader(std::span<const std::byte> bytes, ErrorCode shortfall)
        : bytes_(bytes), shortfall_(shortfall) {
    }

    template <typename T>
        requires std::is_trivially_copyable_v<T>
    T
    get() {
        require(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + offset_, sizeof(T));
        offset_ += sizeof(T);
        return value;
    }

    template <typename T>
        requires std::is_trivially_copyable_v<T>
    void
    get_into(std::span<T> out) {
        require(out.size_bytes());
        if (!out.empty()) {
            std::memcpy(out.data(), bytes_.data() + offset_, out.size_bytes());
        }
        offset_ += out.size_bytes();
    }

    std::span<const std::byte>
    take(std::size_t count) {
        require(count);
        auto view = bytes_.subspan(offset_, count);
        offset_ += count;
        return view;
    }

    std::size_t
    remaining() const {
        return bytes_.size() - offset_;
    }

    std::size_t
    offset() const {
        return offset_;
    }

private:
    void
    require(std::size_t count) const {
        if (remaining() < count) {
            throw Error(shortfall_, "need " + std::to_string(count) + " bytes at offset " +
                                        std::to_string(offset_) + ", have " +
                                        std::to_string(remaining()));
        }
    }

    std::span<const std::byte> bytes_;
    std::size_t offset_ = 0;
    ErrorCode shortfall_;
};

}  // namespace quantann::detail
