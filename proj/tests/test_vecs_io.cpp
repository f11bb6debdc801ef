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

#include "support.hpp"

using namespace quantann;
using qtest::Bytes;
using qtest::TempDir;

namespace {

template <typename Fn>
ErrorCode
code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no quantann::Error thrown";
    return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(VecsIo, SingleFvecsRecord) {
    TempDir dir;
    Bytes().put<std::int32_t>(2).put(1.0F).put(2.0F).write(dir.file("a.fvecs"));
    const auto ds = load_fvecs(dir.file("a.fvecs"));
    ASSERT_EQ(ds.size(), 1U);
    ASSERT_EQ(ds.dim(), 2U);
    EXPECT_EQ(ds.row(0)[0], 1.0F);
    EXPECT_EQ(ds.row(0)[1], 2.0F);
}

TEST(VecsIo, EmptyFileIsEmptyDataset) {
    TempDir dir;
    Bytes().write(dir.file("e.fvecs"));
    const auto ds = load_fvecs(dir.file("e.fvecs"));
    EXPECT_EQ(ds.size(), 0U);
    EXPECT_EQ(ds.dim(), 0U);
    EXPECT_TRUE(load_ivecs(dir.file("e.fvecs")).lists.empty());
}

TEST(VecsIo, DimensionChangeIsRejected) {
    TempDir dir;
    Bytes b;
    b.put<std::int32_t>(4);
    for (int i = 0; i < 4; ++i) {
        b.put(float(i));
    }
    b.put<std::int32_t>(5);
    for (int i = 0; i < 5; ++i) {
        b.put(float(i));
    }
    b.write(dir.file("m.fvecs"));
    EXPECT_EQ(code_of([&] { load_fvecs(dir.file("m.fvecs")); }), ErrorCode::kDimensionMismatch);
}

TEST(VecsIo, TruncationIsRejected) {
    TempDir dir;
    Bytes().put<std::int32_t>(3).put(1.0F).put(2.0F).write(dir.file("short.fvecs"));
    EXPECT_EQ(code_of([&] { load_fvecs(dir.file("short.fvecs")); }), ErrorCode::kTruncatedRecord);

    Bytes().put<std::int32_t>(1).put(1.0F).put<std::int16_t>(1).write(dir.file("hdr.fvecs"));
    EXPECT_EQ(code_of([&] { load_fvecs(dir.file("hdr.fvecs")); }), ErrorCode::kTruncatedRecord);
}

TEST(VecsIo, NonPositiveDimension) {
    TempDir dir;
    Bytes().put<std::int32_t>(-1).write(dir.file("neg.bvecs"));
    EXPECT_EQ(code_of([&] { load_bvecs(dir.file("neg.bvecs")); }), ErrorCode::kNonPositiveDim);
    Bytes().put<std::int32_t>(0).write(dir.file("zero.ivecs"));
    EXPECT_EQ(code_of([&] { load_ivecs(dir.file("zero.ivecs")); }), ErrorCode::kNonPositiveDim);
}

TEST(VecsIo, IvecsRecord) {
    TempDir dir;
    Bytes().put<std::int32_t>(3).put<std::int32_t>(7).put<std::int32_t>(1).put<std::int32_t>(9).write(
        dir.file("gt.ivecs"));
    const auto gt = load_ivecs(dir.file("gt.ivecs"));
    ASSERT_EQ(gt.size(), 1U);
    EXPECT_EQ(gt.lists[0], (std::vector<std::uint32_t>{7, 1, 9}));
}

TEST(VecsIo, IvecsNegativeIdIsRejected) {
    TempDir dir;
    Bytes().put<std::int32_t>(1).put<std::int32_t>(-4).write(dir.file("bad.ivecs"));
    EXPECT_EQ(code_of([&] { load_ivecs(dir.file("bad.ivecs")); }), ErrorCode::kInvalidValue);
}

TEST(VecsIo, BvecsRecentering) {
    TempDir dir;
    Bytes().put<std::int32_t>(3).put<std::uint8_t>(0).put<std::uint8_t>(128).put<std::uint8_t>(255).write(
        dir.file("b.bvecs"));
    const auto ds = load_bvecs(dir.file("b.bvecs"));
    ASSERT_EQ(ds.dim(), 3U);
    EXPECT_EQ(ds.row(0)[0], -128);
    EXPECT_EQ(ds.row(0)[1], 0);
    EXPECT_EQ(ds.row(0)[2], 127);
}

TEST(VecsIo, FvecsRoundTripIsByteIdentical) {
    TempDir dir;
    qtest::Rng rng(3);
    const auto ds = qtest::random_floats(rng, 3, 4);
    save_fvecs(dir.file("a.fvecs"), ds);
    const auto back = load_fvecs(dir.file("a.fvecs"));
    EXPECT_EQ(back, ds);
    save_fvecs(dir.file("b.fvecs"), back);
    EXPECT_EQ(qtest::slurp(dir.file("a.fvecs")), qtest::slurp(dir.file("b.fvecs")));
    EXPECT_EQ(std::filesystem::file_size(dir.file("a.fvecs")), 3U * (4 + 4 * 4));
}

TEST(VecsIo, I8vecsRoundTripAndSize) {
    TempDir dir;
    qtest::Rng rng(4);
    const auto ds = qtest::random_int8(rng, 5, 7);
    save_i8vecs(dir.file("a.i8vecs"), ds);
    EXPECT_EQ(load_i8vecs(dir.file("a.i8vecs")), ds);
    EXPECT_EQ(std::filesystem::file_size(dir.file("a.i8vecs")), 5U * 7 + 4U * 5);
}

TEST(VecsIo, RoundTripProperty) {
    TempDir dir;
    qtest::Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = qtest::uniform_size(rng, 0, 30);
        const auto d = qtest::uniform_size(rng, 1, 40);
        const auto f = qtest::random_floats(rng, n, d, -1e6, 1e6);
        const auto i8 = qtest::random_int8(rng, n, d);
        save_fvecs(dir.file("p.fvecs"), f);
        save_i8vecs(dir.file("p.i8vecs"), i8);
        const auto f2 = load_fvecs(dir.file("p.fvecs"));
        const auto i2 = load_i8vecs(dir.file("p.i8vecs"));
        if (n == 0) {
            EXPECT_EQ(f2.size(), 0U);
            EXPECT_EQ(i2.size(), 0U);
        } else {
            EXPECT_EQ(f2, f);
            EXPECT_EQ(i2, i8);
        }
    }
}

TEST(VecsIo, GroundTruthRoundTrip) {
    TempDir dir;
    GroundTruth gt{{{3, 1, 2}, {0, 5, 4}}};
    save_ivecs(dir.file("g.ivecs"), gt);
    EXPECT_EQ(load_ivecs(dir.file("g.ivecs")), gt);
}

TEST(VecsIo, SaveWrongKind) {
    TempDir dir;
    const AnyDataset i8 = Int8Dataset(1, 2);
    const AnyDataset f = FloatDataset(1, 2);
    EXPECT_EQ(code_of([&] { save_fvecs(dir.file("x.fvecs"), i8); }),
              ErrorCode::kElementKindMismatch);
    EXPECT_EQ(code_of([&] { save_i8vecs(dir.file("x.i8vecs"), f); }),
              ErrorCode::kElementKindMismatch);
}

TEST(VecsIo, LoadVectorsDispatchesOnExtension) {
    TempDir dir;
    save_fvecs(dir.file("a.fvecs"), FloatDataset(2, 3));
    save_i8vecs(dir.file("a.i8vecs"), Int8Dataset(2, 3));
    EXPECT_EQ(kind_of(load_vectors(dir.file("a.fvecs"))), ElemKind::kFloat32);
    EXPECT_EQ(kind_of(load_vectors(dir.file("a.i8vecs"))), ElemKind::kInt8);
    EXPECT_EQ(code_of([&] { load_vectors(dir.file("a.txt")); }), ErrorCode::kInvalidArgument);
}

TEST(VecsIo, MissingFileIsIoError) {
    TempDir dir;
    EXPECT_EQ(code_of([&] { load_fvecs(dir.file("nope.fvecs")); }), ErrorCode::kIo);
}

TEST(VecsIo, Int8DimensionBound) {
    TempDir dir;
    Bytes b;
    b.put<std::int32_t>(static_cast<std::int32_t>(kMaxInt8Dim + 1));
    for (std::size_t i = 0; i <= kMaxInt8Dim; ++i) {
        b.put<std::int8_t>(1);
    }
    b.write(dir.file("wide.i8vecs"));
    EXPECT_EQ(code_of([&] { load_i8vecs(dir.file("wide.i8vecs")); }),
              ErrorCode::kDimensionTooLarge);
}

TEST(Dataset, ShapeValidation) {
    EXPECT_THROW(FloatDataset(2, 3, std::vector<float>(5)), Error);
    EXPECT_THROW(FloatDataset(2, 0), Error);
    EXPECT_NO_THROW(FloatDataset(0, 0));
}

TEST(GroundTruth, Validation) {
    EXPECT_NO_THROW(validate_ground_truth({{{0, 1}, {2, 1}}}, 3));
    EXPECT_THROW(validate_ground_truth({{{0, 3}}}, 3), Error);
    EXPECT_THROW(validate_ground_truth({{{1, 1}}}, 3), Error);
}
