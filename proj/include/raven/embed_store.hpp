// Copyright 2026-present the raven project
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

#include "raven/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace raven {

struct EmbeddingRecord {
    std::string id;
    Vector vector;
};

/**
 * Immutable collection of dense embeddings, one fixed-dimension vector per
 * unique id. Built once by `ingest_*`; safe for concurrent readers after.
 *
 * On-disk binary format ("RVEM"):
 *   magic "RVEM" | version u32 | dimension u32 | count u64 | normalized u8
 *   then `count` records of: id length u16 | id bytes (UTF-8) | d x f32 LE.
 *
 * A JSONL alternative (one `{"id": ..., "vector": [...]}` object per line)
 * is accepted for small fixtures.
 */
class EmbeddingStore {
public:
    static constexpr uint32_t kFormatVersion = 1;
    static constexpr int kDefaultDimension = 512;
    /// Stores claiming `normalized` must have every norm within this of 1.
    static constexpr double kNormTolerance = 1e-5;

    /// Reads either format, detected by the leading "RVEM" magic.
    /// `jsonl_dimension` is the declared dimension used for JSONL inputs.
    static EmbeddingStore ingest_file(const std::filesystem::path& path,
                                      bool normalize,
                                      int jsonl_dimension = kDefaultDimension);
    static EmbeddingStore ingest_binary(std::istream& in, bool normalize);
    static EmbeddingStore ingest_jsonl(std::istream& in, int dimension, bool normalize);

    Eigen::Index dimension() const { return vectors_.cols(); }
    Eigen::Index count() const { return vectors_.rows(); }
    bool normalized() const { return normalized_; }

    /// Missing ids are a normal value, not an error.
    std::optional<EmbeddingRecord> lookup(std::string_view id) const;
    std::optional<Eigen::Index> row_of(std::string_view id) const;

    const std::string& id_of(Eigen::Index row) const { return ids_[static_cast<size_t>(row)]; }
    Matrix::ConstRowXpr vector_at(Eigen::Index row) const { return vectors_.row(row); }
    const Matrix& vectors() const { return vectors_; }
    const std::vector<std::string>& ids() const { return ids_; }

    void save_binary(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;

private:
    EmbeddingStore() = default;
    void finalize(bool normalize, bool claims_normalized);

    Matrix vectors_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, Eigen::Index> rows_;
    bool normalized_ = false;
};

} // namespace raven
