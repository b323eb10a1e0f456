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

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace raven {

/// Embeddings are stored as 32-bit floats; scores accumulate in double.
using Scalar = float;
using Vector = Eigen::VectorXf;

/// One embedding per row, so each record is a contiguous slice.
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ConstVectorRef = Eigen::Ref<const Vector>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One search result: memory item id and its inner-product score.
struct ScoredHit {
    std::string id;
    double score = 0.0;

    friend bool operator==(const ScoredHit&, const ScoredHit&) = default;
};

/// Result-list order: score descending, ties by ascending id.
inline bool hit_less(const ScoredHit& a, const ScoredHit& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.id < b.id;
}

} // namespace raven
