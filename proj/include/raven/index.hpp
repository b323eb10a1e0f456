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

#include "raven/embed_store.hpp"
#include "raven/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace raven {

/// Exact inner product, accumulated in double.
double score(ConstVectorRef query, ConstVectorRef memory);

/// Exact MIPS: the min(k, count) largest inner products, score descending,
/// ties by ascending id.
std::vector<ScoredHit> search_exact(const EmbeddingStore& store,
                                    ConstVectorRef query,
                                    int k);

struct KmeansParams {
    int max_iter = 25;
    /// Relative centroid-shift threshold for early convergence.
    double tol = 1e-4;
};

/**
 * Inverted-file index: a k-means coarse quantizer plus one posting list per
 * cluster. Queries probe the `nprobe` clusters whose centroids score highest
 * against the query; `nprobe == nlist` degenerates to exact search.
 *
 * On-disk format ("RVIX"):
 *   magic "RVIX" | version u32 | nlist u32 | dimension u32 |
 *   empty_clusters u32 | nlist x d centroid f32 LE |
 *   per cluster: count u64, then ids (u16 length + bytes).
 */
class IvfIndex {
public:
    static constexpr uint32_t kFormatVersion = 1;

    /// Clusters the store with k-means++ seeding. Deterministic for a fixed
    /// seed. Empty clusters are permitted and recorded.
    static IvfIndex build(const EmbeddingStore& store,
                          int nlist,
                          uint64_t seed,
                          const KmeansParams& params = {});

    std::vector<ScoredHit> search(const EmbeddingStore& store,
                                  ConstVectorRef query,
                                  int k,
                                  int nprobe) const;

    int nlist() const { return static_cast<int>(centroids_.rows()); }
    Eigen::Index dimension() const { return centroids_.cols(); }
    const Matrix& centroids() const { return centroids_; }
    const std::vector<std::vector<Eigen::Index>>& postings() const { return postings_; }
    int empty_clusters() const { return empty_clusters_; }

    void save(std::ostream& out, const EmbeddingStore& store) const;
    void save(const std::filesystem::path& path, const EmbeddingStore& store) const;
    /// Re-binds persisted ids to rows of `store`; unknown ids are an error.
    static IvfIndex load(std::istream& in, const EmbeddingStore& store);
    static IvfIndex load(const std::filesystem::path& path, const EmbeddingStore& store);

private:
    Matrix centroids_;
    std::vector<std::vector<Eigen::Index>> postings_;
    int empty_clusters_ = 0;
};

} // namespace raven
