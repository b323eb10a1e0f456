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

#include "raven/index.hpp"

#include "raven/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

namespace raven {

namespace {

constexpr char kMagic[4] = {'R', 'V', 'I', 'X'};

// RNG helpers pinned to the mt19937_64 bit stream, so builds are
// reproducible independent of the standard library's distributions.
double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

size_t uniform_index(std::mt19937_64& rng, size_t n) {
    return std::min(static_cast<size_t>(uniform_unit(rng) * static_cast<double>(n)), n - 1);
}

void check_query(const EmbeddingStore& store, ConstVectorRef query) {
    if (store.count() == 0) {
        throw Error("empty memory");
    }
    if (query.size() != store.dimension()) {
        throw Error("dimension mismatch: query has " + std::to_string(query.size()) +
                    ", store has " + std::to_string(store.dimension()));
    }
    if (!query.allFinite()) {
        throw Error("query has non-finite component");
    }
}

/// Top-k over candidate rows by (score desc, id asc).
std::vector<ScoredHit> select_top_k(const EmbeddingStore& store,
                                    ConstVectorRef query,
                                    const std::vector<Eigen::Index>& rows,
                                    int k) {
    std::vector<std::pair<double, Eigen::Index>> scored;
    scored.reserve(rows.size());
    for (Eigen::Index row : rows) {
        double s = store.vector_at(row).transpose().cast<double>().dot(query.cast<double>());
        scored.emplace_back(s, row);
    }
    auto less = [&](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return store.id_of(a.second) < store.id_of(b.second);
    };
    size_t keep = std::min<size_t>(static_cast<size_t>(k), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<ptrdiff_t>(keep),
                      scored.end(), less);
    std::vector<ScoredHit> hits;
    hits.reserve(keep);
    for (size_t i = 0; i < keep; ++i) {
        hits.push_back({store.id_of(scored[i].second), scored[i].first});
    }
    return hits;
}

/// Nearest centroid per row under squared Euclidean distance, computed via
/// one GEMM; ties resolve to the lowest cluster index.
std::vector<int> assign_clusters(const Matrix& data, const Matrix& centroids) {
    Matrix sims = data * centroids.transpose(); // rows x nlist
    Eigen::VectorXd cnorms(centroids.rows());
    for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
        cnorms[j] = centroids.row(j).cast<double>().squaredNorm();
    }
    std::vector<int> labels(static_cast<size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        int best = 0;
        double best_val = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
            double val = cnorms[j] - 2.0 * static_cast<double>(sims(i, j));
            if (val < best_val) {
                best_val = val;
                best = static_cast<int>(j);
            }
        }
        labels[static_cast<size_t>(i)] = best;
    }
    return labels;
}

Matrix kmeanspp_seed(const Matrix& data, int nlist, std::mt19937_64& rng) {
    const Eigen::Index n = data.rows();
    Matrix centroids(nlist, data.cols());
    centroids.row(0) = data.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<size_t>(n))));

    Eigen::VectorXd min_sq(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        min_sq[i] = (data.row(i) - centroids.row(0)).cast<double>().squaredNorm();
    }
    for (int c = 1; c < nlist; ++c) {
        double total = min_sq.sum();
        Eigen::Index pick;
        if (total <= 0.0) {
            // All remaining points coincide with chosen centroids.
            pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<size_t>(n)));
        } else {
            double r = uniform_unit(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += min_sq[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.row(c) = data.row(pick);
        for (Eigen::Index i = 0; i < n; ++i) {
            double d = (data.row(i) - centroids.row(c)).cast<double>().squaredNorm();
            min_sq[i] = std::min(min_sq[i], d);
        }
    }
    return centroids;
}

} // namespace

double score(ConstVectorRef query, ConstVectorRef memory) {
    if (query.size() != memory.size()) {
        throw Error("dimension mismatch: " + std::to_string(query.size()) + " vs " +
                    std::to_string(memory.size()));
    }
    if (!query.allFinite() || !memory.allFinite()) {
        throw Error("non-finite component");
    }
    return query.cast<double>().dot(memory.cast<double>());
}

std::vector<ScoredHit> search_exact(const EmbeddingStore& store, ConstVectorRef query, int k) {
    check_query(store, query);
    if (k < 1) {
        throw Error("k must be >= 1");
    }
    std::vector<Eigen::Index> rows(static_cast<size_t>(store.count()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    return select_top_k(store, query, rows, k);
}

IvfIndex IvfIndex::build(const EmbeddingStore& store,
                         int nlist,
                         uint64_t seed,
                         const KmeansParams& params) {
    if (store.count() == 0) {
        throw Error("empty memory");
    }
    if (nlist < 1 || static_cast<Eigen::Index>(nlist) > store.count()) {
        throw Error("nlist must be in [1, count=" + std::to_string(store.count()) + "]");
    }

    const Matrix& data = store.vectors();
    std::mt19937_64 rng(seed);

    IvfIndex index;
    index.centroids_ = kmeanspp_seed(data, nlist, rng);

    std::vector<int> labels;
    for (int iter = 0; iter < params.max_iter; ++iter) {
        labels = assign_clusters(data, index.centroids_);

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(nlist, data.cols());
        std::vector<int64_t> counts(static_cast<size_t>(nlist), 0);
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            int c = labels[static_cast<size_t>(i)];
            sums.row(c) += data.row(i).cast<double>();
            ++counts[static_cast<size_t>(c)];
        }

        double max_shift = 0.0;
        for (int c = 0; c < nlist; ++c) {
            if (counts[static_cast<size_t>(c)] == 0) {
                continue; // keep the previous centroid
            }
            Vector updated =
                (sums.row(c) / static_cast<double>(counts[static_cast<size_t>(c)]))
                    .cast<Scalar>()
                    .transpose();
            double shift = (updated - index.centroids_.row(c).transpose()).cast<double>().norm();
            double scale = std::max(1e-12, index.centroids_.row(c).cast<double>().norm());
            max_shift = std::max(max_shift, shift / scale);
            index.centroids_.row(c) = updated.transpose();
        }
        if (max_shift <= params.tol) {
            break;
        }
    }

    labels = assign_clusters(data, index.centroids_);
    index.postings_.assign(static_cast<size_t>(nlist), {});
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        index.postings_[static_cast<size_t>(labels[static_cast<size_t>(i)])].push_back(i);
    }
    index.empty_clusters_ = static_cast<int>(
        std::count_if(index.postings_.begin(), index.postings_.end(),
                      [](const auto& p) { return p.empty(); }));
    return index;
}

std::vector<ScoredHit> IvfIndex::search(const EmbeddingStore& store,
                                        ConstVectorRef query,
                                        int k,
                                        int nprobe) const {
    check_query(store, query);
    if (k < 1) {
        throw Error("k must be >= 1");
    }
    if (nprobe < 1 || nprobe > nlist()) {
        throw Error("nprobe must be in [1, nlist=" + std::to_string(nlist()) + "]");
    }
    if (centroids_.cols() != store.dimension()) {
        throw Error("index dimension mismatch");
    }

    std::vector<std::pair<double, int>> cscores;
    cscores.reserve(static_cast<size_t>(nlist()));
    for (int c = 0; c < nlist(); ++c) {
        double s = centroids_.row(c).cast<double>().dot(query.transpose().cast<double>());
        cscores.emplace_back(s, c);
    }
    std::partial_sort(cscores.begin(), cscores.begin() + nprobe, cscores.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) {
                              return a.first > b.first;
                          }
                          return a.second < b.second;
                      });

    std::vector<Eigen::Index> candidates;
    for (int p = 0; p < nprobe; ++p) {
        const auto& list = postings_[static_cast<size_t>(cscores[static_cast<size_t>(p)].second)];
        candidates.insert(candidates.end(), list.begin(), list.end());
    }
    return select_top_k(store, query, candidates, k);
}

void IvfIndex::save(std::ostream& out, const EmbeddingStore& store) const {
    out.write(kMagic, 4);
    io::write_u32(out, kFormatVersion);
    io::write_u32(out, static_cast<uint32_t>(nlist()));
    io::write_u32(out, static_cast<uint32_t>(dimension()));
    io::write_u32(out, static_cast<uint32_t>(empty_clusters_));
    for (Eigen::Index c = 0; c < centroids_.rows(); ++c) {
        for (Eigen::Index j = 0; j < centroids_.cols(); ++j) {
            io::write_f32(out, centroids_(c, j));
        }
    }
    for (const auto& list : postings_) {
        io::write_u64(out, list.size());
        for (Eigen::Index row : list) {
            io::write_string16(out, store.id_of(row));
        }
    }
    if (!out) {
        throw Error("write failed");
    }
}

void IvfIndex::save(const std::filesystem::path& path, const EmbeddingStore& store) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    save(out, store);
}

IvfIndex IvfIndex::load(std::istream& in, const EmbeddingStore& store) {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || !std::equal(magic, magic + 4, kMagic)) {
        throw Error("bad magic, not an index file");
    }
    uint32_t version = io::read_u32(in);
    if (version != kFormatVersion) {
        throw Error("unsupported index format version " + std::to_string(version));
    }
    uint32_t nlist = io::read_u32(in);
    uint32_t dim = io::read_u32(in);
    if (static_cast<Eigen::Index>(dim) != store.dimension()) {
        throw Error("index dimension " + std::to_string(dim) + " != store dimension " +
                    std::to_string(store.dimension()));
    }
    IvfIndex index;
    index.empty_clusters_ = static_cast<int>(io::read_u32(in));
    index.centroids_.resize(static_cast<Eigen::Index>(nlist), static_cast<Eigen::Index>(dim));
    for (Eigen::Index c = 0; c < index.centroids_.rows(); ++c) {
        for (Eigen::Index j = 0; j < index.centroids_.cols(); ++j) {
            index.centroids_(c, j) = io::read_f32(in);
        }
    }
    index.postings_.assign(nlist, {});
    for (uint32_t c = 0; c < nlist; ++c) {
        uint64_t n = io::read_u64(in);
        index.postings_[c].reserve(n);
        for (uint64_t i = 0; i < n; ++i) {
            std::string id = io::read_string16(in);
            auto row = store.row_of(id);
            if (!row) {
                throw Error("index id '" + id + "' not present in store");
            }
            index.postings_[c].push_back(*row);
        }
    }
    return index;
}

IvfIndex IvfIndex::load(const std::filesystem::path& path, const EmbeddingStore& store) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return load(in, store);
}

} // namespace raven
