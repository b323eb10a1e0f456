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

#include "raven/embed_store.hpp"

#include "raven/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace raven {

namespace {

constexpr char kMagic[4] = {'R', 'V', 'E', 'M'};

void check_finite(const std::string& id, const Vector& v) {
    if (!v.allFinite()) {
        throw Error("record '" + id + "': non-finite component");
    }
}

} // namespace

EmbeddingStore EmbeddingStore::ingest_file(const std::filesystem::path& path,
                                           bool normalize,
                                           int jsonl_dimension) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    char magic[4] = {};
    in.read(magic, 4);
    bool is_binary = in.gcount() == 4 && std::equal(magic, magic + 4, kMagic);
    in.clear();
    in.seekg(0);
    if (is_binary) {
        return ingest_binary(in, normalize);
    }
    return ingest_jsonl(in, jsonl_dimension, normalize);
}

EmbeddingStore EmbeddingStore::ingest_binary(std::istream& in, bool normalize) {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || !std::equal(magic, magic + 4, kMagic)) {
        throw Error("bad magic, not an embedding file");
    }
    uint32_t version = io::read_u32(in);
    if (version != kFormatVersion) {
        throw Error("unsupported embedding format version " + std::to_string(version));
    }
    uint32_t dim = io::read_u32(in);
    if (dim == 0) {
        throw Error("declared dimension must be positive");
    }
    uint64_t count = io::read_u64(in);
    bool claims_normalized = io::read_u8(in) != 0;

    EmbeddingStore store;
    store.vectors_.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    store.ids_.reserve(count);
    store.rows_.reserve(count);
    for (uint64_t r = 0; r < count; ++r) {
        std::string id = io::read_string16(in);
        auto row = static_cast<Eigen::Index>(r);
        for (uint32_t j = 0; j < dim; ++j) {
            store.vectors_(row, static_cast<Eigen::Index>(j)) = io::read_f32(in);
        }
        if (!store.rows_.emplace(id, row).second) {
            throw Error("duplicate id '" + id + "'");
        }
        store.ids_.push_back(std::move(id));
    }
    store.finalize(normalize, claims_normalized);
    return store;
}

EmbeddingStore EmbeddingStore::ingest_jsonl(std::istream& in, int dimension, bool normalize) {
    if (dimension <= 0) {
        throw Error("declared dimension must be positive");
    }
    std::vector<std::string> ids;
    std::vector<Vector> vecs;
    io::for_each_line(in, [&](size_t lineno, const std::string& line) {
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!obj.contains("id") || !obj.contains("vector")) {
            throw Error("line " + std::to_string(lineno) + ": missing 'id' or 'vector'");
        }
        std::string id = obj["id"].get<std::string>();
        const auto& arr = obj["vector"];
        if (static_cast<int>(arr.size()) != dimension) {
            throw Error("record '" + id + "': dimension " + std::to_string(arr.size()) +
                        " != store dimension " + std::to_string(dimension));
        }
        Vector v(dimension);
        for (int j = 0; j < dimension; ++j) {
            v[j] = arr[static_cast<size_t>(j)].get<float>();
        }
        ids.push_back(std::move(id));
        vecs.push_back(std::move(v));
    });

    EmbeddingStore store;
    store.vectors_.resize(static_cast<Eigen::Index>(vecs.size()), dimension);
    store.ids_.reserve(ids.size());
    store.rows_.reserve(ids.size());
    for (size_t r = 0; r < vecs.size(); ++r) {
        auto row = static_cast<Eigen::Index>(r);
        store.vectors_.row(row) = vecs[r].transpose();
        if (!store.rows_.emplace(ids[r], row).second) {
            throw Error("duplicate id '" + ids[r] + "'");
        }
        store.ids_.push_back(std::move(ids[r]));
    }
    store.finalize(normalize, /*claims_normalized=*/false);
    return store;
}

void EmbeddingStore::finalize(bool normalize, bool claims_normalized) {
    for (Eigen::Index r = 0; r < count(); ++r) {
        Vector v = vectors_.row(r).transpose();
        check_finite(ids_[static_cast<size_t>(r)], v);
        double norm = v.cast<double>().norm();
        if (normalize) {
            if (norm == 0.0) {
                throw Error("record '" + ids_[static_cast<size_t>(r)] + "': zero vector");
            }
            vectors_.row(r) = (v.cast<double>() / norm).cast<Scalar>().transpose();
        } else if (claims_normalized && std::abs(norm - 1.0) > kNormTolerance) {
            throw Error("record '" + ids_[static_cast<size_t>(r)] +
                        "': file claims normalized but norm is " + std::to_string(norm));
        }
    }
    normalized_ = normalize || claims_normalized;
}

std::optional<Eigen::Index> EmbeddingStore::row_of(std::string_view id) const {
    auto it = rows_.find(std::string(id));
    if (it == rows_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<EmbeddingRecord> EmbeddingStore::lookup(std::string_view id) const {
    auto row = row_of(id);
    if (!row) {
        return std::nullopt;
    }
    return EmbeddingRecord{std::string(id), vectors_.row(*row).transpose()};
}

void EmbeddingStore::save_binary(std::ostream& out) const {
    out.write(kMagic, 4);
    io::write_u32(out, kFormatVersion);
    io::write_u32(out, static_cast<uint32_t>(dimension()));
    io::write_u64(out, static_cast<uint64_t>(count()));
    io::write_u8(out, normalized_ ? 1 : 0);
    for (Eigen::Index r = 0; r < count(); ++r) {
        io::write_string16(out, ids_[static_cast<size_t>(r)]);
        for (Eigen::Index j = 0; j < dimension(); ++j) {
            io::write_f32(out, vectors_(r, j));
        }
    }
    if (!out) {
        throw Error("write failed");
    }
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    save_binary(out);
}

} // namespace raven
