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

#include "raven/retriever.hpp"

#include "raven/io.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <mutex>
#include <thread>

namespace raven {

CaptionCorpus CaptionCorpus::load_tsv(const std::filesystem::path& path) {
    CaptionCorpus corpus;
    auto rows = io::read_tsv(path, {"id", "top_caption", "all_captions"});
    for (const auto& cells : rows) {
        const std::string& id = cells[0];
        MappedCaptions mapped;
        mapped.top_caption = cells[1];
        nlohmann::json arr;
        try {
            arr = nlohmann::json::parse(cells[2]);
        } catch (const nlohmann::json::exception& e) {
            throw Error(path.string() + ": id '" + id + "': bad all_captions cell: " + e.what());
        }
        if (!arr.is_array()) {
            throw Error(path.string() + ": id '" + id + "': all_captions must be a JSON array");
        }
        for (const auto& c : arr) {
            mapped.all_captions.push_back(c.get<std::string>());
        }
        corpus.insert(id, std::move(mapped));
    }
    return corpus;
}

void CaptionCorpus::insert(std::string id, MappedCaptions captions) {
    if (captions.top_caption.empty()) {
        throw Error("id '" + id + "': top_caption must be non-empty");
    }
    if (captions.all_captions.empty() || captions.all_captions.front() != captions.top_caption) {
        throw Error("id '" + id + "': all_captions must start with top_caption");
    }
    rows_[std::move(id)] = std::move(captions);
}

void CaptionCorpus::erase(const std::string& id) {
    rows_.erase(id);
}

std::optional<MappedCaptions> CaptionCorpus::find(std::string_view id) const {
    auto it = rows_.find(std::string(id));
    if (it == rows_.end()) {
        return std::nullopt;
    }
    return it->second;
}

MemoryMetadata MemoryMetadata::load_tsv(const std::filesystem::path& path) {
    MemoryMetadata meta;
    auto rows = io::read_tsv(path, {"id", "image_ref", "alt_text"});
    for (auto& cells : rows) {
        meta.insert(std::move(cells[0]), std::move(cells[1]), std::move(cells[2]));
    }
    return meta;
}

void MemoryMetadata::insert(std::string id, std::string image_ref, std::string alt_text) {
    rows_[std::move(id)] = {std::move(image_ref), std::move(alt_text)};
}

std::pair<std::string, std::string> MemoryMetadata::find(std::string_view id) const {
    auto it = rows_.find(std::string(id));
    if (it == rows_.end()) {
        return {"", ""};
    }
    return it->second;
}

Vector fuse_query(ConstVectorRef image_vec,
                  const std::optional<Vector>& text_vec,
                  bool renormalize) {
    if (!image_vec.allFinite()) {
        throw Error("image embedding has non-finite component");
    }
    if (!text_vec) {
        return image_vec;
    }
    if (text_vec->size() != image_vec.size()) {
        throw Error("dimension mismatch: image has " + std::to_string(image_vec.size()) +
                    ", text has " + std::to_string(text_vec->size()));
    }
    if (!text_vec->allFinite()) {
        throw Error("text embedding has non-finite component");
    }
    Eigen::VectorXd fused = (image_vec.cast<double>() + text_vec->cast<double>()) / 2.0;
    if (renormalize) {
        double norm = fused.norm();
        if (norm == 0.0) {
            throw Error("fused query is the zero vector");
        }
        fused /= norm;
    }
    return fused.cast<Scalar>();
}

std::vector<ScoredHit> dedup(const std::vector<ScoredHit>& hits,
                             const EmbeddingStore& store,
                             double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw Error("dedup threshold must be in (0, 1]");
    }
    if (!store.normalized()) {
        throw Error("dedup requires a normalized store");
    }
    std::vector<ScoredHit> kept;
    std::vector<Eigen::Index> kept_rows;
    for (const ScoredHit& hit : hits) {
        auto row = store.row_of(hit.id);
        if (!row) {
            throw Error("hit id '" + hit.id + "' not present in store");
        }
        bool duplicate = false;
        for (Eigen::Index kr : kept_rows) {
            double cos =
                store.vector_at(*row).cast<double>().dot(store.vector_at(kr).transpose().cast<double>());
            if (cos >= threshold) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            kept.push_back(hit);
            kept_rows.push_back(*row);
        }
    }
    return kept;
}

std::vector<std::optional<MappedCaptions>> map_to_corpus(std::span<const std::string> ids,
                                                         const CaptionCorpus& corpus) {
    std::vector<std::optional<MappedCaptions>> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        out.push_back(corpus.find(id));
    }
    return out;
}

Retriever::Retriever(const EmbeddingStore& store,
                     const IvfIndex* index,
                     const CaptionCorpus& corpus,
                     const MemoryMetadata& metadata,
                     RetrievalConfig config)
    : store_(store), index_(index), corpus_(corpus), metadata_(metadata),
      config_(std::move(config)) {
    if (config_.backend == RetrievalConfig::Backend::ivf && index_ == nullptr) {
        throw Error("ivf backend selected but no index provided");
    }
    if (config_.top_k < 1) {
        throw Error("top_k must be >= 1");
    }
}

RetrievalResult Retriever::retrieve(const std::string& query_id, ConstVectorRef query) const {
    std::vector<ScoredHit> raw;
    if (config_.backend == RetrievalConfig::Backend::ivf) {
        raw = index_->search(store_, query, config_.top_k,
                             std::min(config_.nprobe, index_->nlist()));
    } else {
        raw = search_exact(store_, query, config_.top_k);
    }
    std::vector<ScoredHit> survivors = dedup(raw, store_, config_.dedup_threshold);

    RetrievalResult result;
    result.query_id = query_id;
    result.hits.reserve(survivors.size());
    for (const ScoredHit& hit : survivors) {
        MemoryEntry entry;
        entry.id = hit.id;
        std::tie(entry.image_ref, entry.alt_text) = metadata_.find(hit.id);
        entry.mapped = corpus_.find(hit.id);
        if (!result.top1 && entry.mapped && config_.image_ref_ok(entry.image_ref)) {
            result.top1 = entry;
        }
        result.hits.emplace_back(std::move(entry), hit.score);
    }
    return result;
}

RetrievalResult Retriever::retrieve_fused(const std::string& query_id,
                                          ConstVectorRef image_vec,
                                          const std::optional<Vector>& text_vec) const {
    Vector fused = fuse_query(image_vec, text_vec, store_.normalized());
    return retrieve(query_id, fused);
}

std::vector<RetrievalResult> Retriever::retrieve_batch(
    const std::vector<std::pair<std::string, Vector>>& queries,
    int threads) const {
    std::vector<RetrievalResult> results(queries.size());
    int workers = std::max(1, threads);
    if (workers == 1 || queries.size() <= 1) {
        for (size_t i = 0; i < queries.size(); ++i) {
            results[i] = retrieve(queries[i].first, queries[i].second);
        }
        return results;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= queries.size()) {
                return;
            }
            try {
                results[i] = retrieve(queries[i].first, queries[i].second);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return results;
}

} // namespace raven
