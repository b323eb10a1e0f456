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
#include "raven/index.hpp"
#include "raven/types.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace raven {

/// Style-normalized captions a memory item maps to. `all_captions` always
/// starts with `top_caption`.
struct MappedCaptions {
    std::string top_caption;
    std::vector<std::string> all_captions;

    friend bool operator==(const MappedCaptions&, const MappedCaptions&) = default;
};

/// One external-memory item: raw metadata plus the optional caption mapping.
/// `mapped` is absent exactly when the id has no row in the mapping corpus.
struct MemoryEntry {
    std::string id;
    std::string image_ref;
    std::string alt_text;
    std::optional<MappedCaptions> mapped;
};

/// In-memory caption-mapping table, loaded from a TSV with columns
/// `id`, `top_caption`, `all_captions` (the last a JSON array cell).
class CaptionCorpus {
public:
    CaptionCorpus() = default;
    static CaptionCorpus load_tsv(const std::filesystem::path& path);

    void insert(std::string id, MappedCaptions captions);
    void erase(const std::string& id);
    /// Missing rows yield nullopt, never an error.
    std::optional<MappedCaptions> find(std::string_view id) const;
    size_t size() const { return rows_.size(); }

private:
    std::unordered_map<std::string, MappedCaptions> rows_;
};

/// Memory-side metadata table: TSV with columns `id`, `image_ref`, `alt_text`.
class MemoryMetadata {
public:
    MemoryMetadata() = default;
    static MemoryMetadata load_tsv(const std::filesystem::path& path);

    void insert(std::string id, std::string image_ref, std::string alt_text);
    /// Unknown ids resolve to empty image_ref/alt_text.
    std::pair<std::string, std::string> find(std::string_view id) const;
    size_t size() const { return rows_.size(); }

private:
    std::unordered_map<std::string, std::pair<std::string, std::string>> rows_;
};

/// Multimodal query fusion: component-wise mean of image and text embeddings,
/// re-normalized iff `renormalize`. Absent text returns the image embedding.
Vector fuse_query(ConstVectorRef image_vec,
                  const std::optional<Vector>& text_vec,
                  bool renormalize);

/// Greedy near-duplicate exclusion in rank order: a hit is dropped iff its
/// cosine similarity to any already-kept hit is >= threshold. Requires a
/// normalized store; threshold must lie in (0, 1].
std::vector<ScoredHit> dedup(const std::vector<ScoredHit>& hits,
                             const EmbeddingStore& store,
                             double threshold);

/// Per-id corpus lookup; absent rows are nullopt.
std::vector<std::optional<MappedCaptions>> map_to_corpus(std::span<const std::string> ids,
                                                         const CaptionCorpus& corpus);

struct RetrievalConfig {
    enum class Backend { exact, ivf };

    Backend backend = Backend::exact;
    int top_k = 50;
    double dedup_threshold = 0.95;
    int nprobe = 8;
    /// Pluggable image_ref checker; at desk scale any non-empty ref resolves.
    std::function<bool(const std::string&)> image_ref_ok =
        [](const std::string& ref) { return !ref.empty(); };
};

struct RetrievalResult {
    std::string query_id;
    std::vector<std::pair<MemoryEntry, double>> hits;
    /// Highest-ranked surviving hit with both a resolvable image and mapped
    /// captions; absent when none qualifies.
    std::optional<MemoryEntry> top1;
};

/**
 * End-to-end retrieval: MIPS search (exact or IVF), near-duplicate
 * exclusion, caption-corpus mapping, and top-1 selection. Robust to missing
 * mapping rows and missing metadata.
 */
class Retriever {
public:
    Retriever(const EmbeddingStore& store,
              const IvfIndex* index,
              const CaptionCorpus& corpus,
              const MemoryMetadata& metadata,
              RetrievalConfig config);

    RetrievalResult retrieve(const std::string& query_id, ConstVectorRef query) const;

    /// Fuses image and optional text embeddings, then retrieves.
    RetrievalResult retrieve_fused(const std::string& query_id,
                                   ConstVectorRef image_vec,
                                   const std::optional<Vector>& text_vec) const;

    /// Independent per-query retrieval over `threads` workers; output order
    /// matches input order regardless of parallelism.
    std::vector<RetrievalResult> retrieve_batch(
        const std::vector<std::pair<std::string, Vector>>& queries,
        int threads) const;

    const RetrievalConfig& config() const { return config_; }

private:
    const EmbeddingStore& store_;
    const IvfIndex* index_;
    const CaptionCorpus& corpus_;
    const MemoryMetadata& metadata_;
    RetrievalConfig config_;
};

} // namespace raven
