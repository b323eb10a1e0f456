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

#include "raven/image.hpp"
#include "raven/retriever.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace raven {

enum class Task { captioning, vqa };

Task parse_task(std::string_view name);
std::string task_name(Task task);

enum class TextPart { top_caption, all_captions, alt_text };

/// A named recipe for which retrieved modalities get concatenated to the
/// query sample. Mode `none` is the non-retrieved baseline. VQA modes never
/// use images.
struct AblationMode {
    std::string name;
    Task task = Task::captioning;
    std::vector<TextPart> text_parts;
    bool use_image = false;
};

/// All registered modes, named after their snake_cased ablation labels.
const std::vector<AblationMode>& ablation_modes();
std::vector<std::string> mode_names(Task task);
/// Unknown names are an error.
const AblationMode& find_mode(Task task, std::string_view name);

/// Whitespace tokenization; the default token counter for source-length
/// budgeting.
std::vector<std::string> whitespace_tokenize(std::string_view text);

struct AugmentOptions {
    /// Separator between context and the prompt/question.
    std::string context_separator = "</context>";
    /// Joins the selected text parts; empty parts are dropped from the join.
    std::string part_separator = " ";
    /// Joins captions within the all_captions part.
    std::string caption_join = " ; ";
    /// Context precedes the prompt/question by default.
    bool context_first = true;
    int max_source_length = 600;
    std::string caption_prompt = "What does the image describe?";
    /// Pluggable token counter for the max-source-length check.
    std::function<std::vector<std::string>(std::string_view)> tokenizer = whitespace_tokenize;
};

/// One raw dataset row. Captioning rows carry `caption`; VQA rows carry
/// `question` and `answer`.
struct TaskRecord {
    Task task = Task::captioning;
    std::string sample_id;
    std::string image_ref;
    std::string caption;
    std::string question;
    std::string answer;
};

std::vector<std::string> base_columns(Task task);
std::vector<std::string> base_cells(const TaskRecord& record);
std::vector<TaskRecord> read_dataset_tsv(const std::filesystem::path& path, Task task);

enum class RetrievalStatus { full, captions_only, missing };
std::string status_name(RetrievalStatus status);

/// Joins the mode's text parts in declared order; absent parts contribute
/// the empty string and drop out of the join.
std::string build_text_context(const AblationMode& mode,
                               const std::optional<MappedCaptions>& mapped,
                               const std::optional<std::string>& alt_text,
                               const AugmentOptions& options);

struct AugmentedSample {
    std::string sample_id;
    std::string input_text;
    std::string target_text;
    /// Truncated retrieved context, as written to the output TSV.
    std::string retrieved_context;
    RetrievalStatus status = RetrievalStatus::missing;
    /// Present only for captioning image modes.
    std::optional<RgbImage> composite;
};

using ImageProvider = std::function<std::optional<RgbImage>(const std::string& image_ref)>;

/// Context source for a retrieval: top1 when present, otherwise the first
/// hit with mapped captions, otherwise none.
const MemoryEntry* context_entry(const RetrievalResult& retrieval);
RetrievalStatus retrieval_status(const RetrievalResult* retrieval);

/// Builds one augmented sample. Returns nullopt when the record is filtered
/// out (captioning image modes keep only samples whose retrieval has both
/// captions and an image). `retrieval` may be null (join miss). The image
/// provider is required only for image modes.
std::optional<AugmentedSample> build_sample(const TaskRecord& record,
                                            const RetrievalResult* retrieval,
                                            const AblationMode& mode,
                                            const AugmentOptions& options,
                                            const ImageProvider& images = {});

struct DatasetReport {
    int64_t total = 0;
    int64_t with_captions = 0;
    int64_t with_captions_and_image = 0;
    int64_t emitted = 0;
    int64_t join_misses = 0;
    /// Byte sizes of the emitted rows with and without the appended
    /// retrieval columns.
    uint64_t bytes_with_retrieval = 0;
    uint64_t bytes_without_retrieval = 0;

    nlohmann::json to_json() const;
};

/**
 * Streams records through build_sample and writes one TSV row per emitted
 * sample, in input order. Mode `none` output is byte-identical to
 * pass-through serialization of the input. Join misses are counted and
 * treated as fully-missing retrievals, never fatal. Composite images are
 * written as PNGs under `composites_dir` and referenced from the
 * `composite_image_ref` column.
 */
DatasetReport emit_dataset(const std::vector<TaskRecord>& records,
                           const std::unordered_map<std::string, RetrievalResult>& retrievals,
                           const AblationMode& mode,
                           std::ostream& sink,
                           const AugmentOptions& options = {},
                           const ImageProvider& images = {},
                           const std::filesystem::path& composites_dir = {});

} // namespace raven
