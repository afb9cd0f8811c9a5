#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "maha/corpus.hpp"
#include "maha/tablehtml.hpp"

namespace maha {

enum class BlockKind { paragraph, heading, table, image, graph, equation };

std::string_view to_string(BlockKind k);
BlockKind block_kind_from_string(std::string_view s);

// One parsed content block of a source document. Which fields apply depends
// on the kind: paragraph/heading/equation use text, table uses rows,
// image/graph use data (base64) with text as the caption.
struct SourceBlock {
    BlockKind kind = BlockKind::paragraph;
    std::string text;
    std::vector<std::vector<std::string>> rows;
    std::string data;
    std::optional<std::vector<std::string>> declared_entities;
    std::optional<std::uint32_t> page;
};

struct SourceDocument {
    std::string doc_id;
    std::string title;
    std::vector<SourceBlock> blocks;
};

struct ChunkingPolicy {
    int max_tokens = 256;
    int overlap_tokens = 32;
};

// Half-open token-index span.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const TokenSpan&) const = default;
};

// Sliding-window spans: span i covers [i*(max-overlap), i*(max-overlap)+max)
// clamped to token_count, generated until the input is covered.
std::vector<TokenSpan> chunk_text(std::size_t token_count, const ChunkingPolicy& policy);

class Summarizer {
public:
    virtual ~Summarizer() = default;
    virtual std::string summarize(const Chunk& chunk) = 0;
};

// Deterministic per-modality templates; the default everywhere tests run.
class TemplateSummarizer final : public Summarizer {
public:
    std::string summarize(const Chunk& chunk) override;
};

// Non-empty summary for a non-TEXT chunk. Throws invalid_argument_error for
// TEXT chunks and propagates summarizer failures.
std::string summarize_chunk(const Chunk& chunk, Summarizer& summarizer);

// Segments a source document into chunks in reading order. Heading blocks
// fold into the following paragraph run; paragraph runs are windowed per
// the policy; every non-TEXT chunk gets a summary from the summarizer.
std::vector<Chunk> ingest_document(const SourceDocument& doc, const ChunkingPolicy& policy,
                                   Summarizer& summarizer);

inline constexpr int kSourceDocSchemaVersion = 1;

// Interchange format: line-delimited records, docs/FORMATS.md.
SourceDocument load_source_document(const std::filesystem::path& path);
void save_source_document(const SourceDocument& doc, const std::filesystem::path& path);

} // namespace maha
