#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace maha {

enum class Modality { text, table, image, graph, equation };

std::string_view to_string(Modality m);
Modality modality_from_string(std::string_view s);

// The atomic retrievable unit. `content` holds the canonical payload:
// plain text for TEXT, canonical HTML for TABLE, LaTeX source for EQUATION,
// base64 data for IMAGE and GRAPH (caption carried separately).
struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    Modality modality = Modality::text;
    std::uint32_t order_index = 0;
    std::string content;
    std::string caption; // IMAGE/GRAPH only, empty otherwise
    std::string summary;
    std::vector<std::string> entities;
    std::optional<std::uint32_t> page;

    bool operator==(const Chunk&) const = default;
};

struct DocumentMeta {
    std::string doc_id;
    std::string title;
    std::string source_path;

    bool operator==(const DocumentMeta&) const = default;
};

struct Corpus {
    std::string corpus_id;
    std::vector<Chunk> chunks;
    std::map<std::string, DocumentMeta> documents;

    bool operator==(const Corpus&) const = default;
    const Chunk* find_chunk(std::string_view chunk_id) const;
};

inline constexpr int kCorpusSchemaVersion = 1;

// Violation rule names (stable, part of the validation contract).
inline constexpr const char* kRuleDuplicateId = "DUPLICATE_ID";
inline constexpr const char* kRuleUnknownDocument = "UNKNOWN_DOCUMENT";
inline constexpr const char* kRuleOrderIndex = "ORDER_INDEX_NOT_CONTIGUOUS";
inline constexpr const char* kRuleMalformedTable = "MALFORMED_TABLE";
inline constexpr const char* kRuleMalformedBase64 = "MALFORMED_BASE64";
inline constexpr const char* kRuleEmptySummary = "EMPTY_SUMMARY";

struct Violation {
    std::string chunk_id;
    std::string rule;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

// Returns every invariant violation, sorted by (chunk_id, rule). Empty
// iff the corpus is valid. Violations are data, not errors.
std::vector<Violation> validate_corpus(const Corpus& corpus);

// Line-delimited record file, schema documented in docs/FORMATS.md.
// save refuses an invalid corpus; load validates and throws on violations.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

std::string corpus_to_string(const Corpus& corpus);
Corpus corpus_from_string(std::string_view data);

// Content hash over the canonical serialization; used as the snapshot id.
std::string corpus_content_id(const Corpus& corpus);

} // namespace maha
