#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "maha/corpus.hpp"
#include "maha/embed.hpp"
#include "maha/eval.hpp"
#include "maha/generate.hpp"
#include "maha/ingest.hpp"
#include "maha/kg.hpp"
#include "maha/retrieve.hpp"
#include "maha/vectorstore.hpp"

namespace maha {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kSnapshotSchemaVersion = 1;

struct ProviderConfig {
    ProviderKind kind = ProviderKind::local_deterministic;
    int dim = 256;
    std::uint64_t seed = 1234; // local provider only
    std::string base_url;      // remote providers only
    std::string provider_id;
    std::string auth_env; // environment variable holding the bearer token
    int batch_size = 16;
    int max_inflight = 4;
};

struct GenerationConfig {
    std::string provider = "stub"; // stub | remote
    std::string base_url;
    std::string provider_id;
    std::string auth_env;
    int token_budget = kDefaultTokenBudget;
    int max_tokens = 256;
};

struct EngineConfig {
    ProviderConfig text_embedding;
    std::optional<ProviderConfig> image_embedding;
    ChunkingPolicy chunking;
    GraphBuildOptions graph;
    FusionParams fusion;
    GenerationConfig generation;
    std::vector<int> eval_ks = {1, 3, 5};

    nlohmann::json to_json() const;
    static EngineConfig from_json(const nlohmann::json& j);

    // Hash of the sections that shape snapshot contents (embedding + chunking
    // + graph); query-time knobs do not change snapshot identity.
    std::string build_digest() const;
};

EngineConfig load_config(const std::filesystem::path& path);
void save_config(const EngineConfig& config, const std::filesystem::path& path);

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& config);
std::unique_ptr<GenerationClient> make_generation_client(const GenerationConfig& config);

// Immutable bundle of corpus, indexes and graph sharing one snapshot_id.
class EngineSnapshot {
public:
    std::string snapshot_id;
    Corpus corpus;
    VectorIndex text_index;
    std::optional<VectorIndex> image_index;
    KnowledgeGraph graph;
    Bm25Index bm25;
    EngineConfig config;
    std::unique_ptr<EmbeddingProvider> text_provider;
    std::unique_ptr<EmbeddingProvider> image_provider;

    RetrievalContext context() const;
};

EngineSnapshot build_snapshot(Corpus corpus, const EngineConfig& config);

// Directory layout: manifest.json, config.json, corpus.jsonl, text.vidx,
// image.vidx (when an image provider is configured), graph.jsonl. The
// directory is written to <dir>.tmp and renamed for an atomic publish.
void write_snapshot(const EngineSnapshot& snapshot, const std::filesystem::path& dir);
EngineSnapshot load_snapshot(const std::filesystem::path& dir);

struct QueryOutput {
    std::string snapshot_id;
    RetrievalResult result;
    std::optional<Answer> answer;
};

QueryOutput run_query(const EngineSnapshot& snapshot, const std::string& retriever_id,
                      const std::string& question, const FusionParams& params,
                      bool with_answer);

nlohmann::json query_output_to_json(const QueryOutput& output, const EngineSnapshot& snapshot);

// Held while a build writes a snapshot directory; concurrent builds of the
// same target fail fast instead of interleaving.
class BuildLock {
public:
    explicit BuildLock(const std::filesystem::path& target);
    ~BuildLock();
    BuildLock(const BuildLock&) = delete;
    BuildLock& operator=(const BuildLock&) = delete;

private:
    std::filesystem::path lock_path_;
};

} // namespace maha
