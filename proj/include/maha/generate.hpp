#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "maha/corpus.hpp"
#include "maha/kg.hpp"
#include "maha/retrieve.hpp"

namespace maha {

inline constexpr const char* kPromptTemplateVersion = "maha-prompt-v1";
inline constexpr int kDefaultTokenBudget = 3000;

struct EvidenceItem {
    std::string chunk_id;
    Modality modality = Modality::text;
    std::string rendered; // content for TEXT/TABLE/EQUATION, summary for IMAGE/GRAPH
    double fused_score = 0.0;
};

struct AssembledContext {
    std::string query;
    std::vector<EvidenceItem> evidence;
    std::vector<std::string> graph_notes; // "src TYPE dst", endpoints all included
    int token_budget = kDefaultTokenBudget;
};

struct Answer {
    std::string text;
    std::vector<std::string> cited_chunk_ids;
    std::set<Modality> modalities_used;
    std::string provider_id;
    std::string warning; // non-empty when citations could not be parsed
};

// Greedy inclusion by rank under the budget: a chunk whose rendering would
// push the prompt past token_budget falls back to its summary, then drops.
// graph_notes are every graph edge whose endpoints are both included.
AssembledContext assemble_context(const std::string& query, const RetrievalResult& result,
                                  const Corpus& corpus, const KnowledgeGraph& graph,
                                  int token_budget = kDefaultTokenBudget);

// Byte-deterministic for a given context and template version.
std::string render_prompt(const AssembledContext& ctx);

// Remote completion endpoint: POST {base_url}/v1/generate with
// {"prompt": ..., "max_tokens": N}, response {"text": ...}.
class GenerationClient {
public:
    virtual ~GenerationClient() = default;
    virtual const std::string& provider_id() const = 0;
    virtual std::string complete(const std::string& prompt, int max_tokens) = 0;
};

struct RemoteGenerationConfig {
    std::string base_url;
    std::string provider_id;
    std::string auth_token;
    int timeout_sec = 60;
};

class HttpGenerationClient final : public GenerationClient {
public:
    explicit HttpGenerationClient(RemoteGenerationConfig config);
    ~HttpGenerationClient() override;

    const std::string& provider_id() const override;
    std::string complete(const std::string& prompt, int max_tokens) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// With a client: renders the prompt, parses [cite:chunk_id] markers from the
// response. Without one: deterministic extractive answer — the sentence of
// the top evidence chunk with maximal token overlap with the query.
Answer generate_answer(const AssembledContext& ctx, GenerationClient* client = nullptr,
                       int max_tokens = 256);

// Sentence boundaries: '.', '!' or '?' followed by whitespace or end.
std::vector<std::string> split_sentences(const std::string& text);

} // namespace maha
