#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "maha/corpus.hpp"
#include "maha/embed.hpp"
#include "maha/kg.hpp"
#include "maha/vectorstore.hpp"

namespace maha {

struct RetrievedHit {
    std::string chunk_id;
    double fused_score = 0.0;
    std::optional<double> vector_score; // raw cosine when the vector path saw it
    std::optional<int> graph_depth;     // min hop distance when the graph reached it
    int rank = 0;

    bool operator==(const RetrievedHit&) const = default;
};

// Hits sorted by fused_score descending, ties by ascending chunk_id, ranks
// contiguous from 1, chunk_ids unique.
struct RetrievalResult {
    std::string query_id;
    std::string retriever_id;
    std::vector<RetrievedHit> hits;
};

struct FusionParams {
    double alpha = 0.7;   // vector weight
    double beta = 0.3;    // graph weight
    double lambda = 0.5;  // depth decay, in (0, 1]
    int seed_k = 10;
    int depth = 2;
    std::set<EdgeType> allowed_edges = all_edge_types();
    int final_k = 20;
    bool exhaustive_vector_scores = false; // score graph-only candidates by cosine too

    void validate() const;
};

// Sorts with the standard tie-break, assigns contiguous ranks, truncates.
void finalize_hits(std::vector<RetrievedHit>& hits, int final_k);

// Okapi BM25 over chunk token counts. TEXT chunks index their content,
// non-TEXT chunks their summary. Matching is over unique query terms;
// chunks matching no term are not returned.
class Bm25Index {
public:
    static constexpr double kK1 = 1.2;
    static constexpr double kB = 0.75;

    static Bm25Index build(const Corpus& corpus);

    RetrievalResult search(const std::string& query, int k) const;
    double score(const std::string& query, const std::string& chunk_id) const;
    std::size_t size() const { return chunk_ids_.size(); }

private:
    std::vector<std::string> chunk_ids_;
    std::vector<std::map<std::string, int>> term_counts_;
    std::vector<int> lengths_;
    std::map<std::string, int> doc_freq_;
    double avgdl_ = 0.0;
};

// Everything a retriever needs, borrowed from an engine snapshot. The image
// index/provider pair is optional; when present, dense search queries both
// spaces and merges by reciprocal rank.
struct RetrievalContext {
    const Corpus* corpus = nullptr;
    const Bm25Index* bm25 = nullptr;
    const VectorIndex* text_index = nullptr;
    const VectorIndex* image_index = nullptr;
    const KnowledgeGraph* graph = nullptr;
    EmbeddingProvider* text_provider = nullptr;
    EmbeddingProvider* image_provider = nullptr;
};

RetrievalResult bm25_search(const RetrievalContext& ctx, const std::string& query, int k);

RetrievalResult dense_search(const RetrievalContext& ctx, const std::string& query, int k,
                             const std::optional<std::set<Modality>>& modality_filter =
                                 std::nullopt);

// Reciprocal rank fusion: score(c) = sum over rankings of 1/(k_rrf + rank).
RetrievalResult rrf_fuse(const std::vector<RetrievalResult>& rankings, int k_rrf, int final_k);

// Lexical graph retriever: seeds are chunks whose entity set intersects the
// query's extracted entities or tokens; candidates score lambda^depth.
RetrievalResult graph_retrieve(const RetrievalContext& ctx, const std::string& query,
                               const FusionParams& params);

// Hybrid fusion: dense seeds scored alpha*(cos+1)/2 plus graph closure scored
// beta*lambda^depth; candidates outside the seed set carry no vector term
// unless exhaustive_vector_scores is set.
RetrievalResult maha_retrieve(const RetrievalContext& ctx, const std::string& query,
                              const FusionParams& params);

// Dispatch by retriever id: maha | bm25 | dense | image | bm25+dense | graph.
RetrievalResult run_retriever(const RetrievalContext& ctx, const std::string& retriever_id,
                              const std::string& query, const FusionParams& params);

const std::vector<std::string>& known_retrievers();

} // namespace maha
