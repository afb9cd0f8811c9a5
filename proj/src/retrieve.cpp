#include "maha/retrieve.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "maha/errors.hpp"
#include "maha/text.hpp"

namespace maha {

void FusionParams::validate() const {
    if (alpha < 0 || beta < 0) throw invalid_argument_error("alpha and beta must be >= 0");
    if (alpha + beta <= 0) throw invalid_argument_error("alpha + beta must be > 0");
    if (lambda <= 0 || lambda > 1) throw invalid_argument_error("lambda must be in (0, 1]");
    if (seed_k <= 0) throw invalid_argument_error("seed_k must be positive");
    if (depth < 0) throw invalid_argument_error("depth must be >= 0");
    if (final_k <= 0) throw invalid_argument_error("final_k must be positive");
    if (allowed_edges.empty()) throw invalid_argument_error("allowed_edges must be non-empty");
}

void finalize_hits(std::vector<RetrievedHit>& hits, int final_k) {
    std::sort(hits.begin(), hits.end(), [](const RetrievedHit& a, const RetrievedHit& b) {
        if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
        return a.chunk_id < b.chunk_id;
    });
    if (final_k >= 0 && hits.size() > static_cast<std::size_t>(final_k)) {
        hits.resize(static_cast<std::size_t>(final_k));
    }
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i + 1);
}

Bm25Index Bm25Index::build(const Corpus& corpus) {
    if (corpus.chunks.empty()) throw invalid_argument_error("bm25: empty corpus");
    Bm25Index index;
    long total_len = 0;
    for (const auto& c : corpus.chunks) {
        const std::string& basis = c.modality == Modality::text ? c.content : c.summary;
        auto tokens = tokenize(basis);
        std::map<std::string, int> counts;
        for (const auto& t : tokens) ++counts[t];
        for (const auto& [term, _] : counts) ++index.doc_freq_[term];
        index.chunk_ids_.push_back(c.chunk_id);
        index.term_counts_.push_back(std::move(counts));
        index.lengths_.push_back(static_cast<int>(tokens.size()));
        total_len += static_cast<long>(tokens.size());
    }
    index.avgdl_ = static_cast<double>(total_len) / static_cast<double>(corpus.chunks.size());
    return index;
}

namespace {

double bm25_idf(int n_chunks, int df) {
    return std::log((static_cast<double>(n_chunks) - df + 0.5) / (df + 0.5) + 1.0);
}

double bm25_term_score(double idf, int tf, int len, double avgdl) {
    const double k1 = Bm25Index::kK1;
    const double b = Bm25Index::kB;
    const double denom = tf + k1 * (1.0 - b + b * (avgdl > 0 ? len / avgdl : 0.0));
    return idf * (tf * (k1 + 1.0)) / denom;
}

} // namespace

RetrievalResult Bm25Index::search(const std::string& query, int k) const {
    if (k <= 0) throw invalid_argument_error("bm25: k must be positive");
    const auto query_tokens = tokenize(query);
    const std::set<std::string> terms(query_tokens.begin(), query_tokens.end());
    const int n = static_cast<int>(chunk_ids_.size());

    RetrievalResult result;
    result.retriever_id = "bm25";
    for (std::size_t i = 0; i < chunk_ids_.size(); ++i) {
        double score = 0.0;
        bool matched = false;
        for (const auto& term : terms) {
            auto tf_it = term_counts_[i].find(term);
            if (tf_it == term_counts_[i].end()) continue;
            matched = true;
            const int df = doc_freq_.at(term);
            score += bm25_term_score(bm25_idf(n, df), tf_it->second, lengths_[i], avgdl_);
        }
        if (matched) {
            result.hits.push_back({chunk_ids_[i], score, std::nullopt, std::nullopt, 0});
        }
    }
    finalize_hits(result.hits, k);
    return result;
}

double Bm25Index::score(const std::string& query, const std::string& chunk_id) const {
    const auto query_tokens = tokenize(query);
    const std::set<std::string> terms(query_tokens.begin(), query_tokens.end());
    const int n = static_cast<int>(chunk_ids_.size());
    for (std::size_t i = 0; i < chunk_ids_.size(); ++i) {
        if (chunk_ids_[i] != chunk_id) continue;
        double score = 0.0;
        for (const auto& term : terms) {
            auto tf_it = term_counts_[i].find(term);
            if (tf_it == term_counts_[i].end()) continue;
            const int df = doc_freq_.at(term);
            score += bm25_term_score(bm25_idf(n, df), tf_it->second, lengths_[i], avgdl_);
        }
        return score;
    }
    throw invalid_argument_error("bm25: unknown chunk_id " + chunk_id);
}

RetrievalResult bm25_search(const RetrievalContext& ctx, const std::string& query, int k) {
    if (!ctx.bm25) throw invalid_argument_error("bm25 index not available");
    return ctx.bm25->search(query, k);
}

namespace {

RetrievalResult hits_from_search(const std::vector<SearchHit>& raw, const std::string& retriever_id) {
    RetrievalResult result;
    result.retriever_id = retriever_id;
    for (const auto& h : raw) {
        result.hits.push_back({h.chunk_id, h.score, h.score, std::nullopt, h.rank});
    }
    return result;
}

} // namespace

RetrievalResult dense_search(const RetrievalContext& ctx, const std::string& query, int k,
                             const std::optional<std::set<Modality>>& modality_filter) {
    if (!ctx.text_index || !ctx.text_provider) {
        throw invalid_argument_error("dense: text index/provider not available");
    }
    if (k <= 0) throw invalid_argument_error("dense: k must be positive");

    const bool two_index = ctx.image_index != nullptr && ctx.image_provider != nullptr &&
                           ctx.image_index->size() > 0;

    // A filter entirely inside the image space goes straight to the image index.
    if (two_index && modality_filter &&
        std::all_of(modality_filter->begin(), modality_filter->end(), [](Modality m) {
            return m == Modality::image || m == Modality::graph;
        })) {
        const Embedding query_image = embed_text(query, *ctx.image_provider);
        return hits_from_search(ctx.image_index->search(query_image, k, modality_filter), "dense");
    }

    const Embedding query_text = embed_text(query, *ctx.text_provider);
    auto text_hits = ctx.text_index->size() > 0
                         ? ctx.text_index->search(query_text, k, modality_filter)
                         : std::vector<SearchHit>{};

    if (!two_index) {
        auto result = hits_from_search(text_hits, "dense");
        return result;
    }

    const Embedding query_image = embed_text(query, *ctx.image_provider);
    auto image_hits = ctx.image_index->search(query_image, k, modality_filter);

    // Scores live in different spaces; merge by rank.
    auto fused = rrf_fuse({hits_from_search(text_hits, "dense"),
                           hits_from_search(image_hits, "dense")},
                          60, k);
    fused.retriever_id = "dense";
    return fused;
}

RetrievalResult rrf_fuse(const std::vector<RetrievalResult>& rankings, int k_rrf, int final_k) {
    if (rankings.empty()) throw invalid_argument_error("rrf_fuse: need at least one ranking");
    if (k_rrf <= 0) throw invalid_argument_error("rrf_fuse: k_rrf must be positive");
    std::map<std::string, RetrievedHit> merged;
    for (const auto& ranking : rankings) {
        for (const auto& hit : ranking.hits) {
            auto& m = merged[hit.chunk_id];
            if (m.chunk_id.empty()) {
                m.chunk_id = hit.chunk_id;
                m.fused_score = 0.0;
            }
            m.fused_score += 1.0 / (static_cast<double>(k_rrf) + hit.rank);
            if (!m.vector_score && hit.vector_score) m.vector_score = hit.vector_score;
            if (!m.graph_depth && hit.graph_depth) m.graph_depth = hit.graph_depth;
        }
    }
    RetrievalResult result;
    result.retriever_id = "rrf";
    for (auto& [_, hit] : merged) result.hits.push_back(std::move(hit));
    finalize_hits(result.hits, final_k);
    return result;
}

namespace {

// Chunks whose entity set intersects the query's entities or tokens.
std::vector<std::string> lexical_seeds(const Corpus& corpus, const std::string& query) {
    std::set<std::string> probes;
    for (auto& e : extract_entities(query)) probes.insert(e);
    for (auto& t : tokenize(query)) probes.insert(t);

    std::vector<std::string> seeds;
    for (const auto& c : corpus.chunks) {
        for (const auto& e : c.entities) {
            if (probes.count(e)) {
                seeds.push_back(c.chunk_id);
                break;
            }
        }
    }
    std::sort(seeds.begin(), seeds.end());
    return seeds;
}

} // namespace

RetrievalResult graph_retrieve(const RetrievalContext& ctx, const std::string& query,
                               const FusionParams& params) {
    if (!ctx.corpus || !ctx.graph) throw invalid_argument_error("graph: corpus/graph not available");
    params.validate();

    RetrievalResult result;
    result.retriever_id = "graph";
    auto seeds = lexical_seeds(*ctx.corpus, query);
    if (seeds.empty()) return result;

    auto closure = expand(*ctx.graph, seeds, params.allowed_edges, params.depth);
    for (const auto& [chunk_id, depth] : closure) {
        result.hits.push_back({chunk_id, std::pow(params.lambda, depth), std::nullopt, depth, 0});
    }
    finalize_hits(result.hits, params.final_k);
    return result;
}

RetrievalResult maha_retrieve(const RetrievalContext& ctx, const std::string& query,
                              const FusionParams& params) {
    if (!ctx.corpus || !ctx.graph || !ctx.text_index) {
        throw invalid_argument_error("maha: corpus/graph/index not available");
    }
    params.validate();
    if (!ctx.text_index->snapshot_id().empty() && !ctx.graph->snapshot_id().empty() &&
        ctx.text_index->snapshot_id() != ctx.graph->snapshot_id()) {
        throw invalid_argument_error("maha: index snapshot " + ctx.text_index->snapshot_id() +
                                     " does not match graph snapshot " +
                                     ctx.graph->snapshot_id());
    }

    auto seed_result = dense_search(ctx, query, params.seed_k);

    std::unordered_map<std::string, double> seed_cosine;
    std::vector<std::string> seed_ids;
    for (const auto& hit : seed_result.hits) {
        seed_ids.push_back(hit.chunk_id);
        seed_cosine[hit.chunk_id] = hit.vector_score.value_or(0.0);
    }

    std::map<std::string, int> closure;
    if (!seed_ids.empty()) {
        closure = expand(*ctx.graph, seed_ids, params.allowed_edges, params.depth);
    }

    // Exhaustive mode looks up cosines for graph-only candidates as well.
    std::unordered_map<std::string, double> exhaustive_cosine;
    if (params.exhaustive_vector_scores && !closure.empty()) {
        const Embedding query_vec = embed_text(query, *ctx.text_provider);
        auto all = ctx.text_index->search(query_vec, static_cast<int>(ctx.text_index->size()));
        for (const auto& h : all) exhaustive_cosine[h.chunk_id] = h.score;
    }

    RetrievalResult result;
    result.retriever_id = "maha";
    for (const auto& [chunk_id, depth] : closure) {
        auto seed_it = seed_cosine.find(chunk_id);
        const bool is_seed = seed_it != seed_cosine.end();
        double cos = 0.0;
        bool has_cos = false;
        if (is_seed) {
            cos = seed_it->second;
            has_cos = true;
        } else if (params.exhaustive_vector_scores) {
            auto it = exhaustive_cosine.find(chunk_id);
            if (it != exhaustive_cosine.end()) {
                cos = it->second;
                has_cos = true;
            }
        }
        const double normalized_cos = has_cos ? (cos + 1.0) / 2.0 : 0.0;
        const double fused =
            params.alpha * normalized_cos + params.beta * std::pow(params.lambda, depth);
        RetrievedHit hit;
        hit.chunk_id = chunk_id;
        hit.fused_score = fused;
        if (has_cos) hit.vector_score = cos;
        hit.graph_depth = depth;
        result.hits.push_back(std::move(hit));
    }
    finalize_hits(result.hits, params.final_k);
    return result;
}

RetrievalResult run_retriever(const RetrievalContext& ctx, const std::string& retriever_id,
                              const std::string& query, const FusionParams& params) {
    params.validate();
    RetrievalResult result;
    if (retriever_id == "bm25") {
        result = bm25_search(ctx, query, params.final_k);
    } else if (retriever_id == "dense") {
        result = dense_search(ctx, query, params.final_k);
    } else if (retriever_id == "image") {
        result = dense_search(ctx, query, params.final_k,
                              std::set<Modality>{Modality::image, Modality::graph});
        result.retriever_id = "image";
    } else if (retriever_id == "bm25+dense") {
        auto bm25 = bm25_search(ctx, query, params.final_k);
        auto dense = dense_search(ctx, query, params.final_k);
        result = rrf_fuse({bm25, dense}, 60, params.final_k);
        result.retriever_id = "bm25+dense";
    } else if (retriever_id == "graph") {
        result = graph_retrieve(ctx, query, params);
    } else if (retriever_id == "maha") {
        result = maha_retrieve(ctx, query, params);
    } else {
        throw invalid_argument_error("unknown retriever: " + retriever_id);
    }
    return result;
}

const std::vector<std::string>& known_retrievers() {
    static const std::vector<std::string> ids = {"maha", "bm25", "dense",
                                                 "image", "bm25+dense", "graph"};
    return ids;
}

} // namespace maha
