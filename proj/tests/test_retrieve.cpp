#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "maha/errors.hpp"
#include "maha/retrieve.hpp"
#include "maha/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace maha;
using fixtures::raw_embedding;

namespace {

Corpus two_chunk_corpus(const std::string& a, const std::string& b) {
    Corpus c;
    c.corpus_id = "two";
    c.documents["d"] = {"d", "", ""};
    Chunk c0;
    c0.chunk_id = "d:0000";
    c0.doc_id = "d";
    c0.modality = Modality::text;
    c0.order_index = 0;
    c0.content = a;
    c0.summary = a;
    Chunk c1 = c0;
    c1.chunk_id = "d:0001";
    c1.order_index = 1;
    c1.content = b;
    c1.summary = b;
    c.chunks = {c0, c1};
    return c;
}

void check_result_invariants(const RetrievalResult& result) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < result.hits.size(); ++i) {
        CHECK(result.hits[i].rank == static_cast<int>(i + 1));
        CHECK(seen.insert(result.hits[i].chunk_id).second);
        if (i > 0) {
            const auto& prev = result.hits[i - 1];
            const auto& curr = result.hits[i];
            const bool ordered = prev.fused_score > curr.fused_score ||
                                 (prev.fused_score == curr.fused_score &&
                                  prev.chunk_id < curr.chunk_id);
            CHECK(ordered);
        }
    }
}

} // namespace

TEST_CASE("bm25 single-chunk corpus scores the stated formula") {
    Corpus c = two_chunk_corpus("a", "b");
    c.chunks.pop_back();
    auto index = Bm25Index::build(c);
    auto result = index.search("a", 5);
    REQUIRE(result.hits.size() == 1);
    // N=1, df=1, tf=1, |d|=avgdl: idf = ln((1-1+0.5)/1.5 + 1) = ln(4/3),
    // term factor = 2.2/2.2 = 1
    CHECK(result.hits[0].fused_score == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("a term absent from every chunk retrieves nothing") {
    auto index = Bm25Index::build(two_chunk_corpus("alpha beta", "gamma"));
    CHECK(index.search("zzz", 5).hits.empty());
}

TEST_CASE("bm25 matches the scalar oracle on the two-chunk example") {
    auto corpus = two_chunk_corpus("a b", "a a b b");
    auto index = Bm25Index::build(corpus);
    auto result = index.search("a", 5);
    REQUIRE(result.hits.size() == 2);

    const std::vector<std::vector<std::string>> tokens = {{"a", "b"}, {"a", "a", "b", "b"}};
    const double s0 = oracles::bm25_ref({"a"}, tokens, 0);
    const double s1 = oracles::bm25_ref({"a"}, tokens, 1);
    CHECK(s1 > s0); // higher tf wins despite the length penalty
    CHECK(result.hits[0].chunk_id == "d:0001");
    CHECK(result.hits[0].fused_score == doctest::Approx(s1).epsilon(1e-12));
    CHECK(result.hits[1].fused_score == doctest::Approx(s0).epsilon(1e-12));
}

TEST_CASE("bm25 rejects an empty corpus and duplicated query terms count once") {
    CHECK_THROWS_AS(Bm25Index::build(Corpus{}), invalid_argument_error);
    auto index = Bm25Index::build(two_chunk_corpus("a b", "b c"));
    CHECK(index.score("a a a", "d:0000") == index.score("a", "d:0000"));
}

TEST_CASE("rrf examples") {
    RetrievalResult r1;
    r1.hits = {{"x", 9.0, {}, {}, 1}, {"y", 5.0, {}, {}, 2}};
    RetrievalResult r2;
    r2.hits = {{"x", 0.9, {}, {}, 1}, {"z", 0.5, {}, {}, 2}};

    auto fused = rrf_fuse({r1, r2}, 60, 10);
    REQUIRE(fused.hits.size() == 3);
    CHECK(fused.hits[0].chunk_id == "x");
    CHECK(fused.hits[0].fused_score == doctest::Approx(2.0 / 61.0).epsilon(1e-12));
    // y and z are both rank-2 singletons: 1/62, tie broken by id
    CHECK(fused.hits[1].chunk_id == "y");
    CHECK(fused.hits[1].fused_score == doctest::Approx(1.0 / 62.0).epsilon(1e-12));
    CHECK(fused.hits[2].chunk_id == "z");

    auto single = rrf_fuse({r1}, 60, 10);
    REQUIRE(single.hits.size() == 2);
    CHECK(single.hits[0].chunk_id == "x");
    CHECK(single.hits[1].chunk_id == "y");

    CHECK_THROWS_AS(rrf_fuse({}, 60, 10), invalid_argument_error);
}

namespace {

// Tiny controlled world: chunk A is the only dense seed, B hangs off it
// through HAS_TABLE. The provider pins the query vector.
struct MiniWorld {
    Corpus corpus;
    KnowledgeGraph graph;
    VectorIndex index;
    Bm25Index bm25;
    fixtures::FixedProvider provider;

    MiniWorld()
        : provider(2, {{"the query", {1.0f, 0.0f}}}) {
        corpus.corpus_id = "mini";
        corpus.documents["d"] = {"d", "", ""};
        Chunk a;
        a.chunk_id = "A";
        a.doc_id = "d";
        a.modality = Modality::text;
        a.order_index = 0;
        a.content = "anchor text";
        a.summary = a.content;
        Chunk b;
        b.chunk_id = "B";
        b.doc_id = "d";
        b.modality = Modality::table;
        b.order_index = 1;
        b.content = "<table><tr><td>v</td></tr></table>";
        b.summary = "Table with 1 rows and 1 columns: v";
        corpus.chunks = {a, b};

        graph = build_graph(corpus);
        std::vector<IndexedChunk> entries;
        entries.push_back({"A", Modality::text, raw_embedding({0.8f, 0.6f})});
        entries.push_back({"B", Modality::table, raw_embedding({0.0f, 1.0f})});
        index = VectorIndex::build(std::move(entries), graph.snapshot_id(), "fixed-test");
        bm25 = Bm25Index::build(corpus);
    }

    RetrievalContext context() {
        RetrievalContext ctx;
        ctx.corpus = &corpus;
        ctx.bm25 = &bm25;
        ctx.text_index = &index;
        ctx.graph = &graph;
        ctx.text_provider = &provider;
        return ctx;
    }
};

} // namespace

TEST_CASE("maha fuses the vector and graph terms as specified") {
    MiniWorld world;
    FusionParams params;
    params.seed_k = 1;
    params.depth = 1;
    params.final_k = 10;

    auto result = maha_retrieve(world.context(), "the query", params);
    REQUIRE(result.hits.size() == 2);

    // seed A: cosine 0.8 -> normalized 0.9 -> 0.7*0.9 + 0.3*1 = 0.93
    CHECK(result.hits[0].chunk_id == "A");
    CHECK(result.hits[0].fused_score == doctest::Approx(0.93).epsilon(1e-6));
    CHECK(result.hits[0].vector_score == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(result.hits[0].graph_depth == 0);

    // graph-only B at depth 1: 0.7*0 + 0.3*0.5 = 0.15
    CHECK(result.hits[1].chunk_id == "B");
    CHECK(result.hits[1].fused_score == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(!result.hits[1].vector_score.has_value());
    CHECK(result.hits[1].graph_depth == 1);

    check_result_invariants(result);
}

TEST_CASE("exhaustive mode scores graph-only candidates by cosine") {
    MiniWorld world;
    FusionParams params;
    params.seed_k = 1;
    params.depth = 1;
    params.final_k = 10;
    params.exhaustive_vector_scores = true;

    auto result = maha_retrieve(world.context(), "the query", params);
    REQUIRE(result.hits.size() == 2);
    // B is orthogonal to the query: 0.7*(0+1)/2 + 0.3*0.5 = 0.5
    CHECK(result.hits[1].chunk_id == "B");
    CHECK(result.hits[1].fused_score == doctest::Approx(0.5).epsilon(1e-9));
    REQUIRE(result.hits[1].vector_score.has_value());
    CHECK(*result.hits[1].vector_score == doctest::Approx(0.0));
}

TEST_CASE("fusion params validate their ranges") {
    FusionParams params;
    params.alpha = 0;
    params.beta = 0;
    CHECK_THROWS_AS(params.validate(), invalid_argument_error);
    params = {};
    params.lambda = 0;
    CHECK_THROWS_AS(params.validate(), invalid_argument_error);
    params = {};
    params.lambda = 1.5;
    CHECK_THROWS_AS(params.validate(), invalid_argument_error);
    params = {};
    params.seed_k = 0;
    CHECK_THROWS_AS(params.validate(), invalid_argument_error);
    params = {};
    params.depth = -1;
    CHECK_THROWS_AS(params.validate(), invalid_argument_error);
    params = {};
    params.allowed_edges.clear();
    CHECK_THROWS_AS(params.validate(), invalid_argument_error);
    CHECK_NOTHROW(FusionParams{}.validate());
}

TEST_CASE("maha rejects mismatched snapshots") {
    MiniWorld world;
    auto other = KnowledgeGraph::create(world.graph.nodes(), world.graph.edges(), "different");
    auto ctx = world.context();
    ctx.graph = &other;
    FusionParams params;
    CHECK_THROWS_AS(maha_retrieve(ctx, "the query", params), invalid_argument_error);
}

TEST_CASE("graph retriever seeds lexically and decays by depth") {
    SourceDocument doc;
    doc.doc_id = "acme";
    SourceBlock p{BlockKind::paragraph, "Acme Corp posted gains.", {}, "", {}, {}};
    SourceBlock t{BlockKind::table, "", {{"q1", "q2"}}, "", {}, {}};
    doc.blocks = {p, t};
    auto corpus = fixtures::corpus_from_documents({doc}, "c");
    auto graph = build_graph(corpus);

    RetrievalContext ctx;
    ctx.corpus = &corpus;
    ctx.graph = &graph;

    FusionParams d0;
    d0.depth = 0;
    d0.final_k = 10;
    auto only_seed = graph_retrieve(ctx, "What about Acme Corp?", d0);
    REQUIRE(only_seed.hits.size() == 1);
    CHECK(only_seed.hits[0].chunk_id == "acme:0000");
    CHECK(only_seed.hits[0].fused_score == doctest::Approx(1.0));
    CHECK(only_seed.hits[0].graph_depth == 0);

    FusionParams d1;
    d1.depth = 1;
    d1.final_k = 10;
    auto with_table = graph_retrieve(ctx, "What about Acme Corp?", d1);
    REQUIRE(with_table.hits.size() == 2);
    CHECK(with_table.hits[1].chunk_id == "acme:0001");
    CHECK(with_table.hits[1].fused_score == doctest::Approx(0.5));
    CHECK(with_table.hits[1].rank == 2);

    auto nothing = graph_retrieve(ctx, "completely unrelated words", d1);
    CHECK(nothing.hits.empty());
}

TEST_CASE("dense search finds exact text matches at rank 1") {
    auto corpus = two_chunk_corpus("alpha beta gamma", "delta epsilon zeta");
    auto graph = build_graph(corpus);
    DeterministicProvider provider(64, 5);
    std::vector<IndexedChunk> entries;
    for (const auto& chunk : corpus.chunks) {
        entries.push_back({chunk.chunk_id, chunk.modality, embed_chunk(chunk, provider)});
    }
    auto index = VectorIndex::build(std::move(entries), graph.snapshot_id(),
                                    provider.provider_id());

    RetrievalContext ctx;
    ctx.corpus = &corpus;
    ctx.text_index = &index;
    ctx.graph = &graph;
    ctx.text_provider = &provider;

    auto result = dense_search(ctx, "alpha beta gamma", 2);
    REQUIRE(result.hits.size() == 2);
    CHECK(result.hits[0].chunk_id == "d:0000");
    CHECK(*result.hits[0].vector_score == doctest::Approx(1.0).epsilon(1e-6));

    // k larger than the corpus returns everything, ranked
    auto all = dense_search(ctx, "alpha", 10);
    CHECK(all.hits.size() == 2);
    check_result_invariants(all);
}

TEST_CASE("beta=0 reduces maha to the dense ranking over seeds") {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 8; ++round) {
        auto corpus = fixtures::random_corpus(rng, 4);
        if (corpus.chunks.empty()) continue;
        auto graph = build_graph(corpus);
        DeterministicProvider provider(48, 11);
        std::vector<IndexedChunk> entries;
        for (const auto& chunk : corpus.chunks) {
            entries.push_back({chunk.chunk_id, chunk.modality, embed_chunk(chunk, provider)});
        }
        auto index = VectorIndex::build(std::move(entries), graph.snapshot_id(),
                                        provider.provider_id());

        RetrievalContext ctx;
        ctx.corpus = &corpus;
        ctx.text_index = &index;
        ctx.graph = &graph;
        ctx.text_provider = &provider;

        const std::string query = random_query(rng, 4);

        FusionParams params;
        params.beta = 0.0;
        params.seed_k = 5;
        params.depth = 2;
        params.final_k = static_cast<int>(corpus.chunks.size());
        auto fused = maha_retrieve(ctx, query, params);
        auto dense = dense_search(ctx, query, params.seed_k);

        // restrict the fused ranking to the seed set: order must match dense
        std::set<std::string> seed_ids;
        for (const auto& h : dense.hits) seed_ids.insert(h.chunk_id);
        std::vector<std::string> fused_seeds;
        for (const auto& h : fused.hits) {
            if (seed_ids.count(h.chunk_id)) fused_seeds.push_back(h.chunk_id);
        }
        std::vector<std::string> dense_order;
        for (const auto& h : dense.hits) dense_order.push_back(h.chunk_id);
        CHECK(fused_seeds == dense_order);
        check_result_invariants(fused);
    }
}

TEST_CASE("depth=0, beta=0, seed_k=k reproduces dense_search exactly") {
    std::mt19937_64 rng(77);
    for (int round = 0; round < 8; ++round) {
        auto corpus = fixtures::random_corpus(rng, 3);
        if (corpus.chunks.empty()) continue;
        auto graph = build_graph(corpus);
        DeterministicProvider provider(32, 13);
        std::vector<IndexedChunk> entries;
        for (const auto& chunk : corpus.chunks) {
            entries.push_back({chunk.chunk_id, chunk.modality, embed_chunk(chunk, provider)});
        }
        auto index = VectorIndex::build(std::move(entries), graph.snapshot_id(),
                                        provider.provider_id());

        RetrievalContext ctx;
        ctx.corpus = &corpus;
        ctx.text_index = &index;
        ctx.graph = &graph;
        ctx.text_provider = &provider;

        const std::string query = random_query(rng, 3);
        const int k = 1 + static_cast<int>(rng() % 6);

        FusionParams params;
        params.beta = 0.0;
        params.depth = 0;
        params.seed_k = k;
        params.final_k = k;
        auto fused = maha_retrieve(ctx, query, params);
        auto dense = dense_search(ctx, query, k);

        REQUIRE(fused.hits.size() == dense.hits.size());
        for (std::size_t i = 0; i < fused.hits.size(); ++i) {
            CHECK(fused.hits[i].chunk_id == dense.hits[i].chunk_id);
            CHECK(fused.hits[i].rank == dense.hits[i].rank);
            CHECK(*fused.hits[i].vector_score == *dense.hits[i].vector_score);
        }
    }
}

TEST_CASE("maha candidates cover seeds and their allowed neighbors") {
    std::mt19937_64 rng(31);
    for (int round = 0; round < 6; ++round) {
        auto corpus = fixtures::random_corpus(rng, 3);
        if (corpus.chunks.empty()) continue;
        auto graph = build_graph(corpus);
        DeterministicProvider provider(32, 17);
        std::vector<IndexedChunk> entries;
        for (const auto& chunk : corpus.chunks) {
            entries.push_back({chunk.chunk_id, chunk.modality, embed_chunk(chunk, provider)});
        }
        auto index = VectorIndex::build(std::move(entries), graph.snapshot_id(),
                                        provider.provider_id());

        RetrievalContext ctx;
        ctx.corpus = &corpus;
        ctx.text_index = &index;
        ctx.graph = &graph;
        ctx.text_provider = &provider;

        const std::string query = random_query(rng, 3);
        FusionParams params;
        params.seed_k = 4;
        params.depth = 1;
        params.final_k = static_cast<int>(corpus.chunks.size()) + 10;

        auto fused = maha_retrieve(ctx, query, params);
        std::set<std::string> candidate_ids;
        for (const auto& h : fused.hits) candidate_ids.insert(h.chunk_id);

        auto dense = dense_search(ctx, query, params.seed_k);
        std::vector<std::string> seeds;
        for (const auto& h : dense.hits) {
            seeds.push_back(h.chunk_id);
            CHECK(candidate_ids.count(h.chunk_id) == 1);
        }
        for (const auto& [id, depth] : expand(graph, seeds, params.allowed_edges, 1)) {
            CHECK(candidate_ids.count(id) == 1);
        }
    }
}

TEST_CASE("cross-modal evidence linked by HAS_TABLE is always a candidate") {
    MiniWorld world;
    FusionParams params;
    params.seed_k = 1;
    params.depth = 2;
    params.final_k = 5;
    auto result = maha_retrieve(world.context(), "the query", params);
    bool found = false;
    for (const auto& h : result.hits) {
        if (h.chunk_id == "B") found = true;
    }
    CHECK(found);
}

TEST_CASE("run_retriever dispatches every known id") {
    MiniWorld world;
    FusionParams params;
    params.seed_k = 1;
    params.final_k = 5;
    for (const auto& id : known_retrievers()) {
        auto result = run_retriever(world.context(), id, "the query", params);
        CHECK(result.retriever_id == id);
        check_result_invariants(result);
    }
    CHECK_THROWS_AS(run_retriever(world.context(), "nope", "q", params),
                    invalid_argument_error);
}
