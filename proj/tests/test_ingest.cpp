#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "maha/base64.hpp"
#include "maha/errors.hpp"
#include "maha/ingest.hpp"
#include "maha/synth.hpp"
#include "maha/text.hpp"
#include "support/fixtures.hpp"

using namespace maha;

TEST_CASE("chunk_text span examples") {
    CHECK(chunk_text(10, {10, 0}) == std::vector<TokenSpan>{{0, 10}});
    CHECK(chunk_text(0, {10, 0}).empty());
    CHECK(chunk_text(500, {200, 50}) ==
          std::vector<TokenSpan>{{0, 200}, {150, 350}, {300, 500}});
    CHECK(chunk_text(600, {256, 32}) ==
          std::vector<TokenSpan>{{0, 256}, {224, 480}, {448, 600}});
}

TEST_CASE("chunk_text covers every token and overlaps consistently") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> n_pick(0, 2000);
    std::uniform_int_distribution<int> max_pick(1, 300);
    for (int round = 0; round < 200; ++round) {
        const int n = n_pick(rng);
        const int max = max_pick(rng);
        std::uniform_int_distribution<int> ov_pick(0, max - 1);
        const int overlap = ov_pick(rng);
        auto spans = chunk_text(static_cast<std::size_t>(n), {max, overlap});
        std::vector<int> cover(static_cast<std::size_t>(n), 0);
        for (std::size_t i = 0; i < spans.size(); ++i) {
            CHECK(spans[i].begin < spans[i].end);
            CHECK(spans[i].end <= static_cast<std::size_t>(n));
            for (std::size_t t = spans[i].begin; t < spans[i].end; ++t) ++cover[t];
            if (i + 1 < spans.size()) {
                CHECK(spans[i].end - spans[i + 1].begin == static_cast<std::size_t>(overlap));
            }
        }
        for (int covered : cover) CHECK(covered >= 1);
    }
}

TEST_CASE("chunk_text rejects bad policies") {
    CHECK_THROWS_AS(chunk_text(5, {0, 0}), invalid_argument_error);
    CHECK_THROWS_AS(chunk_text(5, {10, 10}), invalid_argument_error);
}

TEST_CASE("canonicalize_table examples") {
    CHECK(canonicalize_table({{"a"}}) == "<table><tr><td>a</td></tr></table>");
    CHECK(canonicalize_table({{"x", "y"}}) ==
          "<table><tr><td>x</td><td>y</td></tr></table>");
    CHECK(canonicalize_table({{"a<b"}}) == "<table><tr><td>a&lt;b</td></tr></table>");
    CHECK_THROWS_AS(canonicalize_table({{"a", "b"}, {"c"}}), invalid_argument_error);
    CHECK_THROWS_AS(canonicalize_table({}), invalid_argument_error);
}

TEST_CASE("table html survives escape round-trips") {
    const std::vector<std::vector<std::string>> grid = {{"a<b", "c&d"}, {">e", "plain"}};
    const std::string html = canonicalize_table(grid);
    CHECK(is_canonical_table_html(html));
    CHECK(table_cells_from_html(html) == grid);
    CHECK(flatten_table_html(html) == "a<b c&d >e plain");
}

TEST_CASE("template summaries per modality") {
    TemplateSummarizer summarizer;

    Chunk eq;
    eq.modality = Modality::equation;
    eq.content = "E=mc^2";
    CHECK(summarize_chunk(eq, summarizer) == "Equation: E=mc^2");

    Chunk tb;
    tb.modality = Modality::table;
    tb.content = canonicalize_table({{"x", "y"}});
    CHECK(summarize_chunk(tb, summarizer) == "Table with 1 rows and 2 columns: x y");

    Chunk img;
    img.modality = Modality::image;
    img.content = base64_encode("png");
    CHECK(summarize_chunk(img, summarizer) == "Image: (no caption)");
    img.caption = "Figure 1: flow";
    CHECK(summarize_chunk(img, summarizer) == "Image: Figure 1: flow");

    Chunk text;
    text.modality = Modality::text;
    CHECK_THROWS_AS(summarize_chunk(text, summarizer), invalid_argument_error);
}

TEST_CASE("three-block document becomes TEXT TABLE TEXT") {
    TemplateSummarizer summarizer;
    auto chunks = ingest_document(fixtures::text_table_text_doc(), {}, summarizer);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].modality == Modality::text);
    CHECK(chunks[1].modality == Modality::table);
    CHECK(chunks[2].modality == Modality::text);
    CHECK(chunks[0].order_index == 0);
    CHECK(chunks[1].order_index == 1);
    CHECK(chunks[2].order_index == 2);
    CHECK(chunks[0].content == "alpha beta");
    CHECK(chunks[2].content == "gamma");
    CHECK(chunks[1].content == "<table><tr><td>x</td><td>y</td></tr></table>");
    CHECK(chunks[0].chunk_id == "d0:0000");
}

TEST_CASE("image block carries caption and template summary") {
    SourceDocument doc;
    doc.doc_id = "d1";
    SourceBlock p{BlockKind::paragraph, "intro text", {}, "", {}, {}};
    SourceBlock img{BlockKind::image, "Figure 1: flow", {}, base64_encode("img"), {}, {}};
    doc.blocks = {p, img};
    TemplateSummarizer summarizer;
    auto chunks = ingest_document(doc, {}, summarizer);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[1].modality == Modality::image);
    CHECK(chunks[1].caption == "Figure 1: flow");
    CHECK(chunks[1].summary == "Image: Figure 1: flow");
    CHECK(chunks[1].content == base64_encode("img"));
}

TEST_CASE("a 600-token paragraph splits into three windows") {
    SourceDocument doc;
    doc.doc_id = "d2";
    std::string text;
    for (int i = 0; i < 600; ++i) {
        if (!text.empty()) text.push_back(' ');
        text += "w" + std::to_string(i);
    }
    doc.blocks = {{BlockKind::paragraph, text, {}, "", {}, {}}};
    TemplateSummarizer summarizer;
    auto chunks = ingest_document(doc, {256, 32}, summarizer);
    REQUIRE(chunks.size() == 3);
    auto first_token = [](const Chunk& c) { return tokenize(c.content).front(); };
    auto last_token = [](const Chunk& c) { return tokenize(c.content).back(); };
    CHECK(first_token(chunks[0]) == "w0");
    CHECK(last_token(chunks[0]) == "w255");
    CHECK(first_token(chunks[1]) == "w224");
    CHECK(last_token(chunks[1]) == "w479");
    CHECK(first_token(chunks[2]) == "w448");
    CHECK(last_token(chunks[2]) == "w599");
}

TEST_CASE("headings fold into the following paragraph run") {
    SourceDocument doc;
    doc.doc_id = "d3";
    SourceBlock h{BlockKind::heading, "Results", {}, "", {}, {}};
    SourceBlock p{BlockKind::paragraph, "all good here", {}, "", {}, {}};
    doc.blocks = {h, p};
    TemplateSummarizer summarizer;
    auto chunks = ingest_document(doc, {}, summarizer);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].modality == Modality::text);
    CHECK(chunks[0].content == "Results\n\nall good here");
}

TEST_CASE("declared entities override rule-based extraction") {
    SourceDocument doc;
    doc.doc_id = "d4";
    SourceBlock p{BlockKind::paragraph, "the gdp rose", {}, "", std::vector<std::string>{"GDP"}, {}};
    doc.blocks = {p};
    TemplateSummarizer summarizer;
    auto chunks = ingest_document(doc, {}, summarizer);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].entities == std::vector<std::string>{"gdp"});
}

TEST_CASE("invalid blocks name their index") {
    TemplateSummarizer summarizer;
    SourceDocument doc;
    doc.doc_id = "d5";
    doc.blocks = {{BlockKind::paragraph, "ok", {}, "", {}, {}},
                  {BlockKind::image, "", {}, "", {}, {}}};
    CHECK_THROWS_WITH_AS(ingest_document(doc, {}, summarizer),
                         "document d5 block 1: missing data", invalid_argument_error);

    doc.blocks[1] = {BlockKind::table, "", {{"a"}, {"b", "c"}}, "", {}, {}};
    CHECK_THROWS_AS(ingest_document(doc, {}, summarizer), invalid_argument_error);
}

TEST_CASE("ingestion is deterministic and order-preserving") {
    std::mt19937_64 rng(11);
    TemplateSummarizer summarizer;
    for (int round = 0; round < 25; ++round) {
        auto doc = random_source_document(rng, "r" + std::to_string(round));
        auto a = ingest_document(doc, {}, summarizer);
        auto b = ingest_document(doc, {}, summarizer);
        CHECK(a == b);

        // modality sequence matches block kinds with headings folded and
        // paragraph runs possibly split
        std::vector<Modality> expect;
        for (const auto& block : doc.blocks) {
            switch (block.kind) {
            case BlockKind::paragraph:
            case BlockKind::heading:
                if (expect.empty() || expect.back() != Modality::text) {
                    expect.push_back(Modality::text);
                }
                break;
            case BlockKind::table: expect.push_back(Modality::table); break;
            case BlockKind::image: expect.push_back(Modality::image); break;
            case BlockKind::graph: expect.push_back(Modality::graph); break;
            case BlockKind::equation: expect.push_back(Modality::equation); break;
            }
        }
        std::vector<Modality> got;
        for (const auto& c : a) {
            if (c.modality == Modality::text && !got.empty() && got.back() == Modality::text) {
                continue; // split paragraph
            }
            got.push_back(c.modality);
        }
        CHECK(got == expect);

        // order_index contiguous
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].order_index == i);
    }
}

TEST_CASE("paragraph token coverage is exact after dedup") {
    TemplateSummarizer summarizer;
    SourceDocument doc;
    doc.doc_id = "cov";
    std::string text;
    for (int i = 0; i < 137; ++i) text += " tok" + std::to_string(i);
    doc.blocks = {{BlockKind::paragraph, text, {}, "", {}, {}}};
    auto chunks = ingest_document(doc, {32, 8}, summarizer);
    std::vector<std::string> reconstructed;
    for (const auto& c : chunks) {
        auto toks = tokenize(c.content);
        std::size_t skip = reconstructed.empty() ? 0 : 8;
        for (std::size_t i = skip; i < toks.size(); ++i) reconstructed.push_back(toks[i]);
    }
    CHECK(reconstructed == tokenize(text));
}

TEST_CASE("interchange round-trip") {
    fixtures::TempDir dir("ingest_io");
    std::mt19937_64 rng(3);
    auto doc = random_source_document(rng, "io0");
    doc.blocks[0].declared_entities = std::vector<std::string>{"Alpha Corp"};
    doc.blocks[0].page = 2;
    const auto path = dir.path() / "doc.jsonl";
    save_source_document(doc, path);
    auto back = load_source_document(path);
    CHECK(back.doc_id == doc.doc_id);
    REQUIRE(back.blocks.size() == doc.blocks.size());
    for (std::size_t i = 0; i < doc.blocks.size(); ++i) {
        CHECK(back.blocks[i].kind == doc.blocks[i].kind);
        CHECK(back.blocks[i].text == doc.blocks[i].text);
        CHECK(back.blocks[i].rows == doc.blocks[i].rows);
        CHECK(back.blocks[i].data == doc.blocks[i].data);
        CHECK(back.blocks[i].declared_entities == doc.blocks[i].declared_entities);
        CHECK(back.blocks[i].page == doc.blocks[i].page);
    }

    TemplateSummarizer summarizer;
    CHECK(ingest_document(back, {}, summarizer) == ingest_document(doc, {}, summarizer));
}
