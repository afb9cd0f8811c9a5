#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "maha/errors.hpp"
#include "maha/generate.hpp"
#include "maha/text.hpp"
#include "support/fixtures.hpp"

using namespace maha;

namespace {

struct GenWorld {
    Corpus corpus;
    KnowledgeGraph graph;

    GenWorld() {
        corpus.corpus_id = "gen";
        corpus.documents["d"] = {"d", "", ""};
        Chunk t0;
        t0.chunk_id = "t0";
        t0.doc_id = "d";
        t0.modality = Modality::text;
        t0.order_index = 0;
        t0.content = "Alpha is blue. Beta is red.";
        t0.summary = "colors";
        Chunk b1;
        b1.chunk_id = "b1";
        b1.doc_id = "d";
        b1.modality = Modality::table;
        b1.order_index = 1;
        b1.content = "<table><tr><td>beta</td><td>red</td></tr></table>";
        b1.summary = "Table with 1 rows and 2 columns: beta red";
        corpus.chunks = {t0, b1};
        graph = build_graph(corpus);
    }

    RetrievalResult result(std::vector<std::string> ids) const {
        RetrievalResult r;
        r.retriever_id = "test";
        double score = 1.0;
        for (auto& id : ids) {
            r.hits.push_back({id, score, {}, {}, static_cast<int>(r.hits.size() + 1)});
            score -= 0.1;
        }
        return r;
    }
};

} // namespace

TEST_CASE("single text hit renders verbatim with no graph notes") {
    GenWorld world;
    auto ctx = assemble_context("what is beta", world.result({"t0"}), world.corpus,
                                world.graph, 1000);
    REQUIRE(ctx.evidence.size() == 1);
    CHECK(ctx.evidence[0].rendered == "Alpha is blue. Beta is red.");
    CHECK(ctx.graph_notes.empty());
}

TEST_CASE("graph notes list edges among included evidence only") {
    GenWorld world;
    auto ctx = assemble_context("what is beta", world.result({"t0", "b1"}), world.corpus,
                                world.graph, 1000);
    REQUIRE(ctx.evidence.size() == 2);
    REQUIRE(ctx.graph_notes.size() == 1);
    CHECK(ctx.graph_notes[0] == "t0 HAS_TABLE b1");
}

TEST_CASE("budget forces summary, then drops") {
    GenWorld world;
    // prompt overhead plus full content exceeds 40 tokens, the summary fits
    auto ctx = assemble_context("beta", world.result({"t0"}), world.corpus, world.graph, 40);
    REQUIRE(ctx.evidence.size() == 1);
    CHECK(ctx.evidence[0].rendered == "colors");
    CHECK(count_tokens(render_prompt(ctx)) <= 40);

    // nothing fits in a tiny budget
    auto tiny = assemble_context("beta", world.result({"t0"}), world.corpus, world.graph, 5);
    CHECK(tiny.evidence.empty());
}

TEST_CASE("budget invariant holds across budgets") {
    GenWorld world;
    // budgets below the fixed prompt overhead admit no evidence at all
    auto floor_ctx = assemble_context("what is beta red", world.result({"t0", "b1"}),
                                      world.corpus, world.graph, 10);
    CHECK(floor_ctx.evidence.empty());

    for (int budget : {40, 60, 100, 400}) {
        auto ctx = assemble_context("what is beta red", world.result({"t0", "b1"}),
                                    world.corpus, world.graph, budget);
        CHECK(count_tokens(render_prompt(ctx)) <= static_cast<std::size_t>(budget));
        std::set<std::string> ids;
        for (const auto& e : ctx.evidence) ids.insert(e.chunk_id);
        for (const auto& note : ctx.graph_notes) {
            CHECK(ids.count(note.substr(0, note.find(' '))) == 1);
            CHECK(ids.count(note.substr(note.rfind(' ') + 1)) == 1);
        }
    }
}

TEST_CASE("prompt rendering is byte-stable") {
    GenWorld world;
    auto ctx = assemble_context("what is beta", world.result({"t0", "b1"}), world.corpus,
                                world.graph, 1000);
    const std::string p1 = render_prompt(ctx);
    const std::string p2 = render_prompt(ctx);
    CHECK(p1 == p2);
    CHECK(p1.find("[maha-prompt-v1]") == 0);
    CHECK(p1.find("Graph relations:") != std::string::npos);
    CHECK(p1.find("[cite:chunk_id]") != std::string::npos);
    CHECK(p1.find("Question: what is beta") != std::string::npos);
}

TEST_CASE("sentence splitting") {
    CHECK(split_sentences("Alpha is blue. Beta is red.") ==
          std::vector<std::string>{"Alpha is blue.", "Beta is red."});
    CHECK(split_sentences("Really?! yes") == std::vector<std::string>{"Really?!", "yes"});
    CHECK(split_sentences("pi is 3.14 ok") == std::vector<std::string>{"pi is 3.14 ok"});
    CHECK(split_sentences("").empty());
}

TEST_CASE("stub answer picks the sentence with maximal query overlap") {
    GenWorld world;
    auto ctx = assemble_context("what color is beta", world.result({"t0"}), world.corpus,
                                world.graph, 1000);
    auto answer = generate_answer(ctx);
    CHECK(answer.text == "Beta is red.");
    CHECK(answer.cited_chunk_ids == std::vector<std::string>{"t0"});
    CHECK(answer.modalities_used == std::set<Modality>{Modality::text});
    CHECK(answer.provider_id == "stub-extractive-v1");

    // determinism
    auto again = generate_answer(ctx);
    CHECK(again.text == answer.text);
    CHECK(again.cited_chunk_ids == answer.cited_chunk_ids);

    // the answer is a substring of the rendered evidence
    CHECK(ctx.evidence[0].rendered.find(answer.text) != std::string::npos);
}

TEST_CASE("stub with empty evidence refuses") {
    GenWorld world;
    auto ctx = assemble_context("anything", world.result({}), world.corpus, world.graph, 1000);
    auto answer = generate_answer(ctx);
    CHECK(answer.text == "No evidence retrieved.");
    CHECK(answer.cited_chunk_ids.empty());
    CHECK(answer.modalities_used.empty());
}

TEST_CASE("remote generation round-trips citations") {
    httplib::Server server;
    server.Post("/v1/generate", [](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        CHECK(body.at("prompt").get<std::string>().find("[maha-prompt-v1]") == 0);
        nlohmann::json out;
        out["text"] = "Beta is red [cite:t0] and the table agrees [cite:b1].";
        res.set_content(out.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    GenWorld world;
    auto ctx = assemble_context("what is beta", world.result({"t0", "b1"}), world.corpus,
                                world.graph, 1000);
    RemoteGenerationConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    HttpGenerationClient client(config);
    auto answer = generate_answer(ctx, &client);
    CHECK(answer.warning.empty());
    CHECK(answer.cited_chunk_ids == std::vector<std::string>{"b1", "t0"});
    CHECK(answer.modalities_used == std::set<Modality>{Modality::text, Modality::table});

    server.stop();
    worker.join();
}

TEST_CASE("unknown cited ids surface as a warning with no citations") {
    httplib::Server server;
    server.Post("/v1/generate", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"text":"see [cite:ghost]"})", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    GenWorld world;
    auto ctx = assemble_context("q", world.result({"t0"}), world.corpus, world.graph, 1000);
    RemoteGenerationConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    HttpGenerationClient client(config);
    auto answer = generate_answer(ctx, &client);
    CHECK(!answer.warning.empty());
    CHECK(answer.cited_chunk_ids.empty());

    server.stop();
    worker.join();
}

TEST_CASE("transport failure raises provider_error") {
    GenWorld world;
    auto ctx = assemble_context("q", world.result({"t0"}), world.corpus, world.graph, 1000);
    RemoteGenerationConfig config;
    config.base_url = "http://127.0.0.1:9";
    config.timeout_sec = 1;
    HttpGenerationClient client(config);
    CHECK_THROWS_AS(generate_answer(ctx, &client), provider_error);
}

TEST_CASE("image evidence renders its summary") {
    Corpus corpus;
    corpus.corpus_id = "img";
    corpus.documents["d"] = {"d", "", ""};
    Chunk t;
    t.chunk_id = "t";
    t.doc_id = "d";
    t.modality = Modality::text;
    t.order_index = 0;
    t.content = "see the figure";
    t.summary = t.content;
    Chunk i;
    i.chunk_id = "i";
    i.doc_id = "d";
    i.modality = Modality::image;
    i.order_index = 1;
    i.content = "aGVsbG8=";
    i.caption = "a flow chart";
    i.summary = "Image: a flow chart";
    corpus.chunks = {t, i};
    auto graph = build_graph(corpus);

    RetrievalResult r;
    r.hits = {{"i", 1.0, {}, {}, 1}};
    auto ctx = assemble_context("flow", r, corpus, graph, 1000);
    REQUIRE(ctx.evidence.size() == 1);
    CHECK(ctx.evidence[0].rendered == "Image: a flow chart");
    CHECK(ctx.evidence[0].rendered.find("aGVsbG8=") == std::string::npos);
}
