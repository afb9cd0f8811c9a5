#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "support/fixtures.hpp"

// Drives the built binary end to end over the shipped fixtures.

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run(const std::string& args, const std::filesystem::path& capture) {
    const std::string cmd = std::string(MAHA_CLI_PATH) + " " + args + " > " +
                            capture.string() + " 2> " + capture.string() + ".err";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WEXITSTATUS(status);
    std::ifstream in(capture, std::ios::binary);
    result.out.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return result;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::string kFixtures = MAHA_FIXTURES_DIR;

} // namespace

TEST_CASE("ingest, build, query, eval pipeline") {
    fixtures::TempDir dir("cli");
    const auto capture = dir.path() / "capture.txt";
    const std::string config = " --config " + kFixtures + "/config.json ";

    auto ingest = run(config + "ingest " + kFixtures + "/docs -o " +
                          (dir.path() / "corpus.jsonl").string() + " --corpus-id fixtures",
                      capture);
    CHECK(ingest.exit_code == 0);

    auto build = run(config + "build " + (dir.path() / "corpus.jsonl").string() + " -o " +
                         (dir.path() / "snap").string(),
                     capture);
    CHECK(build.exit_code == 0);

    SUBCASE("query output matches the golden file") {
        auto query = run("query " + (dir.path() / "snap").string() +
                             " --retriever maha --k 3 --q \"When does flow peak below the "
                             "northern ridge?\"",
                         capture);
        CHECK(query.exit_code == 0);
        CHECK(query.out == slurp(kFixtures + "/golden/query_maha.jsonl"));
    }

    SUBCASE("query with answer emits an answer record") {
        auto query = run("query " + (dir.path() / "snap").string() +
                             " --retriever dense --k 2 --answer --q \"where is gauge "
                             "maintenance done?\"",
                         capture);
        CHECK(query.exit_code == 0);
        CHECK(query.out.find("\"record\":\"answer\"") != std::string::npos);
        CHECK(query.out.find("stub-extractive-v1") != std::string::npos);
    }

    SUBCASE("eval writes byte-identical reports on repeat runs") {
        const std::string eval_args = "eval " + (dir.path() / "snap").string() + " " +
                                      kFixtures + "/dataset.jsonl --retrievers "
                                      "maha,dense,bm25,graph -o ";
        auto eval1 = run(eval_args + (dir.path() / "r1").string(), capture);
        CHECK(eval1.exit_code == 0);
        auto eval2 = run(eval_args + (dir.path() / "r2").string(), capture);
        CHECK(eval2.exit_code == 0);
        CHECK(slurp(dir.path() / "r1.jsonl") == slurp(dir.path() / "r2.jsonl"));
        CHECK(slurp(dir.path() / "r1.txt") == slurp(dir.path() / "r2.txt"));
        CHECK(eval1.out == eval2.out);
        CHECK(eval1.out.find("maha") != std::string::npos);
    }

    SUBCASE("export-graph emits dot") {
        auto dot = run("export-graph " + (dir.path() / "snap").string(), capture);
        CHECK(dot.exit_code == 0);
        CHECK(dot.out.find("digraph maha {") == 0);
        CHECK(dot.out.find("HAS_TABLE") != std::string::npos);
    }
}

TEST_CASE("distinct exit codes per failure class") {
    fixtures::TempDir dir("cli_err");
    const auto capture = dir.path() / "capture.txt";

    // missing directory -> io error
    auto io = run("ingest " + (dir.path() / "missing").string() + " -o " +
                      (dir.path() / "c.jsonl").string(),
                  capture);
    CHECK(io.exit_code == 3);

    // corpus that fails validation -> validation gate
    {
        std::ofstream out(dir.path() / "bad.jsonl");
        out << R"({"record":"corpus","schema_version":1,"corpus_id":"bad"})" << "\n";
        out << R"({"record":"document","doc_id":"d","title":"t","source_path":""})" << "\n";
        out << R"({"record":"chunk","chunk_id":"c1","doc_id":"d","modality":"TABLE",)"
            << R"("order_index":0,"content":"nope","caption":"","summary":"s","entities":[]})"
            << "\n";
    }
    auto validation = run("build " + (dir.path() / "bad.jsonl").string() + " -o " +
                              (dir.path() / "snap").string(),
                          capture);
    CHECK(validation.exit_code == 5);

    // not a snapshot directory -> io error
    auto not_snap = run("query " + dir.path().string() + " --q hello", capture);
    CHECK(not_snap.exit_code == 3);

    // garbage corpus file -> format error
    {
        std::ofstream out(dir.path() / "garbage.jsonl");
        out << "this is not json\n";
    }
    auto format = run("build " + (dir.path() / "garbage.jsonl").string() + " -o " +
                          (dir.path() / "snap2").string(),
                      capture);
    CHECK(format.exit_code == 4);

    // usage error
    auto usage = run("query", capture);
    CHECK(usage.exit_code == 2);

    // unknown retriever -> bad argument
    fixtures::TempDir snap_dir("cli_snap");
    const std::string config = " --config " + kFixtures + "/config.json ";
    run(config + "ingest " + kFixtures + "/docs -o " +
            (snap_dir.path() / "c.jsonl").string(),
        capture);
    run(config + "build " + (snap_dir.path() / "c.jsonl").string() + " -o " +
            (snap_dir.path() / "snap").string(),
        capture);
    auto bad_retriever = run("query " + (snap_dir.path() / "snap").string() +
                                 " --retriever bogus --q hello",
                             capture);
    CHECK(bad_retriever.exit_code == 7);
}
