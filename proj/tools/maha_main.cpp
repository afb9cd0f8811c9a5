#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maha/engine.hpp"
#include "maha/errors.hpp"
#include "maha/service.hpp"
#include "maha/synth.hpp"

namespace fs = std::filesystem;
using namespace maha;

// Exit codes (documented in the README):
//   0 success, 2 usage/config, 3 I/O, 4 format, 5 validation,
//   6 provider, 7 bad argument, 10 unexpected.
namespace {

struct CommonOpts {
    std::string config_path;
};

EngineConfig resolve_config(const CommonOpts& opts) {
    if (opts.config_path.empty()) return EngineConfig{};
    return load_config(opts.config_path);
}

struct FusionFlags {
    double alpha = -1, beta = -1, lambda = -1;
    int seed_k = -1, depth = -1, k = -1;

    void apply(FusionParams& params) const {
        if (alpha >= 0) params.alpha = alpha;
        if (beta >= 0) params.beta = beta;
        if (lambda >= 0) params.lambda = lambda;
        if (seed_k >= 0) params.seed_k = seed_k;
        if (depth >= 0) params.depth = depth;
        if (k >= 0) params.final_k = k;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--alpha", alpha, "Vector weight");
        cmd->add_option("--beta", beta, "Graph weight");
        cmd->add_option("--lambda", lambda, "Depth decay");
        cmd->add_option("--seed-k", seed_k, "Dense seed count");
        cmd->add_option("--depth", depth, "Graph expansion depth");
        cmd->add_option("--k", k, "Result count");
    }
};

int cmd_ingest(const CommonOpts& common, const std::string& docs_dir,
               const std::string& out_path, const std::string& corpus_id) {
    EngineConfig config = resolve_config(common);

    if (!fs::is_directory(docs_dir)) throw io_error("not a directory: " + docs_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(docs_dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw io_error("no documents found in " + docs_dir);

    Corpus corpus;
    corpus.corpus_id = corpus_id.empty() ? fs::path(docs_dir).filename().string() : corpus_id;
    TemplateSummarizer summarizer;
    for (const auto& file : files) {
        SourceDocument doc = load_source_document(file);
        if (corpus.documents.count(doc.doc_id)) {
            throw validation_error("duplicate doc_id across files: " + doc.doc_id);
        }
        corpus.documents[doc.doc_id] = {doc.doc_id, doc.title, file.string()};
        auto chunks = ingest_document(doc, config.chunking, summarizer);
        for (auto& c : chunks) corpus.chunks.push_back(std::move(c));
    }

    auto violations = validate_corpus(corpus);
    if (!violations.empty()) {
        for (const auto& v : violations) {
            std::cerr << v.chunk_id << " " << v.rule << ": " << v.detail << "\n";
        }
        return 5;
    }
    save_corpus(corpus, out_path);
    std::cout << "wrote " << out_path << " (" << corpus.documents.size() << " documents, "
              << corpus.chunks.size() << " chunks)\n";
    return 0;
}

int cmd_build(const CommonOpts& common, const std::string& corpus_path,
              const std::string& out_dir) {
    EngineConfig config = resolve_config(common);
    Corpus corpus = load_corpus(corpus_path);
    EngineSnapshot snapshot = build_snapshot(std::move(corpus), config);
    write_snapshot(snapshot, out_dir);
    std::cout << "wrote snapshot " << snapshot.snapshot_id << " to " << out_dir << "\n";
    return 0;
}

int cmd_query(const std::string& snapshot_dir, const std::string& retriever,
              const std::string& question, bool with_answer, const FusionFlags& flags) {
    EngineSnapshot snapshot = load_snapshot(snapshot_dir);
    FusionParams params = snapshot.config.fusion;
    flags.apply(params);

    auto output = run_query(snapshot, retriever, question, params, with_answer);
    auto j = query_output_to_json(output, snapshot);
    for (const auto& hit : j["hits"]) {
        nlohmann::json line = hit;
        line["record"] = "hit";
        std::cout << line.dump() << "\n";
    }
    if (j.contains("answer")) {
        nlohmann::json line = j["answer"];
        line["record"] = "answer";
        std::cout << line.dump() << "\n";
    }
    return 0;
}

int cmd_eval(const std::string& snapshot_dir, const std::string& dataset_path,
             const std::string& retrievers_csv, const std::string& out_prefix,
             const FusionFlags& flags) {
    EngineSnapshot snapshot = load_snapshot(snapshot_dir);
    auto items = load_dataset(dataset_path);

    std::vector<RetrieverSpec> specs;
    std::size_t start = 0;
    while (start <= retrievers_csv.size()) {
        const std::size_t comma = retrievers_csv.find(',', start);
        const std::string name = retrievers_csv.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!name.empty()) {
            FusionParams params = snapshot.config.fusion;
            flags.apply(params);
            specs.push_back({name, params});
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (specs.empty()) throw invalid_argument_error("no retrievers given");

    BenchmarkOptions options;
    options.ks = snapshot.config.eval_ks;
    options.token_budget = snapshot.config.generation.token_budget;
    options.max_tokens = snapshot.config.generation.max_tokens;

    auto client = make_generation_client(snapshot.config.generation);
    EvalReport report =
        run_benchmark(snapshot.context(), fs::path(dataset_path).stem().string(), items, specs,
                      client.get(), options);
    report.config_snapshot = snapshot.config.to_json();

    write_report(report, out_prefix + ".jsonl", out_prefix + ".txt");
    std::cout << report_summary_text(report);
    return 0;
}

int cmd_serve(const std::string& snapshot_dir, const std::string& host, int port) {
    auto snapshot = std::make_shared<EngineSnapshot>(load_snapshot(snapshot_dir));
    Service service(std::move(snapshot));
    std::cout << "serving snapshot on " << host << ":" << port << "\n";
    service.listen(host, port);
    return 0;
}

int cmd_export_graph(const std::string& snapshot_dir, const std::string& out_path) {
    EngineSnapshot snapshot = load_snapshot(snapshot_dir);
    const std::string dot = export_graph_dot(snapshot.graph);
    if (out_path.empty() || out_path == "-") {
        std::cout << dot;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw io_error("cannot open for writing: " + out_path);
        out << dot;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"maha: modality-aware hybrid retrieval engine"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--config", common.config_path, "Engine config file (JSON)");

    // ingest
    std::string docs_dir, corpus_out, corpus_id;
    auto* ingest = app.add_subcommand("ingest", "Parse interchange documents into a corpus file");
    ingest->add_option("docs-dir", docs_dir, "Directory of interchange documents")->required();
    ingest->add_option("-o,--out", corpus_out, "Corpus output file")->required();
    ingest->add_option("--corpus-id", corpus_id, "Corpus id (default: directory name)");

    // build
    std::string corpus_path, snapshot_out;
    auto* build = app.add_subcommand("build", "Embed, index and build the graph");
    build->add_option("corpus-file", corpus_path, "Corpus file")->required();
    build->add_option("-o,--out", snapshot_out, "Snapshot output directory")->required();

    // query
    std::string query_snapshot, retriever = "maha", question;
    bool with_answer = false;
    FusionFlags query_flags;
    auto* query = app.add_subcommand("query", "Run one query against a snapshot");
    query->add_option("snapshot-dir", query_snapshot, "Snapshot directory")->required();
    query->add_option("--retriever", retriever,
                      "maha | bm25 | dense | image | bm25+dense | graph");
    query->add_option("--q,--question", question, "Query text")->required();
    query->add_flag("--answer", with_answer, "Also generate an answer");
    query_flags.attach(query);

    // eval
    std::string eval_snapshot, dataset_path, retrievers_csv = "maha", report_out = "report";
    FusionFlags eval_flags;
    auto* eval = app.add_subcommand("eval", "Run the benchmark harness");
    eval->add_option("snapshot-dir", eval_snapshot, "Snapshot directory")->required();
    eval->add_option("dataset-file", dataset_path, "Dataset file")->required();
    eval->add_option("--retrievers", retrievers_csv, "Comma-separated retriever ids");
    eval->add_option("-o,--out", report_out, "Report output prefix");
    eval_flags.attach(eval);

    // serve
    std::string serve_snapshot, host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Serve a snapshot over HTTP");
    serve->add_option("snapshot-dir", serve_snapshot, "Snapshot directory")->required();
    serve->add_option("--host", host, "Bind host");
    serve->add_option("--port", port, "Bind port");

    // export-graph
    std::string export_snapshot, dot_out;
    auto* export_graph = app.add_subcommand("export-graph", "Emit the knowledge graph as DOT");
    export_graph->add_option("snapshot-dir", export_snapshot, "Snapshot directory")->required();
    export_graph->add_option("-o,--out", dot_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*ingest) return cmd_ingest(common, docs_dir, corpus_out, corpus_id);
        if (*build) return cmd_build(common, corpus_path, snapshot_out);
        if (*query) return cmd_query(query_snapshot, retriever, question, with_answer, query_flags);
        if (*eval) return cmd_eval(eval_snapshot, dataset_path, retrievers_csv, report_out,
                                   eval_flags);
        if (*serve) return cmd_serve(serve_snapshot, host, port);
        if (*export_graph) return cmd_export_graph(export_snapshot, dot_out);
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 5;
    } catch (const format_error& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 4;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const provider_error& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return 6;
    } catch (const invalid_argument_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 7;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 10;
    }
    return 2;
}
