#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "maha/base64.hpp"
#include "maha/corpus.hpp"
#include "maha/embed.hpp"
#include "maha/engine.hpp"
#include "maha/errors.hpp"
#include "maha/eval.hpp"
#include "maha/generate.hpp"
#include "maha/ingest.hpp"
#include "maha/kg.hpp"
#include "maha/retrieve.hpp"
#include "maha/synth.hpp"
#include "maha/text.hpp"
#include "maha/vectorstore.hpp"

namespace py = pybind11;
using namespace maha;

namespace {

Corpus ingest_directory(const std::filesystem::path& docs_dir, const std::string& corpus_id,
                        const ChunkingPolicy& policy) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(docs_dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    Corpus corpus;
    corpus.corpus_id = corpus_id;
    TemplateSummarizer summarizer;
    for (const auto& file : files) {
        SourceDocument doc = load_source_document(file);
        corpus.documents[doc.doc_id] = {doc.doc_id, doc.title, file.string()};
        for (auto& c : ingest_document(doc, policy, summarizer)) {
            corpus.chunks.push_back(std::move(c));
        }
    }
    return corpus;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Modality-aware hybrid retrieval engine (C++ core)";

    py::enum_<Modality>(m, "Modality")
        .value("TEXT", Modality::text)
        .value("TABLE", Modality::table)
        .value("IMAGE", Modality::image)
        .value("GRAPH", Modality::graph)
        .value("EQUATION", Modality::equation);

    py::enum_<EdgeType>(m, "EdgeType")
        .value("NEXT_TEXT", EdgeType::next_text)
        .value("NEXT_TABLE", EdgeType::next_table)
        .value("NEXT_IMAGE", EdgeType::next_image)
        .value("NEXT_FORMULA", EdgeType::next_formula)
        .value("HAS_IMAGE", EdgeType::has_image)
        .value("HAS_TABLE", EdgeType::has_table)
        .value("HAS_FORMULA", EdgeType::has_formula)
        .value("MENTIONS", EdgeType::mentions);

    py::class_<Chunk>(m, "Chunk")
        .def(py::init<>())
        .def_readwrite("chunk_id", &Chunk::chunk_id)
        .def_readwrite("doc_id", &Chunk::doc_id)
        .def_readwrite("modality", &Chunk::modality)
        .def_readwrite("order_index", &Chunk::order_index)
        .def_readwrite("content", &Chunk::content)
        .def_readwrite("caption", &Chunk::caption)
        .def_readwrite("summary", &Chunk::summary)
        .def_readwrite("entities", &Chunk::entities)
        .def("__repr__", [](const Chunk& c) {
            return "<Chunk " + c.chunk_id + " " + std::string(to_string(c.modality)) + ">";
        });

    py::class_<Corpus>(m, "Corpus")
        .def(py::init<>())
        .def_readwrite("corpus_id", &Corpus::corpus_id)
        .def_readwrite("chunks", &Corpus::chunks)
        .def("__len__", [](const Corpus& c) { return c.chunks.size(); });

    py::class_<Violation>(m, "Violation")
        .def_readonly("chunk_id", &Violation::chunk_id)
        .def_readonly("rule", &Violation::rule)
        .def_readonly("detail", &Violation::detail)
        .def("__repr__", [](const Violation& v) {
            return "<Violation " + v.chunk_id + " " + v.rule + ">";
        });

    py::class_<RetrievedHit>(m, "RetrievedHit")
        .def_readonly("chunk_id", &RetrievedHit::chunk_id)
        .def_readonly("fused_score", &RetrievedHit::fused_score)
        .def_readonly("vector_score", &RetrievedHit::vector_score)
        .def_readonly("graph_depth", &RetrievedHit::graph_depth)
        .def_readonly("rank", &RetrievedHit::rank);

    py::class_<RetrievalResult>(m, "RetrievalResult")
        .def_readonly("query_id", &RetrievalResult::query_id)
        .def_readonly("retriever_id", &RetrievalResult::retriever_id)
        .def_readonly("hits", &RetrievalResult::hits);

    py::class_<RougeScore>(m, "RougeScore")
        .def_readonly("precision", &RougeScore::precision)
        .def_readonly("recall", &RougeScore::recall)
        .def_readonly("f1", &RougeScore::f1);

    py::class_<ChunkingPolicy>(m, "ChunkingPolicy")
        .def(py::init<>())
        .def_readwrite("max_tokens", &ChunkingPolicy::max_tokens)
        .def_readwrite("overlap_tokens", &ChunkingPolicy::overlap_tokens);

    m.def("tokenize", [](const std::string& text) { return tokenize(text); },
          "Shared tokenizer: lowercase alphanumeric runs");
    m.def("chunk_spans",
          [](std::size_t n, int max_tokens, int overlap_tokens) {
              std::vector<std::pair<std::size_t, std::size_t>> out;
              for (auto s : chunk_text(n, {max_tokens, overlap_tokens})) {
                  out.emplace_back(s.begin, s.end);
              }
              return out;
          },
          py::arg("token_count"), py::arg("max_tokens") = 256, py::arg("overlap_tokens") = 32);
    m.def("canonicalize_table", &canonicalize_table);
    m.def("extract_entities", [](const std::string& t) { return extract_entities(t); });
    m.def("base64_encode", [](py::bytes b) { return base64_encode(std::string(b)); });

    m.def("deterministic_embedding",
          [](const std::string& text, int dim, std::uint64_t seed) {
              return deterministic_embed(text, dim, seed).values;
          },
          py::arg("text"), py::arg("dim") = 256, py::arg("seed") = 1234);

    m.def("rouge_l", &rouge_l, py::arg("hypothesis"), py::arg("reference"));
    m.def("modality_coverage", &modality_coverage, py::arg("required"), py::arg("retrieved"));

    m.def("validate_corpus", &validate_corpus);
    m.def("load_corpus", &load_corpus);
    m.def("save_corpus", &save_corpus);
    m.def("ingest_directory", &ingest_directory, py::arg("docs_dir"), py::arg("corpus_id"),
          py::arg("policy") = ChunkingPolicy{});

    py::class_<EngineSnapshot>(m, "EngineSnapshot")
        .def_property_readonly("snapshot_id",
                               [](const EngineSnapshot& s) { return s.snapshot_id; })
        .def_property_readonly("corpus",
                               [](const EngineSnapshot& s) -> const Corpus& { return s.corpus; },
                               py::return_value_policy::reference_internal)
        .def("query",
             [](const EngineSnapshot& snapshot, const std::string& question,
                const std::string& retriever, int k, bool answer) {
                 FusionParams params = snapshot.config.fusion;
                 if (k > 0) params.final_k = k;
                 auto output = run_query(snapshot, retriever, question, params, answer);
                 return query_output_to_json(output, snapshot).dump();
             },
             py::arg("question"), py::arg("retriever") = "maha", py::arg("k") = -1,
             py::arg("answer") = false, "Run a query; returns the response as a JSON string");

    m.def("build_snapshot_dir",
          [](const std::filesystem::path& corpus_path, const std::filesystem::path& out_dir,
             const std::filesystem::path& config_path) {
              EngineConfig config =
                  config_path.empty() ? EngineConfig{} : load_config(config_path);
              auto snapshot = build_snapshot(load_corpus(corpus_path), config);
              write_snapshot(snapshot, out_dir);
              return snapshot.snapshot_id;
          },
          py::arg("corpus_path"), py::arg("out_dir"), py::arg("config_path") = std::filesystem::path{});
    m.def("load_snapshot_dir",
          [](const std::filesystem::path& dir) { return load_snapshot(dir); },
          py::arg("snapshot_dir"));

    py::register_exception<maha::error>(m, "MahaError");
}
