#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "maha/corpus.hpp"
#include "maha/embed.hpp"
#include "maha/engine.hpp"
#include "maha/ingest.hpp"
#include "maha/synth.hpp"

namespace fixtures {

inline maha::Corpus corpus_from_documents(const std::vector<maha::SourceDocument>& docs,
                                          const std::string& corpus_id,
                                          const maha::ChunkingPolicy& policy = {}) {
    maha::Corpus corpus;
    corpus.corpus_id = corpus_id;
    maha::TemplateSummarizer summarizer;
    for (const auto& doc : docs) {
        corpus.documents[doc.doc_id] = {doc.doc_id, doc.title, ""};
        for (auto& c : maha::ingest_document(doc, policy, summarizer)) {
            corpus.chunks.push_back(std::move(c));
        }
    }
    return corpus;
}

inline maha::SourceDocument text_table_text_doc() {
    maha::SourceDocument doc;
    doc.doc_id = "d0";
    doc.title = "fixture";
    maha::SourceBlock p0{maha::BlockKind::paragraph, "alpha beta", {}, "", {}, {}};
    maha::SourceBlock t1{maha::BlockKind::table, "", {{"x", "y"}}, "", {}, {}};
    maha::SourceBlock p2{maha::BlockKind::paragraph, "gamma", {}, "", {}, {}};
    doc.blocks = {p0, t1, p2};
    return doc;
}

// Embeds each text exactly as configured; queries not in the map fail loudly.
class FixedProvider final : public maha::EmbeddingProvider {
public:
    FixedProvider(int dim, std::map<std::string, std::vector<float>> table)
        : maha::EmbeddingProvider("fixed-test", dim, maha::ProviderKind::local_deterministic),
          table_(std::move(table)) {}

protected:
    std::vector<maha::Embedding> do_embed_texts(const std::vector<std::string>& texts) override {
        std::vector<maha::Embedding> out;
        for (const auto& t : texts) {
            maha::Embedding e;
            e.provider_id = provider_id();
            e.values = table_.at(t);
            out.push_back(std::move(e));
        }
        return out;
    }

private:
    std::map<std::string, std::vector<float>> table_;
};

inline maha::Embedding raw_embedding(std::vector<float> values, const std::string& provider_id = "fixed-test") {
    maha::Embedding e;
    e.values = std::move(values);
    e.provider_id = provider_id;
    return e;
}

// Random corpus of ingested synthetic documents.
inline maha::Corpus random_corpus(std::mt19937_64& rng, int n_docs,
                                  const maha::RandomDocOptions& options = {}) {
    std::vector<maha::SourceDocument> docs;
    for (int i = 0; i < n_docs; ++i) {
        docs.push_back(maha::random_source_document(
            rng, "doc" + std::string(i < 10 ? "0" : "") + std::to_string(i), options));
    }
    return corpus_from_documents(docs, "random");
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("maha_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace fixtures
