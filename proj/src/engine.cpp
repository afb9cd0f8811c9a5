#include "maha/engine.hpp"

#include <cstdlib>
#include <fstream>

#include "maha/errors.hpp"
#include "maha/text.hpp"

namespace maha {

using nlohmann::json;

namespace {

json provider_to_json(const ProviderConfig& p) {
    json j;
    j["kind"] = to_string(p.kind);
    j["dim"] = p.dim;
    if (p.kind == ProviderKind::local_deterministic) {
        j["seed"] = p.seed;
    } else {
        j["base_url"] = p.base_url;
        j["auth_env"] = p.auth_env;
        j["batch_size"] = p.batch_size;
        j["max_inflight"] = p.max_inflight;
    }
    if (!p.provider_id.empty()) j["provider_id"] = p.provider_id;
    return j;
}

ProviderConfig provider_from_json(const json& j) {
    ProviderConfig p;
    p.kind = provider_kind_from_string(j.value("kind", "local-deterministic"));
    p.dim = j.value("dim", 256);
    p.seed = j.value("seed", std::uint64_t{1234});
    p.base_url = j.value("base_url", std::string());
    p.provider_id = j.value("provider_id", std::string());
    p.auth_env = j.value("auth_env", std::string());
    p.batch_size = j.value("batch_size", 16);
    p.max_inflight = j.value("max_inflight", 4);
    return p;
}

std::string edges_to_config(const std::set<EdgeType>& edges) {
    if (edges == all_edge_types()) return "all";
    std::string out;
    for (auto t : edges) {
        if (!out.empty()) out.push_back(',');
        out += std::string(to_string(t));
    }
    return out;
}

std::set<EdgeType> edges_from_config(const std::string& spec) {
    if (spec.empty() || spec == "all") return all_edge_types();
    std::set<EdgeType> out;
    std::size_t start = 0;
    while (start <= spec.size()) {
        const std::size_t comma = spec.find(',', start);
        const std::string name = spec.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!name.empty()) out.insert(edge_type_from_string(name));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw format_error("allowed_edges resolves to an empty set");
    return out;
}

} // namespace

json EngineConfig::to_json() const {
    json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["embedding"]["text"] = provider_to_json(text_embedding);
    if (image_embedding) j["embedding"]["image"] = provider_to_json(*image_embedding);
    j["chunking"]["max_tokens"] = chunking.max_tokens;
    j["chunking"]["overlap_tokens"] = chunking.overlap_tokens;
    j["graph"]["mentions_min_shared"] = graph.mentions_min_shared;
    j["graph"]["mentions_cross_doc"] = graph.mentions_cross_doc;
    j["fusion"]["alpha"] = fusion.alpha;
    j["fusion"]["beta"] = fusion.beta;
    j["fusion"]["lambda"] = fusion.lambda;
    j["fusion"]["seed_k"] = fusion.seed_k;
    j["fusion"]["depth"] = fusion.depth;
    j["fusion"]["final_k"] = fusion.final_k;
    j["fusion"]["allowed_edges"] = edges_to_config(fusion.allowed_edges);
    j["fusion"]["exhaustive_vector_scores"] = fusion.exhaustive_vector_scores;
    j["generation"]["provider"] = generation.provider;
    if (!generation.base_url.empty()) j["generation"]["base_url"] = generation.base_url;
    if (!generation.provider_id.empty()) j["generation"]["provider_id"] = generation.provider_id;
    if (!generation.auth_env.empty()) j["generation"]["auth_env"] = generation.auth_env;
    j["generation"]["token_budget"] = generation.token_budget;
    j["generation"]["max_tokens"] = generation.max_tokens;
    j["eval"]["ks"] = eval_ks;
    return j;
}

EngineConfig EngineConfig::from_json(const json& j) {
    const int version = j.value("schema_version", kConfigSchemaVersion);
    if (version != kConfigSchemaVersion) {
        throw format_error("unsupported config schema_version " + std::to_string(version));
    }
    EngineConfig c;
    if (j.contains("embedding")) {
        const auto& e = j.at("embedding");
        if (e.contains("text")) c.text_embedding = provider_from_json(e.at("text"));
        if (e.contains("image") && !e.at("image").is_null()) {
            c.image_embedding = provider_from_json(e.at("image"));
        }
    }
    if (j.contains("chunking")) {
        c.chunking.max_tokens = j.at("chunking").value("max_tokens", 256);
        c.chunking.overlap_tokens = j.at("chunking").value("overlap_tokens", 32);
    }
    if (j.contains("graph")) {
        c.graph.mentions_min_shared = j.at("graph").value("mentions_min_shared", 1);
        c.graph.mentions_cross_doc = j.at("graph").value("mentions_cross_doc", true);
    }
    if (j.contains("fusion")) {
        const auto& f = j.at("fusion");
        c.fusion.alpha = f.value("alpha", 0.7);
        c.fusion.beta = f.value("beta", 0.3);
        c.fusion.lambda = f.value("lambda", 0.5);
        c.fusion.seed_k = f.value("seed_k", 10);
        c.fusion.depth = f.value("depth", 2);
        c.fusion.final_k = f.value("final_k", 20);
        c.fusion.allowed_edges = edges_from_config(f.value("allowed_edges", std::string("all")));
        c.fusion.exhaustive_vector_scores = f.value("exhaustive_vector_scores", false);
    }
    if (j.contains("generation")) {
        const auto& g = j.at("generation");
        c.generation.provider = g.value("provider", std::string("stub"));
        c.generation.base_url = g.value("base_url", std::string());
        c.generation.provider_id = g.value("provider_id", std::string());
        c.generation.auth_env = g.value("auth_env", std::string());
        c.generation.token_budget = g.value("token_budget", kDefaultTokenBudget);
        c.generation.max_tokens = g.value("max_tokens", 256);
    }
    if (j.contains("eval") && j.at("eval").contains("ks")) {
        c.eval_ks = j.at("eval").at("ks").get<std::vector<int>>();
    }
    return c;
}

std::string EngineConfig::build_digest() const {
    json j;
    j["embedding"]["text"] = provider_to_json(text_embedding);
    if (image_embedding) j["embedding"]["image"] = provider_to_json(*image_embedding);
    j["chunking"]["max_tokens"] = chunking.max_tokens;
    j["chunking"]["overlap_tokens"] = chunking.overlap_tokens;
    j["graph"]["mentions_min_shared"] = graph.mentions_min_shared;
    j["graph"]["mentions_cross_doc"] = graph.mentions_cross_doc;
    return hex64(fnv1a64(j.dump()));
}

EngineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw format_error("config parse error: " + std::string(e.what()));
    }
    return EngineConfig::from_json(j);
}

void save_config(const EngineConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    out << config.to_json().dump(2) << '\n';
    if (!out) throw io_error("write failed: " + path.string());
}

namespace {

std::string auth_token_from_env(const std::string& auth_env) {
    if (auth_env.empty()) return {};
    const char* value = std::getenv(auth_env.c_str());
    return value ? value : "";
}

} // namespace

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& config) {
    if (config.kind == ProviderKind::local_deterministic) {
        return std::make_unique<DeterministicProvider>(config.dim, config.seed);
    }
    RemoteProviderConfig remote;
    remote.base_url = config.base_url;
    remote.provider_id = config.provider_id;
    remote.dim = config.dim;
    remote.kind = config.kind;
    remote.auth_token = auth_token_from_env(config.auth_env);
    remote.batch_size = config.batch_size;
    remote.max_inflight = config.max_inflight;
    if (remote.base_url.empty()) {
        throw invalid_argument_error("remote embedding provider requires base_url");
    }
    return std::make_unique<RemoteEmbeddingProvider>(std::move(remote));
}

std::unique_ptr<GenerationClient> make_generation_client(const GenerationConfig& config) {
    if (config.provider == "stub") return nullptr;
    if (config.provider != "remote") {
        throw invalid_argument_error("unknown generation provider: " + config.provider);
    }
    if (config.base_url.empty()) {
        throw invalid_argument_error("remote generation provider requires base_url");
    }
    RemoteGenerationConfig remote;
    remote.base_url = config.base_url;
    remote.provider_id = config.provider_id;
    remote.auth_token = auth_token_from_env(config.auth_env);
    return std::make_unique<HttpGenerationClient>(std::move(remote));
}

RetrievalContext EngineSnapshot::context() const {
    RetrievalContext ctx;
    ctx.corpus = &corpus;
    ctx.bm25 = &bm25;
    ctx.text_index = &text_index;
    ctx.image_index = image_index ? &*image_index : nullptr;
    ctx.graph = &graph;
    ctx.text_provider = text_provider.get();
    ctx.image_provider = image_provider.get();
    return ctx;
}

EngineSnapshot build_snapshot(Corpus corpus, const EngineConfig& config) {
    auto violations = validate_corpus(corpus);
    if (!violations.empty()) {
        std::string msg = "corpus failed validation:";
        for (std::size_t i = 0; i < violations.size() && i < 5; ++i) {
            msg += " [" + violations[i].chunk_id + " " + violations[i].rule + "]";
        }
        throw validation_error(msg);
    }

    EngineSnapshot snap;
    snap.config = config;
    snap.text_provider = make_embedding_provider(config.text_embedding);
    if (config.image_embedding) {
        snap.image_provider = make_embedding_provider(*config.image_embedding);
    }

    const std::string snapshot_id =
        hex64(fnv1a64(corpus_content_id(corpus) + ":" + config.build_digest()));
    snap.snapshot_id = snapshot_id;

    std::vector<IndexedChunk> text_entries;
    std::vector<IndexedChunk> image_entries;
    for (const auto& chunk : corpus.chunks) {
        const bool image_space = snap.image_provider != nullptr &&
                                 (chunk.modality == Modality::image ||
                                  chunk.modality == Modality::graph);
        if (image_space) {
            image_entries.push_back(
                {chunk.chunk_id, chunk.modality,
                 embed_chunk(chunk, *snap.text_provider, snap.image_provider.get())});
        } else {
            text_entries.push_back(
                {chunk.chunk_id, chunk.modality, embed_chunk(chunk, *snap.text_provider)});
        }
    }
    snap.text_index = VectorIndex::build(std::move(text_entries), snapshot_id,
                                         snap.text_provider->provider_id());
    if (snap.image_provider) {
        snap.image_index = VectorIndex::build(std::move(image_entries), snapshot_id,
                                              snap.image_provider->provider_id());
    }

    snap.graph = build_graph(corpus, config.graph);
    // graph ids derive from corpus content only; stamp the config-aware id
    snap.graph = KnowledgeGraph::create(snap.graph.nodes(), snap.graph.edges(), snapshot_id);
    snap.bm25 = Bm25Index::build(corpus);
    snap.corpus = std::move(corpus);
    return snap;
}

void write_snapshot(const EngineSnapshot& snapshot, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    BuildLock lock(dir);

    const fs::path tmp = dir.string() + ".tmp";
    std::error_code ec;
    fs::remove_all(tmp, ec);
    fs::create_directories(tmp);

    save_corpus(snapshot.corpus, tmp / "corpus.jsonl");
    snapshot.text_index.persist(tmp / "text.vidx");
    if (snapshot.image_index) snapshot.image_index->persist(tmp / "image.vidx");
    persist_graph(snapshot.graph, tmp / "graph.jsonl");
    save_config(snapshot.config, tmp / "config.json");

    json manifest;
    manifest["schema_version"] = kSnapshotSchemaVersion;
    manifest["snapshot_id"] = snapshot.snapshot_id;
    manifest["corpus_id"] = snapshot.corpus.corpus_id;
    manifest["config_digest"] = snapshot.config.build_digest();
    manifest["counts"]["documents"] = snapshot.corpus.documents.size();
    manifest["counts"]["chunks"] = snapshot.corpus.chunks.size();
    manifest["counts"]["nodes"] = snapshot.graph.nodes().size();
    manifest["counts"]["edges"] = snapshot.graph.edges().size();
    manifest["has_image_index"] = snapshot.image_index.has_value();
    {
        std::ofstream out(tmp / "manifest.json", std::ios::binary);
        if (!out) throw io_error("cannot write manifest");
        out << manifest.dump(2) << '\n';
    }

    fs::remove_all(dir, ec);
    fs::rename(tmp, dir);
}

EngineSnapshot load_snapshot(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::exists(dir / "manifest.json")) {
        throw io_error("not a snapshot directory: " + dir.string());
    }
    json manifest;
    {
        std::ifstream in(dir / "manifest.json", std::ios::binary);
        if (!in) throw io_error("cannot open manifest");
        try {
            in >> manifest;
        } catch (const json::exception& e) {
            throw format_error("manifest parse error: " + std::string(e.what()));
        }
    }
    const int version = manifest.value("schema_version", 0);
    if (version != kSnapshotSchemaVersion) {
        throw format_error("unsupported snapshot schema_version " + std::to_string(version));
    }

    EngineSnapshot snap;
    snap.config = load_config(dir / "config.json");
    snap.snapshot_id = manifest.at("snapshot_id").get<std::string>();
    snap.corpus = load_corpus(dir / "corpus.jsonl");
    snap.text_index = VectorIndex::load(dir / "text.vidx");
    if (manifest.value("has_image_index", false)) {
        snap.image_index = VectorIndex::load(dir / "image.vidx");
    }
    snap.graph = load_graph(dir / "graph.jsonl");
    snap.bm25 = Bm25Index::build(snap.corpus);
    snap.text_provider = make_embedding_provider(snap.config.text_embedding);
    if (snap.config.image_embedding) {
        snap.image_provider = make_embedding_provider(*snap.config.image_embedding);
    }

    if (snap.text_index.snapshot_id() != snap.snapshot_id ||
        snap.graph.snapshot_id() != snap.snapshot_id) {
        throw format_error("snapshot components carry mismatched snapshot ids");
    }
    if (snap.text_index.provider_id() != snap.text_provider->provider_id()) {
        throw format_error("text index was built with provider " +
                           snap.text_index.provider_id() + " but config names " +
                           snap.text_provider->provider_id());
    }
    return snap;
}

QueryOutput run_query(const EngineSnapshot& snapshot, const std::string& retriever_id,
                      const std::string& question, const FusionParams& params,
                      bool with_answer) {
    QueryOutput output;
    output.snapshot_id = snapshot.snapshot_id;
    output.result = run_retriever(snapshot.context(), retriever_id, question, params);
    if (with_answer) {
        auto ctx = assemble_context(question, output.result, snapshot.corpus, snapshot.graph,
                                    snapshot.config.generation.token_budget);
        auto client = make_generation_client(snapshot.config.generation);
        output.answer =
            generate_answer(ctx, client.get(), snapshot.config.generation.max_tokens);
    }
    return output;
}

json query_output_to_json(const QueryOutput& output, const EngineSnapshot& snapshot) {
    json j;
    j["snapshot_id"] = output.snapshot_id;
    j["retriever"] = output.result.retriever_id;
    json hits = json::array();
    for (const auto& hit : output.result.hits) {
        json h;
        h["rank"] = hit.rank;
        h["chunk_id"] = hit.chunk_id;
        h["fused_score"] = hit.fused_score;
        if (hit.vector_score) h["vector_score"] = *hit.vector_score;
        if (hit.graph_depth) h["graph_depth"] = *hit.graph_depth;
        const Chunk* chunk = snapshot.corpus.find_chunk(hit.chunk_id);
        if (chunk) h["modality"] = to_string(chunk->modality);
        hits.push_back(std::move(h));
    }
    j["hits"] = std::move(hits);
    if (output.answer) {
        json a;
        a["text"] = output.answer->text;
        a["cited_chunk_ids"] = output.answer->cited_chunk_ids;
        std::vector<std::string> mods;
        for (auto m : output.answer->modalities_used) mods.emplace_back(to_string(m));
        a["modalities_used"] = mods;
        a["provider_id"] = output.answer->provider_id;
        if (!output.answer->warning.empty()) a["warning"] = output.answer->warning;
        j["answer"] = std::move(a);
    }
    return j;
}

BuildLock::BuildLock(const std::filesystem::path& target) {
    lock_path_ = target.string() + ".lock";
    std::error_code ec;
    std::filesystem::create_directories(lock_path_.parent_path(), ec);
    // create_directory is atomic: it fails when the lock already exists
    if (!std::filesystem::create_directory(lock_path_, ec) || ec) {
        throw io_error("another build holds the lock: " + lock_path_.string());
    }
}

BuildLock::~BuildLock() {
    std::error_code ec;
    std::filesystem::remove(lock_path_, ec);
}

} // namespace maha
