#include "maha/generate.hpp"

#include <algorithm>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "maha/errors.hpp"
#include "maha/text.hpp"

namespace maha {

using nlohmann::json;

namespace {

std::string render_evidence(const Chunk& chunk) {
    switch (chunk.modality) {
    case Modality::text:
    case Modality::table:
    case Modality::equation:
        return chunk.content;
    case Modality::image:
    case Modality::graph:
        return chunk.summary; // base64 is useless in a text prompt
    }
    return chunk.content;
}

std::vector<std::string> notes_for(const KnowledgeGraph& graph,
                                   const std::vector<EvidenceItem>& evidence) {
    std::set<std::string> included;
    for (const auto& e : evidence) included.insert(e.chunk_id);
    std::vector<std::string> notes;
    for (const auto& edge : graph.edges()) {
        if (included.count(edge.src) && included.count(edge.dst)) {
            notes.push_back(edge.src + " " + std::string(to_string(edge.type)) + " " + edge.dst);
        }
    }
    return notes; // graph edges are already canonically sorted
}

} // namespace

std::string render_prompt(const AssembledContext& ctx) {
    std::string out;
    out += "[";
    out += kPromptTemplateVersion;
    out += "]\n";
    out += "You are a question answering assistant. Answer the question using only the "
           "evidence below. Cite every piece of evidence you use as [cite:chunk_id].\n";
    if (!ctx.graph_notes.empty()) {
        out += "Graph relations:\n";
        for (const auto& note : ctx.graph_notes) {
            out += "- " + note + "\n";
        }
    }
    out += "Evidence:\n";
    for (std::size_t i = 0; i < ctx.evidence.size(); ++i) {
        const auto& e = ctx.evidence[i];
        out += "[" + std::to_string(i + 1) + "] (chunk_id=" + e.chunk_id +
               ", modality=" + std::string(to_string(e.modality)) + ") " + e.rendered + "\n";
    }
    out += "Question: " + ctx.query + "\n";
    out += "Answer:";
    return out;
}

AssembledContext assemble_context(const std::string& query, const RetrievalResult& result,
                                  const Corpus& corpus, const KnowledgeGraph& graph,
                                  int token_budget) {
    if (token_budget <= 0) throw invalid_argument_error("token_budget must be positive");

    std::unordered_map<std::string, const Chunk*> by_id;
    for (const auto& c : corpus.chunks) by_id[c.chunk_id] = &c;

    AssembledContext ctx;
    ctx.query = query;
    ctx.token_budget = token_budget;

    for (const auto& hit : result.hits) {
        auto it = by_id.find(hit.chunk_id);
        if (it == by_id.end()) {
            throw invalid_argument_error("assemble_context: hit " + hit.chunk_id +
                                         " not in corpus");
        }
        const Chunk& chunk = *it->second;

        std::vector<std::string> candidates;
        candidates.push_back(render_evidence(chunk));
        if (chunk.summary != candidates.front()) candidates.push_back(chunk.summary);

        for (const auto& rendering : candidates) {
            EvidenceItem item{chunk.chunk_id, chunk.modality, rendering, hit.fused_score};
            ctx.evidence.push_back(item);
            ctx.graph_notes = notes_for(graph, ctx.evidence);
            if (count_tokens(render_prompt(ctx)) <= static_cast<std::size_t>(token_budget)) {
                break; // fits
            }
            ctx.evidence.pop_back();
            ctx.graph_notes = notes_for(graph, ctx.evidence);
        }
    }
    return ctx;
}

struct HttpGenerationClient::Impl {
    RemoteGenerationConfig config;
};

HttpGenerationClient::HttpGenerationClient(RemoteGenerationConfig config)
    : impl_(std::make_unique<Impl>()) {
    if (config.provider_id.empty()) config.provider_id = "remote/" + config.base_url;
    impl_->config = std::move(config);
}

HttpGenerationClient::~HttpGenerationClient() = default;

const std::string& HttpGenerationClient::provider_id() const { return impl_->config.provider_id; }

std::string HttpGenerationClient::complete(const std::string& prompt, int max_tokens) {
    httplib::Client client(impl_->config.base_url);
    client.set_connection_timeout(impl_->config.timeout_sec, 0);
    client.set_read_timeout(impl_->config.timeout_sec, 0);
    httplib::Headers headers;
    if (!impl_->config.auth_token.empty()) {
        headers.emplace("Authorization", "Bearer " + impl_->config.auth_token);
    }
    json body;
    body["prompt"] = prompt;
    body["max_tokens"] = max_tokens;
    auto res = client.Post("/v1/generate", headers, body.dump(), "application/json");
    if (!res) {
        throw provider_error(provider_id() + ": transport failure contacting " +
                             impl_->config.base_url);
    }
    if (res->status != 200) {
        throw provider_error(provider_id() + ": HTTP " + std::to_string(res->status));
    }
    try {
        return json::parse(res->body).at("text").get<std::string>();
    } catch (const json::exception& e) {
        throw provider_error(provider_id() + ": bad response: " + e.what());
    }
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        current.push_back(c);
        const bool terminator = c == '.' || c == '!' || c == '?';
        const bool at_end = i + 1 >= text.size();
        const bool before_space = !at_end && (text[i + 1] == ' ' || text[i + 1] == '\t' ||
                                              text[i + 1] == '\n' || text[i + 1] == '\r');
        if (terminator && (at_end || before_space)) {
            // trim surrounding whitespace
            const auto begin = current.find_first_not_of(" \t\n\r");
            if (begin != std::string::npos) out.push_back(current.substr(begin));
            current.clear();
        }
    }
    const auto begin = current.find_first_not_of(" \t\n\r");
    if (begin != std::string::npos) {
        const auto end = current.find_last_not_of(" \t\n\r");
        out.push_back(current.substr(begin, end - begin + 1));
    }
    return out;
}

namespace {

Answer extractive_answer(const AssembledContext& ctx) {
    Answer answer;
    answer.provider_id = "stub-extractive-v1";
    if (ctx.evidence.empty()) {
        answer.text = "No evidence retrieved.";
        return answer;
    }
    const EvidenceItem& top = ctx.evidence.front();
    const auto sentences = split_sentences(top.rendered);
    const auto query_tokens = tokenize(ctx.query);
    const std::set<std::string> query_set(query_tokens.begin(), query_tokens.end());

    std::string best;
    std::size_t best_overlap = 0;
    bool first = true;
    for (const auto& sentence : sentences) {
        const auto tokens = tokenize(sentence);
        const std::set<std::string> unique(tokens.begin(), tokens.end());
        std::size_t overlap = 0;
        for (const auto& t : unique) {
            if (query_set.count(t)) ++overlap;
        }
        if (first || overlap > best_overlap) { // ties keep the earliest
            best = sentence;
            best_overlap = overlap;
            first = false;
        }
    }
    answer.text = best.empty() ? top.rendered : best;
    answer.cited_chunk_ids.push_back(top.chunk_id);
    answer.modalities_used.insert(top.modality);
    return answer;
}

Answer remote_answer(const AssembledContext& ctx, GenerationClient& client, int max_tokens) {
    Answer answer;
    answer.provider_id = client.provider_id();
    const std::string prompt = render_prompt(ctx);
    answer.text = client.complete(prompt, max_tokens);

    std::set<std::string> evidence_ids;
    for (const auto& e : ctx.evidence) evidence_ids.insert(e.chunk_id);

    // Collect [cite:chunk_id] markers.
    std::vector<std::string> cited;
    bool bad_citation = false;
    const std::string marker = "[cite:";
    std::size_t pos = 0;
    while ((pos = answer.text.find(marker, pos)) != std::string::npos) {
        const std::size_t start = pos + marker.size();
        const std::size_t close = answer.text.find(']', start);
        if (close == std::string::npos) {
            bad_citation = true;
            break;
        }
        cited.push_back(answer.text.substr(start, close - start));
        pos = close + 1;
    }
    for (const auto& id : cited) {
        if (!evidence_ids.count(id)) bad_citation = true;
    }
    if (bad_citation) {
        answer.warning = "citation parse failure: response cited malformed or unknown chunk ids";
        return answer;
    }
    std::set<std::string> unique(cited.begin(), cited.end());
    answer.cited_chunk_ids.assign(unique.begin(), unique.end());

    std::unordered_map<std::string, Modality> modality_of;
    for (const auto& e : ctx.evidence) modality_of[e.chunk_id] = e.modality;
    for (const auto& id : answer.cited_chunk_ids) {
        answer.modalities_used.insert(modality_of.at(id));
    }
    return answer;
}

} // namespace

Answer generate_answer(const AssembledContext& ctx, GenerationClient* client, int max_tokens) {
    if (client == nullptr) return extractive_answer(ctx);
    return remote_answer(ctx, *client, max_tokens);
}

} // namespace maha
