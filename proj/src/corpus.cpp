#include "maha/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "maha/base64.hpp"
#include "maha/errors.hpp"
#include "maha/tablehtml.hpp"
#include "maha/text.hpp"

namespace maha {

using nlohmann::json;

std::string_view to_string(Modality m) {
    switch (m) {
    case Modality::text: return "TEXT";
    case Modality::table: return "TABLE";
    case Modality::image: return "IMAGE";
    case Modality::graph: return "GRAPH";
    case Modality::equation: return "EQUATION";
    }
    return "TEXT";
}

Modality modality_from_string(std::string_view s) {
    if (s == "TEXT") return Modality::text;
    if (s == "TABLE") return Modality::table;
    if (s == "IMAGE") return Modality::image;
    if (s == "GRAPH") return Modality::graph;
    if (s == "EQUATION") return Modality::equation;
    throw format_error("unknown modality: " + std::string(s));
}

const Chunk* Corpus::find_chunk(std::string_view chunk_id) const {
    for (const auto& c : chunks) {
        if (c.chunk_id == chunk_id) return &c;
    }
    return nullptr;
}

std::vector<Violation> validate_corpus(const Corpus& corpus) {
    std::vector<Violation> out;

    std::unordered_map<std::string, int> id_counts;
    for (const auto& c : corpus.chunks) ++id_counts[c.chunk_id];
    for (const auto& [id, count] : id_counts) {
        if (count > 1) {
            out.push_back({id, kRuleDuplicateId,
                           "chunk_id appears " + std::to_string(count) + " times"});
        }
    }

    // order_index values per document must be unique and contiguous from 0
    std::unordered_map<std::string, std::vector<std::uint32_t>> doc_orders;
    std::unordered_map<std::string, std::string> doc_min_chunk;
    for (const auto& c : corpus.chunks) {
        doc_orders[c.doc_id].push_back(c.order_index);
        auto it = doc_min_chunk.find(c.doc_id);
        if (it == doc_min_chunk.end() || c.chunk_id < it->second) {
            doc_min_chunk[c.doc_id] = c.chunk_id;
        }
    }
    for (auto& [doc_id, orders] : doc_orders) {
        std::sort(orders.begin(), orders.end());
        bool ok = true;
        for (std::size_t i = 0; i < orders.size(); ++i) {
            if (orders[i] != i) { ok = false; break; }
        }
        if (!ok) {
            out.push_back({doc_min_chunk[doc_id], kRuleOrderIndex,
                           "document " + doc_id + " order_index values are not 0.." +
                               std::to_string(orders.size() - 1)});
        }
    }

    for (const auto& c : corpus.chunks) {
        if (!corpus.documents.count(c.doc_id)) {
            out.push_back({c.chunk_id, kRuleUnknownDocument,
                           "doc_id " + c.doc_id + " not in document table"});
        }
        if (c.modality == Modality::table && !is_canonical_table_html(c.content)) {
            out.push_back({c.chunk_id, kRuleMalformedTable,
                           "content is not a well-formed table fragment"});
        }
        if ((c.modality == Modality::image || c.modality == Modality::graph) &&
            !is_valid_base64(c.content)) {
            out.push_back({c.chunk_id, kRuleMalformedBase64,
                           "content does not decode as base64"});
        }
        if (c.modality != Modality::text && c.summary.empty()) {
            out.push_back({c.chunk_id, kRuleEmptySummary, "non-TEXT chunk has empty summary"});
        }
    }

    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        if (a.chunk_id != b.chunk_id) return a.chunk_id < b.chunk_id;
        if (a.rule != b.rule) return a.rule < b.rule;
        return a.detail < b.detail;
    });
    return out;
}

namespace {

json chunk_to_json(const Chunk& c) {
    json j;
    j["record"] = "chunk";
    j["chunk_id"] = c.chunk_id;
    j["doc_id"] = c.doc_id;
    j["modality"] = to_string(c.modality);
    j["order_index"] = c.order_index;
    j["content"] = c.content;
    j["caption"] = c.caption;
    j["summary"] = c.summary;
    j["entities"] = c.entities;
    if (c.page) j["page"] = *c.page;
    return j;
}

Chunk chunk_from_json(const json& j) {
    Chunk c;
    c.chunk_id = j.at("chunk_id").get<std::string>();
    c.doc_id = j.at("doc_id").get<std::string>();
    c.modality = modality_from_string(j.at("modality").get<std::string>());
    c.order_index = j.at("order_index").get<std::uint32_t>();
    c.content = j.at("content").get<std::string>();
    c.caption = j.value("caption", std::string());
    c.summary = j.at("summary").get<std::string>();
    c.entities = j.at("entities").get<std::vector<std::string>>();
    if (j.contains("page")) c.page = j.at("page").get<std::uint32_t>();
    return c;
}

} // namespace

std::string corpus_to_string(const Corpus& corpus) {
    std::string out;
    json header;
    header["record"] = "corpus";
    header["schema_version"] = kCorpusSchemaVersion;
    header["corpus_id"] = corpus.corpus_id;
    out += header.dump();
    out.push_back('\n');
    for (const auto& [doc_id, meta] : corpus.documents) {
        json j;
        j["record"] = "document";
        j["doc_id"] = meta.doc_id;
        j["title"] = meta.title;
        j["source_path"] = meta.source_path;
        out += j.dump();
        out.push_back('\n');
    }
    for (const auto& c : corpus.chunks) {
        out += chunk_to_json(c).dump();
        out.push_back('\n');
    }
    return out;
}

Corpus corpus_from_string(std::string_view data) {
    Corpus corpus;
    std::istringstream in{std::string(data)};
    std::string line;
    bool saw_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw format_error("corpus line " + std::to_string(line_no) +
                               ": parse error: " + e.what());
        }
        try {
            const std::string record = j.at("record").get<std::string>();
            if (record == "corpus") {
                if (saw_header) throw format_error("duplicate corpus header");
                const int version = j.at("schema_version").get<int>();
                if (version != kCorpusSchemaVersion) {
                    throw format_error("unsupported corpus schema_version " +
                                       std::to_string(version) + " (expected " +
                                       std::to_string(kCorpusSchemaVersion) + ")");
                }
                corpus.corpus_id = j.at("corpus_id").get<std::string>();
                saw_header = true;
            } else if (record == "document") {
                DocumentMeta meta;
                meta.doc_id = j.at("doc_id").get<std::string>();
                meta.title = j.at("title").get<std::string>();
                meta.source_path = j.value("source_path", std::string());
                corpus.documents[meta.doc_id] = std::move(meta);
            } else if (record == "chunk") {
                corpus.chunks.push_back(chunk_from_json(j));
            } else {
                throw format_error("unknown record type: " + record);
            }
        } catch (const json::exception& e) {
            throw format_error("corpus line " + std::to_string(line_no) +
                               ": bad record: " + e.what());
        }
    }
    if (!saw_header) throw format_error("corpus file missing header record");
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    auto violations = validate_corpus(corpus);
    if (!violations.empty()) {
        throw validation_error("refusing to save invalid corpus: " + violations.front().chunk_id +
                               " " + violations.front().rule + " (and " +
                               std::to_string(violations.size() - 1) + " more)");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    out << corpus_to_string(corpus);
    if (!out) throw io_error("write failed: " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    Corpus corpus = corpus_from_string(buf.str());
    auto violations = validate_corpus(corpus);
    if (!violations.empty()) {
        std::string msg = "corpus failed validation on load:";
        for (std::size_t i = 0; i < violations.size() && i < 5; ++i) {
            msg += " [" + violations[i].chunk_id + " " + violations[i].rule + "]";
        }
        throw validation_error(msg);
    }
    return corpus;
}

std::string corpus_content_id(const Corpus& corpus) {
    return hex64(fnv1a64(corpus_to_string(corpus)));
}

} // namespace maha
