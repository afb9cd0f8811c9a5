#include "maha/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "maha/base64.hpp"
#include "maha/errors.hpp"
#include "maha/kg.hpp"
#include "maha/text.hpp"

namespace maha {

using nlohmann::json;

std::string_view to_string(BlockKind k) {
    switch (k) {
    case BlockKind::paragraph: return "paragraph";
    case BlockKind::heading: return "heading";
    case BlockKind::table: return "table";
    case BlockKind::image: return "image";
    case BlockKind::graph: return "graph";
    case BlockKind::equation: return "equation";
    }
    return "paragraph";
}

BlockKind block_kind_from_string(std::string_view s) {
    if (s == "paragraph") return BlockKind::paragraph;
    if (s == "heading") return BlockKind::heading;
    if (s == "table") return BlockKind::table;
    if (s == "image") return BlockKind::image;
    if (s == "graph") return BlockKind::graph;
    if (s == "equation") return BlockKind::equation;
    throw format_error("unknown block kind: " + std::string(s));
}

std::vector<TokenSpan> chunk_text(std::size_t token_count, const ChunkingPolicy& policy) {
    if (policy.max_tokens <= 0) throw invalid_argument_error("max_tokens must be positive");
    if (policy.overlap_tokens < 0 || policy.overlap_tokens >= policy.max_tokens) {
        throw invalid_argument_error("overlap_tokens must be in [0, max_tokens)");
    }
    std::vector<TokenSpan> spans;
    if (token_count == 0) return spans;
    const std::size_t max = static_cast<std::size_t>(policy.max_tokens);
    const std::size_t stride = max - static_cast<std::size_t>(policy.overlap_tokens);
    for (std::size_t start = 0;; start += stride) {
        std::size_t end = std::min(start + max, token_count);
        spans.push_back({start, end});
        if (end >= token_count) break;
    }
    return spans;
}

std::string TemplateSummarizer::summarize(const Chunk& chunk) {
    switch (chunk.modality) {
    case Modality::table: {
        auto rows = table_cells_from_html(chunk.content);
        std::string flat;
        for (const auto& row : rows) {
            for (const auto& cell : row) {
                if (!flat.empty()) flat.push_back(' ');
                flat += cell;
            }
        }
        return "Table with " + std::to_string(rows.size()) + " rows and " +
               std::to_string(rows.front().size()) + " columns: " + flat;
    }
    case Modality::image:
    case Modality::graph:
        return "Image: " + (chunk.caption.empty() ? std::string("(no caption)") : chunk.caption);
    case Modality::equation:
        return "Equation: " + chunk.content;
    case Modality::text:
        return chunk.content;
    }
    return chunk.content;
}

std::string summarize_chunk(const Chunk& chunk, Summarizer& summarizer) {
    if (chunk.modality == Modality::text) {
        throw invalid_argument_error("summarize_chunk expects a non-TEXT chunk");
    }
    std::string summary = summarizer.summarize(chunk);
    if (summary.empty()) {
        throw invalid_argument_error("summarizer produced an empty summary for " + chunk.chunk_id);
    }
    return summary;
}

namespace {

// ':' keeps ids safe inside URL paths (/chunks/{id})
std::string make_chunk_id(const std::string& doc_id, std::uint32_t order) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%04u", order);
    return doc_id + ":" + buf;
}

std::vector<std::string> normalized_declared(const std::vector<std::string>& declared) {
    std::set<std::string> out;
    for (const auto& e : declared) {
        std::string n = normalize_entity(e);
        if (!n.empty()) out.insert(std::move(n));
    }
    return {out.begin(), out.end()};
}

struct ParagraphRun {
    std::string text;
    std::optional<std::vector<std::string>> declared; // union when any block declared
    std::optional<std::uint32_t> page;             // first block's page
};

void flush_run(ParagraphRun& run, const SourceDocument& doc, const ChunkingPolicy& policy,
               std::uint32_t& order, std::vector<Chunk>& out) {
    if (run.text.empty()) return;
    auto tokens = tokenize_with_offsets(run.text);
    auto spans = chunk_text(tokens.size(), policy);
    for (const auto& span : spans) {
        const std::size_t byte_begin = tokens[span.begin].begin;
        const std::size_t byte_end = tokens[span.end - 1].end;
        Chunk c;
        c.doc_id = doc.doc_id;
        c.modality = Modality::text;
        c.order_index = order;
        c.chunk_id = make_chunk_id(doc.doc_id, order);
        c.content = run.text.substr(byte_begin, byte_end - byte_begin);
        c.summary = c.content;
        c.entities = run.declared ? normalized_declared(*run.declared)
                                  : extract_entities(c.content);
        c.page = run.page;
        out.push_back(std::move(c));
        ++order;
    }
    run = ParagraphRun{};
}

void merge_declared(ParagraphRun& run, const SourceBlock& block) {
    if (!block.declared_entities) return;
    if (!run.declared) run.declared.emplace();
    run.declared->insert(run.declared->end(), block.declared_entities->begin(),
                         block.declared_entities->end());
}

} // namespace

std::vector<Chunk> ingest_document(const SourceDocument& doc, const ChunkingPolicy& policy,
                                   Summarizer& summarizer) {
    if (doc.doc_id.empty()) throw invalid_argument_error("document has empty doc_id");
    if (doc.blocks.empty()) {
        throw invalid_argument_error("document " + doc.doc_id + " has no blocks");
    }

    std::vector<Chunk> out;
    std::uint32_t order = 0;
    ParagraphRun run;

    for (std::size_t i = 0; i < doc.blocks.size(); ++i) {
        const SourceBlock& block = doc.blocks[i];
        const std::string where = "document " + doc.doc_id + " block " + std::to_string(i);
        switch (block.kind) {
        case BlockKind::paragraph:
        case BlockKind::heading: {
            if (block.text.empty()) throw invalid_argument_error(where + ": missing text");
            if (run.text.empty()) {
                run.page = block.page;
            } else {
                run.text += "\n\n";
            }
            run.text += block.text;
            merge_declared(run, block);
            break;
        }
        case BlockKind::table: {
            flush_run(run, doc, policy, order, out);
            Chunk c;
            c.doc_id = doc.doc_id;
            c.modality = Modality::table;
            c.order_index = order;
            c.chunk_id = make_chunk_id(doc.doc_id, order);
            try {
                c.content = canonicalize_table(block.rows);
            } catch (const invalid_argument_error& e) {
                throw invalid_argument_error(where + ": " + e.what());
            }
            c.page = block.page;
            c.summary = summarize_chunk(c, summarizer);
            c.entities = block.declared_entities
                             ? normalized_declared(*block.declared_entities)
                             : extract_entities(flatten_table_html(c.content));
            out.push_back(std::move(c));
            ++order;
            break;
        }
        case BlockKind::equation: {
            if (block.text.empty()) throw invalid_argument_error(where + ": missing text");
            flush_run(run, doc, policy, order, out);
            Chunk c;
            c.doc_id = doc.doc_id;
            c.modality = Modality::equation;
            c.order_index = order;
            c.chunk_id = make_chunk_id(doc.doc_id, order);
            c.content = block.text;
            c.page = block.page;
            c.summary = summarize_chunk(c, summarizer);
            c.entities = block.declared_entities ? normalized_declared(*block.declared_entities)
                                                 : extract_entities(c.content);
            out.push_back(std::move(c));
            ++order;
            break;
        }
        case BlockKind::image:
        case BlockKind::graph: {
            if (block.data.empty()) throw invalid_argument_error(where + ": missing data");
            if (!is_valid_base64(block.data)) {
                throw invalid_argument_error(where + ": data is not valid base64");
            }
            flush_run(run, doc, policy, order, out);
            Chunk c;
            c.doc_id = doc.doc_id;
            c.modality = block.kind == BlockKind::image ? Modality::image : Modality::graph;
            c.order_index = order;
            c.chunk_id = make_chunk_id(doc.doc_id, order);
            c.content = block.data;
            c.caption = block.text;
            c.page = block.page;
            c.summary = summarize_chunk(c, summarizer);
            c.entities = block.declared_entities ? normalized_declared(*block.declared_entities)
                                                 : extract_entities(c.caption);
            out.push_back(std::move(c));
            ++order;
            break;
        }
        }
    }
    flush_run(run, doc, policy, order, out);
    return out;
}

namespace {

json block_to_json(const SourceBlock& b) {
    json j;
    j["record"] = "block";
    j["kind"] = to_string(b.kind);
    switch (b.kind) {
    case BlockKind::paragraph:
    case BlockKind::heading:
    case BlockKind::equation:
        j["text"] = b.text;
        break;
    case BlockKind::table:
        j["rows"] = b.rows;
        break;
    case BlockKind::image:
    case BlockKind::graph:
        j["data"] = b.data;
        if (!b.text.empty()) j["text"] = b.text;
        break;
    }
    if (b.declared_entities) j["declared_entities"] = *b.declared_entities;
    if (b.page) j["page"] = *b.page;
    return j;
}

SourceBlock block_from_json(const json& j) {
    SourceBlock b;
    b.kind = block_kind_from_string(j.at("kind").get<std::string>());
    b.text = j.value("text", std::string());
    if (j.contains("rows")) b.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
    b.data = j.value("data", std::string());
    if (j.contains("declared_entities")) {
        b.declared_entities = j.at("declared_entities").get<std::vector<std::string>>();
    }
    if (j.contains("page")) b.page = j.at("page").get<std::uint32_t>();
    return b;
}

} // namespace

void save_source_document(const SourceDocument& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    json header;
    header["record"] = "document";
    header["schema_version"] = kSourceDocSchemaVersion;
    header["doc_id"] = doc.doc_id;
    header["title"] = doc.title;
    out << header.dump() << '\n';
    for (const auto& b : doc.blocks) out << block_to_json(b).dump() << '\n';
    if (!out) throw io_error("write failed: " + path.string());
}

SourceDocument load_source_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path.string());
    SourceDocument doc;
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
            throw format_error(path.string() + " line " + std::to_string(line_no) +
                               ": parse error: " + e.what());
        }
        try {
            const std::string record = j.at("record").get<std::string>();
            if (record == "document") {
                const int version = j.at("schema_version").get<int>();
                if (version != kSourceDocSchemaVersion) {
                    throw format_error("unsupported document schema_version " +
                                       std::to_string(version));
                }
                doc.doc_id = j.at("doc_id").get<std::string>();
                doc.title = j.value("title", std::string());
                saw_header = true;
            } else if (record == "block") {
                if (!saw_header) throw format_error("block record before document header");
                doc.blocks.push_back(block_from_json(j));
            } else {
                throw format_error("unknown record type: " + record);
            }
        } catch (const json::exception& e) {
            throw format_error(path.string() + " line " + std::to_string(line_no) +
                               ": bad record: " + e.what());
        }
    }
    if (!saw_header) throw format_error(path.string() + ": missing document header");
    if (doc.blocks.empty()) throw format_error(path.string() + ": document has no blocks");
    return doc;
}

} // namespace maha
