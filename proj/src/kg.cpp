#include "maha/kg.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "maha/errors.hpp"
#include "maha/text.hpp"

namespace maha {

using nlohmann::json;

std::string_view to_string(EdgeType t) {
    switch (t) {
    case EdgeType::next_text: return "NEXT_TEXT";
    case EdgeType::next_table: return "NEXT_TABLE";
    case EdgeType::next_image: return "NEXT_IMAGE";
    case EdgeType::next_formula: return "NEXT_FORMULA";
    case EdgeType::has_image: return "HAS_IMAGE";
    case EdgeType::has_table: return "HAS_TABLE";
    case EdgeType::has_formula: return "HAS_FORMULA";
    case EdgeType::mentions: return "MENTIONS";
    }
    return "MENTIONS";
}

EdgeType edge_type_from_string(std::string_view s) {
    if (s == "NEXT_TEXT") return EdgeType::next_text;
    if (s == "NEXT_TABLE") return EdgeType::next_table;
    if (s == "NEXT_IMAGE") return EdgeType::next_image;
    if (s == "NEXT_FORMULA") return EdgeType::next_formula;
    if (s == "HAS_IMAGE") return EdgeType::has_image;
    if (s == "HAS_TABLE") return EdgeType::has_table;
    if (s == "HAS_FORMULA") return EdgeType::has_formula;
    if (s == "MENTIONS") return EdgeType::mentions;
    throw format_error("unknown edge type: " + std::string(s));
}

const std::set<EdgeType>& all_edge_types() {
    static const std::set<EdgeType> all = {
        EdgeType::next_text,   EdgeType::next_table, EdgeType::next_image,
        EdgeType::next_formula, EdgeType::has_image,  EdgeType::has_table,
        EdgeType::has_formula, EdgeType::mentions,
    };
    return all;
}

KnowledgeGraph KnowledgeGraph::create(std::map<std::string, Modality> nodes,
                                      std::vector<Edge> edges, std::string snapshot_id) {
    KnowledgeGraph g;
    g.nodes_ = std::move(nodes);
    g.edges_ = std::move(edges);
    g.snapshot_id_ = std::move(snapshot_id);
    for (const auto& e : g.edges_) {
        if (!g.nodes_.count(e.src) || !g.nodes_.count(e.dst)) {
            throw format_error("edge references unknown node: " + e.src + " -> " + e.dst);
        }
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());
    for (std::uint32_t i = 0; i < g.edges_.size(); ++i) {
        g.incident_[g.edges_[i].src].push_back(i);
        if (g.edges_[i].dst != g.edges_[i].src) g.incident_[g.edges_[i].dst].push_back(i);
    }
    return g;
}

bool KnowledgeGraph::has_node(std::string_view chunk_id) const {
    return nodes_.count(std::string(chunk_id)) > 0;
}

const std::vector<std::uint32_t>& KnowledgeGraph::incident(const std::string& chunk_id) const {
    static const std::vector<std::uint32_t> empty;
    auto it = incident_.find(chunk_id);
    return it == incident_.end() ? empty : it->second;
}

std::string normalize_entity(std::string_view raw) {
    std::string out;
    bool pending_space = false;
    for (char c : raw) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    }
    return out;
}

std::vector<std::string> extract_entities(std::string_view text) {
    auto tokens = tokenize_with_offsets(text);
    std::set<std::string> found;
    std::vector<std::string> run;
    auto flush = [&] {
        if (!run.empty()) {
            std::string joined;
            for (const auto& t : run) {
                if (!joined.empty()) joined.push_back(' ');
                joined += t;
            }
            found.insert(std::move(joined));
            run.clear();
        }
    };
    for (const auto& tok : tokens) {
        const char first = text[tok.begin];
        const bool capitalized = first >= 'A' && first <= 'Z' && tok.text.size() >= 2;
        if (capitalized) {
            run.push_back(tok.text);
        } else {
            flush();
        }
    }
    flush();
    return {found.begin(), found.end()};
}

namespace {

EdgeType next_type_for(Modality m) {
    switch (m) {
    case Modality::text: return EdgeType::next_text;
    case Modality::table: return EdgeType::next_table;
    case Modality::image:
    case Modality::graph: return EdgeType::next_image;
    case Modality::equation: return EdgeType::next_formula;
    }
    return EdgeType::next_text;
}

EdgeType has_type_for(Modality m) {
    switch (m) {
    case Modality::table: return EdgeType::has_table;
    case Modality::image:
    case Modality::graph: return EdgeType::has_image;
    case Modality::equation: return EdgeType::has_formula;
    case Modality::text: break;
    }
    throw invalid_argument_error("TEXT chunks have no HAS_* anchor");
}

// IMAGE and GRAPH share a chain; everything else chains per modality.
int modality_class(Modality m) {
    switch (m) {
    case Modality::text: return 0;
    case Modality::table: return 1;
    case Modality::image:
    case Modality::graph: return 2;
    case Modality::equation: return 3;
    }
    return 0;
}

} // namespace

KnowledgeGraph build_graph(const Corpus& corpus, const GraphBuildOptions& options) {
    auto violations = validate_corpus(corpus);
    if (!violations.empty()) {
        throw validation_error("build_graph: corpus invalid (" + violations.front().chunk_id +
                               " " + violations.front().rule + ")");
    }

    std::map<std::string, Modality> nodes;
    for (const auto& c : corpus.chunks) nodes[c.chunk_id] = c.modality;

    // Per-document reading order, independent of corpus chunk order.
    std::map<std::string, std::vector<const Chunk*>> per_doc;
    for (const auto& c : corpus.chunks) per_doc[c.doc_id].push_back(&c);
    for (auto& [doc_id, chunks] : per_doc) {
        std::sort(chunks.begin(), chunks.end(),
                  [](const Chunk* a, const Chunk* b) { return a->order_index < b->order_index; });
    }

    std::vector<Edge> edges;

    for (const auto& [doc_id, chunks] : per_doc) {
        // NEXT_* chains per modality class
        std::map<int, const Chunk*> last_of_class;
        for (const Chunk* c : chunks) {
            const int cls = modality_class(c->modality);
            auto it = last_of_class.find(cls);
            if (it != last_of_class.end()) {
                edges.push_back({it->second->chunk_id, next_type_for(c->modality), c->chunk_id});
            }
            last_of_class[cls] = c;
        }

        // HAS_* anchoring: nearest preceding TEXT chunk, else nearest following
        std::vector<const Chunk*> texts;
        for (const Chunk* c : chunks) {
            if (c->modality == Modality::text) texts.push_back(c);
        }
        for (const Chunk* c : chunks) {
            if (c->modality == Modality::text) continue;
            if (texts.empty()) {
                throw validation_error("build_graph: document " + doc_id +
                                       " has non-TEXT chunks but no TEXT chunk to anchor them");
            }
            const Chunk* anchor = nullptr;
            for (const Chunk* t : texts) {
                if (t->order_index < c->order_index) {
                    anchor = t;
                } else {
                    break;
                }
            }
            if (anchor == nullptr) {
                // no preceding text: nearest following
                for (const Chunk* t : texts) {
                    if (t->order_index > c->order_index) {
                        anchor = t;
                        break;
                    }
                }
            }
            edges.push_back({anchor->chunk_id, has_type_for(c->modality), c->chunk_id});
        }
    }

    // MENTIONS: chunks sharing >= mentions_min_shared normalized entities
    if (options.mentions_min_shared > 0) {
        std::map<std::string, std::vector<const Chunk*>> by_entity;
        for (const auto& c : corpus.chunks) {
            const std::set<std::string> unique(c.entities.begin(), c.entities.end());
            for (const auto& e : unique) by_entity[e].push_back(&c);
        }
        std::map<std::pair<std::string, std::string>, int> shared;
        for (const auto& [entity, members] : by_entity) {
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    const Chunk* a = members[i];
                    const Chunk* b = members[j];
                    if (a->chunk_id == b->chunk_id) continue;
                    if (!options.mentions_cross_doc && a->doc_id != b->doc_id) continue;
                    auto key = a->chunk_id < b->chunk_id
                                   ? std::make_pair(a->chunk_id, b->chunk_id)
                                   : std::make_pair(b->chunk_id, a->chunk_id);
                    ++shared[key];
                }
            }
        }
        for (const auto& [pair, count] : shared) {
            if (count >= options.mentions_min_shared) {
                edges.push_back({pair.first, EdgeType::mentions, pair.second});
            }
        }
    }

    return KnowledgeGraph::create(std::move(nodes), std::move(edges), corpus_content_id(corpus));
}

std::map<std::string, int> expand(const KnowledgeGraph& graph,
                                  const std::vector<std::string>& seeds,
                                  const std::set<EdgeType>& allowed, int depth) {
    if (depth < 0) throw invalid_argument_error("expand: depth must be >= 0");
    std::map<std::string, int> dist;
    std::deque<std::string> frontier;
    for (const auto& s : seeds) {
        if (!graph.has_node(s)) throw invalid_argument_error("expand: unknown seed " + s);
        if (dist.emplace(s, 0).second) frontier.push_back(s);
    }
    while (!frontier.empty()) {
        std::string node = std::move(frontier.front());
        frontier.pop_front();
        const int d = dist[node];
        if (d >= depth) continue;
        for (std::uint32_t idx : graph.incident(node)) {
            const Edge& e = graph.edges()[idx];
            if (!allowed.count(e.type)) continue;
            const std::string& other = e.src == node ? e.dst : e.src;
            if (dist.emplace(other, d + 1).second) frontier.push_back(other);
        }
    }
    return dist;
}

void persist_graph(const KnowledgeGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    json header;
    header["record"] = "graph";
    header["schema_version"] = kGraphSchemaVersion;
    header["snapshot_id"] = graph.snapshot_id();
    out << header.dump() << '\n';
    for (const auto& [id, modality] : graph.nodes()) {
        json j;
        j["record"] = "node";
        j["chunk_id"] = id;
        j["modality"] = to_string(modality);
        out << j.dump() << '\n';
    }
    for (const auto& e : graph.edges()) {
        json j;
        j["record"] = "edge";
        j["src"] = e.src;
        j["type"] = to_string(e.type);
        j["dst"] = e.dst;
        out << j.dump() << '\n';
    }
    if (!out) throw io_error("write failed: " + path.string());
}

KnowledgeGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path.string());
    std::map<std::string, Modality> nodes;
    std::vector<Edge> edges;
    std::string snapshot_id;
    bool saw_header = false;
    std::string line;
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
            if (record == "graph") {
                const int version = j.at("schema_version").get<int>();
                if (version != kGraphSchemaVersion) {
                    throw format_error("unsupported graph schema_version " +
                                       std::to_string(version));
                }
                snapshot_id = j.value("snapshot_id", std::string());
                saw_header = true;
            } else if (record == "node") {
                nodes[j.at("chunk_id").get<std::string>()] =
                    modality_from_string(j.at("modality").get<std::string>());
            } else if (record == "edge") {
                edges.push_back({j.at("src").get<std::string>(),
                                 edge_type_from_string(j.at("type").get<std::string>()),
                                 j.at("dst").get<std::string>()});
            } else {
                throw format_error("unknown record type: " + record);
            }
        } catch (const json::exception& e) {
            throw format_error(path.string() + " line " + std::to_string(line_no) +
                               ": bad record: " + e.what());
        }
    }
    if (!saw_header) throw format_error(path.string() + ": missing graph header");
    return KnowledgeGraph::create(std::move(nodes), std::move(edges), std::move(snapshot_id));
}

std::string export_graph_dot(const KnowledgeGraph& graph) {
    std::ostringstream out;
    out << "digraph maha {\n";
    for (const auto& [id, modality] : graph.nodes()) {
        out << "  \"" << id << "\" [label=\"" << id << "\\n" << to_string(modality) << "\"];\n";
    }
    for (const auto& e : graph.edges()) {
        out << "  \"" << e.src << "\" -> \"" << e.dst << "\" [label=\"" << to_string(e.type)
            << "\"";
        if (e.type == EdgeType::mentions) out << ", dir=none";
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace maha
