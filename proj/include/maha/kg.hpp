#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "maha/corpus.hpp"

namespace maha {

// Edge schema of the modality-aware knowledge graph. NEXT_* edges chain
// same-class chunks in reading order (NEXT_IMAGE covers IMAGE and GRAPH,
// NEXT_FORMULA covers EQUATION); HAS_* edges anchor a non-TEXT chunk to a
// text chunk; MENTIONS links chunks sharing a normalized entity.
enum class EdgeType {
    next_text,
    next_table,
    next_image,
    next_formula,
    has_image,
    has_table,
    has_formula,
    mentions,
};

std::string_view to_string(EdgeType t);
EdgeType edge_type_from_string(std::string_view s);
const std::set<EdgeType>& all_edge_types();

struct Edge {
    std::string src;
    EdgeType type = EdgeType::mentions;
    std::string dst;

    bool operator==(const Edge&) const = default;
    auto operator<=>(const Edge&) const = default;
};

struct GraphBuildOptions {
    int mentions_min_shared = 1;
    bool mentions_cross_doc = true;
};

class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    // Validates endpoints, sorts edges canonically, builds the adjacency.
    static KnowledgeGraph create(std::map<std::string, Modality> nodes, std::vector<Edge> edges,
                                 std::string snapshot_id);

    const std::map<std::string, Modality>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::string& snapshot_id() const { return snapshot_id_; }
    bool has_node(std::string_view chunk_id) const;

    // Edge indices touching a node, both directions.
    const std::vector<std::uint32_t>& incident(const std::string& chunk_id) const;

private:
    std::map<std::string, Modality> nodes_;
    std::vector<Edge> edges_;
    std::map<std::string, std::vector<std::uint32_t>> incident_;
    std::string snapshot_id_;
};

// Rule-based extraction: maximal runs of capitalized tokens (each token at
// least two characters), normalized to lowercase single-spaced strings,
// deduplicated and sorted.
std::vector<std::string> extract_entities(std::string_view text);
std::string normalize_entity(std::string_view raw);

// Schema-driven construction over a valid corpus: one node per chunk,
// NEXT_* chains per document and modality class, HAS_* anchoring from the
// nearest preceding (else following) TEXT chunk, MENTIONS between chunks
// sharing enough entities. Throws validation_error when a document has a
// non-TEXT chunk but no TEXT chunk to anchor it.
KnowledgeGraph build_graph(const Corpus& corpus, const GraphBuildOptions& options = {});

// Breadth-first closure from seeds over the allowed edge types, traversing
// edges in both directions, to at most `depth` hops. Returns reached node ->
// minimum hop distance (seeds map to 0). Unknown seeds are an error.
std::map<std::string, int> expand(const KnowledgeGraph& graph,
                                  const std::vector<std::string>& seeds,
                                  const std::set<EdgeType>& allowed, int depth);

inline constexpr int kGraphSchemaVersion = 1;

void persist_graph(const KnowledgeGraph& graph, const std::filesystem::path& path);
KnowledgeGraph load_graph(const std::filesystem::path& path);

// Graphviz DOT rendering for external visualization.
std::string export_graph_dot(const KnowledgeGraph& graph);

} // namespace maha
