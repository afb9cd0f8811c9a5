#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "maha/corpus.hpp"
#include "maha/embed.hpp"

namespace maha {

struct IndexedChunk {
    std::string chunk_id;
    Modality modality = Modality::text;
    Embedding embedding;
};

struct SearchHit {
    std::string chunk_id;
    double score = 0.0; // cosine, equals dot product for unit vectors
    int rank = 0;

    bool operator==(const SearchHit&) const = default;
};

// Exact flat index, immutable after build. Scores are deterministic:
// float32 storage, double accumulation, ties broken by ascending chunk_id.
class VectorIndex {
public:
    VectorIndex() = default;

    static VectorIndex build(std::vector<IndexedChunk> entries, std::string snapshot_id = {},
                             std::string provider_id = {});

    int dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::string& snapshot_id() const { return snapshot_id_; }
    const std::string& provider_id() const { return provider_id_; }

    const std::string& chunk_id_at(std::size_t i) const { return ids_[i]; }
    Modality modality_at(std::size_t i) const { return modalities_[i]; }
    const float* vector_at(std::size_t i) const { return data_.data() + i * dim_; }

    std::vector<SearchHit> search(const Embedding& query, int k,
                                  const std::optional<std::set<Modality>>& modality_filter =
                                      std::nullopt) const;

    void persist(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

private:
    int dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<Modality> modalities_;
    std::vector<float> data_;
    std::string snapshot_id_;
    std::string provider_id_;
};

} // namespace maha
