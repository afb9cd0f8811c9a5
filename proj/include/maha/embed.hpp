#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "maha/corpus.hpp"

namespace maha {

// Unit-norm dense vector. Normalization happens on creation; every consumer
// may assume |v| == 1 within 1e-6.
struct Embedding {
    std::vector<float> values;
    std::string provider_id;

    int dim() const { return static_cast<int>(values.size()); }
};

double cosine(const Embedding& a, const Embedding& b);

enum class ProviderKind { remote_text, remote_image_text, local_deterministic };

std::string_view to_string(ProviderKind k);
ProviderKind provider_kind_from_string(std::string_view s);

struct ImageInput {
    std::string data_b64;
    std::string caption;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    const std::string& provider_id() const { return provider_id_; }
    int dim() const { return dim_; }
    ProviderKind kind() const { return kind_; }
    bool supports_images() const { return kind_ != ProviderKind::remote_text; }

    std::vector<Embedding> embed_texts(const std::vector<std::string>& texts);
    std::vector<Embedding> embed_images(const std::vector<ImageInput>& images);

protected:
    EmbeddingProvider(std::string provider_id, int dim, ProviderKind kind);
    virtual std::vector<Embedding> do_embed_texts(const std::vector<std::string>& texts) = 0;
    virtual std::vector<Embedding> do_embed_images(const std::vector<ImageInput>& images);

private:
    std::string provider_id_;
    int dim_;
    ProviderKind kind_;
};

// Signed-hash bag embedding: each token hashes (seeded) to a coordinate and
// a sign, counts accumulate, the result is L2-normalized. Order-invariant
// over tokens; an empty token list yields e_0 = (1, 0, ..., 0).
Embedding deterministic_embed(std::string_view text, int dim, std::uint64_t seed,
                              const std::string& provider_id = {});

class DeterministicProvider final : public EmbeddingProvider {
public:
    DeterministicProvider(int dim, std::uint64_t seed);
    std::uint64_t seed() const { return seed_; }

protected:
    std::vector<Embedding> do_embed_texts(const std::vector<std::string>& texts) override;
    std::vector<Embedding> do_embed_images(const std::vector<ImageInput>& images) override;

private:
    std::uint64_t seed_;
};

struct RemoteProviderConfig {
    std::string base_url; // e.g. http://127.0.0.1:9100
    std::string provider_id;
    int dim = 0;
    ProviderKind kind = ProviderKind::remote_text;
    std::string auth_token; // sent as a bearer token when non-empty
    int batch_size = 16;
    int max_inflight = 4;
    int timeout_sec = 30;
};

// Speaks the provider wire protocol: POST {base_url}/v1/embed with
// {"texts": [...]} or {"images_b64": [...]}, response {"vectors": [[...]]}.
// Responses with the wrong dimension are rejected, never truncated.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(RemoteProviderConfig config);
    ~RemoteEmbeddingProvider() override;

protected:
    std::vector<Embedding> do_embed_texts(const std::vector<std::string>& texts) override;
    std::vector<Embedding> do_embed_images(const std::vector<ImageInput>& images) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Embedding embed_text(const std::string& text, EmbeddingProvider& provider);

// Embedding basis per modality: TEXT embeds content; TABLE and EQUATION
// embed summary + " " + content text; IMAGE/GRAPH go through the image
// provider when one is configured, else fall back to embedding the summary.
Embedding embed_chunk(const Chunk& chunk, EmbeddingProvider& text_provider,
                      EmbeddingProvider* image_provider = nullptr);

// The text the fallback path embeds for a chunk (exposed for tests).
std::string chunk_embedding_text(const Chunk& chunk);

} // namespace maha
