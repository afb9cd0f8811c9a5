#include "maha/embed.hpp"

#include <cmath>
#include <semaphore>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "maha/errors.hpp"
#include "maha/tablehtml.hpp"
#include "maha/text.hpp"

namespace maha {

using nlohmann::json;

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw invalid_argument_error("cosine: dimension mismatch " + std::to_string(a.dim()) +
                                     " vs " + std::to_string(b.dim()));
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += static_cast<double>(a.values[i]) * static_cast<double>(b.values[i]);
    }
    return dot;
}

std::string_view to_string(ProviderKind k) {
    switch (k) {
    case ProviderKind::remote_text: return "remote-text";
    case ProviderKind::remote_image_text: return "remote-image-text";
    case ProviderKind::local_deterministic: return "local-deterministic";
    }
    return "local-deterministic";
}

ProviderKind provider_kind_from_string(std::string_view s) {
    if (s == "remote-text") return ProviderKind::remote_text;
    if (s == "remote-image-text") return ProviderKind::remote_image_text;
    if (s == "local-deterministic") return ProviderKind::local_deterministic;
    throw format_error("unknown provider kind: " + std::string(s));
}

EmbeddingProvider::EmbeddingProvider(std::string provider_id, int dim, ProviderKind kind)
    : provider_id_(std::move(provider_id)), dim_(dim), kind_(kind) {
    if (dim_ < 2) throw invalid_argument_error("embedding dim must be >= 2");
}

std::vector<Embedding> EmbeddingProvider::embed_texts(const std::vector<std::string>& texts) {
    auto out = do_embed_texts(texts);
    if (out.size() != texts.size()) {
        throw provider_error(provider_id_ + ": embedding count mismatch");
    }
    return out;
}

std::vector<Embedding> EmbeddingProvider::embed_images(const std::vector<ImageInput>& images) {
    if (!supports_images()) {
        throw invalid_argument_error(provider_id_ + " does not embed images");
    }
    auto out = do_embed_images(images);
    if (out.size() != images.size()) {
        throw provider_error(provider_id_ + ": embedding count mismatch");
    }
    return out;
}

std::vector<Embedding> EmbeddingProvider::do_embed_images(const std::vector<ImageInput>&) {
    throw invalid_argument_error(provider_id_ + " does not embed images");
}

namespace {

Embedding normalized(std::vector<double> acc, const std::string& provider_id) {
    double norm_sq = 0.0;
    for (double v : acc) norm_sq += v * v;
    if (norm_sq == 0.0) {
        throw provider_error(provider_id + ": zero vector cannot be normalized");
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    Embedding e;
    e.provider_id = provider_id;
    e.values.reserve(acc.size());
    for (double v : acc) e.values.push_back(static_cast<float>(v * inv));
    return e;
}

} // namespace

Embedding deterministic_embed(std::string_view text, int dim, std::uint64_t seed,
                              const std::string& provider_id) {
    if (dim < 2) throw invalid_argument_error("embedding dim must be >= 2");
    std::string pid = provider_id.empty()
                          ? "local-det/" + std::to_string(dim) + "/" + std::to_string(seed)
                          : provider_id;
    auto tokens = tokenize(text);
    if (tokens.empty()) {
        Embedding e;
        e.provider_id = std::move(pid);
        e.values.assign(static_cast<std::size_t>(dim), 0.0f);
        e.values[0] = 1.0f;
        return e;
    }
    std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
    for (const auto& tok : tokens) {
        const std::uint64_t h = splitmix64(fnv1a64(tok) ^ seed);
        const std::size_t idx = static_cast<std::size_t>((h >> 1) % static_cast<std::uint64_t>(dim));
        const double sign = (h & 1) ? 1.0 : -1.0;
        acc[idx] += sign;
    }
    bool all_zero = true;
    for (double v : acc) {
        if (v != 0.0) {
            all_zero = false;
            break;
        }
    }
    if (all_zero) {
        // signed counts cancelled exactly; fall back to the empty-input vector
        Embedding e;
        e.provider_id = std::move(pid);
        e.values.assign(static_cast<std::size_t>(dim), 0.0f);
        e.values[0] = 1.0f;
        return e;
    }
    return normalized(std::move(acc), pid);
}

DeterministicProvider::DeterministicProvider(int dim, std::uint64_t seed)
    : EmbeddingProvider("local-det/" + std::to_string(dim) + "/" + std::to_string(seed), dim,
                        ProviderKind::local_deterministic),
      seed_(seed) {}

std::vector<Embedding> DeterministicProvider::do_embed_texts(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(deterministic_embed(t, dim(), seed_, provider_id()));
    return out;
}

std::vector<Embedding> DeterministicProvider::do_embed_images(const std::vector<ImageInput>& images) {
    // Stand-in for an image-text encoder: caption plus payload bytes.
    std::vector<Embedding> out;
    out.reserve(images.size());
    for (const auto& img : images) {
        out.push_back(
            deterministic_embed(img.caption + " " + img.data_b64, dim(), seed_, provider_id()));
    }
    return out;
}

struct RemoteEmbeddingProvider::Impl {
    RemoteProviderConfig config;
    std::counting_semaphore<64> inflight;

    explicit Impl(RemoteProviderConfig cfg)
        : config(std::move(cfg)), inflight(std::max(1, config.max_inflight)) {}

    json post(const json& body) {
        inflight.acquire();
        struct Release {
            std::counting_semaphore<64>& sem;
            ~Release() { sem.release(); }
        } release{inflight};

        httplib::Client client(config.base_url);
        client.set_connection_timeout(config.timeout_sec, 0);
        client.set_read_timeout(config.timeout_sec, 0);
        httplib::Headers headers;
        if (!config.auth_token.empty()) {
            headers.emplace("Authorization", "Bearer " + config.auth_token);
        }
        auto res = client.Post("/v1/embed", headers, body.dump(), "application/json");
        if (!res) {
            throw provider_error(config.provider_id + ": transport failure contacting " +
                                 config.base_url);
        }
        if (res->status != 200) {
            throw provider_error(config.provider_id + ": HTTP " + std::to_string(res->status));
        }
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw provider_error(config.provider_id + ": bad response: " + e.what());
        }
    }

    std::vector<Embedding> parse_vectors(const json& response, std::size_t expected) {
        std::vector<Embedding> out;
        if (!response.contains("vectors") || !response["vectors"].is_array()) {
            throw provider_error(config.provider_id + ": response missing vectors");
        }
        for (const auto& vec : response["vectors"]) {
            std::vector<double> acc;
            acc.reserve(vec.size());
            for (const auto& v : vec) acc.push_back(v.get<double>());
            if (static_cast<int>(acc.size()) != config.dim) {
                throw provider_error(config.provider_id + ": dimension mismatch, got " +
                                     std::to_string(acc.size()) + " expected " +
                                     std::to_string(config.dim));
            }
            out.push_back(normalized(std::move(acc), config.provider_id));
        }
        if (out.size() != expected) {
            throw provider_error(config.provider_id + ": vector count mismatch");
        }
        return out;
    }
};

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteProviderConfig config)
    : EmbeddingProvider(config.provider_id.empty() ? "remote/" + config.base_url
                                                   : config.provider_id,
                        config.dim, config.kind),
      impl_(std::make_unique<Impl>(std::move(config))) {
    impl_->config.provider_id = provider_id();
}

RemoteEmbeddingProvider::~RemoteEmbeddingProvider() = default;

std::vector<Embedding> RemoteEmbeddingProvider::do_embed_texts(
    const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    const std::size_t batch = static_cast<std::size_t>(std::max(1, impl_->config.batch_size));
    for (std::size_t i = 0; i < texts.size(); i += batch) {
        const std::size_t n = std::min(batch, texts.size() - i);
        json body;
        body["texts"] = std::vector<std::string>(texts.begin() + static_cast<long>(i),
                                                 texts.begin() + static_cast<long>(i + n));
        auto vectors = impl_->parse_vectors(impl_->post(body), n);
        for (auto& v : vectors) out.push_back(std::move(v));
    }
    return out;
}

std::vector<Embedding> RemoteEmbeddingProvider::do_embed_images(
    const std::vector<ImageInput>& images) {
    std::vector<Embedding> out;
    const std::size_t batch = static_cast<std::size_t>(std::max(1, impl_->config.batch_size));
    for (std::size_t i = 0; i < images.size(); i += batch) {
        const std::size_t n = std::min(batch, images.size() - i);
        std::vector<std::string> payload;
        payload.reserve(n);
        for (std::size_t k = 0; k < n; ++k) payload.push_back(images[i + k].data_b64);
        json body;
        body["images_b64"] = payload;
        auto vectors = impl_->parse_vectors(impl_->post(body), n);
        for (auto& v : vectors) out.push_back(std::move(v));
    }
    return out;
}

Embedding embed_text(const std::string& text, EmbeddingProvider& provider) {
    return provider.embed_texts({text}).front();
}

std::string chunk_embedding_text(const Chunk& chunk) {
    switch (chunk.modality) {
    case Modality::text:
        return chunk.content;
    case Modality::table:
        return chunk.summary + " " + flatten_table_html(chunk.content);
    case Modality::equation:
        return chunk.summary + " " + chunk.content;
    case Modality::image:
    case Modality::graph:
        return chunk.summary;
    }
    return chunk.content;
}

Embedding embed_chunk(const Chunk& chunk, EmbeddingProvider& text_provider,
                      EmbeddingProvider* image_provider) {
    if ((chunk.modality == Modality::image || chunk.modality == Modality::graph) &&
        image_provider != nullptr) {
        return image_provider->embed_images({{chunk.content, chunk.caption}}).front();
    }
    return embed_text(chunk_embedding_text(chunk), text_provider);
}

} // namespace maha
