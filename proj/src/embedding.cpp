#include "divrec/embedding.hpp"

#include <cmath>

#include <json.hpp>

#include <httplib.h>

#include "divrec/error.hpp"
#include "divrec/rng.hpp"
#include "divrec/strings.hpp"

namespace divrec {

std::vector<float> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<float> out(texts.size() * static_cast<size_t>(dimension()));
    for (size_t i = 0; i < texts.size(); ++i) {
        auto v = embed(texts[i]);
        std::copy(v.begin(), v.end(), out.begin() + i * static_cast<size_t>(dimension()));
    }
    return out;
}

TrigramEmbedder::TrigramEmbedder(int dimension) : dimension_(dimension) {
    if (dimension <= 0) throw Error(ErrorKind::ConfigError, "embedding dimension must be positive");
}

std::string TrigramEmbedder::fingerprint() const {
    return "local_ngram/trigram-v1/d" + std::to_string(dimension_);
}

std::vector<float> TrigramEmbedder::embed(const std::string& text) const {
    std::vector<float> v(static_cast<size_t>(dimension_), 0.0f);
    std::string padded = "^" + to_lower(text) + "$";
    if (padded.size() < 3) padded += "$";
    for (size_t i = 0; i + 3 <= padded.size(); ++i) {
        uint64_t h = fnv1a64(std::string_view(padded).substr(i, 3));
        v[h % static_cast<uint64_t>(dimension_)] += 1.0f;
    }
    double norm_sq = 0.0;
    for (float x : v) norm_sq += static_cast<double>(x) * x;
    if (norm_sq > 0.0) {
        const float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
        for (float& x : v) x *= inv;
    }
    return v;
}

std::vector<float> TrigramEmbedder::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<float> out(texts.size() * static_cast<size_t>(dimension_));
    const int64_t n = static_cast<int64_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (int64_t i = 0; i < n; ++i) {
        auto v = embed(texts[static_cast<size_t>(i)]);
        std::copy(v.begin(), v.end(),
                  out.begin() + static_cast<size_t>(i) * static_cast<size_t>(dimension_));
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(Config config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) {
        throw Error(ErrorKind::ConfigError, "remote embedder needs an endpoint");
    }
    if (config_.dimension <= 0) {
        throw Error(ErrorKind::ConfigError, "remote embedder needs a fixed dimension");
    }
}

std::string RemoteEmbedder::fingerprint() const {
    return "remote/" + config_.model + "/d" + std::to_string(config_.dimension);
}

std::vector<float> RemoteEmbedder::embed(const std::string& text) const {
    auto flat = embed_batch({text});
    return flat;
}

std::vector<float> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<float> out;
    out.reserve(texts.size() * static_cast<size_t>(config_.dimension));

    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout_s);
    client.set_read_timeout(config_.timeout_s);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    for (size_t start = 0; start < texts.size(); start += static_cast<size_t>(config_.batch_size)) {
        size_t end = std::min(texts.size(), start + static_cast<size_t>(config_.batch_size));
        nlohmann::json body;
        body["model"] = config_.model;
        body["input"] = std::vector<std::string>(texts.begin() + start, texts.begin() + end);

        auto res = client.Post("/v1/embeddings", headers, body.dump(), "application/json");
        if (!res) throw Error(ErrorKind::ProviderFailure, "embedding request failed to connect");
        if (res->status != 200) {
            throw Error(ErrorKind::ProviderFailure,
                        "embedding endpoint returned status " + std::to_string(res->status));
        }
        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("data")) {
            throw Error(ErrorKind::ProviderFailure, "embedding endpoint returned malformed JSON");
        }
        for (const auto& row : j["data"]) {
            auto vec = row.at("embedding").get<std::vector<float>>();
            if (static_cast<int>(vec.size()) != config_.dimension) {
                throw Error(ErrorKind::DimensionMismatch,
                            "embedding dimension " + std::to_string(vec.size()) + " != configured " +
                                std::to_string(config_.dimension));
            }
            out.insert(out.end(), vec.begin(), vec.end());
        }
    }
    if (out.size() != texts.size() * static_cast<size_t>(config_.dimension)) {
        throw Error(ErrorKind::ProviderFailure, "embedding endpoint returned wrong row count");
    }
    return out;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& kind, int dimension,
                                                           const std::string& endpoint,
                                                           const std::string& model,
                                                           const std::string& api_key) {
    if (kind == "local_ngram") return std::make_unique<TrigramEmbedder>(dimension);
    if (kind == "remote") {
        RemoteEmbedder::Config cfg;
        cfg.endpoint = endpoint;
        cfg.model = model;
        cfg.api_key = api_key;
        cfg.dimension = dimension;
        return std::make_unique<RemoteEmbedder>(cfg);
    }
    throw Error(ErrorKind::ConfigError, "unknown embedding provider '" + kind + "'");
}

} // namespace divrec
