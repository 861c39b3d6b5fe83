#pragma once

#include <memory>
#include <string>
#include <vector>

namespace divrec {

// Text -> fixed-dimension vector. The same provider must serve index build
// and queries; the fingerprint travels with persisted indexes.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;

    virtual int dimension() const = 0;
    virtual std::string fingerprint() const = 0;
    virtual std::vector<float> embed(const std::string& text) const = 0;

    virtual std::vector<float> embed_batch(const std::vector<std::string>& texts) const;
};

// Deterministic offline embedder: character trigrams of the lowercased
// string (with boundary sentinels), feature-hashed counts, L2-normalized.
class TrigramEmbedder : public EmbeddingProvider {
  public:
    explicit TrigramEmbedder(int dimension = 512);

    int dimension() const override { return dimension_; }
    std::string fingerprint() const override;
    std::vector<float> embed(const std::string& text) const override;
    std::vector<float> embed_batch(const std::vector<std::string>& texts) const override;

  private:
    int dimension_;
};

// OpenAI-style /v1/embeddings client.
class RemoteEmbedder : public EmbeddingProvider {
  public:
    struct Config {
        std::string endpoint; // scheme://host[:port]
        std::string api_key;
        std::string model;
        int dimension = 0;
        int batch_size = 128;
        int timeout_s = 60;
    };

    explicit RemoteEmbedder(Config config);

    int dimension() const override { return config_.dimension; }
    std::string fingerprint() const override;
    std::vector<float> embed(const std::string& text) const override;
    std::vector<float> embed_batch(const std::vector<std::string>& texts) const override;

  private:
    Config config_;
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& kind, int dimension,
                                                           const std::string& endpoint,
                                                           const std::string& model,
                                                           const std::string& api_key);

} // namespace divrec
