#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "divrec/catalog.hpp"
#include "divrec/dataset.hpp"
#include "divrec/prompt_codec.hpp"
#include "divrec/types.hpp"

namespace divrec {

constexpr int kDefaultMaxNewTokens = 1024; // fits a rendered 20-slot trail with margin

struct GenerationRequest {
    std::string prompt;
    TaskKind task = TaskKind::GP; // oracle routing and logging only
    int max_new_tokens = kDefaultMaxNewTokens;
};

struct GenerationOutcome {
    bool ok = false;
    std::string text;
    std::string error;
};

// Uniform text-generation surface. Implementations must be safe for
// concurrent generate() calls.
class TextBackend {
  public:
    virtual ~TextBackend() = default;

    virtual std::string name() const = 0;
    virtual std::string generate(const GenerationRequest& request) const = 0;

    // Responses positionally aligned with requests; per-item failures are
    // captured, one failure does not abort the batch.
    std::vector<GenerationOutcome> batch_generate(const std::vector<GenerationRequest>& requests,
                                                  int max_in_flight) const;
};

struct RetryPolicy {
    int max_retries = 3;
    int backoff_ms = 1000; // 1s, 2s, 4s
};

struct RemoteBackendConfig {
    std::string endpoint; // scheme://host[:port]
    std::string api_key;
    std::string model;
    RetryPolicy retry;
    int connect_timeout_s = 10;
    int read_timeout_s = 120;
};

// OpenAI-compatible chat-completions client; greedy decoding (temperature 0).
class RemoteBackend : public TextBackend {
  public:
    explicit RemoteBackend(RemoteBackendConfig config);
    std::string name() const override { return "remote"; }
    std::string generate(const GenerationRequest& request) const override;

  private:
    RemoteBackendConfig config_;
};

uint64_t prompt_hash(const std::string& prompt);
std::string prompt_hash_hex(const std::string& prompt);

struct TranscriptEntry {
    std::string prompt;
    std::string completion;
};

// Replays stored completions keyed by prompt hash.
class RecordedBackend : public TextBackend {
  public:
    explicit RecordedBackend(const std::string& transcript_path);
    std::string name() const override { return "recorded"; }
    std::string generate(const GenerationRequest& request) const override;
    size_t size() const { return completions_.size(); }

  private:
    std::map<uint64_t, TranscriptEntry> completions_;
};

void write_transcript(const std::vector<TranscriptEntry>& entries, const std::string& path);

// Deterministic stand-ins for the fine-tuned model: the truth oracle replays
// ground-truth labels for any registered sequence; the noisy oracle corrupts
// genre tokens / item titles at the configured rates, deterministically per
// (seed, prompt).
class OracleBackend : public TextBackend {
  public:
    struct Options {
        double genre_error = 0.0;
        double item_error = 0.0;
        uint64_t seed = 0;
    };

    OracleBackend(const ItemCatalog& catalog, const std::vector<InteractionSequence>& corpus,
                  GenreDistribution genre_dist, ItemDistribution item_dist);
    OracleBackend(const ItemCatalog& catalog, const std::vector<InteractionSequence>& corpus,
                  GenreDistribution genre_dist, ItemDistribution item_dist, Options options);

    std::string name() const override {
        return options_.genre_error == 0.0 && options_.item_error == 0.0 ? "oracle_truth"
                                                                         : "oracle_noisy";
    }
    std::string generate(const GenerationRequest& request) const override;

  private:
    struct Truth {
        std::vector<TitledEntry> history;
        std::vector<TitledEntry> future; // title + primary genre
    };

    const Truth& lookup(const std::vector<std::string>& history_titles) const;

    const ItemCatalog* catalog_;
    GenreDistribution genre_dist_;
    ItemDistribution item_dist_;
    Options options_;
    std::map<uint64_t, Truth> by_history_;
    PromptCodec codec_;
};

std::unique_ptr<TextBackend> make_truth_oracle(const ItemCatalog& catalog,
                                               const std::vector<InteractionSequence>& corpus,
                                               GenreDistribution genre_dist,
                                               ItemDistribution item_dist);

std::unique_ptr<TextBackend> make_noisy_oracle(const ItemCatalog& catalog,
                                               const std::vector<InteractionSequence>& corpus,
                                               GenreDistribution genre_dist,
                                               ItemDistribution item_dist, double genre_error,
                                               double item_error, uint64_t seed);

struct BackendDescriptor {
    std::string kind = "oracle_truth"; // remote | oracle_truth | oracle_noisy | recorded
    std::string endpoint;              // remote; env DIVREC_ENDPOINT overrides when empty
    std::string api_key;               // remote; env DIVREC_API_KEY overrides when empty
    std::string model = "local-model";
    std::string transcript_path; // recorded
    double genre_error = 0.0;    // oracle_noisy
    double item_error = 0.0;     // oracle_noisy
    uint64_t seed = 0;
    int max_retries = 3;
    int backoff_ms = 1000;
    int max_in_flight = 4;
    int max_new_tokens = kDefaultMaxNewTokens;
};

// Oracle kinds need the corpus and distributions; remote/recorded ignore them.
std::unique_ptr<TextBackend> make_backend(const BackendDescriptor& descriptor,
                                          const ItemCatalog* catalog,
                                          const std::vector<InteractionSequence>* corpus,
                                          const GenreDistribution* genre_dist,
                                          const ItemDistribution* item_dist);

} // namespace divrec
