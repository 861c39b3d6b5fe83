#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "divrec/backend.hpp"
#include "divrec/catalog.hpp"
#include "divrec/grounding.hpp"
#include "divrec/metrics.hpp"
#include "divrec/prompt_codec.hpp"

namespace divrec {

enum class Method { Dlcrec, BigrecDiv, BigrecCot };

Method method_from_string(const std::string& tag);
const char* to_string(Method method);

struct ControlRequest {
    InteractionSequence sequence;
    int n_c = 0; // desired distinct-genre count, 1..10
    Method method = Method::Dlcrec;
};

struct StageRecord {
    std::string stage;
    std::string prompt;
    std::string completion;
};

struct PipelineResult {
    std::vector<std::string> rec_item_ids; // 10 grounded items
    std::vector<std::string> rec_titles;
    std::vector<std::string> gp_genres;
    std::vector<std::string> gf_slots;
    bool gf_targets_covered = true;
    std::vector<ParsedSlot> ip_raw;
    GroundingReport grounding;
    std::vector<StageRecord> stages; // every prompt/completion, retries included
    double elapsed_ms = 0.0;         // in-memory only, never serialized
};

struct PipelineOutcome {
    bool ok = false;
    std::string failed_stage;
    std::string error;
    PipelineResult result; // partial trace preserved on failure
};

// Orchestrates the three-stage cascade and the single-prompt baselines over
// shared grounding. Stateless across calls; safe to run sequences in
// parallel as long as the backend allows concurrent generate().
class Pipeline {
  public:
    // max_parallel bounds concurrent sequences during sweeps (0 = the OpenMP
    // default); the per-sequence cascade itself is strictly sequential.
    Pipeline(const ItemCatalog& catalog, const PromptCodec& codec,
             const GenreDistribution& genre_dist, const ItemIndex& index,
             const EmbeddingProvider& provider, const TextBackend& backend, uint64_t seed,
             bool dedupe = true, int max_parallel = 0)
        : catalog_(&catalog),
          codec_(&codec),
          genre_dist_(&genre_dist),
          index_(&index),
          provider_(&provider),
          backend_(&backend),
          seed_(seed),
          dedupe_(dedupe),
          max_parallel_(max_parallel) {}

    // GP with cardinality repair: exactly n_c distinct genres.
    std::vector<std::string> run_gp(const InteractionSequence& seq, int n_c,
                                    std::vector<StageRecord>* trace = nullptr) const;

    // GF with subset repair; one automatic re-prompt on TrailMismatch.
    struct GfResult {
        std::vector<std::string> slots;
        bool targets_covered = true;
    };
    GfResult run_gf(const InteractionSequence& seq, const std::vector<std::string>& target_genres,
                    std::vector<StageRecord>* trace = nullptr) const;

    struct IpResult {
        std::vector<ParsedSlot> raw;
        GroundingReport grounding;
    };
    IpResult run_ip(const InteractionSequence& seq, const std::vector<std::string>& future_genres,
                    std::vector<StageRecord>* trace = nullptr) const;

    PipelineOutcome run_control(const ControlRequest& request) const;

    // One run_control per (sequence, n_c); failures recorded, sweep continues.
    std::map<int, std::vector<PipelineOutcome>> sweep(
        const std::vector<InteractionSequence>& sequences, const std::vector<int>& nc_values,
        Method method = Method::Dlcrec) const;

    std::vector<TitledEntry> history_entries(const InteractionSequence& seq) const;

  private:
    std::string generate_logged(TaskKind task, const RenderedPrompt& prompt, const char* stage,
                                std::vector<StageRecord>* trace) const;
    PipelineResult run_dlcrec(const ControlRequest& request) const;
    PipelineResult run_baseline(const ControlRequest& request) const;

    const ItemCatalog* catalog_;
    const PromptCodec* codec_;
    const GenreDistribution* genre_dist_;
    const ItemIndex* index_;
    const EmbeddingProvider* provider_;
    const TextBackend* backend_;
    uint64_t seed_;
    bool dedupe_;
    int max_parallel_;
};

// Metric inputs for a finished run.
EvalInput to_eval_input(const ControlRequest& request, const PipelineResult& result);

} // namespace divrec
