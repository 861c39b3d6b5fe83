#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "divrec/catalog.hpp"
#include "divrec/dataset.hpp"
#include "divrec/prompt_codec.hpp"
#include "divrec/types.hpp"

namespace divrec {

struct AugmentConfig {
    uint64_t seed = 0;
    double error_rate_r = 0.3; // IP-N replacement fraction
    int nc_min = 1;
    int nc_max = 10;
    bool use_gf_noise = true;
    bool use_gf_dist = true;
    bool use_ip_noise = true;
    bool use_ip_dist = true;
};

// One GF/IP training sample: a base sequence plus its (possibly rewritten)
// future genre and item lists.
struct AugmentedSample {
    InteractionSequence base;
    std::vector<std::string> future_genres; // 10 names
    std::vector<std::string> future_items;  // 10 item ids
    int n_o = 0;                            // original distinct-genre count
    int n_c = 0;                            // controlled distinct-genre count
    std::string provenance;                 // original | GF-N | GF-D | IP-N | IP-D
    std::vector<size_t> changed_slots;
};

// Stable per-sequence stream id so augmentation is deterministic regardless
// of batch order or parallel scheduling.
uint64_t sequence_stream_id(const InteractionSequence& seq);

AugmentedSample make_base_sample(const InteractionSequence& seq, const ItemCatalog& catalog);

// Distinct genres of a 10-slot list, most frequent first, ties by first
// occurrence. Shared label convention for GP outputs and GF targets.
std::vector<std::string> distinct_by_frequency(const std::vector<std::string>& genres);

// GF-N: one genre of the future list swapped for a taxonomy genre not yet
// present; every slot carrying the swapped genre is rewritten, so the
// distinct-genre count is preserved.
AugmentedSample gf_noise(const AugmentedSample& sample, const GenreTaxonomy& taxonomy,
                         uint64_t seed);

// GF-D: draw a control number uniformly from [nc_min, nc_max] and reshape
// the future genre list until its distinct count matches it.
AugmentedSample gf_dist(const AugmentedSample& sample, const GenreTaxonomy& taxonomy,
                        const GenreDistribution& train_genre_dist, uint64_t seed, int nc_min = 1,
                        int nc_max = 10);

// The reshape behind GF-D with the target count pinned (clamped to
// min(target, 10, |taxonomy|)).
AugmentedSample gf_reshape(const AugmentedSample& sample, const GenreTaxonomy& taxonomy,
                           const GenreDistribution& train_genre_dist, Rng& rng, int target);

// IP-N: replace round(r*10) items with items of other genres drawn from the
// training item distribution; the paired genre tag follows the new item.
AugmentedSample ip_noise(const AugmentedSample& sample, const ItemCatalog& catalog,
                         const ItemDistribution& item_dist, double error_rate, uint64_t seed);

// IP-D: resample an item for every slot whose genre gf_dist rewrote.
AugmentedSample ip_dist(const AugmentedSample& original, const AugmentedSample& gf_dist_output,
                        const ItemCatalog& catalog, const ItemDistribution& item_dist,
                        uint64_t seed);

struct AugmentOutputs {
    std::vector<AugmentedSample> gf; // GF-N then GF-D, sample order preserved
    std::vector<AugmentedSample> ip; // IP-N then IP-D
};

// Apply the configured strategy mix to every base sample. IP-D consumes the
// GF-D rewrite of the same sample; GF-N quietly skips samples whose future
// already covers the whole taxonomy.
AugmentOutputs run_augmentation(const std::vector<AugmentedSample>& originals,
                                const ItemCatalog& catalog, const GenreTaxonomy& taxonomy,
                                const GenreDistribution& genre_dist,
                                const ItemDistribution& item_dist, const AugmentConfig& config);

struct AssembledCorpus {
    std::vector<InstructionSample> samples;
    std::map<std::string, size_t> counts; // provenance -> record count
};

// Original samples first, then augmented in strategy order (N before D),
// converted to instruction samples.
AssembledCorpus assemble(const std::vector<AugmentedSample>& original,
                         const std::vector<AugmentedSample>& augmented, TaskKind task,
                         const ItemCatalog& catalog, const PromptCodec& codec);

} // namespace divrec
