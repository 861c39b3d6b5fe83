#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "divrec/catalog.hpp"
#include "divrec/types.hpp"

namespace divrec {

enum class InteractionFormat { Csv, MovieLens, SteamJsonl };
enum class PositivePolicy { RatingThreshold, PlaytimeThreshold };

InteractionFormat interaction_format_from_string(const std::string& tag);
PositivePolicy positive_policy_from_string(const std::string& tag);

std::vector<Interaction> load_interactions(const std::string& path, InteractionFormat format);

// Keep positive interactions only: value strictly above 3 (stars or hours),
// order preserved.
std::vector<Interaction> filter_positive(const std::vector<Interaction>& interactions,
                                         PositivePolicy policy);

// Per-user sliding windows of length 20 with stride 1, split 10 history /
// 10 future. Users with fewer than 20 positives contribute nothing.
std::vector<InteractionSequence> build_sequences(const std::vector<Interaction>& interactions);

struct SplitParams {
    size_t train_parts = 8;
    size_t validation_parts = 1;
    size_t test_parts = 1;
    size_t n_per_split = 1000;
    uint64_t seed = 0;
};

// Chronological 8:1:1 partition (key: last-interaction timestamp, ties by
// user_id then first timestamp), then a seeded uniform sample of
// min(n_per_split, |split|) from each split, kept in chronological order.
DatasetSplit split_and_sample(std::vector<InteractionSequence> sequences, const SplitParams& params);

struct GenreDistribution {
    std::vector<std::string> genres; // taxonomy order, zero-count genres included
    std::vector<int64_t> counts;
    std::vector<double> probs; // normalized over future-slot primary genres

    double prob_of(const std::string& genre) const;
    int64_t count_of(const std::string& genre) const;
};

struct ItemDistribution {
    struct Entry {
        std::string item_id;
        int64_t count = 0;
        double prob = 0.0;
    };
    // keyed by primary genre; entries ordered by descending count then item_id
    std::map<std::string, std::vector<Entry>> per_genre;

    const std::vector<Entry>* genre_entries(const std::string& genre) const;
};

// Frequencies of primary genres over all future-slot items of the training
// split. Also records the counts into taxonomy.train_frequency.
GenreDistribution genre_distribution(const std::vector<InteractionSequence>& train,
                                     const ItemCatalog& catalog, GenreTaxonomy& taxonomy);

ItemDistribution item_distribution(const std::vector<InteractionSequence>& train,
                                   const ItemCatalog& catalog);

// JSON-lines persistence: {user_id, history:[{item_id,ts}], future:[{item_id,ts}]}
void save_sequences(const std::vector<InteractionSequence>& sequences, const std::string& path);
std::vector<InteractionSequence> load_sequences(const std::string& path);
void save_split(const DatasetSplit& split, const std::string& dir);
DatasetSplit load_split(const std::string& dir);

} // namespace divrec
