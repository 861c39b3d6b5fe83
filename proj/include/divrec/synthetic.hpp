#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "divrec/catalog.hpp"
#include "divrec/types.hpp"

namespace divrec {

// Deterministic synthetic data for offline runs and tests: a catalog with a
// known genre layout, an interaction log that survives the positivity
// filter, and ready-made 10+10 sequences with a controlled genre spread.
struct SyntheticSpec {
    size_t n_genres = 12;
    size_t items_per_genre = 15;
    size_t n_users = 50;
    size_t positives_per_user = 30;
    size_t negatives_per_user = 5;
    uint64_t seed = 7;
};

ItemCatalog synthetic_catalog(size_t n_genres, size_t items_per_genre, uint64_t seed);

std::vector<Interaction> synthetic_log(const ItemCatalog& catalog, const SyntheticSpec& spec);

// n sequences; the i-th one's future covers exactly 1 + (i mod max_distinct)
// distinct genres, future items pairwise distinct.
std::vector<InteractionSequence> synthetic_sequences(const ItemCatalog& catalog, size_t n,
                                                     uint64_t seed, int max_distinct = 10);

void write_catalog_csv(const ItemCatalog& catalog, const std::string& path);
void write_interactions_csv(const std::vector<Interaction>& interactions, const std::string& path);

} // namespace divrec
