#pragma once

#include <span>
#include <string>
#include <vector>

#include "divrec/catalog.hpp"
#include "divrec/embedding.hpp"

namespace divrec {

// Exact L2 index over item-title embeddings. Immutable after build.
struct ItemIndex {
    std::vector<std::string> item_ids;
    std::vector<std::string> titles;
    std::vector<float> vectors; // row-major, size() x dimension
    int dimension = 0;
    std::string provider_fingerprint;

    size_t size() const { return item_ids.size(); }
    std::span<const float> row(size_t i) const {
        return {vectors.data() + i * static_cast<size_t>(dimension),
                static_cast<size_t>(dimension)};
    }
};

ItemIndex build_index(const ItemCatalog& catalog, const EmbeddingProvider& provider);
void save_index(const ItemIndex& index, const std::string& path);
// Throws DimensionMismatch when the stored fingerprint or dimension differs
// from the provider's.
ItemIndex load_index(const std::string& path, const EmbeddingProvider& provider);

// Shared distance kernel, fixed accumulation order so the serial and
// parallel scans agree bit for bit.
float l2_sq(std::span<const float> a, std::span<const float> b);

struct Neighbor {
    size_t index = 0;   // row in the ItemIndex
    float distance = 0; // actual L2, not squared
};

// Serial reference scan. Kept as the correctness oracle for the parallel
// kernel and the benchmark baseline.
Neighbor nearest_serial(const ItemIndex& index, std::span<const float> query);
// OpenMP scan; identical results (distance ties broken by lower item_id).
Neighbor nearest(const ItemIndex& index, std::span<const float> query);

struct GroundedSlot {
    std::string raw_title;
    std::string item_id;
    std::string title;
    double l2_distance = 0.0;
    int rank_used = 1; // 1 = global nearest; >1 means dedupe skipped used items
};

struct GroundingReport {
    std::vector<GroundedSlot> slots;
    int dedupe_events = 0;
};

// Nearest valid catalog item for one generated title.
GroundedSlot ground_item(const std::string& raw_title, const ItemIndex& index,
                         const EmbeddingProvider& provider);

// Ground a 10-title list. With dedupe on, a slot whose nearest item is
// already taken falls through to its next-nearest unused item.
GroundingReport ground_list(const std::vector<std::string>& raw_titles, const ItemIndex& index,
                            const EmbeddingProvider& provider, bool dedupe = true);

} // namespace divrec
