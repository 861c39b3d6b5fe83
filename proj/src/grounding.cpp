#include "divrec/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "divrec/error.hpp"

namespace divrec {

namespace {

constexpr char kMagic[8] = {'D', 'I', 'V', 'R', 'E', 'C', 'I', 'X'};
constexpr uint32_t kIndexVersion = 1;

void write_u32(std::ofstream& out, uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); }
void write_u64(std::ofstream& out, uint64_t v) { out.write(reinterpret_cast<char*>(&v), 8); }
void write_str(std::ofstream& out, const std::string& s) {
    write_u32(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t read_u32(std::ifstream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
uint64_t read_u64(std::ifstream& in) {
    uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
std::string read_str(std::ifstream& in) {
    uint32_t len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    return s;
}

// Lower (distance, item_id) wins; the id tie-break keeps results unique and
// therefore identical between the serial and parallel scans.
bool better(float da, const std::string& ida, float db, const std::string& idb) {
    if (da != db) return da < db;
    return ida < idb;
}

} // namespace

float l2_sq(std::span<const float> a, std::span<const float> b) {
    // four fixed accumulators: vectorizable without reassociation surprises
    float s0 = 0.0f, s1 = 0.0f, s2 = 0.0f, s3 = 0.0f;
    size_t i = 0;
    const size_t n4 = a.size() & ~size_t{3};
    for (; i < n4; i += 4) {
        float d0 = a[i] - b[i];
        float d1 = a[i + 1] - b[i + 1];
        float d2 = a[i + 2] - b[i + 2];
        float d3 = a[i + 3] - b[i + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; i < a.size(); ++i) {
        float d = a[i] - b[i];
        s0 += d * d;
    }
    return ((s0 + s1) + (s2 + s3));
}

ItemIndex build_index(const ItemCatalog& catalog, const EmbeddingProvider& provider) {
    if (catalog.size() == 0) throw Error(ErrorKind::EmptyCatalog, "cannot index an empty catalog");
    ItemIndex index;
    index.dimension = provider.dimension();
    index.provider_fingerprint = provider.fingerprint();
    index.item_ids.reserve(catalog.size());
    index.titles.reserve(catalog.size());
    for (const auto& item : catalog.items()) {
        index.item_ids.push_back(item.item_id);
        index.titles.push_back(item.title);
    }
    index.vectors = provider.embed_batch(index.titles);
    for (float x : index.vectors) {
        if (!std::isfinite(x)) {
            throw Error(ErrorKind::ProviderFailure, "provider produced a non-finite embedding");
        }
    }
    return index;
}

void save_index(const ItemIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write index '" + path + "'");
    out.write(kMagic, sizeof kMagic);
    write_u32(out, kIndexVersion);
    write_u32(out, static_cast<uint32_t>(index.dimension));
    write_u64(out, index.size());
    write_str(out, index.provider_fingerprint);
    for (size_t i = 0; i < index.size(); ++i) {
        write_str(out, index.item_ids[i]);
        write_str(out, index.titles[i]);
    }
    out.write(reinterpret_cast<const char*>(index.vectors.data()),
              static_cast<std::streamsize>(index.vectors.size() * sizeof(float)));
    if (!out) throw Error(ErrorKind::IoFailure, "short write to '" + path + "'");
}

ItemIndex load_index(const std::string& path, const EmbeddingProvider& provider) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open index '" + path + "'");
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw Error(ErrorKind::IoFailure, "'" + path + "' is not an item index");
    }
    if (read_u32(in) != kIndexVersion) {
        throw Error(ErrorKind::IoFailure, "unsupported index version in '" + path + "'");
    }
    ItemIndex index;
    index.dimension = static_cast<int>(read_u32(in));
    const uint64_t count = read_u64(in);
    index.provider_fingerprint = read_str(in);
    if (index.dimension != provider.dimension() ||
        index.provider_fingerprint != provider.fingerprint()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "index was built with provider '" + index.provider_fingerprint +
                        "' (d=" + std::to_string(index.dimension) + "), current provider is '" +
                        provider.fingerprint() + "'");
    }
    index.item_ids.reserve(count);
    index.titles.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        index.item_ids.push_back(read_str(in));
        index.titles.push_back(read_str(in));
    }
    index.vectors.resize(count * static_cast<uint64_t>(index.dimension));
    in.read(reinterpret_cast<char*>(index.vectors.data()),
            static_cast<std::streamsize>(index.vectors.size() * sizeof(float)));
    if (!in) throw Error(ErrorKind::IoFailure, "truncated index '" + path + "'");
    return index;
}

Neighbor nearest_serial(const ItemIndex& index, std::span<const float> query) {
    if (index.size() == 0) throw Error(ErrorKind::EmptyIndex, "index has no items");
    size_t best = 0;
    float best_d = l2_sq(query, index.row(0));
    for (size_t i = 1; i < index.size(); ++i) {
        float d = l2_sq(query, index.row(i));
        if (better(d, index.item_ids[i], best_d, index.item_ids[best])) {
            best = i;
            best_d = d;
        }
    }
    return {best, std::sqrt(best_d)};
}

Neighbor nearest(const ItemIndex& index, std::span<const float> query) {
    if (index.size() == 0) throw Error(ErrorKind::EmptyIndex, "index has no items");
    const int64_t n = static_cast<int64_t>(index.size());
    size_t best = 0;
    float best_d = l2_sq(query, index.row(0));
#pragma omp parallel
    {
        size_t local_best = 0;
        float local_d = std::numeric_limits<float>::infinity();
        bool seen = false;
#pragma omp for nowait schedule(static)
        for (int64_t i = 0; i < n; ++i) {
            float d = l2_sq(query, index.row(static_cast<size_t>(i)));
            if (!seen || better(d, index.item_ids[static_cast<size_t>(i)], local_d,
                                index.item_ids[local_best])) {
                local_best = static_cast<size_t>(i);
                local_d = d;
                seen = true;
            }
        }
#pragma omp critical
        {
            if (seen && better(local_d, index.item_ids[local_best], best_d, index.item_ids[best])) {
                best = local_best;
                best_d = local_d;
            }
        }
    }
    return {best, std::sqrt(best_d)};
}

namespace {

std::vector<float> distances_to(const ItemIndex& index, std::span<const float> query) {
    std::vector<float> out(index.size());
    const int64_t n = static_cast<int64_t>(index.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
        out[static_cast<size_t>(i)] = l2_sq(query, index.row(static_cast<size_t>(i)));
    }
    return out;
}

} // namespace

GroundedSlot ground_item(const std::string& raw_title, const ItemIndex& index,
                         const EmbeddingProvider& provider) {
    auto query = provider.embed(raw_title);
    Neighbor n = nearest(index, query);
    return {raw_title, index.item_ids[n.index], index.titles[n.index],
            static_cast<double>(n.distance), 1};
}

GroundingReport ground_list(const std::vector<std::string>& raw_titles, const ItemIndex& index,
                            const EmbeddingProvider& provider, bool dedupe) {
    if (index.size() == 0) throw Error(ErrorKind::EmptyIndex, "index has no items");
    if (dedupe && index.size() < raw_titles.size()) {
        throw Error(ErrorKind::CatalogTooSmall,
                    "need " + std::to_string(raw_titles.size()) + " distinct items, catalog has " +
                        std::to_string(index.size()));
    }

    // duplicate-heavy lists share one distance scan per distinct title
    std::unordered_map<std::string, std::vector<float>> distance_cache;
    auto distances_for = [&](const std::string& title) -> const std::vector<float>& {
        auto it = distance_cache.find(title);
        if (it != distance_cache.end()) return it->second;
        auto query = provider.embed(title);
        return distance_cache.emplace(title, distances_to(index, query)).first->second;
    };

    GroundingReport report;
    std::vector<bool> used(index.size(), false);
    for (const auto& raw : raw_titles) {
        const auto& dist = distances_for(raw);
        size_t pick = index.size();
        for (size_t i = 0; i < index.size(); ++i) {
            if (dedupe && used[i]) continue;
            if (pick == index.size() ||
                better(dist[i], index.item_ids[i], dist[pick], index.item_ids[pick])) {
                pick = i;
            }
        }
        // rank among all items, used or not
        int rank = 1;
        for (size_t i = 0; i < index.size(); ++i) {
            if (i != pick && better(dist[i], index.item_ids[i], dist[pick], index.item_ids[pick])) {
                ++rank;
            }
        }
        if (rank > 1) ++report.dedupe_events;
        if (dedupe) used[pick] = true;
        report.slots.push_back({raw, index.item_ids[pick], index.titles[pick],
                                std::sqrt(static_cast<double>(dist[pick])), rank});
    }
    return report;
}

} // namespace divrec
