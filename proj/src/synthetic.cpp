#include "divrec/synthetic.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>

#include "divrec/error.hpp"
#include "divrec/rng.hpp"

namespace divrec {

namespace {

const char* kGenrePool[] = {"Action",  "Adventure", "Animation", "Comedy",   "Crime",
                            "Documentary", "Drama", "Fantasy",   "Horror",   "Musical",
                            "Mystery", "Romance",   "Sci-Fi",    "Thriller", "War",
                            "Western", "Film-Noir", "Children",  "IMAX",     "Sport"};

const char* kAdjectives[] = {"Crimson", "Silent", "Golden", "Midnight", "Broken",  "Electric",
                             "Hidden",  "Frozen", "Savage", "Wandering", "Scarlet", "Hollow"};

const char* kNouns[] = {"Harbor", "Falcon", "Garden", "Empire", "Mirror", "Voyage",
                        "Signal", "Canyon", "Parade", "Lantern", "Orchid", "Summit"};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

ItemCatalog synthetic_catalog(size_t n_genres, size_t items_per_genre, uint64_t seed) {
    Rng rng = Rng::derived(seed, "catalog");
    std::vector<std::string> genre_names;
    for (size_t g = 0; g < n_genres; ++g) {
        if (g < std::size(kGenrePool)) {
            genre_names.emplace_back(kGenrePool[g]);
        } else {
            genre_names.push_back("Genre" + std::to_string(g + 1));
        }
    }

    std::vector<Item> items;
    size_t counter = 0;
    for (size_t g = 0; g < n_genres; ++g) {
        for (size_t j = 0; j < items_per_genre; ++j) {
            ++counter;
            Item item;
            char id[24];
            snprintf(id, sizeof id, "it%05zu", counter);
            item.item_id = id;
            char num[24];
            snprintf(num, sizeof num, "%04zu", counter);
            int year = 1950 + static_cast<int>(rng.bounded(70));
            item.title = std::string(kAdjectives[rng.bounded(std::size(kAdjectives))]) + " " +
                         kNouns[rng.bounded(std::size(kNouns))] + " " + num + " (" +
                         std::to_string(year) + ")";
            item.genres.push_back(genre_names[g]);
            // occasional secondary genre; retained but unused downstream
            if (rng.bernoulli(0.3)) {
                const std::string& extra = genre_names[rng.bounded(n_genres)];
                if (extra != genre_names[g]) item.genres.push_back(extra);
            }
            item.primary_genre = item.genres.front();
            items.push_back(std::move(item));
        }
    }
    return ItemCatalog(std::move(items));
}

std::vector<Interaction> synthetic_log(const ItemCatalog& catalog, const SyntheticSpec& spec) {
    Rng rng = Rng::derived(spec.seed, "log");
    std::vector<Interaction> out;
    int64_t ts = 1'000'000'000;
    for (size_t u = 0; u < spec.n_users; ++u) {
        char user[24];
        snprintf(user, sizeof user, "u%04zu", u + 1);
        size_t positives = 0;
        size_t negatives = 0;
        while (positives < spec.positives_per_user || negatives < spec.negatives_per_user) {
            bool emit_positive = positives < spec.positives_per_user &&
                                 (negatives >= spec.negatives_per_user || !rng.bernoulli(0.15));
            Interaction x;
            x.user_id = user;
            x.item_id = catalog.items()[rng.bounded(catalog.size())].item_id;
            x.timestamp = ts;
            ts += 1 + static_cast<int64_t>(rng.bounded(50));
            if (emit_positive) {
                x.value = 4.0 + static_cast<double>(rng.bounded(2)); // 4 or 5
                ++positives;
            } else {
                x.value = 1.0 + static_cast<double>(rng.bounded(3)); // 1..3
                ++negatives;
            }
            out.push_back(std::move(x));
        }
    }
    return out;
}

std::vector<InteractionSequence> synthetic_sequences(const ItemCatalog& catalog, size_t n,
                                                     uint64_t seed, int max_distinct) {
    // bucket items per primary genre
    std::vector<std::string> genres = catalog.taxonomy().names;
    std::map<std::string, std::vector<const Item*>> per_genre;
    for (const auto& item : catalog.items()) per_genre[item.primary_genre].push_back(&item);
    std::vector<std::string> usable;
    for (const auto& g : genres) {
        if (per_genre.count(g) && per_genre[g].size() >= kFutureLen) usable.push_back(g);
    }
    if (usable.empty()) {
        throw Error(ErrorKind::CatalogTooSmall, "need >= 10 items in at least one genre");
    }
    const int cap = std::min<int>(max_distinct, static_cast<int>(usable.size()));

    std::vector<InteractionSequence> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        Rng rng = Rng::derived(seed, static_cast<uint64_t>(i));
        InteractionSequence seq;
        char user[24];
        snprintf(user, sizeof user, "s%05zu", i + 1);
        seq.user_id = user;
        int64_t ts = 2'000'000'000 + static_cast<int64_t>(i) * 1000;

        // history: 10 distinct items from anywhere in the catalog
        for (size_t idx : rng.sample_indices(catalog.size(), kHistoryLen)) {
            Interaction x;
            x.user_id = seq.user_id;
            x.item_id = catalog.items()[idx].item_id;
            x.value = 5.0;
            x.timestamp = ts;
            ts += 10;
            seq.history.push_back(std::move(x));
        }

        // future: exactly n_o distinct genres, items pairwise distinct
        const int n_o = 1 + static_cast<int>(i % static_cast<size_t>(cap));
        std::vector<std::string> chosen;
        for (size_t idx : rng.sample_indices(usable.size(), static_cast<size_t>(n_o))) {
            chosen.push_back(usable[idx]);
        }
        std::vector<std::string> slot_genres;
        for (int s = 0; s < static_cast<int>(kFutureLen); ++s) {
            slot_genres.push_back(s < n_o ? chosen[static_cast<size_t>(s)]
                                          : chosen[rng.bounded(chosen.size())]);
        }
        rng.shuffle(slot_genres);

        std::map<std::string, size_t> genre_needs;
        for (const auto& g : slot_genres) ++genre_needs[g];
        std::map<std::string, std::vector<const Item*>> picks;
        for (const auto& [g, need] : genre_needs) {
            const auto& pool = per_genre[g];
            for (size_t idx : rng.sample_indices(pool.size(), need)) {
                picks[g].push_back(pool[idx]);
            }
        }
        for (const auto& g : slot_genres) {
            const Item* item = picks[g].back();
            picks[g].pop_back();
            Interaction x;
            x.user_id = seq.user_id;
            x.item_id = item->item_id;
            x.value = 5.0;
            x.timestamp = ts;
            ts += 10;
            seq.future.push_back(std::move(x));
        }
        out.push_back(std::move(seq));
    }
    return out;
}

void write_catalog_csv(const ItemCatalog& catalog, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path + "'");
    out << "item_id,title,genres\n";
    for (const auto& item : catalog.items()) {
        std::string genres = item.genres.front();
        for (size_t i = 1; i < item.genres.size(); ++i) genres += "|" + item.genres[i];
        out << csv_field(item.item_id) << "," << csv_field(item.title) << ","
            << csv_field(genres) << "\n";
    }
}

void write_interactions_csv(const std::vector<Interaction>& interactions,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path + "'");
    out << "user_id,item_id,value,timestamp\n";
    char value[32];
    for (const auto& x : interactions) {
        snprintf(value, sizeof value, "%.1f", x.value);
        out << csv_field(x.user_id) << "," << csv_field(x.item_id) << "," << value << ","
            << x.timestamp << "\n";
    }
}

} // namespace divrec
