#include "divrec/augment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>

#include "divrec/error.hpp"
#include "divrec/rng.hpp"

namespace divrec {

namespace {

std::vector<std::string> distinct_genres(const std::vector<std::string>& genres) {
    std::vector<std::string> out;
    for (const auto& g : genres) {
        if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
    }
    return out;
}

long count_genre(const std::vector<std::string>& genres, const std::string& g) {
    return std::count(genres.begin(), genres.end(), g);
}

int round_half_away(double x) {
    return static_cast<int>(x < 0 ? std::ceil(x - 0.5) : std::floor(x + 0.5));
}

// Flat weighted draw over the item distribution, restricted by a genre
// predicate. Returns (item_id, genre) or throws DistributionGap.
std::pair<std::string, std::string> draw_item(const ItemDistribution& dist, Rng& rng,
                                              const std::function<bool(const std::string&)>& accept) {
    std::vector<const ItemDistribution::Entry*> pool;
    std::vector<const std::string*> pool_genre;
    std::vector<double> weights;
    for (const auto& [genre, entries] : dist.per_genre) {
        if (!accept(genre)) continue;
        for (const auto& e : entries) {
            pool.push_back(&e);
            pool_genre.push_back(&genre);
            weights.push_back(static_cast<double>(e.count));
        }
    }
    if (pool.empty()) {
        throw Error(ErrorKind::DistributionGap, "no item support for the requested genres");
    }
    size_t pick = rng.weighted(weights);
    return {pool[pick]->item_id, *pool_genre[pick]};
}

} // namespace

uint64_t sequence_stream_id(const InteractionSequence& seq) {
    std::string key = seq.user_id;
    for (const auto& x : seq.history) {
        key += '\x1f';
        key += x.item_id;
        key += ':';
        key += std::to_string(x.timestamp);
    }
    for (const auto& x : seq.future) {
        key += '\x1e';
        key += x.item_id;
        key += ':';
        key += std::to_string(x.timestamp);
    }
    return fnv1a64(key);
}

AugmentedSample make_base_sample(const InteractionSequence& seq, const ItemCatalog& catalog) {
    AugmentedSample s;
    s.base = seq;
    for (const auto& x : seq.future) {
        s.future_items.push_back(x.item_id);
        s.future_genres.push_back(catalog.primary_genre(x.item_id));
    }
    s.n_o = static_cast<int>(distinct_genres(s.future_genres).size());
    s.n_c = s.n_o;
    s.provenance = "original";
    return s;
}

std::vector<std::string> distinct_by_frequency(const std::vector<std::string>& genres) {
    auto distinct = distinct_genres(genres); // first-occurrence order
    std::stable_sort(distinct.begin(), distinct.end(),
                     [&](const std::string& a, const std::string& b) {
                         return count_genre(genres, a) > count_genre(genres, b);
                     });
    return distinct;
}

AugmentedSample gf_noise(const AugmentedSample& sample, const GenreTaxonomy& taxonomy,
                         uint64_t seed) {
    Rng rng = Rng::derived(mix_seed(seed, sequence_stream_id(sample.base)), "GF-N");

    auto present = distinct_genres(sample.future_genres);
    std::vector<std::string> candidates;
    for (const auto& name : taxonomy.names) {
        if (std::find(present.begin(), present.end(), name) == present.end()) {
            candidates.push_back(name);
        }
    }
    if (candidates.empty()) {
        throw Error(ErrorKind::TaxonomyExhausted, "future list already covers every genre");
    }

    AugmentedSample out = sample;
    out.changed_slots.clear();
    size_t slot = static_cast<size_t>(rng.bounded(out.future_genres.size()));
    const std::string replaced = out.future_genres[slot];
    const std::string noisy = candidates[rng.bounded(candidates.size())];
    for (size_t i = 0; i < out.future_genres.size(); ++i) {
        if (out.future_genres[i] == replaced) {
            out.future_genres[i] = noisy;
            out.changed_slots.push_back(i);
        }
    }
    out.n_o = sample.n_o;
    out.n_c = sample.n_o; // preserved by construction
    out.provenance = "GF-N";
    return out;
}

AugmentedSample gf_dist(const AugmentedSample& sample, const GenreTaxonomy& taxonomy,
                        const GenreDistribution& train_genre_dist, uint64_t seed, int nc_min,
                        int nc_max) {
    Rng rng = Rng::derived(mix_seed(seed, sequence_stream_id(sample.base)), "GF-D");
    int drawn = nc_min + static_cast<int>(rng.bounded(static_cast<uint64_t>(nc_max - nc_min + 1)));
    return gf_reshape(sample, taxonomy, train_genre_dist, rng, drawn);
}

AugmentedSample gf_reshape(const AugmentedSample& sample, const GenreTaxonomy& taxonomy,
                           const GenreDistribution& train_genre_dist, Rng& rng, int drawn) {
    int target = std::min({drawn, static_cast<int>(kFutureLen), static_cast<int>(taxonomy.size())});
    if (target != drawn) {
        std::cerr << "warning: control number " << drawn << " clamped to " << target << "\n";
    }

    AugmentedSample out = sample;
    out.changed_slots.clear();
    out.provenance = "GF-D";
    out.n_o = sample.n_o;
    out.n_c = target;

    auto present = distinct_genres(out.future_genres);
    const int n_o = static_cast<int>(present.size());

    if (n_o > target) {
        // drop the least frequent genres, reassigning their slots uniformly
        // among the kept ones
        auto by_rarity = present;
        std::sort(by_rarity.begin(), by_rarity.end(),
                  [&](const std::string& a, const std::string& b) {
                      long ca = count_genre(out.future_genres, a);
                      long cb = count_genre(out.future_genres, b);
                      if (ca != cb) return ca < cb;
                      return a < b;
                  });
        std::vector<std::string> removed(by_rarity.begin(), by_rarity.begin() + (n_o - target));
        std::vector<std::string> kept;
        for (const auto& g : present) {
            if (std::find(removed.begin(), removed.end(), g) == removed.end()) kept.push_back(g);
        }
        for (size_t i = 0; i < out.future_genres.size(); ++i) {
            if (std::find(removed.begin(), removed.end(), out.future_genres[i]) != removed.end()) {
                out.future_genres[i] = kept[rng.bounded(kept.size())];
                out.changed_slots.push_back(i);
            }
        }
    } else if (n_o < target) {
        // add genres from the training distribution, each claiming one slot
        // of the currently most frequent genre
        auto contains = [&](const std::string& g) {
            return std::find(out.future_genres.begin(), out.future_genres.end(), g) !=
                   out.future_genres.end();
        };
        for (int added = 0; added < target - n_o; ++added) {
            std::vector<std::string> pool;
            std::vector<double> weights;
            for (size_t i = 0; i < train_genre_dist.genres.size(); ++i) {
                if (train_genre_dist.counts[i] > 0 && !contains(train_genre_dist.genres[i])) {
                    pool.push_back(train_genre_dist.genres[i]);
                    weights.push_back(static_cast<double>(train_genre_dist.counts[i]));
                }
            }
            if (pool.empty()) {
                // distribution support exhausted; fall back to unseen taxonomy names
                for (const auto& name : taxonomy.names) {
                    if (!contains(name)) {
                        pool.push_back(name);
                        weights.push_back(1.0);
                    }
                }
            }
            const std::string fresh = pool[rng.weighted(weights)];

            // donor: most slots, ties by name; take its highest-index slot
            auto current = distinct_genres(out.future_genres);
            std::string donor = current.front();
            long donor_count = count_genre(out.future_genres, donor);
            for (const auto& g : current) {
                long c = count_genre(out.future_genres, g);
                if (c > donor_count || (c == donor_count && g < donor)) {
                    donor = g;
                    donor_count = c;
                }
            }
            for (size_t i = out.future_genres.size(); i-- > 0;) {
                if (out.future_genres[i] == donor) {
                    out.future_genres[i] = fresh;
                    out.changed_slots.push_back(i);
                    break;
                }
            }
        }
        std::sort(out.changed_slots.begin(), out.changed_slots.end());
    }
    return out;
}

AugmentedSample ip_noise(const AugmentedSample& sample, const ItemCatalog& catalog,
                         const ItemDistribution& item_dist, double error_rate, uint64_t seed) {
    if (error_rate < 0.0 || error_rate > 1.0) {
        throw Error(ErrorKind::ConfigError, "error rate must lie in [0,1]");
    }
    Rng rng = Rng::derived(mix_seed(seed, sequence_stream_id(sample.base)), "IP-N");

    AugmentedSample out = sample;
    out.changed_slots.clear();
    out.provenance = "IP-N";

    const int replacements = round_half_away(error_rate * static_cast<double>(kFutureLen));
    auto positions = rng.sample_indices(out.future_items.size(), static_cast<size_t>(replacements));
    std::sort(positions.begin(), positions.end());

    for (size_t pos : positions) {
        const std::string displaced_genre = catalog.primary_genre(out.future_items[pos]);
        auto [item_id, genre] = draw_item(item_dist, rng, [&](const std::string& g) {
            return g != displaced_genre;
        });
        out.future_items[pos] = item_id;
        out.future_genres[pos] = genre;
        out.changed_slots.push_back(pos);
    }
    out.n_o = sample.n_o;
    out.n_c = static_cast<int>(distinct_genres(out.future_genres).size());
    return out;
}

AugmentedSample ip_dist(const AugmentedSample& original, const AugmentedSample& gf_dist_output,
                        const ItemCatalog& catalog, const ItemDistribution& item_dist,
                        uint64_t seed) {
    (void)catalog;
    Rng rng = Rng::derived(mix_seed(seed, sequence_stream_id(original.base)), "IP-D");

    AugmentedSample out = gf_dist_output;
    out.changed_slots.clear();
    out.provenance = "IP-D";

    for (size_t i = 0; i < out.future_genres.size(); ++i) {
        if (out.future_genres[i] == original.future_genres[i]) continue;
        const std::string& genre = out.future_genres[i];
        const auto* entries = item_dist.genre_entries(genre);
        if (!entries || entries->empty()) {
            throw Error(ErrorKind::DistributionGap, "no item support for genre '" + genre + "'");
        }
        std::vector<double> weights;
        weights.reserve(entries->size());
        for (const auto& e : *entries) weights.push_back(static_cast<double>(e.count));
        out.future_items[i] = (*entries)[rng.weighted(weights)].item_id;
        out.changed_slots.push_back(i);
    }
    return out;
}

AugmentOutputs run_augmentation(const std::vector<AugmentedSample>& originals,
                                const ItemCatalog& catalog, const GenreTaxonomy& taxonomy,
                                const GenreDistribution& genre_dist,
                                const ItemDistribution& item_dist, const AugmentConfig& config) {
    AugmentOutputs out;
    std::vector<AugmentedSample> gf_dist_outputs;
    const bool need_gf_dist = config.use_gf_dist || config.use_ip_dist;

    for (const auto& base : originals) {
        if (config.use_gf_noise) {
            try {
                out.gf.push_back(gf_noise(base, taxonomy, config.seed));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::TaxonomyExhausted) throw;
            }
        }
        if (need_gf_dist) {
            gf_dist_outputs.push_back(gf_dist(base, taxonomy, genre_dist, config.seed,
                                              config.nc_min, config.nc_max));
        }
    }
    if (config.use_gf_dist) {
        out.gf.insert(out.gf.end(), gf_dist_outputs.begin(), gf_dist_outputs.end());
    }

    for (size_t i = 0; i < originals.size(); ++i) {
        if (config.use_ip_noise) {
            out.ip.push_back(
                ip_noise(originals[i], catalog, item_dist, config.error_rate_r, config.seed));
        }
    }
    if (config.use_ip_dist) {
        for (size_t i = 0; i < originals.size(); ++i) {
            out.ip.push_back(ip_dist(originals[i], gf_dist_outputs[i], catalog, item_dist,
                                     config.seed));
        }
    }
    return out;
}

AssembledCorpus assemble(const std::vector<AugmentedSample>& original,
                         const std::vector<AugmentedSample>& augmented, TaskKind task,
                         const ItemCatalog& catalog, const PromptCodec& codec) {
    if (task != TaskKind::GF && task != TaskKind::IP) {
        throw Error(ErrorKind::ConfigError, "assemble handles tasks GF and IP only");
    }

    auto to_sample = [&](const AugmentedSample& s) {
        std::vector<TitledEntry> history;
        for (const auto& x : s.base.history) {
            const Item& item = catalog.at(x.item_id);
            history.push_back({item.title, item.primary_genre});
        }
        if (task == TaskKind::GF) {
            return codec.gf_sample(history, distinct_by_frequency(s.future_genres),
                                   s.future_genres);
        }
        std::vector<TitledEntry> future;
        for (size_t i = 0; i < s.future_items.size(); ++i) {
            future.push_back({catalog.at(s.future_items[i]).title, s.future_genres[i]});
        }
        return codec.ip_sample(history, future);
    };

    // strategy order: originals, then N, then D
    auto strategy_rank = [](const std::string& provenance) {
        if (provenance == "original") return 0;
        if (provenance == "GF-N" || provenance == "IP-N") return 1;
        return 2;
    };
    std::vector<const AugmentedSample*> ordered;
    ordered.reserve(augmented.size());
    for (const auto& s : augmented) ordered.push_back(&s);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [&](const AugmentedSample* a, const AugmentedSample* b) {
                         return strategy_rank(a->provenance) < strategy_rank(b->provenance);
                     });

    AssembledCorpus corpus;
    for (const auto& s : original) {
        corpus.samples.push_back(to_sample(s));
        ++corpus.counts["original"];
    }
    for (const auto* s : ordered) {
        corpus.samples.push_back(to_sample(*s));
        ++corpus.counts[s->provenance];
    }
    return corpus;
}

} // namespace divrec
