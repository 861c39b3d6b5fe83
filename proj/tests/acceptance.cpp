// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "divrec/augment.hpp"
#include "divrec/backend.hpp"
#include "divrec/dataset.hpp"
#include "divrec/grounding.hpp"
#include "divrec/metrics.hpp"
#include "divrec/pipeline.hpp"
#include "divrec/prompt_codec.hpp"
#include "divrec/rng.hpp"
#include "divrec/strings.hpp"
#include "divrec/synthetic.hpp"
#include "divrec/trail.hpp"

using namespace divrec;

namespace {

struct Check {
    bool ok = true;
    std::vector<std::string> notes;

    void expect(bool condition, const std::string& message) {
        if (!condition) {
            ok = false;
            notes.push_back(message);
        }
    }
    void note(const std::string& message) { notes.push_back(message); }
};

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// ---------------------------------------------------------------------------
// shared fixture: 200 synthetic sequences over a 12-genre catalog
// ---------------------------------------------------------------------------
struct Fixture {
    ItemCatalog catalog;
    std::vector<InteractionSequence> sequences;
    GenreTaxonomy taxonomy;
    GenreDistribution genre_dist;
    ItemDistribution item_dist;
    PromptCodec codec;
    TrigramEmbedder embedder;
    ItemIndex index;

    Fixture()
        : catalog(synthetic_catalog(12, 15, 7)),
          sequences(synthetic_sequences(catalog, 200, 13)),
          taxonomy(catalog.taxonomy()),
          genre_dist(genre_distribution(sequences, catalog, taxonomy)),
          item_dist(item_distribution(sequences, catalog)),
          codec(catalog.taxonomy()),
          embedder(256),
          index(build_index(catalog, embedder)) {}

    int true_nc(const InteractionSequence& seq) const {
        std::set<std::string> genres;
        for (const auto& x : seq.future) genres.insert(catalog.primary_genre(x.item_id));
        return static_cast<int>(genres.size());
    }
};

Fixture& fixture() {
    static Fixture fx;
    return fx;
}

// ---------------------------------------------------------------------------
// criterion 1: oracle end-to-end identity at the true control number
// ---------------------------------------------------------------------------
void criterion_oracle_end_to_end(Check& check) {
    auto& fx = fixture();
    const double t0 = now_s();

    auto backend = make_truth_oracle(fx.catalog, fx.sequences, fx.genre_dist, fx.item_dist);
    Pipeline pipeline(fx.catalog, fx.codec, fx.genre_dist, fx.index, fx.embedder, *backend, 1);

    size_t n = 0;
    double recall_sum = 0.0, ndcg_sum = 0.0, mae_sum = 0.0;
    for (const auto& seq : fx.sequences) {
        ControlRequest request{seq, fx.true_nc(seq), Method::Dlcrec};
        auto outcome = pipeline.run_control(request);
        check.expect(outcome.ok, "pipeline failed: " + outcome.error);
        if (!outcome.ok) return;
        auto eval = to_eval_input(request, outcome.result);
        recall_sum += recall_at_k(eval.recommendations, eval.ground_truth_future);
        ndcg_sum += ndcg_at_k(eval.recommendations, eval.ground_truth_future);
        mae_sum += std::abs(cov_at_k(eval.recommendations, fx.catalog) - request.n_c);
        ++n;
    }
    const double elapsed = now_s() - t0;
    check.expect(n == 200, "expected 200 sequences");
    check.expect(recall_sum == static_cast<double>(n), "Recall@10 != 1.0 on some sequence");
    check.expect(ndcg_sum == static_cast<double>(n), "NDCG@10 != 1.0 on some sequence");
    check.expect(mae_sum == 0.0, "MAE_Cov@10 != 0 on some sequence");
    check.expect(elapsed < 10.0, "runtime " + std::to_string(elapsed) + "s >= 10s");
    char buf[96];
    snprintf(buf, sizeof buf, "200 sequences, %.2fs", elapsed);
    check.note(buf);
}

// ---------------------------------------------------------------------------
// criterion 2: coverage grows monotonically with the control number,
// slope in (0.5, 1.0]
// ---------------------------------------------------------------------------
void criterion_control_monotonicity(Check& check) {
    auto& fx = fixture();
    auto backend =
        make_noisy_oracle(fx.catalog, fx.sequences, fx.genre_dist, fx.item_dist, 0.2, 0.2, 17);
    Pipeline pipeline(fx.catalog, fx.codec, fx.genre_dist, fx.index, fx.embedder, *backend, 2);

    std::vector<int> nc_values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    auto outcomes = pipeline.sweep(fx.sequences, nc_values);

    std::vector<double> mean_cov;
    for (int n_c : nc_values) {
        double sum = 0.0;
        size_t n = 0;
        for (const auto& outcome : outcomes.at(n_c)) {
            check.expect(outcome.ok, "sweep cell failed: " + outcome.error);
            if (!outcome.ok) return;
            sum += cov_at_k(outcome.result.rec_item_ids, fx.catalog);
            ++n;
        }
        mean_cov.push_back(sum / static_cast<double>(n));
    }

    for (size_t i = 1; i < mean_cov.size(); ++i) {
        check.expect(mean_cov[i] >= mean_cov[i - 1],
                     "mean Cov decreased from n_c=" + std::to_string(i) + " to " +
                         std::to_string(i + 1));
    }

    double x_mean = 5.5, y_mean = 0.0;
    for (double y : mean_cov) y_mean += y;
    y_mean /= 10.0;
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < 10; ++i) {
        double dx = static_cast<double>(i + 1) - x_mean;
        num += dx * (mean_cov[i] - y_mean);
        den += dx * dx;
    }
    const double slope = num / den;
    check.expect(slope > 0.5 && slope <= 1.0,
                 "slope " + std::to_string(slope) + " outside (0.5, 1.0]");
    std::ostringstream ss;
    ss.precision(3);
    ss << "slope " << std::fixed << slope << "; mean Cov " << mean_cov.front() << " .. "
       << mean_cov.back();
    check.note(ss.str());
}

// ---------------------------------------------------------------------------
// criterion 3: augmentation invariants over 10,000 seeded draws per strategy
// ---------------------------------------------------------------------------
void criterion_augmentation_invariants(Check& check) {
    auto& fx = fixture();
    const double t0 = now_s();

    std::vector<AugmentedSample> bases;
    for (const auto& seq : fx.sequences) bases.push_back(make_base_sample(seq, fx.catalog));

    auto distinct_count = [](const std::vector<std::string>& genres) {
        return static_cast<int>(std::set<std::string>(genres.begin(), genres.end()).size());
    };

    const size_t seeds_per_sample = 50; // 200 x 50 = 10,000 draws per strategy
    size_t gfn_ok = 0, gfd_ok = 0, ipn_ok = 0;
    std::vector<size_t> nc_histogram(11, 0);

    for (const auto& base : bases) {
        for (size_t s = 0; s < seeds_per_sample; ++s) {
            const uint64_t seed = s * 1000003 + 17;

            auto gfn = gf_noise(base, fx.taxonomy, seed);
            if (distinct_count(gfn.future_genres) == base.n_o && gfn.n_c == base.n_o) ++gfn_ok;

            auto gfd = gf_dist(base, fx.taxonomy, fx.genre_dist, seed);
            int expected = std::min({gfd.n_c, 10, static_cast<int>(fx.taxonomy.size())});
            if (distinct_count(gfd.future_genres) == expected) ++gfd_ok;
            ++nc_histogram[static_cast<size_t>(gfd.n_c)];

            auto ipn = ip_noise(base, fx.catalog, fx.item_dist, 0.3, seed);
            size_t moved = 0;
            for (size_t i = 0; i < 10; ++i) {
                if (ipn.future_items[i] != base.future_items[i]) ++moved;
            }
            if (moved == 3 && ipn.changed_slots.size() == 3) ++ipn_ok;
        }
    }

    const size_t total = bases.size() * seeds_per_sample;
    check.expect(gfn_ok == total, "GF-N preserved the distinct-genre count in " +
                                      std::to_string(gfn_ok) + "/" + std::to_string(total));
    check.expect(gfd_ok == total, "GF-D hit min(N_c,10,|taxonomy|) in " + std::to_string(gfd_ok) +
                                      "/" + std::to_string(total));
    check.expect(ipn_ok == total, "IP-N replaced exactly 3 slots in " + std::to_string(ipn_ok) +
                                      "/" + std::to_string(total));

    // chi-squared over the N_c histogram, df=9, alpha=0.01
    const double expected = static_cast<double>(total) / 10.0;
    double chi2 = 0.0;
    for (int v = 1; v <= 10; ++v) {
        double d = static_cast<double>(nc_histogram[static_cast<size_t>(v)]) - expected;
        chi2 += d * d / expected;
    }
    check.expect(chi2 < 21.666, "N_c histogram chi2 " + std::to_string(chi2) + " >= 21.666");

    const double elapsed = now_s() - t0;
    check.expect(elapsed < 30.0, "runtime " + std::to_string(elapsed) + "s >= 30s");
    char buf[96];
    snprintf(buf, sizeof buf, "10000 draws/strategy, chi2 %.2f, %.2fs", chi2, elapsed);
    check.note(buf);
}

// ---------------------------------------------------------------------------
// criterion 4: metric implementations match independent brute force
// ---------------------------------------------------------------------------
void criterion_metric_oracles(Check& check) {
    auto& fx = fixture();
    std::vector<std::string> ids;
    for (const auto& item : fx.catalog.items()) ids.push_back(item.item_id);

    auto recall_bf = [](const std::vector<std::string>& rec,
                        const std::vector<std::string>& truth) {
        std::set<std::string> t(truth.begin(), truth.end());
        std::set<std::string> hits;
        for (const auto& r : rec) {
            if (t.count(r)) hits.insert(r);
        }
        return static_cast<double>(hits.size()) / static_cast<double>(t.size());
    };
    auto ndcg_bf = [](const std::vector<std::string>& rec, const std::vector<std::string>& truth) {
        std::set<std::string> t(truth.begin(), truth.end());
        double dcg = 0.0, idcg = 0.0;
        for (size_t i = 0; i < rec.size(); ++i) {
            if (t.count(rec[i])) dcg += std::log(2.0) / std::log(static_cast<double>(i) + 2.0);
        }
        for (size_t i = 0; i < t.size() && i < rec.size(); ++i) {
            idcg += std::log(2.0) / std::log(static_cast<double>(i) + 2.0);
        }
        return dcg / idcg;
    };
    auto cov_bf = [&](const std::vector<std::string>& rec) {
        std::set<std::string> genres;
        for (const auto& r : rec) genres.insert(fx.catalog.primary_genre(r));
        return static_cast<int>(genres.size());
    };

    Rng rng(4242);
    size_t exact = 0;
    double worst_ndcg_gap = 0.0;
    for (int round = 0; round < 1000; ++round) {
        std::vector<std::string> rec, truth;
        for (int i = 0; i < 10; ++i) {
            rec.push_back(ids[rng.bounded(ids.size())]);
            truth.push_back(ids[rng.bounded(ids.size())]);
        }
        bool same = recall_at_k(rec, truth) == recall_bf(rec, truth) &&
                    cov_at_k(rec, fx.catalog) == cov_bf(rec);
        double gap = std::abs(ndcg_at_k(rec, truth) - ndcg_bf(rec, truth));
        worst_ndcg_gap = std::max(worst_ndcg_gap, gap);
        if (same && gap <= 1e-12) ++exact;
    }
    check.expect(exact == 1000, "only " + std::to_string(exact) + "/1000 instances matched");
    char buf[96];
    snprintf(buf, sizeof buf, "1000 instances, worst NDCG gap %.2e", worst_ndcg_gap);
    check.note(buf);
}

// ---------------------------------------------------------------------------
// criterion 5: coverage-error consistency on own outputs and published rows
// ---------------------------------------------------------------------------
void criterion_consistency_audit(Check& check) {
    auto& fx = fixture();
    auto backend =
        make_noisy_oracle(fx.catalog, fx.sequences, fx.genre_dist, fx.item_dist, 0.3, 0.3, 23);
    Pipeline pipeline(fx.catalog, fx.codec, fx.genre_dist, fx.index, fx.embedder, *backend, 5);

    std::vector<InteractionSequence> some(fx.sequences.begin(), fx.sequences.begin() + 60);
    std::vector<EvalInput> inputs;
    for (int n_c : {2, 5, 8}) {
        for (const auto& seq : some) {
            ControlRequest request{seq, n_c, Method::Dlcrec};
            auto outcome = pipeline.run_control(request);
            check.expect(outcome.ok, "pipeline failed: " + outcome.error);
            if (!outcome.ok) return;
            inputs.push_back(to_eval_input(request, outcome.result));
        }
    }
    auto report = aggregate(inputs, fx.catalog);
    check.expect(report.consistency_ok(), "own outputs violate |mean Cov - n_c| <= MAE_Cov");

    struct Triple {
        double cov, mae;
        int n_c;
    };
    const Triple published[18] = {
        {2.526, 1.112, 2}, {2.517, 0.987, 2}, {2.478, 0.798, 2}, {2.689, 0.827, 2},
        {2.242, 0.486, 2}, {1.655, 0.445, 2}, {2.515, 2.529, 5}, {2.519, 2.541, 5},
        {4.468, 0.662, 5}, {2.713, 2.291, 5}, {2.257, 2.745, 5}, {4.582, 0.434, 5},
        {2.508, 5.492, 8}, {2.525, 5.475, 8}, {7.495, 0.511, 8}, {2.743, 5.257, 8},
        {2.253, 5.747, 8}, {7.873, 0.131, 8},
    };
    int satisfied = 0;
    for (const auto& t : published) {
        if (cov_mae_consistent(t.cov, t.mae, t.n_c)) ++satisfied;
    }
    check.expect(satisfied == 18,
                 "only " + std::to_string(satisfied) + "/18 published triples satisfied");
    check.note("own report consistent; 18/18 published triples hold");
}

// ---------------------------------------------------------------------------
// criterion 6: exact nearest-neighbor grounding at catalog scale
// ---------------------------------------------------------------------------
void criterion_grounding(Check& check) {
    const double t0 = now_s();
    auto catalog = synthetic_catalog(20, 550, 41); // 11,000 items
    TrigramEmbedder embedder(512);
    auto index = build_index(catalog, embedder);

    Rng rng(4321);
    size_t scan_matches = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string title = catalog.items()[rng.bounded(catalog.size())].title;
        title[rng.bounded(title.size())] = static_cast<char>('a' + rng.bounded(26));
        auto q = embedder.embed(title);
        auto fast = nearest(index, q);
        auto slow = nearest_serial(index, q);
        if (fast.index == slow.index && fast.distance == slow.distance) ++scan_matches;
    }
    check.expect(scan_matches == 1000,
                 "parallel scan diverged from the serial reference on " +
                     std::to_string(1000 - scan_matches) + " queries");

    size_t zero_distance = 0;
    for (int i = 0; i < 200; ++i) {
        const auto& item = catalog.items()[rng.bounded(catalog.size())];
        auto slot = ground_item(item.title, index, embedder);
        if (slot.l2_distance == 0.0 && catalog.at(slot.item_id).title == item.title) {
            ++zero_distance;
        }
    }
    check.expect(zero_distance == 200, "exact-title queries did not ground at distance 0");

    size_t dedupe_ok = 0;
    for (int i = 0; i < 1000; ++i) {
        // duplicate-heavy: 10 slots drawn from 3 titles
        std::vector<std::string> titles;
        std::vector<std::string> pool;
        for (int j = 0; j < 3; ++j) pool.push_back(catalog.items()[rng.bounded(catalog.size())].title);
        for (int j = 0; j < 10; ++j) titles.push_back(pool[rng.bounded(pool.size())]);
        auto report = ground_list(titles, index, embedder);
        std::set<std::string> ids;
        for (const auto& slot : report.slots) ids.insert(slot.item_id);
        if (ids.size() == 10) ++dedupe_ok;
    }
    check.expect(dedupe_ok == 1000,
                 "dedupe yielded 10 distinct items in only " + std::to_string(dedupe_ok) + "/1000");

    const double elapsed = now_s() - t0;
    check.expect(elapsed < 60.0, "runtime " + std::to_string(elapsed) + "s >= 60s");
    char buf[96];
    snprintf(buf, sizeof buf, "11k items, 1000 queries + 1000 dedupe lists, %.1fs", elapsed);
    check.note(buf);
}

// ---------------------------------------------------------------------------
// criterion 7: prompt codec roundtrips and the published worked examples
// ---------------------------------------------------------------------------
void criterion_prompt_codec(Check& check) {
    auto& fx = fixture();
    PromptCodec codec(fx.taxonomy);
    Rng rng(90210);
    const std::string charset = "abcdefghij KLMNOP:-.()&!0123456789";
    auto random_title = [&]() {
        size_t len = 4 + rng.bounded(30);
        std::string t;
        for (size_t i = 0; i < len; ++i) t += charset[rng.bounded(charset.size())];
        t = trim(t);
        if (t.empty() || t == "_" || t == "?") t = "Fallback Title";
        return t;
    };

    size_t ok = 0;
    const size_t rounds = 10000;
    for (size_t round = 0; round < rounds; ++round) {
        std::vector<TitledEntry> history;
        for (int i = 0; i < 10; ++i) {
            history.push_back({random_title(), fx.taxonomy.names[rng.bounded(fx.taxonomy.size())]});
        }
        std::vector<std::string> genres;
        for (int i = 0; i < 10; ++i) {
            genres.push_back(fx.taxonomy.names[rng.bounded(fx.taxonomy.size())]);
        }
        std::vector<TitledEntry> future;
        for (int i = 0; i < 10; ++i) future.push_back({random_title(), genres[static_cast<size_t>(i)]});

        bool good = codec.parse_gf(Trail::gf_output(history, genres).render()) == genres;
        auto parsed = codec.parse_ip(Trail::ip_output(history, future).render());
        for (size_t i = 0; i < 10; ++i) {
            good = good && parsed[i].title == future[i].title && parsed[i].genre == future[i].genre;
        }
        auto distinct = distinct_by_frequency(genres);
        good = good && codec.parse_gp(join(distinct, ", "),
                                      static_cast<int>(distinct.size())) == distinct;
        if (good) ++ok;
    }
    check.expect(ok == rounds, "roundtrip failed on " + std::to_string(rounds - ok) + " trails");

    // the three worked examples, byte-for-byte outside the elided regions
    GenreTaxonomy movie_tax;
    movie_tax.names = {"Action", "Comedy", "Drama", "Romance", "Thriller",
                       "Adventure", "Sci-Fi", "Horror", "War", "Crime"};
    PromptCodec movie_codec(movie_tax);
    std::vector<TitledEntry> history;
    history.push_back({"Star Wars: Episode V - The Empire Strikes Back (1980)", "Action"});
    history.push_back({"Mission: Impossible (1996)", "Action"});
    for (int i = 0; i < 7; ++i) {
        history.push_back({"Elided Movie " + std::to_string(i + 1) + " (1990)", "Action"});
    }
    history.push_back({"Stargate (1994)", "Action"});

    auto gp = movie_codec.render_gp(history, 3);
    check.expect(gp.instruction ==
                     "Given a list of movies and their corresponding genres the user has watched "
                     "before, please provide the 3 most likely genres in the future "
                     "recommendation list. Output the genres only, without movie names, "
                     "explanations, or numbers. The output format is \"Genre1, Genre2, ..., "
                     "Genre3\".",
                 "GP instruction text drifted");
    check.expect(starts_with(gp.input,
                             "The user has watched the following movies with their corresponding "
                             "genres in \"()\" before: \"Star Wars: Episode V - The Empire "
                             "Strikes Back (1980)\" (Action), \"Mission: Impossible (1996)\" "
                             "(Action), "),
                 "GP input prefix drifted");
    check.expect(gp.input.ends_with("\"Stargate (1994)\" (Action)."), "GP input suffix drifted");
    check.expect(movie_codec.parse_gp("Action, Comedy, Drama", 3) ==
                     std::vector<std::string>({"Action", "Comedy", "Drama"}),
                 "GP published output failed to parse");

    auto gf = movie_codec.render_gf(history, {"Action", "Comedy", "Drama"});
    check.expect(gf.instruction ==
                     "Below is a user's interaction trail of movies he likes. Each movie is in "
                     "double quotes \"\", followed by its genre in single quotes ''. Your task is "
                     "to fill in the genre placeholders represented by \"?\" with the following "
                     "genres: [Action, Comedy, Drama]. The \"_\" represents placeholder tokens "
                     "that you should not consider. The output should maintain the same format as "
                     "the input.",
                 "GF instruction text drifted");
    check.expect(starts_with(gf.input, "\"Star Wars: Episode V - The Empire Strikes Back (1980)\" "
                                       "'Action', \"Mission: Impossible (1996)\" 'Action', "),
                 "GF input prefix drifted");
    check.expect(gf.input.ends_with("\"Stargate (1994)\" 'Action', \"_\" '?', \"_\" '?', \"_\" "
                                    "'?', \"_\" '?', \"_\" '?', \"_\" '?', \"_\" '?', \"_\" '?', "
                                    "\"_\" '?', \"_\" '?'"),
                 "GF trail suffix drifted");
    std::vector<std::string> gf_filled = {"Action", "Action", "Action", "Action", "Comedy",
                                          "Comedy", "Drama",  "Drama",  "Comedy", "Comedy"};
    check.expect(movie_codec.parse_gf(Trail::gf_output(history, gf_filled).render()) == gf_filled,
                 "GF published output failed to parse");

    std::vector<std::string> ip_genres = {"Action", "Comedy", "Comedy", "Comedy", "Comedy",
                                          "Comedy", "Comedy", "Comedy", "Comedy", "Comedy"};
    auto ip = movie_codec.render_ip(history, ip_genres);
    check.expect(ip.instruction ==
                     "Below is a user's interaction trail of movies he likes. Each movie is in "
                     "double quotes \"\", followed by its genre in single quotes ''. Your task is "
                     "to fill in the movie placeholders represented by \"?\". The \"_\" "
                     "represents placeholder tokens that you should not consider. The output "
                     "should maintain the same format as the input.",
                 "IP instruction text drifted");
    check.expect(ip.input.find("\"Stargate (1994)\" 'Action', \"?\" 'Action', \"?\" 'Comedy'") !=
                     std::string::npos,
                 "IP trail boundary drifted");
    std::vector<TitledEntry> ip_future;
    ip_future.push_back({"Saving Private Ryan (1998)", "Action"});
    ip_future.push_back({"Pretty Woman (1990)", "Comedy"});
    for (int i = 0; i < 7; ++i) {
        ip_future.push_back({"Elided Comedy " + std::to_string(i + 1) + " (1991)", "Comedy"});
    }
    ip_future.push_back({"Ghost (1990)", "Comedy"});
    auto parsed = movie_codec.parse_ip(Trail::ip_output(history, ip_future).render());
    check.expect(parsed.size() == 10 && parsed[0].title == "Saving Private Ryan (1998)" &&
                     parsed[0].genre == "Action" && parsed[9].title == "Ghost (1990)",
                 "IP published output failed to parse");
    check.note("10000 roundtrips; worked examples render and parse");
}

// ---------------------------------------------------------------------------
// criterion 8: data plumbing on a synthetic log
// ---------------------------------------------------------------------------
void criterion_data_plumbing(Check& check) {
    namespace fs = std::filesystem;
    auto catalog = synthetic_catalog(12, 15, 3);
    SyntheticSpec spec;
    spec.n_users = 50;
    spec.positives_per_user = 30;
    spec.seed = 19;
    auto log = synthetic_log(catalog, spec);

    auto positive = filter_positive(log, PositivePolicy::RatingThreshold);
    auto sequences = build_sequences(positive);
    check.expect(sequences.size() == 50 * 11,
                 "sequence count " + std::to_string(sequences.size()) + " != 550");

    SplitParams params;
    params.seed = 19;
    auto split = split_and_sample(sequences, params);
    check.expect(split.train.size() == 440, "train size " + std::to_string(split.train.size()));
    check.expect(split.validation.size() == 55,
                 "validation size " + std::to_string(split.validation.size()));
    check.expect(split.test.size() == 55, "test size " + std::to_string(split.test.size()));

    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    fs::path dir = fs::temp_directory_path() / "divrec_acceptance_plumbing";
    fs::remove_all(dir);
    save_split(split, (dir / "a").string());
    save_split(split_and_sample(build_sequences(filter_positive(log, PositivePolicy::RatingThreshold)),
                                params),
               (dir / "b").string());
    bool identical = true;
    for (const char* f : {"train.jsonl", "validation.jsonl", "test.jsonl"}) {
        if (slurp((dir / "a" / f).string()) != slurp((dir / "b" / f).string())) identical = false;
    }
    check.expect(identical, "fixed-seed rerun artifacts differ");
    fs::remove_all(dir);
    check.note("550 sequences, 440/55/55, reruns byte-identical");
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Check&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "oracle end-to-end identity", criterion_oracle_end_to_end},
        {2, "control monotonicity (1..10 sweep)", criterion_control_monotonicity},
        {3, "augmentation invariants", criterion_augmentation_invariants},
        {4, "metric oracle equivalence", criterion_metric_oracles},
        {5, "coverage-error consistency audit", criterion_consistency_audit},
        {6, "grounding correctness at catalog scale", criterion_grounding},
        {7, "prompt codec roundtrips + worked examples", criterion_prompt_codec},
        {8, "data plumbing", criterion_data_plumbing},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Check check;
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.ok = false;
            check.notes.push_back(std::string("exception: ") + e.what());
        }
        printf("[%s] %d. %s", check.ok ? "PASS" : "FAIL", criterion.id, criterion.name);
        if (check.ok && !check.notes.empty()) printf("  (%s)", check.notes.back().c_str());
        printf("\n");
        if (!check.ok) {
            ++failures;
            for (const auto& note : check.notes) printf("       - %s\n", note.c_str());
        }
        fflush(stdout);
    }
    printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
           criteria.size());
    return failures == 0 ? 0 : 1;
}
