#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "divrec/error.hpp"
#include "divrec/metrics.hpp"
#include "divrec/rng.hpp"
#include "test_helpers.hpp"

using namespace divrec;
using namespace divrec::test;

namespace {

// Independent oracles, written as plain loops over definitions.
double recall_oracle(const std::vector<std::string>& rec, const std::vector<std::string>& truth,
                     int k) {
    std::set<std::string> t(truth.begin(), truth.end());
    if (t.empty()) return 0.0;
    std::set<std::string> seen;
    int hits = 0;
    for (int i = 0; i < k && i < static_cast<int>(rec.size()); ++i) {
        if (t.count(rec[static_cast<size_t>(i)]) && !seen.count(rec[static_cast<size_t>(i)])) {
            seen.insert(rec[static_cast<size_t>(i)]);
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(t.size());
}

double ndcg_oracle(const std::vector<std::string>& rec, const std::vector<std::string>& truth,
                   int k) {
    std::set<std::string> t(truth.begin(), truth.end());
    if (t.empty()) return 0.0;
    double dcg = 0.0;
    for (int i = 0; i < k && i < static_cast<int>(rec.size()); ++i) {
        if (t.count(rec[static_cast<size_t>(i)])) {
            dcg += std::log(2.0) / std::log(static_cast<double>(i) + 2.0);
        }
    }
    double idcg = 0.0;
    int ideal = std::min<int>(k, static_cast<int>(t.size()));
    for (int i = 0; i < ideal; ++i) {
        idcg += std::log(2.0) / std::log(static_cast<double>(i) + 2.0);
    }
    return dcg / idcg;
}

int cov_oracle(const std::vector<std::string>& rec, const ItemCatalog& catalog, int k) {
    std::vector<std::string> genres;
    for (int i = 0; i < k && i < static_cast<int>(rec.size()); ++i) {
        genres.push_back(catalog.at(rec[static_cast<size_t>(i)]).primary_genre);
    }
    std::sort(genres.begin(), genres.end());
    genres.erase(std::unique(genres.begin(), genres.end()), genres.end());
    return static_cast<int>(genres.size());
}

} // namespace

TEST_CASE("recall: identity, disjoint, 3-of-10") {
    std::vector<std::string> truth = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
    CHECK(recall_at_k(truth, truth) == 1.0);
    std::vector<std::string> disjoint = {"x1", "x2", "x3", "x4", "x5",
                                         "x6", "x7", "x8", "x9", "x10"};
    CHECK(recall_at_k(disjoint, truth) == 0.0);
    std::vector<std::string> three = {"a", "b", "c", "x4", "x5", "x6", "x7", "x8", "x9", "x10"};
    CHECK(recall_at_k(three, truth) == doctest::Approx(0.3));
}

TEST_CASE("ndcg: all hits = 1, no hits = 0, ranks 2 and 5 vs brute force") {
    std::vector<std::string> truth = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
    std::vector<std::string> shuffled = {"j", "a", "c", "b", "e", "d", "g", "f", "i", "h"};
    CHECK(ndcg_at_k(shuffled, truth) == doctest::Approx(1.0));
    std::vector<std::string> none = {"x1", "x2", "x3", "x4", "x5",
                                     "x6", "x7", "x8", "x9", "x10"};
    CHECK(ndcg_at_k(none, truth) == 0.0);

    std::vector<std::string> two_hits = {"x1", "a", "x3", "x4", "b",
                                         "x6", "x7", "x8", "x9", "x10"};
    double got = ndcg_at_k(two_hits, truth);
    double want = ndcg_oracle(two_hits, truth, 10);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(ndcg_at_k({}, {}) == 0.0); // empty truth defined as 0
}

TEST_CASE("cov counts distinct primary genres") {
    auto catalog = mini_catalog();
    CHECK(cov_at_k(std::vector<std::string>(10, "m1"), catalog) == 1);
    std::vector<std::string> mixed = {"m1", "m2", "m5", "m7", "m8",
                                      "m9", "m10", "m11", "m12", "m6"};
    // primaries: Action x2, Comedy x2, Drama, Adventure, Sci-Fi, Romance, Horror, Animation
    CHECK(cov_at_k(mixed, catalog) == 8);
    CHECK_THROWS_AS(cov_at_k({"nope"}, catalog), Error);
}

TEST_CASE("mae_cov averages per-list absolute errors") {
    CHECK(mae_cov_at_k({2, 3, 2}, 2) == doctest::Approx(1.0 / 3.0));
    CHECK(mae_cov_at_k({5, 5, 5}, 5) == 0.0);
    CHECK_THROWS_AS(mae_cov_at_k({}, 3), Error);
}

TEST_CASE("metrics match independent oracles on 1000 random instances") {
    auto catalog = mini_catalog();
    std::vector<std::string> ids;
    for (const auto& item : catalog.items()) ids.push_back(item.item_id);
    Rng rng(31337);

    for (int round = 0; round < 1000; ++round) {
        std::vector<std::string> rec, truth;
        for (int i = 0; i < 10; ++i) {
            rec.push_back(ids[rng.bounded(ids.size())]);
            truth.push_back(ids[rng.bounded(ids.size())]);
        }
        CHECK(recall_at_k(rec, truth) == recall_oracle(rec, truth, 10));
        CHECK(cov_at_k(rec, catalog) == cov_oracle(rec, catalog, 10));
        double a = ndcg_at_k(rec, truth);
        double b = ndcg_oracle(rec, truth, 10);
        CHECK(std::abs(a - b) <= 1e-12);
    }
}

TEST_CASE("moving a hit earlier never decreases ndcg") {
    std::vector<std::string> truth = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
    Rng rng(99);
    std::vector<std::string> pool = {"a", "b", "c", "x1", "x2", "x3", "x4", "x5", "x6", "x7",
                                     "x8", "x9"};
    for (int round = 0; round < 300; ++round) {
        std::vector<std::string> rec = pool;
        rng.shuffle(rec);
        rec.resize(10);
        // find a hit preceded by a miss and swap them forward
        std::set<std::string> t(truth.begin(), truth.end());
        for (size_t i = 1; i < rec.size(); ++i) {
            if (t.count(rec[i]) && !t.count(rec[i - 1])) {
                double before = ndcg_at_k(rec, truth);
                std::swap(rec[i], rec[i - 1]);
                double after = ndcg_at_k(rec, truth);
                CHECK(after >= before);
                break;
            }
        }
    }
}

TEST_CASE("recall and cov are order-invariant at k=10") {
    auto catalog = mini_catalog();
    std::vector<std::string> rec = {"m1", "m2", "m5", "m7", "m8", "m9", "m10", "m11", "m12", "m6"};
    std::vector<std::string> truth = {"m1", "m5", "m9", "m3", "m4", "m6", "m7", "m8", "m10", "m2"};
    double r0 = recall_at_k(rec, truth);
    int c0 = cov_at_k(rec, catalog);
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        rng.shuffle(rec);
        CHECK(recall_at_k(rec, truth) == r0);
        CHECK(cov_at_k(rec, catalog) == c0);
    }
}

TEST_CASE("aggregate folds per control number and audits |mean cov - n_c| <= mae") {
    auto catalog = mini_catalog();
    std::vector<EvalInput> inputs;
    // two lists at n_c=2: covs 1 and 3 -> mean 2, mae 1
    inputs.push_back({std::vector<std::string>(10, "m1"),
                      {"m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8", "m9", "m10"}, 2});
    inputs.push_back({{"m1", "m5", "m7", "m1", "m5", "m7", "m1", "m5", "m7", "m1"},
                      {"m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8", "m9", "m10"}, 2});
    auto report = aggregate(inputs, catalog);
    CHECK(report.per_nc.at(2).cov == doctest::Approx(2.0));
    CHECK(report.per_nc.at(2).mae_cov == doctest::Approx(1.0));
    CHECK(report.per_nc.at(2).n == 2);
    CHECK(report.consistency_ok());

    auto single = aggregate({inputs[0]}, catalog);
    CHECK(single.overall.cov == 1.0);
    CHECK(single.overall.n == 1);

    auto table = report.to_table();
    CHECK(table.find("MAE_Cov@10") != std::string::npos);
    CHECK(table.find("overall") != std::string::npos);
    auto json = report.to_json();
    CHECK(json.find("\"ndcg_at_10\"") != std::string::npos);
    CHECK(json.find("\"per_nc\"") != std::string::npos);
}

TEST_CASE("report table layout matches the frozen snapshot") {
    auto catalog = mini_catalog();
    std::vector<EvalInput> inputs;
    inputs.push_back({{"m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8", "m9", "m10"},
                      {"m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8", "m9", "m10"}, 5});
    inputs.push_back({{"m11", "m1", "m12", "m9", "m5", "m2", "m3", "m4", "m6", "m7"},
                      {"m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8", "m9", "m10"}, 2});
    auto report = aggregate(inputs, catalog);
    const std::string want =
        "n_c         NDCG@10  Recall@10   Cov@10   MAE_Cov@10      n\n"
        "2            0.6699     0.8000    6.000        4.000      1\n"
        "5            1.0000     1.0000    6.000        1.000      1\n"
        "overall      0.8349     0.9000    6.000        2.500      2\n";
    CHECK(report.to_table() == want);
}

TEST_CASE("published results satisfy the coverage-error inequality") {
    // (Cov@10, MAE_Cov@10, control) for every method/dataset cell
    struct Triple {
        double cov;
        double mae;
        int n_c;
    };
    const Triple published[] = {
        {2.526, 1.112, 2}, {2.517, 0.987, 2}, {2.478, 0.798, 2},
        {2.689, 0.827, 2}, {2.242, 0.486, 2}, {1.655, 0.445, 2},
        {2.515, 2.529, 5}, {2.519, 2.541, 5}, {4.468, 0.662, 5},
        {2.713, 2.291, 5}, {2.257, 2.745, 5}, {4.582, 0.434, 5},
        {2.508, 5.492, 8}, {2.525, 5.475, 8}, {7.495, 0.511, 8},
        {2.743, 5.257, 8}, {2.253, 5.747, 8}, {7.873, 0.131, 8},
    };
    for (const auto& t : published) {
        CHECK(cov_mae_consistent(t.cov, t.mae, t.n_c));
    }
    // the audit is not vacuous
    CHECK_FALSE(cov_mae_consistent(4.468, 0.3, 5));
}
