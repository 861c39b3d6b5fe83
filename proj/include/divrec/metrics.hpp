#pragma once

#include <map>
#include <string>
#include <vector>

#include "divrec/catalog.hpp"
#include "divrec/types.hpp"

namespace divrec {

struct EvalInput {
    std::vector<std::string> recommendations;    // item ids, top-k order
    std::vector<std::string> ground_truth_future; // item ids
    int n_c = 0;
};

// |top-k(rec) ∩ truth| / |truth|, set semantics on item ids.
double recall_at_k(const std::vector<std::string>& rec, const std::vector<std::string>& truth,
                   int k = kListSize);

// Binary relevance; IDCG truncated at min(k, |truth|). Empty truth -> 0.
double ndcg_at_k(const std::vector<std::string>& rec, const std::vector<std::string>& truth,
                 int k = kListSize);

// Distinct primary genres among the top-k items.
int cov_at_k(const std::vector<std::string>& rec, const ItemCatalog& catalog, int k = kListSize);

// Mean over lists of |cov - n_c| (not |mean cov - n_c|).
double mae_cov_at_k(const std::vector<int>& covs, int n_c);

struct EvalCell {
    double ndcg = 0.0;
    double recall = 0.0;
    double cov = 0.0;
    double mae_cov = 0.0;
    size_t n = 0;
};

struct EvalReport {
    EvalCell overall;
    std::map<int, EvalCell> per_nc;

    // |mean Cov - n_c| <= MAE_Cov must hold per control-number group
    // (triangle inequality); violated means the aggregation is wrong.
    bool consistency_ok(double tolerance = 1e-9) const;

    std::string to_json() const;
    std::string to_table() const;
};

EvalReport aggregate(const std::vector<EvalInput>& inputs, const ItemCatalog& catalog);

// The audit behind consistency_ok, usable on externally reported triples.
bool cov_mae_consistent(double mean_cov, double mae_cov, int n_c, double tolerance = 1e-9);

} // namespace divrec
