#include "divrec/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "divrec/error.hpp"

namespace divrec {

double recall_at_k(const std::vector<std::string>& rec, const std::vector<std::string>& truth,
                   int k) {
    if (truth.empty()) return 0.0;
    std::set<std::string> truth_set(truth.begin(), truth.end());
    std::set<std::string> hit;
    const size_t top = std::min(rec.size(), static_cast<size_t>(k));
    for (size_t i = 0; i < top; ++i) {
        if (truth_set.count(rec[i])) hit.insert(rec[i]);
    }
    return static_cast<double>(hit.size()) / static_cast<double>(truth_set.size());
}

double ndcg_at_k(const std::vector<std::string>& rec, const std::vector<std::string>& truth,
                 int k) {
    if (truth.empty()) return 0.0;
    std::set<std::string> truth_set(truth.begin(), truth.end());
    const size_t top = std::min(rec.size(), static_cast<size_t>(k));
    double dcg = 0.0;
    for (size_t i = 0; i < top; ++i) {
        if (truth_set.count(rec[i])) {
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    const size_t ideal = std::min(static_cast<size_t>(k), truth_set.size());
    double idcg = 0.0;
    for (size_t i = 0; i < ideal; ++i) {
        idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    return idcg == 0.0 ? 0.0 : dcg / idcg;
}

int cov_at_k(const std::vector<std::string>& rec, const ItemCatalog& catalog, int k) {
    std::set<std::string> genres;
    const size_t top = std::min(rec.size(), static_cast<size_t>(k));
    for (size_t i = 0; i < top; ++i) {
        genres.insert(catalog.primary_genre(rec[i])); // throws UnknownItem
    }
    return static_cast<int>(genres.size());
}

double mae_cov_at_k(const std::vector<int>& covs, int n_c) {
    if (covs.empty()) throw Error(ErrorKind::EmptyInput, "no coverage values");
    double sum = 0.0;
    for (int cov : covs) sum += std::abs(cov - n_c);
    return sum / static_cast<double>(covs.size());
}

bool cov_mae_consistent(double mean_cov, double mae_cov, int n_c, double tolerance) {
    return std::abs(mean_cov - static_cast<double>(n_c)) <= mae_cov + tolerance;
}

bool EvalReport::consistency_ok(double tolerance) const {
    for (const auto& [n_c, cell] : per_nc) {
        if (!cov_mae_consistent(cell.cov, cell.mae_cov, n_c, tolerance)) return false;
    }
    return true;
}

EvalReport aggregate(const std::vector<EvalInput>& inputs, const ItemCatalog& catalog) {
    EvalReport report;
    std::map<int, std::vector<std::array<double, 4>>> rows; // n_c -> (ndcg, recall, cov, mae)
    for (const auto& in : inputs) {
        double ndcg = ndcg_at_k(in.recommendations, in.ground_truth_future);
        double recall = recall_at_k(in.recommendations, in.ground_truth_future);
        int cov = cov_at_k(in.recommendations, catalog);
        double mae = std::abs(cov - in.n_c);
        rows[in.n_c].push_back({ndcg, recall, static_cast<double>(cov), mae});
    }

    auto fold = [](const std::vector<std::array<double, 4>>& group) {
        EvalCell cell;
        for (const auto& r : group) {
            cell.ndcg += r[0];
            cell.recall += r[1];
            cell.cov += r[2];
            cell.mae_cov += r[3];
        }
        cell.n = group.size();
        if (cell.n > 0) {
            const double d = static_cast<double>(cell.n);
            cell.ndcg /= d;
            cell.recall /= d;
            cell.cov /= d;
            cell.mae_cov /= d;
        }
        return cell;
    };

    std::vector<std::array<double, 4>> all;
    for (const auto& [n_c, group] : rows) {
        report.per_nc[n_c] = fold(group);
        all.insert(all.end(), group.begin(), group.end());
    }
    report.overall = fold(all);
    return report;
}

std::string EvalReport::to_json() const {
    nlohmann::ordered_json j;
    auto metric = [&](const char* name, double EvalCell::*field) {
        nlohmann::ordered_json m;
        m["mean"] = overall.*field;
        m["n"] = overall.n;
        nlohmann::ordered_json per;
        for (const auto& [n_c, cell] : per_nc) per[std::to_string(n_c)] = cell.*field;
        m["per_nc"] = per;
        j[name] = m;
    };
    metric("ndcg_at_10", &EvalCell::ndcg);
    metric("recall_at_10", &EvalCell::recall);
    metric("cov_at_10", &EvalCell::cov);
    metric("mae_cov_at_10", &EvalCell::mae_cov);
    j["consistency_ok"] = consistency_ok();
    j["recall_denominator"] = "|truth| = 10 (fixed future length)";
    return j.dump(2);
}

std::string EvalReport::to_table() const {
    std::string out;
    char line[160];
    snprintf(line, sizeof line, "%-8s %10s %10s %8s %12s %6s\n", "n_c", "NDCG@10", "Recall@10",
             "Cov@10", "MAE_Cov@10", "n");
    out += line;
    auto row = [&](const std::string& label, const EvalCell& c) {
        snprintf(line, sizeof line, "%-8s %10.4f %10.4f %8.3f %12.3f %6zu\n", label.c_str(), c.ndcg,
                 c.recall, c.cov, c.mae_cov, c.n);
        out += line;
    };
    for (const auto& [n_c, cell] : per_nc) row(std::to_string(n_c), cell);
    row("overall", overall);
    return out;
}

} // namespace divrec
