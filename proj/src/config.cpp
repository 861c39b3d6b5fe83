#include "divrec/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "divrec/error.hpp"
#include "divrec/rng.hpp"

namespace divrec {

namespace fs = std::filesystem;

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::ConfigError, "config file is not valid JSON");
    RunConfig config;
    config.apply_json(j);
    return config;
}

void RunConfig::apply_json(const nlohmann::json& j) {
    if (j.contains("data")) {
        const auto& d = j["data"];
        catalog_path = d.value("catalog", catalog_path);
        catalog_format = d.value("catalog_format", catalog_format);
        interactions_path = d.value("interactions", interactions_path);
        interactions_format = d.value("interactions_format", interactions_format);
        positivity = d.value("positivity", positivity);
        n_per_split = d.value("n_per_split", n_per_split);
    }
    if (j.contains("augment")) {
        const auto& a = j["augment"];
        error_rate_r = a.value("error_rate_r", error_rate_r);
        nc_min = a.value("nc_min", nc_min);
        nc_max = a.value("nc_max", nc_max);
        if (a.contains("mix")) augment_mix = a["mix"].get<std::vector<std::string>>();
    }
    if (j.contains("backend")) {
        const auto& b = j["backend"];
        backend.kind = b.value("kind", backend.kind);
        backend.endpoint = b.value("endpoint", backend.endpoint);
        backend.api_key = b.value("api_key", backend.api_key);
        backend.model = b.value("model", backend.model);
        backend.transcript_path = b.value("transcript", backend.transcript_path);
        backend.genre_error = b.value("genre_error", backend.genre_error);
        backend.item_error = b.value("item_error", backend.item_error);
        backend.max_retries = b.value("max_retries", backend.max_retries);
        backend.backoff_ms = b.value("backoff_ms", backend.backoff_ms);
        backend.max_in_flight = b.value("max_in_flight", backend.max_in_flight);
        backend.max_new_tokens = b.value("max_new_tokens", backend.max_new_tokens);
    }
    if (j.contains("embedding")) {
        const auto& e = j["embedding"];
        embedding_kind = e.value("kind", embedding_kind);
        embedding_dim = e.value("dimension", embedding_dim);
        embedding_endpoint = e.value("endpoint", embedding_endpoint);
        embedding_model = e.value("model", embedding_model);
    }
    if (j.contains("run")) {
        const auto& r = j["run"];
        if (r.contains("seed")) seed = r["seed"].get<uint64_t>();
        if (r.contains("nc")) nc_values = r["nc"].get<std::vector<int>>();
        method = r.value("method", method);
        eval_split = r.value("split", eval_split);
        max_sequences = r.value("max_sequences", max_sequences);
        dedupe = r.value("dedupe", dedupe);
        templates_dir = r.value("templates_dir", templates_dir);
        out_dir = r.value("out_dir", out_dir);
    }
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["data"] = {{"catalog", catalog_path},
                 {"catalog_format", catalog_format},
                 {"interactions", interactions_path},
                 {"interactions_format", interactions_format},
                 {"positivity", positivity},
                 {"n_per_split", n_per_split}};
    j["augment"] = {{"error_rate_r", error_rate_r},
                    {"nc_min", nc_min},
                    {"nc_max", nc_max},
                    {"mix", augment_mix}};
    j["backend"] = {{"kind", backend.kind},
                    {"endpoint", backend.endpoint},
                    {"model", backend.model},
                    {"transcript", backend.transcript_path},
                    {"genre_error", backend.genre_error},
                    {"item_error", backend.item_error},
                    {"max_retries", backend.max_retries},
                    {"backoff_ms", backend.backoff_ms},
                    {"max_in_flight", backend.max_in_flight},
                    {"max_new_tokens", backend.max_new_tokens}};
    j["embedding"] = {{"kind", embedding_kind},
                      {"dimension", embedding_dim},
                      {"endpoint", embedding_endpoint},
                      {"model", embedding_model}};
    j["run"] = {{"seed", seed.value_or(0)},
                {"seed_set", seed.has_value()},
                {"nc", nc_values},
                {"method", method},
                {"split", eval_split},
                {"max_sequences", max_sequences},
                {"dedupe", dedupe},
                {"templates_dir", templates_dir},
                {"out_dir", out_dir}};
    return j;
}

std::string RunConfig::config_hash() const {
    nlohmann::json j = to_json();
    // the artifact root must not feed its own hash
    j["run"].erase("out_dir");
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

std::vector<std::string> RunConfig::validate(const std::string& command) const {
    std::vector<std::string> errors;
    auto need_file = [&](const std::string& path, const std::string& field) {
        if (path.empty()) {
            errors.push_back(field + " is required");
        } else if (!fs::exists(path)) {
            errors.push_back(field + " '" + path + "' does not exist");
        }
    };

    if (!seed.has_value()) errors.push_back("run.seed must be set explicitly");

    static const std::set<std::string> kFormats = {"csv", "movielens", "steam", "jsonl"};
    if (command == "prepare") {
        need_file(catalog_path, "data.catalog");
        need_file(interactions_path, "data.interactions");
        if (!kFormats.count(catalog_format)) {
            errors.push_back("data.catalog_format '" + catalog_format + "' is unknown");
        }
        if (!kFormats.count(interactions_format)) {
            errors.push_back("data.interactions_format '" + interactions_format + "' is unknown");
        }
        if (positivity != "rating" && positivity != "playtime") {
            errors.push_back("data.positivity must be 'rating' or 'playtime'");
        }
    } else {
        need_file(catalog_path, "data.catalog");
    }

    if (command == "augment" || command == "export-sft" || command == "run" ||
        command == "eval" || command == "sweep") {
        std::string splits = run_dir() + "/splits/train.jsonl";
        if (!fs::exists(splits)) {
            errors.push_back("no prepared splits at '" + splits + "' (run prepare first)");
        }
    }

    if (error_rate_r < 0.0 || error_rate_r > 1.0) {
        errors.push_back("augment.error_rate_r must lie in [0,1]");
    }
    if (nc_min < 1 || nc_max > 10 || nc_min > nc_max) {
        errors.push_back("augment.nc_min..nc_max must lie within [1,10]");
    }
    static const std::set<std::string> kStrategies = {"GF-N", "GF-D", "IP-N", "IP-D"};
    for (const auto& s : augment_mix) {
        if (!kStrategies.count(s)) errors.push_back("augment.mix entry '" + s + "' is unknown");
    }

    static const std::set<std::string> kBackends = {"remote", "oracle_truth", "oracle_noisy",
                                                    "recorded"};
    if (!kBackends.count(backend.kind)) {
        errors.push_back("backend.kind '" + backend.kind + "' is unknown");
    }
    if (backend.kind == "remote" && backend.endpoint.empty() &&
        std::getenv("DIVREC_ENDPOINT") == nullptr) {
        errors.push_back("backend.endpoint (or DIVREC_ENDPOINT) is required for remote");
    }
    if (backend.kind == "recorded") need_file(backend.transcript_path, "backend.transcript");
    if (backend.genre_error < 0.0 || backend.genre_error > 1.0 || backend.item_error < 0.0 ||
        backend.item_error > 1.0) {
        errors.push_back("backend error rates must lie in [0,1]");
    }
    if (backend.max_in_flight < 1) errors.push_back("backend.max_in_flight must be >= 1");
    if (backend.max_new_tokens < 1) errors.push_back("backend.max_new_tokens must be >= 1");

    if (embedding_kind != "local_ngram" && embedding_kind != "remote") {
        errors.push_back("embedding.kind must be 'local_ngram' or 'remote'");
    }
    if (embedding_dim < 1) errors.push_back("embedding.dimension must be >= 1");
    if (embedding_kind == "remote" && embedding_endpoint.empty()) {
        errors.push_back("embedding.endpoint is required for the remote provider");
    }

    for (int n_c : nc_values) {
        if (n_c < 1 || n_c > 10) {
            errors.push_back("run.nc value " + std::to_string(n_c) + " outside [1,10]");
        }
    }
    if (nc_values.empty()) errors.push_back("run.nc must not be empty");
    if (method != "DLCREC" && method != "BIGREC_DIV" && method != "BIGREC_COT") {
        errors.push_back("run.method '" + method + "' is unknown");
    }
    if (eval_split != "train" && eval_split != "validation" && eval_split != "test") {
        errors.push_back("run.split must be train, validation or test");
    }
    if (!templates_dir.empty() && !fs::exists(templates_dir)) {
        errors.push_back("run.templates_dir '" + templates_dir + "' does not exist");
    }
    return errors;
}

} // namespace divrec
