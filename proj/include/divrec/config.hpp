#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "divrec/backend.hpp"

namespace divrec {

// One structured config file drives every command; flags may override
// scalar fields (flag > file > default). The hash of the canonical JSON
// form is embedded in every artifact.
struct RunConfig {
    // data
    std::string catalog_path;
    std::string catalog_format = "csv";
    std::string interactions_path;
    std::string interactions_format = "csv";
    std::string positivity = "rating";
    size_t n_per_split = 1000;

    // augmentation
    double error_rate_r = 0.3;
    int nc_min = 1;
    int nc_max = 10;
    std::vector<std::string> augment_mix = {"GF-N", "GF-D", "IP-N", "IP-D"};

    // backend
    BackendDescriptor backend;

    // embedding / grounding
    std::string embedding_kind = "local_ngram";
    int embedding_dim = 512;
    std::string embedding_endpoint;
    std::string embedding_model;
    bool dedupe = true;

    // run
    std::optional<uint64_t> seed; // must be explicit: no implicit randomness
    std::vector<int> nc_values = {2, 5, 8};
    std::string method = "DLCREC";
    std::string eval_split = "test";
    size_t max_sequences = 0; // 0 = all
    std::string templates_dir;
    std::string out_dir = "out";

    static RunConfig from_file(const std::string& path);
    void apply_json(const nlohmann::json& j);

    nlohmann::json to_json() const;
    std::string config_hash() const;
    std::string run_dir() const { return out_dir + "/run-" + config_hash(); }

    // All problems at once, before any work starts.
    std::vector<std::string> validate(const std::string& command) const;
};

} // namespace divrec
