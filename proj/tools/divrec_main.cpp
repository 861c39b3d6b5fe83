#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "divrec/augment.hpp"
#include "divrec/backend.hpp"
#include "divrec/config.hpp"
#include "divrec/dataset.hpp"
#include "divrec/error.hpp"
#include "divrec/grounding.hpp"
#include "divrec/metrics.hpp"
#include "divrec/pipeline.hpp"
#include "divrec/strings.hpp"
#include "divrec/synthetic.hpp"

namespace fs = std::filesystem;
using namespace divrec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitPartial = 4;

struct Overrides {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::string backend_kind;
    std::string method;
    std::string out_dir;
    std::string nc_list;
    std::optional<size_t> max_sequences;
};

RunConfig load_config(const Overrides& o) {
    RunConfig config;
    if (!o.config_path.empty()) config = RunConfig::from_file(o.config_path);
    if (o.seed) config.seed = *o.seed;
    if (!o.backend_kind.empty()) config.backend.kind = o.backend_kind;
    if (!o.method.empty()) config.method = o.method;
    if (!o.out_dir.empty()) config.out_dir = o.out_dir;
    if (o.max_sequences) config.max_sequences = *o.max_sequences;
    if (!o.nc_list.empty()) {
        config.nc_values.clear();
        for (const auto& tok : split(o.nc_list, ',')) {
            config.nc_values.push_back(std::stoi(trim(tok)));
        }
    }
    return config;
}

int check_config(const RunConfig& config, const std::string& command) {
    auto errors = config.validate(command);
    if (errors.empty()) return kExitOk;
    std::cerr << "config errors:\n";
    for (const auto& e : errors) std::cerr << "  - " << e << "\n";
    return kExitConfig;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path + "'");
    out << text;
}

void snapshot_config(const RunConfig& config) {
    fs::create_directories(config.run_dir());
    write_text(config.run_dir() + "/config.snapshot", config.to_json().dump(2) + "\n");
}

// Everything cmd_run / cmd_sweep need, loaded once.
struct RunContext {
    ItemCatalog catalog;
    DatasetSplit split;
    GenreDistribution genre_dist;
    ItemDistribution item_dist;
    PromptTemplates templates;
    std::unique_ptr<PromptCodec> codec;
    std::unique_ptr<EmbeddingProvider> provider;
    ItemIndex index;
    std::unique_ptr<TextBackend> backend;
    std::unique_ptr<Pipeline> pipeline;
    std::vector<InteractionSequence> eval_sequences;
};

std::unique_ptr<RunContext> make_context(const RunConfig& config) {
    auto ctx = std::make_unique<RunContext>();
    ctx->catalog = load_catalog(config.catalog_path, catalog_format_from_string(config.catalog_format));
    ctx->split = load_split(config.run_dir() + "/splits");
    ctx->genre_dist = genre_distribution(ctx->split.train, ctx->catalog, ctx->catalog.taxonomy());
    ctx->item_dist = item_distribution(ctx->split.train, ctx->catalog);

    ctx->templates = config.templates_dir.empty() ? PromptTemplates::defaults()
                                                  : PromptTemplates::load_dir(config.templates_dir);
    ctx->codec = std::make_unique<PromptCodec>(ctx->catalog.taxonomy(), ctx->templates);

    ctx->provider =
        make_embedding_provider(config.embedding_kind, config.embedding_dim,
                                config.embedding_endpoint, config.embedding_model, "");
    const std::string index_path = config.run_dir() + "/index.bin";
    bool loaded = false;
    if (fs::exists(index_path)) {
        try {
            ctx->index = load_index(index_path, *ctx->provider);
            loaded = true;
        } catch (const Error& e) {
            std::cerr << "rebuilding index: " << e.what() << "\n";
        }
    }
    if (!loaded) {
        ctx->index = build_index(ctx->catalog, *ctx->provider);
        save_index(ctx->index, index_path);
    }

    const std::vector<InteractionSequence>* pool = &ctx->split.test;
    if (config.eval_split == "train") pool = &ctx->split.train;
    if (config.eval_split == "validation") pool = &ctx->split.validation;
    ctx->eval_sequences = *pool;
    if (config.max_sequences > 0 && ctx->eval_sequences.size() > config.max_sequences) {
        ctx->eval_sequences.resize(config.max_sequences);
    }

    ctx->backend = make_backend(config.backend, &ctx->catalog, &ctx->eval_sequences,
                                &ctx->genre_dist, &ctx->item_dist);
    ctx->pipeline = std::make_unique<Pipeline>(ctx->catalog, *ctx->codec, ctx->genre_dist,
                                               ctx->index, *ctx->provider, *ctx->backend,
                                               config.seed.value_or(0), config.dedupe,
                                               config.backend.max_in_flight);
    return ctx;
}

nlohmann::ordered_json outcome_to_json(const ControlRequest& request,
                                       const PipelineOutcome& outcome,
                                       const std::string& config_hash) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json req;
    req["user_id"] = request.sequence.user_id;
    req["n_c"] = request.n_c;
    req["method"] = to_string(request.method);
    std::vector<std::string> history, future;
    for (const auto& x : request.sequence.history) history.push_back(x.item_id);
    for (const auto& x : request.sequence.future) future.push_back(x.item_id);
    req["history"] = history;
    req["future"] = future;
    j["request"] = req;
    j["config_hash"] = config_hash;
    j["ok"] = outcome.ok;
    if (!outcome.ok) {
        j["failed_stage"] = outcome.failed_stage;
        j["error"] = outcome.error;
    }

    const PipelineResult& r = outcome.result;
    nlohmann::ordered_json recs = nlohmann::ordered_json::array();
    for (size_t i = 0; i < r.rec_item_ids.size(); ++i) {
        recs.push_back({{"item_id", r.rec_item_ids[i]}, {"title", r.rec_titles[i]}});
    }
    j["recommendations"] = recs;
    j["gp_genres"] = r.gp_genres;
    j["gf_slots"] = r.gf_slots;
    j["gf_targets_covered"] = r.gf_targets_covered;
    nlohmann::ordered_json raw = nlohmann::ordered_json::array();
    for (const auto& slot : r.ip_raw) raw.push_back({{"title", slot.title}, {"genre", slot.genre}});
    j["ip_raw"] = raw;
    nlohmann::ordered_json grounding;
    grounding["dedupe_events"] = r.grounding.dedupe_events;
    nlohmann::ordered_json slots = nlohmann::ordered_json::array();
    for (const auto& s : r.grounding.slots) {
        slots.push_back({{"raw_title", s.raw_title},
                         {"item_id", s.item_id},
                         {"l2_distance", s.l2_distance},
                         {"rank_used", s.rank_used}});
    }
    grounding["slots"] = slots;
    j["grounding"] = grounding;
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const auto& s : r.stages) {
        stages.push_back({{"stage", s.stage}, {"prompt", s.prompt}, {"completion", s.completion}});
    }
    j["stages"] = stages;
    return j;
}

int cmd_prepare(const RunConfig& config) {
    snapshot_config(config);
    auto catalog = load_catalog(config.catalog_path,
                                catalog_format_from_string(config.catalog_format));
    auto interactions = load_interactions(config.interactions_path,
                                          interaction_format_from_string(config.interactions_format));
    auto positive = filter_positive(interactions, positive_policy_from_string(config.positivity));
    auto sequences = build_sequences(positive);

    SplitParams params;
    params.n_per_split = config.n_per_split;
    params.seed = config.seed.value_or(0);
    auto split = split_and_sample(std::move(sequences), params);
    save_split(split, config.run_dir() + "/splits");

    auto genre_dist = genre_distribution(split.train, catalog, catalog.taxonomy());
    auto item_dist = item_distribution(split.train, catalog);
    nlohmann::ordered_json dist;
    dist["config_hash"] = config.config_hash();
    dist["sampling"] = "per_split"; // 1,000-sequence sampling applied per split
    dist["genres"] = nlohmann::ordered_json::object();
    for (size_t i = 0; i < genre_dist.genres.size(); ++i) {
        dist["genres"][genre_dist.genres[i]] = {{"count", genre_dist.counts[i]},
                                                {"prob", genre_dist.probs[i]}};
    }
    nlohmann::ordered_json items = nlohmann::ordered_json::object();
    for (const auto& [genre, entries] : item_dist.per_genre) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& e : entries) {
            arr.push_back({{"item_id", e.item_id}, {"count", e.count}, {"prob", e.prob}});
        }
        items[genre] = arr;
    }
    dist["items"] = items;
    write_text(config.run_dir() + "/splits/distributions.json", dist.dump(2) + "\n");

    std::cout << "prepared splits: train=" << split.train.size()
              << " validation=" << split.validation.size() << " test=" << split.test.size()
              << " -> " << config.run_dir() << "/splits\n";
    return kExitOk;
}

int cmd_augment(const RunConfig& config) {
    snapshot_config(config);
    auto catalog = load_catalog(config.catalog_path,
                                catalog_format_from_string(config.catalog_format));
    auto split = load_split(config.run_dir() + "/splits");
    auto genre_dist = genre_distribution(split.train, catalog, catalog.taxonomy());
    auto item_dist = item_distribution(split.train, catalog);
    PromptCodec codec(catalog.taxonomy(), config.templates_dir.empty()
                                              ? PromptTemplates::defaults()
                                              : PromptTemplates::load_dir(config.templates_dir));

    auto has = [&](const char* s) {
        return std::find(config.augment_mix.begin(), config.augment_mix.end(), s) !=
               config.augment_mix.end();
    };
    AugmentConfig acfg;
    acfg.seed = config.seed.value_or(0);
    acfg.error_rate_r = config.error_rate_r;
    acfg.nc_min = config.nc_min;
    acfg.nc_max = config.nc_max;
    acfg.use_gf_noise = has("GF-N");
    acfg.use_gf_dist = has("GF-D");
    acfg.use_ip_noise = has("IP-N");
    acfg.use_ip_dist = has("IP-D");

    std::vector<AugmentedSample> originals;
    for (const auto& seq : split.train) originals.push_back(make_base_sample(seq, catalog));
    auto augmented =
        run_augmentation(originals, catalog, catalog.taxonomy(), genre_dist, item_dist, acfg);

    fs::create_directories(config.run_dir() + "/corpora");
    auto gf_corpus = assemble(originals, augmented.gf, TaskKind::GF, catalog, codec);
    auto ip_corpus = assemble(originals, augmented.ip, TaskKind::IP, catalog, codec);
    size_t gf_written = export_sft(gf_corpus.samples, config.run_dir() + "/corpora/gf_train.jsonl");
    size_t ip_written = export_sft(ip_corpus.samples, config.run_dir() + "/corpora/ip_train.jsonl");

    nlohmann::ordered_json manifest;
    manifest["config_hash"] = config.config_hash();
    manifest["seed"] = acfg.seed;
    manifest["error_rate_r"] = config.error_rate_r;
    manifest["nc_range"] = {config.nc_min, config.nc_max};
    manifest["mix"] = config.augment_mix;
    manifest["gf"] = gf_corpus.counts;
    manifest["gf"]["total"] = gf_written;
    manifest["ip"] = ip_corpus.counts;
    manifest["ip"]["total"] = ip_written;
    write_text(config.run_dir() + "/corpora/manifest.json", manifest.dump(2) + "\n");

    std::cout << "augmented corpora: gf=" << gf_written << " ip=" << ip_written << " -> "
              << config.run_dir() << "/corpora\n";
    return kExitOk;
}

int cmd_export_sft(const RunConfig& config) {
    snapshot_config(config);
    auto catalog = load_catalog(config.catalog_path,
                                catalog_format_from_string(config.catalog_format));
    auto split = load_split(config.run_dir() + "/splits");
    PromptCodec codec(catalog.taxonomy(), config.templates_dir.empty()
                                              ? PromptTemplates::defaults()
                                              : PromptTemplates::load_dir(config.templates_dir));

    std::vector<InstructionSample> gp, gf, ip, div, cot1, cot2;
    for (const auto& seq : split.train) {
        auto base = make_base_sample(seq, catalog);
        std::vector<TitledEntry> history, future;
        for (const auto& x : seq.history) {
            const Item& item = catalog.at(x.item_id);
            history.push_back({item.title, item.primary_genre});
        }
        for (size_t i = 0; i < base.future_items.size(); ++i) {
            future.push_back({catalog.at(base.future_items[i]).title, base.future_genres[i]});
        }
        auto targets = distinct_by_frequency(base.future_genres);
        gp.push_back(codec.gp_sample(history, base.future_genres));
        gf.push_back(codec.gf_sample(history, targets, base.future_genres));
        ip.push_back(codec.ip_sample(history, future));
        int k = static_cast<int>(targets.size());
        div.push_back(codec.baseline_sample(TaskKind::BigrecDiv, history, k, targets, future));
        cot1.push_back(codec.baseline_sample(TaskKind::BigrecCotStage1, history, k, targets, future));
        cot2.push_back(codec.baseline_sample(TaskKind::BigrecCotStage2, history, k, targets, future));
    }

    const std::string dir = config.run_dir() + "/corpora";
    fs::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["config_hash"] = config.config_hash();
    manifest["template_version"] = codec.templates().version();
    manifest["gp_sft"] = export_sft(gp, dir + "/gp_sft.jsonl");
    manifest["gf_sft"] = export_sft(gf, dir + "/gf_sft.jsonl");
    manifest["ip_sft"] = export_sft(ip, dir + "/ip_sft.jsonl");
    manifest["bigrec_div_sft"] = export_sft(div, dir + "/bigrec_div_sft.jsonl");
    manifest["bigrec_cot_stage1_sft"] = export_sft(cot1, dir + "/bigrec_cot_stage1_sft.jsonl");
    manifest["bigrec_cot_stage2_sft"] = export_sft(cot2, dir + "/bigrec_cot_stage2_sft.jsonl");
    write_text(dir + "/sft_manifest.json", manifest.dump(2) + "\n");

    std::cout << "exported instruction datasets -> " << dir << "\n";
    return kExitOk;
}

int run_requests(const RunConfig& config, RunContext& ctx, const std::vector<int>& nc_values,
                 const std::string& artifact_path, const std::string& transcript_path) {
    auto outcomes = ctx.pipeline->sweep(ctx.eval_sequences, nc_values,
                                        method_from_string(config.method));

    size_t failures = 0;
    bool backend_failure = false;
    std::ofstream artifact(artifact_path);
    if (!artifact) throw Error(ErrorKind::IoFailure, "cannot write '" + artifact_path + "'");
    std::vector<TranscriptEntry> transcript;
    for (const auto& [n_c, row] : outcomes) {
        for (size_t i = 0; i < row.size(); ++i) {
            ControlRequest request{ctx.eval_sequences[i], n_c, method_from_string(config.method)};
            artifact << outcome_to_json(request, row[i], config.config_hash()).dump() << "\n";
            if (!row[i].ok) {
                ++failures;
                if (row[i].error.find("Transport") != std::string::npos ||
                    row[i].error.find("Timeout") != std::string::npos ||
                    row[i].error.find("BadResponse") != std::string::npos) {
                    backend_failure = true;
                }
            }
            for (const auto& s : row[i].result.stages) {
                transcript.push_back({s.prompt, s.completion});
            }
        }
    }
    if (!transcript_path.empty()) write_transcript(transcript, transcript_path);

    nlohmann::ordered_json manifest;
    manifest["config_hash"] = config.config_hash();
    manifest["seed"] = config.seed.value_or(0);
    manifest["backend"] = {{"name", ctx.backend->name()},
                           {"kind", config.backend.kind},
                           {"model", config.backend.model},
                           {"endpoint", config.backend.endpoint},
                           {"genre_error", config.backend.genre_error},
                           {"item_error", config.backend.item_error},
                           {"max_in_flight", config.backend.max_in_flight},
                           {"max_new_tokens", config.backend.max_new_tokens}};
    manifest["template_version"] = ctx.templates.version();
    manifest["method"] = config.method;
    manifest["nc"] = nc_values;
    manifest["sequences"] = ctx.eval_sequences.size();
    manifest["failures"] = failures;
    write_text(fs::path(artifact_path).parent_path().string() + "/manifest.json",
               manifest.dump(2) + "\n");

    std::cout << "ran " << ctx.eval_sequences.size() << " sequences x " << nc_values.size()
              << " control numbers, failures=" << failures << " -> " << artifact_path << "\n";
    if (failures == 0) return kExitOk;
    const size_t total = ctx.eval_sequences.size() * nc_values.size();
    return (failures == total && backend_failure) ? kExitBackend : kExitPartial;
}

int cmd_run(const RunConfig& config, const std::string& transcript_path) {
    snapshot_config(config);
    auto ctx = make_context(config);
    fs::create_directories(config.run_dir() + "/runs");
    return run_requests(config, *ctx, config.nc_values, config.run_dir() + "/runs/results.jsonl",
                        transcript_path);
}

int cmd_eval(const RunConfig& config, const std::string& artifact_override) {
    auto catalog = load_catalog(config.catalog_path,
                                catalog_format_from_string(config.catalog_format));
    const std::string artifact_path = artifact_override.empty()
                                          ? config.run_dir() + "/runs/results.jsonl"
                                          : artifact_override;
    std::ifstream in(artifact_path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open run artifact '" + artifact_path + "'");

    std::vector<EvalInput> inputs;
    std::string line;
    size_t skipped = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (j.value("config_hash", "") != config.config_hash()) {
            throw Error(ErrorKind::ConfigError,
                        "artifact config_hash " + j.value("config_hash", "<missing>") +
                            " does not match this config (" + config.config_hash() + ")");
        }
        if (!j.value("ok", false)) {
            ++skipped;
            continue;
        }
        EvalInput input;
        for (const auto& rec : j["recommendations"]) {
            input.recommendations.push_back(rec.at("item_id").get<std::string>());
        }
        input.ground_truth_future = j["request"]["future"].get<std::vector<std::string>>();
        input.n_c = j["request"]["n_c"].get<int>();
        inputs.push_back(std::move(input));
    }

    auto report = aggregate(inputs, catalog);
    fs::create_directories(config.run_dir() + "/reports");
    nlohmann::ordered_json out = nlohmann::ordered_json::parse(report.to_json());
    out["config_hash"] = config.config_hash();
    out["skipped_failures"] = skipped;
    write_text(config.run_dir() + "/reports/report.json", out.dump(2) + "\n");
    write_text(config.run_dir() + "/reports/report.txt", report.to_table());
    std::cout << report.to_table();
    if (!report.consistency_ok()) {
        std::cerr << "consistency audit failed: |mean Cov - n_c| > MAE_Cov\n";
        return kExitPartial;
    }
    return skipped == 0 ? kExitOk : kExitPartial;
}

int cmd_sweep(const RunConfig& config) {
    snapshot_config(config);
    auto ctx = make_context(config);
    fs::create_directories(config.run_dir() + "/runs");
    fs::create_directories(config.run_dir() + "/reports");

    const std::vector<int> grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int rc = run_requests(config, *ctx, grid, config.run_dir() + "/runs/sweep_results.jsonl", "");

    // aggregate directly from memory-equivalent artifact
    std::ifstream in(config.run_dir() + "/runs/sweep_results.jsonl");
    std::vector<EvalInput> inputs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (!j.value("ok", false)) continue;
        EvalInput input;
        for (const auto& rec : j["recommendations"]) {
            input.recommendations.push_back(rec.at("item_id").get<std::string>());
        }
        input.ground_truth_future = j["request"]["future"].get<std::vector<std::string>>();
        input.n_c = j["request"]["n_c"].get<int>();
        inputs.push_back(std::move(input));
    }
    auto report = aggregate(inputs, ctx->catalog);
    nlohmann::ordered_json out = nlohmann::ordered_json::parse(report.to_json());
    out["config_hash"] = config.config_hash();
    write_text(config.run_dir() + "/reports/sweep.json", out.dump(2) + "\n");
    write_text(config.run_dir() + "/reports/sweep.txt", report.to_table());
    std::cout << report.to_table();
    return rc;
}

int cmd_make_fixture(const std::string& out_dir, size_t users, size_t genres,
                     size_t items_per_genre, uint64_t seed) {
    fs::create_directories(out_dir);
    auto catalog = synthetic_catalog(genres, items_per_genre, seed);
    SyntheticSpec spec;
    spec.n_genres = genres;
    spec.items_per_genre = items_per_genre;
    spec.n_users = users;
    spec.seed = seed;
    auto log = synthetic_log(catalog, spec);
    write_catalog_csv(catalog, out_dir + "/catalog.csv");
    write_interactions_csv(log, out_dir + "/interactions.csv");

    nlohmann::ordered_json config;
    config["data"] = {{"catalog", out_dir + "/catalog.csv"},
                      {"catalog_format", "csv"},
                      {"interactions", out_dir + "/interactions.csv"},
                      {"interactions_format", "csv"},
                      {"positivity", "rating"},
                      {"n_per_split", 1000}};
    config["backend"] = {{"kind", "oracle_truth"}};
    config["run"] = {{"seed", seed}, {"nc", {2, 5, 8}}, {"method", "DLCREC"},
                     {"out_dir", out_dir + "/out"}};
    write_text(out_dir + "/config.json", config.dump(2) + "\n");

    std::cout << "fixture: " << catalog.size() << " items, " << users << " users -> " << out_dir
              << " (config.json included)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"controllable-diversity recommendation experiments"};
    app.require_subcommand(1);

    Overrides o;
    std::string transcript_path;
    std::string artifact_override;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", o.config_path, "config JSON file");
        cmd->add_option("--seed", o.seed, "override run.seed");
        cmd->add_option("--backend", o.backend_kind, "override backend.kind");
        cmd->add_option("--method", o.method, "override run.method");
        cmd->add_option("--out-dir", o.out_dir, "override run.out_dir");
        cmd->add_option("--nc", o.nc_list, "override run.nc (comma separated)");
        cmd->add_option("--max-sequences", o.max_sequences, "override run.max_sequences");
    };

    auto* prepare = app.add_subcommand("prepare", "build, split and sample sequences");
    add_common(prepare);
    auto* augment = app.add_subcommand("augment", "emit augmented GF/IP training corpora");
    add_common(augment);
    auto* exports = app.add_subcommand("export-sft", "emit instruction-tuning datasets");
    add_common(exports);
    auto* run = app.add_subcommand("run", "run the control pipeline over the eval split");
    add_common(run);
    run->add_option("--transcript", transcript_path, "also record prompts/completions here");
    auto* eval = app.add_subcommand("eval", "score a run artifact");
    add_common(eval);
    eval->add_option("--artifact", artifact_override, "run artifact path (default: run dir)");
    auto* sweep = app.add_subcommand("sweep", "run control numbers 1..10 and aggregate");
    add_common(sweep);

    std::string fixture_out = "fixture";
    size_t fixture_users = 50, fixture_genres = 12, fixture_items = 15;
    uint64_t fixture_seed = 7;
    auto* fixture = app.add_subcommand("make-fixture", "write a synthetic catalog + log + config");
    fixture->add_option("--out", fixture_out, "output directory");
    fixture->add_option("--users", fixture_users, "number of users");
    fixture->add_option("--genres", fixture_genres, "number of genres");
    fixture->add_option("--items-per-genre", fixture_items, "items per genre");
    fixture->add_option("--seed", fixture_seed, "generator seed");

    std::string templates_out = "templates";
    auto* templates = app.add_subcommand("templates", "write the default prompt templates");
    templates->add_option("--out", templates_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fixture->parsed()) {
            return cmd_make_fixture(fixture_out, fixture_users, fixture_genres, fixture_items,
                                    fixture_seed);
        }
        if (templates->parsed()) {
            PromptTemplates::defaults().save_dir(templates_out);
            std::cout << "templates -> " << templates_out << "\n";
            return kExitOk;
        }

        RunConfig config = load_config(o);
        std::string command = app.get_subcommands().front()->get_name();
        if (int rc = check_config(config, command); rc != kExitOk) return rc;

        if (prepare->parsed()) return cmd_prepare(config);
        if (augment->parsed()) return cmd_augment(config);
        if (exports->parsed()) return cmd_export_sft(config);
        if (run->parsed()) return cmd_run(config, transcript_path);
        if (eval->parsed()) return cmd_eval(config, artifact_override);
        if (sweep->parsed()) return cmd_sweep(config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::ConfigError:
            case ErrorKind::IoFailure: return kExitConfig;
            case ErrorKind::Transport:
            case ErrorKind::BadResponse:
            case ErrorKind::Timeout: return kExitBackend;
            default: return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
