#include "divrec/pipeline.hpp"

#include <chrono>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "divrec/augment.hpp"
#include "divrec/error.hpp"
#include "divrec/rng.hpp"

namespace divrec {

Method method_from_string(const std::string& tag) {
    if (tag == "DLCREC" || tag == "dlcrec") return Method::Dlcrec;
    if (tag == "BIGREC_DIV" || tag == "bigrec_div") return Method::BigrecDiv;
    if (tag == "BIGREC_COT" || tag == "bigrec_cot") return Method::BigrecCot;
    throw Error(ErrorKind::ConfigError, "unknown method '" + tag + "'");
}

const char* to_string(Method method) {
    switch (method) {
        case Method::Dlcrec: return "DLCREC";
        case Method::BigrecDiv: return "BIGREC_DIV";
        case Method::BigrecCot: return "BIGREC_COT";
    }
    return "DLCREC";
}

std::vector<TitledEntry> Pipeline::history_entries(const InteractionSequence& seq) const {
    std::vector<TitledEntry> entries;
    entries.reserve(seq.history.size());
    for (const auto& x : seq.history) {
        const Item& item = catalog_->at(x.item_id);
        entries.push_back({item.title, item.primary_genre});
    }
    return entries;
}

std::string Pipeline::generate_logged(TaskKind task, const RenderedPrompt& prompt,
                                      const char* stage, std::vector<StageRecord>* trace) const {
    GenerationRequest request{prompt.text(), task, kDefaultMaxNewTokens};
    std::string completion = backend_->generate(request);
    if (trace) trace->push_back({stage, request.prompt, completion});
    return completion;
}

std::vector<std::string> Pipeline::run_gp(const InteractionSequence& seq, int n_c,
                                          std::vector<StageRecord>* trace) const {
    auto entries = history_entries(seq);
    auto prompt = codec_->render_gp(entries, n_c);
    std::string completion = generate_logged(TaskKind::GP, prompt, "gp", trace);
    auto genres = codec_->parse_gp(completion, n_c);
    Rng rng = Rng::derived(mix_seed(seed_, sequence_stream_id(seq)), "gp-pad");
    genres = codec_->pad_genres(std::move(genres), n_c, *genre_dist_, rng);
    return genres;
}

Pipeline::GfResult Pipeline::run_gf(const InteractionSequence& seq,
                                    const std::vector<std::string>& target_genres,
                                    std::vector<StageRecord>* trace) const {
    auto entries = history_entries(seq);
    auto prompt = codec_->render_gf(entries, target_genres);

    std::vector<std::string> slots;
    try {
        slots = codec_->parse_gf(generate_logged(TaskKind::GF, prompt, "gf", trace));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::TrailMismatch) throw;
        // one re-prompt; greedy decoding means this only heals transport faults
        slots = codec_->parse_gf(generate_logged(TaskKind::GF, prompt, "gf-retry", trace));
    }
    auto repair = codec_->repair_gf(std::move(slots), target_genres);
    return {std::move(repair.slots), repair.targets_covered};
}

Pipeline::IpResult Pipeline::run_ip(const InteractionSequence& seq,
                                    const std::vector<std::string>& future_genres,
                                    std::vector<StageRecord>* trace) const {
    auto entries = history_entries(seq);
    auto prompt = codec_->render_ip(entries, future_genres);

    std::vector<ParsedSlot> raw;
    try {
        raw = codec_->parse_ip(generate_logged(TaskKind::IP, prompt, "ip", trace));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::TrailMismatch) throw;
        raw = codec_->parse_ip(generate_logged(TaskKind::IP, prompt, "ip-retry", trace));
    }

    std::vector<std::string> titles;
    titles.reserve(raw.size());
    for (const auto& slot : raw) titles.push_back(slot.title);
    auto grounding = ground_list(titles, *index_, *provider_, dedupe_);
    return {std::move(raw), std::move(grounding)};
}

PipelineResult Pipeline::run_dlcrec(const ControlRequest& request) const {
    PipelineResult result;
    result.gp_genres = run_gp(request.sequence, request.n_c, &result.stages);
    auto gf = run_gf(request.sequence, result.gp_genres, &result.stages);
    result.gf_slots = std::move(gf.slots);
    result.gf_targets_covered = gf.targets_covered;
    auto ip = run_ip(request.sequence, result.gf_slots, &result.stages);
    result.ip_raw = std::move(ip.raw);
    result.grounding = std::move(ip.grounding);
    return result;
}

PipelineResult Pipeline::run_baseline(const ControlRequest& request) const {
    PipelineResult result;
    auto entries = history_entries(request.sequence);

    std::vector<std::string> titles;
    if (request.method == Method::BigrecDiv) {
        auto prompt = codec_->render_baseline(TaskKind::BigrecDiv, entries, request.n_c);
        titles = codec_->parse_title_list(
            generate_logged(TaskKind::BigrecDiv, prompt, "div", &result.stages));
    } else {
        auto stage1 = codec_->render_baseline(TaskKind::BigrecCotStage1, entries, request.n_c);
        std::string completion =
            generate_logged(TaskKind::BigrecCotStage1, stage1, "cot-1", &result.stages);
        auto genres = codec_->parse_gp(completion, request.n_c);
        Rng rng = Rng::derived(mix_seed(seed_, sequence_stream_id(request.sequence)), "cot-pad");
        genres = codec_->pad_genres(std::move(genres), request.n_c, *genre_dist_, rng);
        result.gp_genres = genres;

        auto stage2 = codec_->render_baseline(TaskKind::BigrecCotStage2, entries, 0, genres);
        titles = codec_->parse_title_list(
            generate_logged(TaskKind::BigrecCotStage2, stage2, "cot-2", &result.stages));
    }
    if (titles.empty()) {
        throw Error(ErrorKind::BadResponse, "baseline completion contained no titles");
    }
    if (titles.size() > kFutureLen) titles.resize(kFutureLen);
    titles.reserve(kFutureLen);
    for (size_t i = 0; titles.size() < kFutureLen; ++i) titles.push_back(std::string(titles[i]));

    for (const auto& t : titles) result.ip_raw.push_back({t, ""});
    result.grounding = ground_list(titles, *index_, *provider_, dedupe_);
    return result;
}

PipelineOutcome Pipeline::run_control(const ControlRequest& request) const {
    PipelineOutcome outcome;
    const auto t0 = std::chrono::steady_clock::now();
    const char* stage = "gp";
    try {
        if (request.n_c < 1 || request.n_c > kListSize) {
            throw Error(ErrorKind::KOutOfRange, "n_c=" + std::to_string(request.n_c));
        }
        if (request.method == Method::Dlcrec) {
            outcome.result = run_dlcrec(request);
        } else {
            stage = "baseline";
            outcome.result = run_baseline(request);
        }
        for (const auto& slot : outcome.result.grounding.slots) {
            outcome.result.rec_item_ids.push_back(slot.item_id);
            outcome.result.rec_titles.push_back(slot.title);
        }
        outcome.ok = true;
    } catch (const std::exception& e) {
        // infer the failing stage from how far the trace got
        if (!outcome.result.stages.empty()) stage = outcome.result.stages.back().stage.c_str();
        outcome.failed_stage = stage;
        outcome.error = e.what();
    }
    outcome.result.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return outcome;
}

std::map<int, std::vector<PipelineOutcome>> Pipeline::sweep(
    const std::vector<InteractionSequence>& sequences, const std::vector<int>& nc_values,
    Method method) const {
    std::map<int, std::vector<PipelineOutcome>> out;
    for (int n_c : nc_values) out[n_c].resize(sequences.size());

#ifdef _OPENMP
    const int threads = max_parallel_ > 0 ? max_parallel_ : omp_get_max_threads();
#endif
    for (int n_c : nc_values) {
        auto& row = out[n_c];
        const int64_t n = static_cast<int64_t>(sequences.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
        for (int64_t i = 0; i < n; ++i) {
            ControlRequest request{sequences[static_cast<size_t>(i)], n_c, method};
            row[static_cast<size_t>(i)] = run_control(request);
        }
    }
    return out;
}

EvalInput to_eval_input(const ControlRequest& request, const PipelineResult& result) {
    EvalInput in;
    in.recommendations = result.rec_item_ids;
    for (const auto& x : request.sequence.future) in.ground_truth_future.push_back(x.item_id);
    in.n_c = request.n_c;
    return in;
}

} // namespace divrec
