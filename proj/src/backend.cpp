#include "divrec/backend.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include <httplib.h>

#include "divrec/augment.hpp"
#include "divrec/error.hpp"
#include "divrec/rng.hpp"
#include "divrec/strings.hpp"
#include "divrec/trail.hpp"

namespace divrec {

namespace {

// `"title" (genre)` pairs of the GP-style history input. Same re-anchoring
// walk as scan_trail_pairs: the latest stray quote becomes the opener.
std::vector<RawTrailPair> scan_paren_pairs(const std::string& text) {
    std::vector<RawTrailPair> pairs;
    const size_t n = text.size();
    auto skip_ws = [&](size_t p) {
        while (p < n && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
        return p;
    };
    size_t open = std::string::npos;
    size_t q = text.find('"');
    while (q != std::string::npos) {
        if (open == std::string::npos) {
            open = q;
            q = text.find('"', q + 1);
            continue;
        }
        size_t paren = skip_ws(q + 1);
        if (paren >= n || text[paren] != '(') {
            open = q;
            q = text.find('"', q + 1);
            continue;
        }
        size_t gclose = text.find(')', paren + 1);
        if (gclose == std::string::npos) break;
        pairs.push_back({trim(text.substr(open + 1, q - open - 1)),
                         trim(text.substr(paren + 1, gclose - paren - 1))});
        open = std::string::npos;
        q = text.find('"', gclose + 1);
    }
    return pairs;
}

int parse_int_after(const std::string& text, const std::string& marker) {
    size_t pos = text.find(marker);
    if (pos == std::string::npos) {
        throw Error(ErrorKind::BadResponse, "prompt is missing '" + trim(marker) + "'");
    }
    pos += marker.size();
    size_t end = pos;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    if (end == pos) throw Error(ErrorKind::BadResponse, "no integer after '" + trim(marker) + "'");
    return std::stoi(text.substr(pos, end - pos));
}

// What the pair scanners recover for a rendered title: quotes embedded in
// the title re-anchor the scan, so only the suffix after the last embedded
// quote survives. Registration uses the same view, keeping oracle lookups
// consistent for titles like `"Great Performances" Cats (1998)`.
std::string scanner_view(const std::string& title) {
    size_t pos = title.rfind('"');
    if (pos == std::string::npos) return title;
    return trim(title.substr(pos + 1));
}

uint64_t history_key(const std::vector<std::string>& titles) {
    std::string key;
    for (const auto& t : titles) {
        key += t;
        key += '\x1f';
    }
    return fnv1a64(key);
}

// Stray instruction quotes can leave a junk leading pair; real history
// entries carry a genre and sit at the tail.
std::vector<std::string> history_titles(const std::vector<RawTrailPair>& pairs) {
    std::vector<std::string> titles;
    for (const auto& p : pairs) {
        if (!p.genre.empty() && p.item != "_" && p.item != "?") titles.push_back(p.item);
    }
    if (titles.size() > kHistoryLen) {
        titles.erase(titles.begin(), titles.end() - kHistoryLen);
    }
    return titles;
}

void validate_request(const GenerationRequest& request) {
    if (request.prompt.empty()) throw Error(ErrorKind::ConfigError, "empty prompt");
    if (request.max_new_tokens <= 0) {
        throw Error(ErrorKind::ConfigError, "max_new_tokens must be positive");
    }
}

std::string quote_join(const std::vector<std::string>& titles) {
    std::vector<std::string> quoted;
    quoted.reserve(titles.size());
    for (const auto& t : titles) quoted.push_back("\"" + t + "\"");
    return join(quoted, ", ");
}

} // namespace

std::vector<GenerationOutcome> TextBackend::batch_generate(
    const std::vector<GenerationRequest>& requests, int max_in_flight) const {
    if (max_in_flight < 1) throw Error(ErrorKind::ConfigError, "max_in_flight must be >= 1");
    std::vector<GenerationOutcome> results(requests.size());
    if (requests.empty()) return results;

    const size_t n_threads = std::min<size_t>(static_cast<size_t>(max_in_flight), requests.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= requests.size()) break;
            try {
                results[i] = {true, generate(requests[i]), ""};
            } catch (const std::exception& e) {
                results[i] = {false, "", e.what()};
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) {
        throw Error(ErrorKind::ConfigError, "remote backend needs an endpoint");
    }
}

std::string RemoteBackend::generate(const GenerationRequest& request) const {
    validate_request(request);
    nlohmann::json body;
    body["model"] = config_.model;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = 0.0; // greedy decoding
    body["max_tokens"] = request.max_new_tokens;
    const std::string payload = body.dump();

    std::unique_ptr<Error> last_error;
    for (int attempt = 0; attempt <= config_.retry.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.retry.backoff_ms << (attempt - 1)));
        }
        httplib::Client client(config_.endpoint);
        client.set_connection_timeout(config_.connect_timeout_s);
        client.set_read_timeout(config_.read_timeout_s);
        httplib::Headers headers;
        if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

        auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
        if (!res) {
            auto err = res.error();
            bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
            last_error = std::make_unique<Error>(
                timed_out ? ErrorKind::Timeout : ErrorKind::Transport,
                "request to " + config_.endpoint + " failed (" + httplib::to_string(err) + ")");
            continue; // retryable
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = std::make_unique<Error>(
                ErrorKind::Transport, "endpoint returned status " + std::to_string(res->status));
            continue; // retryable
        }
        if (res->status != 200) {
            throw Error(ErrorKind::BadResponse,
                        "endpoint returned status " + std::to_string(res->status));
        }
        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded()) throw Error(ErrorKind::BadResponse, "completion body is not JSON");
        if (!j.contains("choices") || j["choices"].empty() ||
            !j["choices"][0].contains("message") ||
            !j["choices"][0]["message"].contains("content")) {
            throw Error(ErrorKind::BadResponse, "completion body is missing choices[0].message.content");
        }
        return j["choices"][0]["message"]["content"].get<std::string>();
    }
    throw *last_error;
}

uint64_t prompt_hash(const std::string& prompt) { return fnv1a64(prompt); }

std::string prompt_hash_hex(const std::string& prompt) {
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(prompt_hash(prompt)));
    return buf;
}

RecordedBackend::RecordedBackend(const std::string& transcript_path) {
    std::ifstream in(transcript_path);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open transcript '" + transcript_path + "'");
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        TranscriptEntry entry{j.at("prompt").get<std::string>(),
                              j.at("completion").get<std::string>()};
        uint64_t h = std::stoull(j.at("prompt_hash").get<std::string>(), nullptr, 16);
        completions_[h] = std::move(entry);
    }
}

std::string RecordedBackend::generate(const GenerationRequest& request) const {
    validate_request(request);
    auto it = completions_.find(prompt_hash(request.prompt));
    if (it == completions_.end() || it->second.prompt != request.prompt) {
        throw Error(ErrorKind::UnknownSequence, "no recorded completion for prompt");
    }
    return it->second.completion;
}

void write_transcript(const std::vector<TranscriptEntry>& entries, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write transcript '" + path + "'");
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["prompt_hash"] = prompt_hash_hex(e.prompt);
        j["prompt"] = e.prompt;
        j["completion"] = e.completion;
        out << j.dump() << "\n";
    }
}

OracleBackend::OracleBackend(const ItemCatalog& catalog,
                             const std::vector<InteractionSequence>& corpus,
                             GenreDistribution genre_dist, ItemDistribution item_dist)
    : OracleBackend(catalog, corpus, std::move(genre_dist), std::move(item_dist), Options{}) {}

OracleBackend::OracleBackend(const ItemCatalog& catalog,
                             const std::vector<InteractionSequence>& corpus,
                             GenreDistribution genre_dist, ItemDistribution item_dist,
                             Options options)
    : catalog_(&catalog),
      genre_dist_(std::move(genre_dist)),
      item_dist_(std::move(item_dist)),
      options_(options),
      codec_(catalog.taxonomy()) {
    for (const auto& seq : corpus) {
        Truth truth;
        std::vector<std::string> titles;
        for (const auto& x : seq.history) {
            const Item& item = catalog.at(x.item_id);
            truth.history.push_back({item.title, item.primary_genre});
            titles.push_back(scanner_view(item.title));
        }
        for (const auto& x : seq.future) {
            const Item& item = catalog.at(x.item_id);
            truth.future.push_back({item.title, item.primary_genre});
        }
        by_history_.emplace(history_key(titles), std::move(truth)); // first wins
    }
}

const OracleBackend::Truth& OracleBackend::lookup(
    const std::vector<std::string>& history_titles) const {
    auto it = by_history_.find(history_key(history_titles));
    if (it == by_history_.end()) {
        throw Error(ErrorKind::UnknownSequence, "oracle has no ground truth for this history");
    }
    return it->second;
}

std::string OracleBackend::generate(const GenerationRequest& request) const {
    validate_request(request);
    const GenreTaxonomy& taxonomy = catalog_->taxonomy();
    Rng rng = Rng::derived(options_.seed, prompt_hash(request.prompt));

    switch (request.task) {
        case TaskKind::GP:
        case TaskKind::BigrecCotStage1: {
            int k = parse_int_after(request.prompt, "provide the ");
            const Truth& truth = lookup(history_titles(scan_paren_pairs(request.prompt)));

            std::vector<std::string> future_genres;
            for (const auto& e : truth.future) future_genres.push_back(e.genre);
            auto genres = distinct_by_frequency(future_genres);
            genres = codec_.pad_genres(std::move(genres), k, genre_dist_, rng);
            if (static_cast<int>(genres.size()) > k) genres.resize(static_cast<size_t>(k));

            if (options_.genre_error > 0.0) {
                const auto emitted = genres;
                std::vector<std::string> candidates;
                for (const auto& name : taxonomy.names) {
                    if (std::find(emitted.begin(), emitted.end(), name) == emitted.end()) {
                        candidates.push_back(name);
                    }
                }
                for (auto& g : genres) {
                    if (!candidates.empty() && rng.bernoulli(options_.genre_error)) {
                        g = candidates[rng.bounded(candidates.size())];
                    }
                }
            }
            return join(genres, ", ");
        }

        case TaskKind::GF: {
            size_t open = request.prompt.find("genres: [");
            size_t close = open == std::string::npos ? std::string::npos
                                                     : request.prompt.find(']', open);
            if (close == std::string::npos) {
                throw Error(ErrorKind::BadResponse, "GF prompt has no target genre list");
            }
            std::vector<std::string> targets;
            for (const auto& tok :
                 split(request.prompt.substr(open + 9, close - open - 9), ',')) {
                auto norm = normalize_genre(tok, taxonomy);
                if (norm) targets.push_back(*norm);
            }
            const Truth& truth = lookup(history_titles(scan_trail_pairs(request.prompt)));

            std::vector<std::string> slots;
            for (const auto& e : truth.future) slots.push_back(e.genre);
            slots = codec_.repair_gf(std::move(slots), targets).slots;

            // a trained filler uses every given genre: hand each missing
            // target one slot from the currently most-represented genre
            for (const auto& target : targets) {
                if (std::count(slots.begin(), slots.end(), target) > 0) continue;
                std::string donor;
                long donor_count = 0;
                for (const auto& g : slots) {
                    long c = std::count(slots.begin(), slots.end(), g);
                    if (c > donor_count || (c == donor_count && g < donor)) {
                        donor = g;
                        donor_count = c;
                    }
                }
                if (donor_count <= 1) break; // every genre is a sole carrier
                for (size_t i = slots.size(); i-- > 0;) {
                    if (slots[i] == donor) {
                        slots[i] = target;
                        break;
                    }
                }
            }

            if (options_.genre_error > 0.0) {
                for (auto& g : slots) {
                    if (rng.bernoulli(options_.genre_error)) {
                        std::vector<std::string> candidates;
                        for (const auto& name : taxonomy.names) {
                            if (name != g) candidates.push_back(name);
                        }
                        if (!candidates.empty()) g = candidates[rng.bounded(candidates.size())];
                    }
                }
            }
            return Trail::gf_output(truth.history, slots).render();
        }

        case TaskKind::IP: {
            auto pairs = scan_trail_pairs(request.prompt);
            std::vector<std::string> slot_genres;
            for (const auto& p : pairs) {
                if (p.item == "?") {
                    auto norm = normalize_genre(p.genre, taxonomy);
                    slot_genres.push_back(norm ? *norm : p.genre);
                }
            }
            if (slot_genres.size() != kFutureLen) {
                throw Error(ErrorKind::BadResponse, "IP prompt has no 10-slot genre trail");
            }
            const Truth& truth = lookup(history_titles(pairs));

            // fill each slot with an unused item of the slot's genre: the true
            // future item when one matches, otherwise the most popular
            // training item, otherwise any catalog item of that genre
            std::vector<TitledEntry> filled;
            std::vector<bool> truth_used(truth.future.size(), false);
            std::vector<std::string> used_titles;
            auto is_used = [&](const std::string& t) {
                return std::find(used_titles.begin(), used_titles.end(), t) != used_titles.end();
            };
            for (const auto& genre : slot_genres) {
                std::string title;
                for (size_t i = 0; i < truth.future.size(); ++i) {
                    if (!truth_used[i] && truth.future[i].genre == genre) {
                        truth_used[i] = true;
                        title = truth.future[i].title;
                        break;
                    }
                }
                if (title.empty()) {
                    if (const auto* entries = item_dist_.genre_entries(genre)) {
                        for (const auto& e : *entries) {
                            const std::string& t = catalog_->at(e.item_id).title;
                            if (!is_used(t)) {
                                title = t;
                                break;
                            }
                        }
                    }
                }
                if (title.empty()) {
                    for (const auto& item : catalog_->items()) {
                        if (item.primary_genre == genre && !is_used(item.title)) {
                            title = item.title;
                            break;
                        }
                    }
                }
                if (title.empty()) {
                    for (const auto& item : catalog_->items()) {
                        if (!is_used(item.title)) {
                            title = item.title;
                            break;
                        }
                    }
                }
                used_titles.push_back(title);
                filled.push_back({title, genre});
            }

            if (options_.item_error > 0.0 && catalog_->size() > 1) {
                for (auto& e : filled) {
                    if (rng.bernoulli(options_.item_error)) {
                        for (int guard = 0; guard < 64; ++guard) {
                            const Item& pick =
                                catalog_->items()[rng.bounded(catalog_->size())];
                            if (pick.title != e.title) {
                                e.title = pick.title;
                                break;
                            }
                        }
                    }
                }
            }
            return Trail::ip_output(truth.history, filled).render();
        }

        case TaskKind::BigrecDiv:
        case TaskKind::BigrecCotStage2: {
            const Truth& truth = lookup(history_titles(scan_paren_pairs(request.prompt)));

            std::vector<std::string> out;
            for (const auto& e : truth.future) out.push_back(e.title);
            if (options_.item_error > 0.0 && catalog_->size() > 1) {
                for (auto& t : out) {
                    if (rng.bernoulli(options_.item_error)) {
                        for (int guard = 0; guard < 64; ++guard) {
                            const Item& pick =
                                catalog_->items()[rng.bounded(catalog_->size())];
                            if (pick.title != t) {
                                t = pick.title;
                                break;
                            }
                        }
                    }
                }
            }
            return quote_join(out);
        }
    }
    throw Error(ErrorKind::BadResponse, "unsupported task");
}

std::unique_ptr<TextBackend> make_truth_oracle(const ItemCatalog& catalog,
                                               const std::vector<InteractionSequence>& corpus,
                                               GenreDistribution genre_dist,
                                               ItemDistribution item_dist) {
    return std::make_unique<OracleBackend>(catalog, corpus, std::move(genre_dist),
                                           std::move(item_dist));
}

std::unique_ptr<TextBackend> make_noisy_oracle(const ItemCatalog& catalog,
                                               const std::vector<InteractionSequence>& corpus,
                                               GenreDistribution genre_dist,
                                               ItemDistribution item_dist, double genre_error,
                                               double item_error, uint64_t seed) {
    OracleBackend::Options options;
    options.genre_error = genre_error;
    options.item_error = item_error;
    options.seed = seed;
    return std::make_unique<OracleBackend>(catalog, corpus, std::move(genre_dist),
                                           std::move(item_dist), options);
}

std::unique_ptr<TextBackend> make_backend(const BackendDescriptor& descriptor,
                                          const ItemCatalog* catalog,
                                          const std::vector<InteractionSequence>* corpus,
                                          const GenreDistribution* genre_dist,
                                          const ItemDistribution* item_dist) {
    if (descriptor.kind == "remote") {
        RemoteBackendConfig cfg;
        cfg.endpoint = descriptor.endpoint;
        cfg.api_key = descriptor.api_key;
        if (cfg.endpoint.empty()) {
            if (const char* env = std::getenv("DIVREC_ENDPOINT")) cfg.endpoint = env;
        }
        if (cfg.api_key.empty()) {
            if (const char* env = std::getenv("DIVREC_API_KEY")) cfg.api_key = env;
        }
        cfg.model = descriptor.model;
        cfg.retry.max_retries = descriptor.max_retries;
        cfg.retry.backoff_ms = descriptor.backoff_ms;
        return std::make_unique<RemoteBackend>(cfg);
    }
    if (descriptor.kind == "recorded") {
        return std::make_unique<RecordedBackend>(descriptor.transcript_path);
    }
    if (descriptor.kind == "oracle_truth" || descriptor.kind == "oracle_noisy") {
        if (!catalog || !corpus || !genre_dist || !item_dist) {
            throw Error(ErrorKind::ConfigError, "oracle backends need a catalog and a split");
        }
        if (descriptor.kind == "oracle_truth") {
            return make_truth_oracle(*catalog, *corpus, *genre_dist, *item_dist);
        }
        return make_noisy_oracle(*catalog, *corpus, *genre_dist, *item_dist,
                                 descriptor.genre_error, descriptor.item_error, descriptor.seed);
    }
    throw Error(ErrorKind::ConfigError, "unknown backend kind '" + descriptor.kind + "'");
}

} // namespace divrec
