#include "divrec/prompt_codec.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "divrec/error.hpp"
#include "divrec/strings.hpp"

namespace divrec {

namespace {

const char* kGpInstruction =
    "Given a list of movies and their corresponding genres the user has watched before, please "
    "provide the {k} most likely genres in the future recommendation list. Output the genres "
    "only, without movie names, explanations, or numbers. The output format is \"Genre1, "
    "Genre2, ..., Genre{k}\".";

const char* kGpInputPrefix =
    "The user has watched the following movies with their corresponding genres in \"()\" before: ";

const char* kGfInstruction =
    "Below is a user's interaction trail of movies he likes. Each movie is in double quotes "
    "\"\", followed by its genre in single quotes ''. Your task is to fill in the genre "
    "placeholders represented by \"?\" with the following genres: [{genres}]. The \"_\" "
    "represents placeholder tokens that you should not consider. The output should maintain "
    "the same format as the input.";

const char* kIpInstruction =
    "Below is a user's interaction trail of movies he likes. Each movie is in double quotes "
    "\"\", followed by its genre in single quotes ''. Your task is to fill in the movie "
    "placeholders represented by \"?\". The \"_\" represents placeholder tokens that you "
    "should not consider. The output should maintain the same format as the input.";

const char* kDivInstruction =
    "Given a list of movies and their corresponding genres the user has watched before, please "
    "recommend 10 movies the user may watch next, covering exactly {k} different genres. "
    "Output the movie titles only, without genres, explanations, or numbers. The output format "
    "is \"Movie1\", \"Movie2\", ..., \"Movie10\".";

const char* kCot1Instruction =
    "Given a list of movies and their corresponding genres the user has watched before, think "
    "step by step about the user's genre preferences. First, please provide the {k} genres "
    "that the future recommendation list should cover. Output the genres only, without movie "
    "names, explanations, or numbers. The output format is \"Genre1, Genre2, ..., Genre{k}\".";

const char* kCot2Instruction =
    "Given a list of movies and their corresponding genres the user has watched before, please "
    "recommend 10 movies the user may watch next that together cover the following genres: "
    "[{genres}]. Output the movie titles only, without genres, explanations, or numbers. The "
    "output format is \"Movie1\", \"Movie2\", ..., \"Movie10\".";

std::string substitute(std::string text, std::string_view key, const std::string& value) {
    return replace_all(std::move(text), key, value);
}

std::string quote_titles(const std::vector<TitledEntry>& entries) {
    std::vector<std::string> quoted;
    quoted.reserve(entries.size());
    for (const auto& e : entries) quoted.push_back("\"" + e.title + "\"");
    return join(quoted, ", ");
}

void require_history(const std::vector<TitledEntry>& history) {
    if (history.size() != kHistoryLen) {
        throw std::invalid_argument("history must have exactly 10 entries");
    }
}

std::string strip_wrapping(std::string s) {
    s = trim(s);
    while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                             (s.front() == '\'' && s.back() == '\''))) {
        s = trim(s.substr(1, s.size() - 2));
    }
    while (!s.empty() && (s.back() == '.' || s.back() == ';')) s.pop_back();
    return trim(s);
}

} // namespace

const char* to_string(TaskKind task) {
    switch (task) {
        case TaskKind::GP: return "GP";
        case TaskKind::GF: return "GF";
        case TaskKind::IP: return "IP";
        case TaskKind::BigrecDiv: return "BIGREC_DIV";
        case TaskKind::BigrecCotStage1: return "BIGREC_COT_STAGE1";
        case TaskKind::BigrecCotStage2: return "BIGREC_COT_STAGE2";
    }
    return "GP";
}

TaskKind task_from_string(const std::string& tag) {
    if (tag == "GP") return TaskKind::GP;
    if (tag == "GF") return TaskKind::GF;
    if (tag == "IP") return TaskKind::IP;
    if (tag == "BIGREC_DIV") return TaskKind::BigrecDiv;
    if (tag == "BIGREC_COT_STAGE1") return TaskKind::BigrecCotStage1;
    if (tag == "BIGREC_COT_STAGE2") return TaskKind::BigrecCotStage2;
    throw Error(ErrorKind::ConfigError, "unknown task '" + tag + "'");
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.gp_instruction = kGpInstruction;
    t.gp_input_prefix = kGpInputPrefix;
    t.gf_instruction = kGfInstruction;
    t.ip_instruction = kIpInstruction;
    t.div_instruction = kDivInstruction;
    t.cot1_instruction = kCot1Instruction;
    t.cot2_instruction = kCot2Instruction;
    return t;
}

namespace {

const std::vector<std::pair<const char*, std::string PromptTemplates::*>>& template_fields() {
    static const std::vector<std::pair<const char*, std::string PromptTemplates::*>> fields = {
        {"gp_instruction", &PromptTemplates::gp_instruction},
        {"gp_input_prefix", &PromptTemplates::gp_input_prefix},
        {"gf_instruction", &PromptTemplates::gf_instruction},
        {"ip_instruction", &PromptTemplates::ip_instruction},
        {"div_instruction", &PromptTemplates::div_instruction},
        {"cot1_instruction", &PromptTemplates::cot1_instruction},
        {"cot2_instruction", &PromptTemplates::cot2_instruction},
    };
    return fields;
}

} // namespace

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
    PromptTemplates t;
    for (const auto& [name, member] : template_fields()) {
        std::ifstream in(dir + "/" + name + ".txt", std::ios::binary);
        if (!in) throw Error(ErrorKind::IoFailure, std::string("missing template ") + name);
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        if (!text.empty() && text.back() == '\n') text.pop_back();
        t.*member = std::move(text);
    }
    return t;
}

void PromptTemplates::save_dir(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, member] : template_fields()) {
        std::ofstream out(dir + "/" + name + ".txt", std::ios::binary);
        if (!out) throw Error(ErrorKind::IoFailure, std::string("cannot write template ") + name);
        out << this->*member << "\n";
    }
}

std::string PromptTemplates::version() const {
    std::string all;
    for (const auto& [name, member] : template_fields()) {
        all += name;
        all += '\x1f';
        all += this->*member;
        all += '\x1e';
    }
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(all)));
    return buf;
}

std::vector<RawTrailPair> scan_trail_pairs(const std::string& text) {
    std::vector<RawTrailPair> pairs;
    const size_t n = text.size();
    auto skip_ws = [&](size_t p) {
        while (p < n && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
        return p;
    };

    // walk the double quotes left to right, keeping the latest one as the
    // candidate opener; stray quotes in the instruction text re-anchor
    // instead of swallowing everything up to the first real title
    size_t open = std::string::npos;
    size_t q = text.find('"');
    while (q != std::string::npos) {
        if (open == std::string::npos) {
            open = q;
            q = text.find('"', q + 1);
            continue;
        }
        size_t tick = skip_ws(q + 1);
        if (tick >= n || text[tick] != '\'') {
            open = q; // not a closer; re-anchor
            q = text.find('"', q + 1);
            continue;
        }

        // closing '\'' is one followed by a separator, so genres like
        // "Children's" survive
        size_t gclose = std::string::npos;
        for (size_t j = tick + 1; j < n;) {
            j = text.find('\'', j);
            if (j == std::string::npos) break;
            size_t p = skip_ws(j + 1);
            if (p >= n || text[p] == ',' || text[p] == '"' || text[p] == '.') {
                gclose = j;
                break;
            }
            ++j;
        }
        if (gclose == std::string::npos) break;

        pairs.push_back({trim(text.substr(open + 1, q - open - 1)),
                         trim(text.substr(tick + 1, gclose - tick - 1))});
        open = std::string::npos;
        q = text.find('"', gclose + 1);
    }
    return pairs;
}

std::optional<std::string> normalize_genre(const std::string& token, const GenreTaxonomy& taxonomy) {
    std::string t = strip_wrapping(token);
    if (t.empty()) return std::nullopt;
    std::string lower = to_lower(t);

    for (const auto& name : taxonomy.names) {
        if (to_lower(name) == lower) return name;
    }
    for (const auto& name : taxonomy.names) {
        if (edit_distance_capped(lower, to_lower(name), 1) <= 1) return name;
    }
    return std::nullopt;
}

RenderedPrompt PromptCodec::render_gp(const std::vector<TitledEntry>& history, int k) const {
    require_history(history);
    const int k_max = static_cast<int>(std::min<size_t>(kListSize, taxonomy_->size()));
    if (k < 1 || k > k_max) {
        throw Error(ErrorKind::KOutOfRange,
                    "k=" + std::to_string(k) + " outside [1, " + std::to_string(k_max) + "]");
    }
    RenderedPrompt p;
    p.instruction = substitute(templates_.gp_instruction, "{k}", std::to_string(k));
    std::vector<std::string> entries;
    entries.reserve(history.size());
    for (const auto& e : history) entries.push_back("\"" + e.title + "\" (" + e.genre + ")");
    p.input = templates_.gp_input_prefix + join(entries, ", ") + ".";
    return p;
}

RenderedPrompt PromptCodec::render_gf(const std::vector<TitledEntry>& history,
                                      const std::vector<std::string>& target_genres) const {
    require_history(history);
    if (target_genres.empty()) throw Error(ErrorKind::EmptyTargets, "no target genres");
    RenderedPrompt p;
    p.instruction = substitute(templates_.gf_instruction, "{genres}", join(target_genres, ", "));
    p.input = Trail::gf_input(history).render();
    return p;
}

RenderedPrompt PromptCodec::render_ip(const std::vector<TitledEntry>& history,
                                      const std::vector<std::string>& future_genres) const {
    require_history(history);
    if (future_genres.size() != kFutureLen) {
        throw Error(ErrorKind::WrongGenreCount,
                    "need exactly 10 future genres, got " + std::to_string(future_genres.size()));
    }
    RenderedPrompt p;
    p.instruction = templates_.ip_instruction;
    p.input = Trail::ip_input(history, future_genres).render();
    return p;
}

RenderedPrompt PromptCodec::render_baseline(TaskKind kind, const std::vector<TitledEntry>& history,
                                            int k, const std::vector<std::string>& genres) const {
    require_history(history);
    RenderedPrompt p;
    switch (kind) {
        case TaskKind::BigrecDiv:
        case TaskKind::BigrecCotStage1: {
            const int k_max = static_cast<int>(std::min<size_t>(kListSize, taxonomy_->size()));
            if (k < 1 || k > k_max) {
                throw Error(ErrorKind::KOutOfRange, "k=" + std::to_string(k));
            }
            const std::string& tpl = kind == TaskKind::BigrecDiv ? templates_.div_instruction
                                                                 : templates_.cot1_instruction;
            p.instruction = substitute(tpl, "{k}", std::to_string(k));
            break;
        }
        case TaskKind::BigrecCotStage2: {
            if (genres.empty()) throw Error(ErrorKind::EmptyTargets, "no genres for CoT stage 2");
            p.instruction = substitute(templates_.cot2_instruction, "{genres}", join(genres, ", "));
            break;
        }
        default:
            throw Error(ErrorKind::ConfigError, "render_baseline called with a non-baseline task");
    }
    std::vector<std::string> entries;
    entries.reserve(history.size());
    for (const auto& e : history) entries.push_back("\"" + e.title + "\" (" + e.genre + ")");
    p.input = templates_.gp_input_prefix + join(entries, ", ") + ".";
    return p;
}

std::vector<std::string> PromptCodec::parse_gp(const std::string& text, int k) const {
    std::string flat = text;
    std::replace(flat.begin(), flat.end(), '\n', ',');
    std::vector<std::string> out;
    for (const auto& token : split(flat, ',')) {
        auto norm = normalize_genre(token, *taxonomy_);
        if (!norm) continue;
        if (std::find(out.begin(), out.end(), *norm) == out.end()) out.push_back(*norm);
    }
    if (out.empty()) {
        throw Error(ErrorKind::NoRecognizableGenre, "no taxonomy genre in completion");
    }
    if (static_cast<int>(out.size()) > k) out.resize(static_cast<size_t>(k));
    return out;
}

std::vector<std::string> PromptCodec::parse_gf(const std::string& text) const {
    auto pairs = scan_trail_pairs(text);
    std::vector<std::string> tokens;
    for (const auto& p : pairs) {
        if (p.item == "_") tokens.push_back(p.genre);
    }
    if (tokens.size() < kFutureLen) {
        // fall back to the trailing pairs when the model also filled item slots
        if (pairs.size() >= kFutureLen) {
            tokens.clear();
            for (size_t i = pairs.size() - kFutureLen; i < pairs.size(); ++i) {
                tokens.push_back(pairs[i].genre);
            }
        } else {
            throw Error(ErrorKind::TrailMismatch,
                        "found " + std::to_string(tokens.size()) + " future genre tokens");
        }
    }
    if (tokens.size() > kFutureLen) {
        tokens.erase(tokens.begin(), tokens.end() - kFutureLen);
    }
    std::vector<std::string> out;
    out.reserve(kFutureLen);
    for (const auto& token : tokens) {
        auto norm = normalize_genre(token, *taxonomy_);
        out.push_back(norm ? *norm : token);
    }
    return out;
}

std::vector<ParsedSlot> PromptCodec::parse_ip(const std::string& text) const {
    auto pairs = scan_trail_pairs(text);
    if (pairs.size() < kFutureLen) {
        throw Error(ErrorKind::TrailMismatch,
                    "found " + std::to_string(pairs.size()) + " trail pairs, need 10");
    }
    std::vector<ParsedSlot> out;
    out.reserve(kFutureLen);
    for (size_t i = pairs.size() - kFutureLen; i < pairs.size(); ++i) {
        auto norm = normalize_genre(pairs[i].genre, *taxonomy_);
        out.push_back({pairs[i].item, norm ? *norm : pairs[i].genre});
    }
    return out;
}

std::vector<std::string> PromptCodec::parse_title_list(const std::string& text) const {
    std::vector<std::string> titles;
    size_t i = 0;
    while (true) {
        size_t open = text.find('"', i);
        if (open == std::string::npos) break;
        size_t close = text.find('"', open + 1);
        if (close == std::string::npos) break;
        std::string t = trim(text.substr(open + 1, close - open - 1));
        if (!t.empty()) titles.push_back(std::move(t));
        i = close + 1;
    }
    if (!titles.empty()) return titles;

    std::string flat = text;
    std::replace(flat.begin(), flat.end(), '\n', ',');
    for (const auto& token : split(flat, ',')) {
        std::string t = strip_wrapping(token);
        if (!t.empty()) titles.push_back(std::move(t));
    }
    return titles;
}

std::vector<std::string> PromptCodec::pad_genres(std::vector<std::string> genres, int k,
                                                 const GenreDistribution& dist, Rng& rng) const {
    auto contains = [&](const std::string& g) {
        return std::find(genres.begin(), genres.end(), g) != genres.end();
    };
    while (static_cast<int>(genres.size()) < k) {
        std::vector<std::string> pool;
        std::vector<double> weights;
        for (size_t i = 0; i < dist.genres.size(); ++i) {
            if (dist.counts[i] > 0 && !contains(dist.genres[i])) {
                pool.push_back(dist.genres[i]);
                weights.push_back(static_cast<double>(dist.counts[i]));
            }
        }
        if (pool.empty()) {
            // training distribution exhausted; fall back to unseen taxonomy names
            for (const auto& name : taxonomy_->names) {
                if (!contains(name)) {
                    pool.push_back(name);
                    weights.push_back(1.0);
                }
            }
        }
        if (pool.empty()) break; // taxonomy itself exhausted
        genres.push_back(pool[rng.weighted(weights)]);
    }
    if (static_cast<int>(genres.size()) > k) genres.resize(static_cast<size_t>(k));
    return genres;
}

PromptCodec::GfRepair PromptCodec::repair_gf(std::vector<std::string> slots,
                                             const std::vector<std::string>& targets) const {
    if (targets.empty()) throw Error(ErrorKind::EmptyTargets, "no target genres");
    auto is_target = [&](const std::string& g) {
        return std::find(targets.begin(), targets.end(), g) != targets.end();
    };
    auto count_of = [&](const std::string& t) {
        return std::count(slots.begin(), slots.end(), t);
    };
    for (auto& slot : slots) {
        if (is_target(slot)) continue;
        const std::string* best = nullptr;
        long best_count = 0;
        for (const auto& t : targets) {
            long c = count_of(t);
            if (!best || c < best_count) {
                best = &t;
                best_count = c;
            }
        }
        slot = *best;
    }
    bool covered = true;
    for (const auto& t : targets) {
        if (count_of(t) == 0) covered = false;
    }
    return {std::move(slots), covered};
}

InstructionSample PromptCodec::gp_sample(const std::vector<TitledEntry>& history,
                                         const std::vector<std::string>& future_genres) const {
    std::vector<std::string> distinct;
    for (const auto& g : future_genres) {
        if (std::find(distinct.begin(), distinct.end(), g) == distinct.end()) distinct.push_back(g);
    }
    auto p = render_gp(history, static_cast<int>(distinct.size()));
    return {p.instruction, p.input, join(distinct, ", "), TaskKind::GP};
}

InstructionSample PromptCodec::gf_sample(const std::vector<TitledEntry>& history,
                                         const std::vector<std::string>& target_genres,
                                         const std::vector<std::string>& future_genres) const {
    auto p = render_gf(history, target_genres);
    return {p.instruction, p.input, Trail::gf_output(history, future_genres).render(), TaskKind::GF};
}

InstructionSample PromptCodec::ip_sample(const std::vector<TitledEntry>& history,
                                         const std::vector<TitledEntry>& future) const {
    std::vector<std::string> future_genres;
    future_genres.reserve(future.size());
    for (const auto& e : future) future_genres.push_back(e.genre);
    auto p = render_ip(history, future_genres);
    return {p.instruction, p.input, Trail::ip_output(history, future).render(), TaskKind::IP};
}

InstructionSample PromptCodec::baseline_sample(TaskKind kind, const std::vector<TitledEntry>& history,
                                               int k, const std::vector<std::string>& genres,
                                               const std::vector<TitledEntry>& future) const {
    auto p = render_baseline(kind, history, k, genres);
    std::string output;
    if (kind == TaskKind::BigrecCotStage1) {
        output = join(genres, ", ");
    } else {
        output = quote_titles(future);
    }
    return {p.instruction, p.input, output, kind};
}

size_t export_sft(const std::vector<InstructionSample>& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path + "'");
    size_t count = 0;
    for (const auto& s : samples) {
        nlohmann::ordered_json j;
        j["instruction"] = s.instruction;
        j["input"] = s.input;
        j["output"] = s.output;
        out << j.dump() << "\n";
        ++count;
    }
    if (!out) throw Error(ErrorKind::IoFailure, "short write to '" + path + "'");
    return count;
}

std::vector<InstructionSample> import_sft(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "'");
    std::vector<InstructionSample> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        out.push_back({j.at("instruction").get<std::string>(), j.at("input").get<std::string>(),
                       j.at("output").get<std::string>(), TaskKind::GP});
    }
    return out;
}

} // namespace divrec
