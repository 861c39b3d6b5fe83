#include "divrec/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "divrec/error.hpp"
#include "divrec/rng.hpp"
#include "divrec/strings.hpp"

namespace divrec {

namespace {

constexpr double kPositiveThreshold = 3.0; // stars or hours, strict

Interaction parse_interaction_fields(const std::string& user, const std::string& item,
                                     const std::string& value, const std::string& ts, size_t row) {
    Interaction x;
    x.user_id = trim(user);
    x.item_id = trim(item);
    try {
        x.value = std::stod(value);
        x.timestamp = std::stoll(ts);
    } catch (const std::exception&) {
        throw Error(ErrorKind::MalformedRow, "row " + std::to_string(row) + ": bad number");
    }
    if (x.user_id.empty() || x.item_id.empty()) {
        throw Error(ErrorKind::MalformedRow, "row " + std::to_string(row) + ": empty id");
    }
    return x;
}

} // namespace

InteractionFormat interaction_format_from_string(const std::string& tag) {
    if (tag == "csv") return InteractionFormat::Csv;
    if (tag == "movielens") return InteractionFormat::MovieLens;
    if (tag == "steam" || tag == "jsonl") return InteractionFormat::SteamJsonl;
    throw Error(ErrorKind::ConfigError, "unknown interaction format '" + tag + "'");
}

PositivePolicy positive_policy_from_string(const std::string& tag) {
    if (tag == "rating") return PositivePolicy::RatingThreshold;
    if (tag == "playtime") return PositivePolicy::PlaytimeThreshold;
    throw Error(ErrorKind::ConfigError, "unknown positivity policy '" + tag + "'");
}

std::vector<Interaction> load_interactions(const std::string& path, InteractionFormat format) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open interactions file '" + path + "'");

    std::vector<Interaction> out;
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        switch (format) {
            case InteractionFormat::Csv: {
                if (row == 1 && line == "user_id,item_id,value,timestamp") continue;
                auto f = split_csv_row(line);
                if (f.size() != 4) {
                    throw Error(ErrorKind::MalformedRow,
                                "row " + std::to_string(row) + ": expected 4 CSV fields");
                }
                out.push_back(parse_interaction_fields(f[0], f[1], f[2], f[3], row));
                break;
            }
            case InteractionFormat::MovieLens: {
                // UserID::MovieID::Rating::Timestamp
                auto parts = split_str(line, "::");
                if (parts.size() != 4) {
                    throw Error(ErrorKind::MalformedRow,
                                "row " + std::to_string(row) + ": expected '::'-delimited quad");
                }
                out.push_back(parse_interaction_fields(parts[0], parts[1], parts[2], parts[3], row));
                break;
            }
            case InteractionFormat::SteamJsonl: {
                nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
                if (j.is_discarded() || !j.is_object()) {
                    throw Error(ErrorKind::MalformedRow, "row " + std::to_string(row) + ": bad JSON");
                }
                Interaction x;
                x.user_id = j.value("user_id", "");
                x.item_id = j.value("item_id", "");
                x.value = j.value("value", 0.0);
                x.timestamp = j.value("timestamp", int64_t{0});
                if (x.user_id.empty() || x.item_id.empty()) {
                    throw Error(ErrorKind::MalformedRow, "row " + std::to_string(row) + ": empty id");
                }
                out.push_back(std::move(x));
                break;
            }
        }
    }
    return out;
}

std::vector<Interaction> filter_positive(const std::vector<Interaction>& interactions,
                                         PositivePolicy /*policy*/) {
    // Both policies keep value strictly above 3 (stars / hours).
    std::vector<Interaction> out;
    out.reserve(interactions.size());
    for (const auto& x : interactions) {
        if (x.value > kPositiveThreshold) out.push_back(x);
    }
    return out;
}

std::vector<InteractionSequence> build_sequences(const std::vector<Interaction>& interactions) {
    // Group by user, preserving first-appearance order of users.
    std::vector<std::string> user_order;
    std::map<std::string, std::vector<Interaction>> by_user;
    for (const auto& x : interactions) {
        auto [it, inserted] = by_user.try_emplace(x.user_id);
        if (inserted) user_order.push_back(x.user_id);
        it->second.push_back(x);
    }

    std::vector<InteractionSequence> sequences;
    for (const auto& user : user_order) {
        auto& list = by_user[user];
        std::stable_sort(list.begin(), list.end(),
                         [](const Interaction& a, const Interaction& b) {
                             return a.timestamp < b.timestamp;
                         });
        if (list.size() < kSequenceLen) continue;
        for (size_t start = 0; start + kSequenceLen <= list.size(); ++start) {
            InteractionSequence seq;
            seq.user_id = user;
            seq.history.assign(list.begin() + start, list.begin() + start + kHistoryLen);
            seq.future.assign(list.begin() + start + kHistoryLen,
                              list.begin() + start + kSequenceLen);
            sequences.push_back(std::move(seq));
        }
    }
    return sequences;
}

DatasetSplit split_and_sample(std::vector<InteractionSequence> sequences, const SplitParams& params) {
    std::stable_sort(sequences.begin(), sequences.end(),
                     [](const InteractionSequence& a, const InteractionSequence& b) {
                         int64_t ta = a.future.back().timestamp;
                         int64_t tb = b.future.back().timestamp;
                         if (ta != tb) return ta < tb;
                         if (a.user_id != b.user_id) return a.user_id < b.user_id;
                         return a.history.front().timestamp < b.history.front().timestamp;
                     });

    const size_t n = sequences.size();
    const size_t total_parts = params.train_parts + params.validation_parts + params.test_parts;
    const size_t n_train = n * params.train_parts / total_parts;
    const size_t n_val = n * params.validation_parts / total_parts;

    auto sample = [&](std::vector<InteractionSequence> part, const char* label) {
        if (part.size() <= params.n_per_split) return part;
        Rng rng = Rng::derived(params.seed, label);
        auto idx = rng.sample_indices(part.size(), params.n_per_split);
        std::sort(idx.begin(), idx.end()); // keep chronological order
        std::vector<InteractionSequence> out;
        out.reserve(idx.size());
        for (size_t i : idx) out.push_back(std::move(part[i]));
        return out;
    };

    DatasetSplit split;
    split.train = sample({sequences.begin(), sequences.begin() + n_train}, "train");
    split.validation =
        sample({sequences.begin() + n_train, sequences.begin() + n_train + n_val}, "validation");
    split.test = sample({sequences.begin() + n_train + n_val, sequences.end()}, "test");
    return split;
}

double GenreDistribution::prob_of(const std::string& genre) const {
    for (size_t i = 0; i < genres.size(); ++i)
        if (genres[i] == genre) return probs[i];
    return 0.0;
}

int64_t GenreDistribution::count_of(const std::string& genre) const {
    for (size_t i = 0; i < genres.size(); ++i)
        if (genres[i] == genre) return counts[i];
    return 0;
}

const std::vector<ItemDistribution::Entry>* ItemDistribution::genre_entries(
    const std::string& genre) const {
    auto it = per_genre.find(genre);
    return it == per_genre.end() ? nullptr : &it->second;
}

GenreDistribution genre_distribution(const std::vector<InteractionSequence>& train,
                                     const ItemCatalog& catalog, GenreTaxonomy& taxonomy) {
    if (train.empty()) throw Error(ErrorKind::EmptyTrainSplit, "training split is empty");

    std::map<std::string, int64_t> counts;
    int64_t total = 0;
    for (const auto& seq : train) {
        for (const auto& x : seq.future) {
            ++counts[catalog.primary_genre(x.item_id)];
            ++total;
        }
    }

    GenreDistribution dist;
    for (const auto& name : taxonomy.names) {
        int64_t c = counts.count(name) ? counts[name] : 0;
        dist.genres.push_back(name);
        dist.counts.push_back(c);
        dist.probs.push_back(static_cast<double>(c) / static_cast<double>(total));
        taxonomy.train_frequency[name] = c;
    }
    return dist;
}

ItemDistribution item_distribution(const std::vector<InteractionSequence>& train,
                                   const ItemCatalog& catalog) {
    if (train.empty()) throw Error(ErrorKind::EmptyTrainSplit, "training split is empty");

    std::map<std::string, std::map<std::string, int64_t>> counts; // genre -> item -> count
    for (const auto& seq : train) {
        for (const auto& x : seq.future) {
            ++counts[catalog.primary_genre(x.item_id)][x.item_id];
        }
    }

    ItemDistribution dist;
    for (auto& [genre, item_counts] : counts) {
        int64_t total = 0;
        for (const auto& [id, c] : item_counts) total += c;
        std::vector<ItemDistribution::Entry> entries;
        entries.reserve(item_counts.size());
        for (const auto& [id, c] : item_counts) {
            entries.push_back({id, c, static_cast<double>(c) / static_cast<double>(total)});
        }
        std::sort(entries.begin(), entries.end(),
                  [](const ItemDistribution::Entry& a, const ItemDistribution::Entry& b) {
                      if (a.count != b.count) return a.count > b.count;
                      return a.item_id < b.item_id;
                  });
        dist.per_genre.emplace(genre, std::move(entries));
    }
    return dist;
}

void save_sequences(const std::vector<InteractionSequence>& sequences, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path + "'");
    for (const auto& seq : sequences) {
        nlohmann::json j;
        j["user_id"] = seq.user_id;
        auto dump_side = [](const std::vector<Interaction>& side) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& x : side) arr.push_back({{"item_id", x.item_id}, {"ts", x.timestamp}});
            return arr;
        };
        j["history"] = dump_side(seq.history);
        j["future"] = dump_side(seq.future);
        out << j.dump() << "\n";
    }
}

std::vector<InteractionSequence> load_sequences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "'");
    std::vector<InteractionSequence> out;
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(ErrorKind::MalformedRow, "row " + std::to_string(row) + ": bad JSON");
        }
        InteractionSequence seq;
        seq.user_id = j.value("user_id", "");
        auto load_side = [&](const char* key, std::vector<Interaction>& side) {
            for (const auto& e : j.at(key)) {
                Interaction x;
                x.user_id = seq.user_id;
                x.item_id = e.at("item_id").get<std::string>();
                x.timestamp = e.at("ts").get<int64_t>();
                side.push_back(std::move(x));
            }
        };
        load_side("history", seq.history);
        load_side("future", seq.future);
        if (seq.history.size() != kHistoryLen || seq.future.size() != kFutureLen) {
            throw Error(ErrorKind::MalformedRow,
                        "row " + std::to_string(row) + ": sequence is not 10+10");
        }
        out.push_back(std::move(seq));
    }
    return out;
}

void save_split(const DatasetSplit& split, const std::string& dir) {
    std::filesystem::create_directories(dir);
    save_sequences(split.train, dir + "/train.jsonl");
    save_sequences(split.validation, dir + "/validation.jsonl");
    save_sequences(split.test, dir + "/test.jsonl");
}

DatasetSplit load_split(const std::string& dir) {
    DatasetSplit split;
    split.train = load_sequences(dir + "/train.jsonl");
    split.validation = load_sequences(dir + "/validation.jsonl");
    split.test = load_sequences(dir + "/test.jsonl");
    return split;
}

} // namespace divrec
