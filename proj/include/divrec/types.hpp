#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace divrec {

constexpr size_t kHistoryLen = 10;
constexpr size_t kFutureLen = 10;
constexpr size_t kSequenceLen = kHistoryLen + kFutureLen;
constexpr int kListSize = 10; // K in the @K metrics

struct Item {
    std::string item_id;
    std::string title;                // year suffix retained as-is
    std::vector<std::string> genres;  // ordered as listed in the source file
    std::string primary_genre;        // first listed genre
};

struct Interaction {
    std::string user_id;
    std::string item_id;
    double value = 0.0; // rating or playtime hours
    int64_t timestamp = 0;
};

struct InteractionSequence {
    std::string user_id;
    std::vector<Interaction> history; // exactly kHistoryLen
    std::vector<Interaction> future;  // exactly kFutureLen
};

struct DatasetSplit {
    std::vector<InteractionSequence> train;
    std::vector<InteractionSequence> validation;
    std::vector<InteractionSequence> test;
};

struct GenreTaxonomy {
    std::vector<std::string> names;                 // insertion order from the catalog
    std::map<std::string, int64_t> train_frequency; // counts over training-set future slots

    bool contains(const std::string& name) const {
        for (const auto& n : names)
            if (n == name) return true;
        return false;
    }
    size_t size() const { return names.size(); }
};

} // namespace divrec
