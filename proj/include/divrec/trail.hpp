#pragma once

#include <string>
#include <vector>

#include "divrec/types.hpp"

namespace divrec {

// One rendered interaction entry: an item title paired with the genre shown
// next to it in the prompt.
struct TitledEntry {
    std::string title;
    std::string genre;
};

enum class SlotToken { Known, Hole, Irrelevant };

struct TrailSlot {
    SlotToken item_kind = SlotToken::Known;
    std::string item; // title when Known
    SlotToken genre_kind = SlotToken::Known;
    std::string genre; // name when Known
};

// The 20-slot constrained format shared by the GF and IP prompts. History
// slots never contain holes; `?` marks predict-me tokens, `_` ignore-me ones.
struct Trail {
    std::vector<TrailSlot> slots;

    // history fully known, future items `_`, future genres `?`
    static Trail gf_input(const std::vector<TitledEntry>& history);
    // history fully known, future items `_`, future genres filled
    static Trail gf_output(const std::vector<TitledEntry>& history,
                           const std::vector<std::string>& future_genres);
    // history fully known, future items `?`, future genres filled
    static Trail ip_input(const std::vector<TitledEntry>& history,
                          const std::vector<std::string>& future_genres);
    // everything known
    static Trail ip_output(const std::vector<TitledEntry>& history,
                           const std::vector<TitledEntry>& future);

    std::string render() const;
};

} // namespace divrec
