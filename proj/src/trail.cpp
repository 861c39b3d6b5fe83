#include "divrec/trail.hpp"

#include "divrec/error.hpp"

namespace divrec {

namespace {

void append_history(Trail& trail, const std::vector<TitledEntry>& history) {
    for (const auto& e : history) {
        trail.slots.push_back({SlotToken::Known, e.title, SlotToken::Known, e.genre});
    }
}

} // namespace

Trail Trail::gf_input(const std::vector<TitledEntry>& history) {
    Trail trail;
    append_history(trail, history);
    for (size_t i = 0; i < kFutureLen; ++i) {
        trail.slots.push_back({SlotToken::Irrelevant, "", SlotToken::Hole, ""});
    }
    return trail;
}

Trail Trail::gf_output(const std::vector<TitledEntry>& history,
                       const std::vector<std::string>& future_genres) {
    Trail trail;
    append_history(trail, history);
    for (const auto& g : future_genres) {
        trail.slots.push_back({SlotToken::Irrelevant, "", SlotToken::Known, g});
    }
    return trail;
}

Trail Trail::ip_input(const std::vector<TitledEntry>& history,
                      const std::vector<std::string>& future_genres) {
    Trail trail;
    append_history(trail, history);
    for (const auto& g : future_genres) {
        trail.slots.push_back({SlotToken::Hole, "", SlotToken::Known, g});
    }
    return trail;
}

Trail Trail::ip_output(const std::vector<TitledEntry>& history,
                       const std::vector<TitledEntry>& future) {
    Trail trail;
    append_history(trail, history);
    append_history(trail, future);
    return trail;
}

std::string Trail::render() const {
    std::string out;
    for (size_t i = 0; i < slots.size(); ++i) {
        const TrailSlot& s = slots[i];
        if (i > 0) out += ", ";
        out += '"';
        switch (s.item_kind) {
            case SlotToken::Known: out += s.item; break;
            case SlotToken::Hole: out += '?'; break;
            case SlotToken::Irrelevant: out += '_'; break;
        }
        out += "\" '";
        switch (s.genre_kind) {
            case SlotToken::Known: out += s.genre; break;
            case SlotToken::Hole: out += '?'; break;
            case SlotToken::Irrelevant: out += '_'; break;
        }
        out += '\'';
    }
    return out;
}

} // namespace divrec
