#include "divrec/catalog.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "divrec/error.hpp"
#include "divrec/strings.hpp"

namespace divrec {

namespace {

Item make_item(std::string id, std::string title, std::vector<std::string> genres, size_t row) {
    Item item;
    item.item_id = std::move(id);
    item.title = std::move(title);
    for (auto& g : genres) {
        g = trim(g);
        if (!g.empty()) item.genres.push_back(g);
    }
    if (item.item_id.empty() || item.title.empty() || item.genres.empty()) {
        throw Error(ErrorKind::MalformedRow,
                    "row " + std::to_string(row) + ": need id, title and at least one genre");
    }
    item.primary_genre = item.genres.front();
    return item;
}

} // namespace

CatalogFormat catalog_format_from_string(const std::string& tag) {
    if (tag == "csv") return CatalogFormat::Csv;
    if (tag == "movielens") return CatalogFormat::MovieLens;
    if (tag == "steam" || tag == "jsonl") return CatalogFormat::SteamJsonl;
    throw Error(ErrorKind::ConfigError, "unknown catalog format '" + tag + "'");
}

ItemCatalog::ItemCatalog(std::vector<Item> items) : items_(std::move(items)) {
    std::set<std::string> seen_genres;
    for (size_t i = 0; i < items_.size(); ++i) {
        const Item& item = items_[i];
        if (!by_id_.emplace(item.item_id, i).second) {
            throw Error(ErrorKind::MalformedRow, "duplicate item_id '" + item.item_id + "'");
        }
        by_title_.emplace(item.title, i);
        for (const auto& g : item.genres) {
            if (seen_genres.insert(g).second) taxonomy_.names.push_back(g);
        }
    }
}

const Item* ItemCatalog::find(const std::string& item_id) const {
    auto it = by_id_.find(item_id);
    return it == by_id_.end() ? nullptr : &items_[it->second];
}

const Item& ItemCatalog::at(const std::string& item_id) const {
    const Item* item = find(item_id);
    if (!item) throw Error(ErrorKind::UnknownItem, "item_id '" + item_id + "' not in catalog");
    return *item;
}

const Item* ItemCatalog::find_by_title(const std::string& title) const {
    auto it = by_title_.find(title);
    return it == by_title_.end() ? nullptr : &items_[it->second];
}

const std::string& ItemCatalog::primary_genre(const std::string& item_id) const {
    return at(item_id).primary_genre;
}

ItemCatalog load_catalog(const std::string& path, CatalogFormat format) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open catalog file '" + path + "'");

    std::vector<Item> items;
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        switch (format) {
            case CatalogFormat::Csv: {
                if (row == 1 && line == "item_id,title,genres") continue;
                auto fields = split_csv_row(line);
                if (fields.size() != 3) {
                    throw Error(ErrorKind::MalformedRow,
                                "row " + std::to_string(row) + ": expected 3 CSV fields");
                }
                items.push_back(make_item(fields[0], fields[1], split(fields[2], '|'), row));
                break;
            }
            case CatalogFormat::MovieLens: {
                // MovieID::Title::Genre1|Genre2 (titles may contain single colons)
                auto parts = split_str(line, "::");
                if (parts.size() != 3) {
                    throw Error(ErrorKind::MalformedRow,
                                "row " + std::to_string(row) + ": expected '::'-delimited triple");
                }
                items.push_back(make_item(parts[0], parts[1], split(parts[2], '|'), row));
                break;
            }
            case CatalogFormat::SteamJsonl: {
                nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
                if (j.is_discarded() || !j.is_object()) {
                    throw Error(ErrorKind::MalformedRow, "row " + std::to_string(row) + ": bad JSON");
                }
                std::vector<std::string> genres;
                if (j.contains("genres")) {
                    if (j["genres"].is_array()) {
                        for (const auto& g : j["genres"]) genres.push_back(g.get<std::string>());
                    } else {
                        genres = split(j["genres"].get<std::string>(), '|');
                    }
                }
                items.push_back(make_item(j.value("item_id", ""), j.value("title", ""),
                                          std::move(genres), row));
                break;
            }
        }
    }
    if (items.empty()) throw Error(ErrorKind::EmptyCatalog, "no items in '" + path + "'");
    return ItemCatalog(std::move(items));
}

} // namespace divrec
