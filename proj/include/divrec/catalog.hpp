#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "divrec/types.hpp"

namespace divrec {

enum class CatalogFormat { Csv, MovieLens, SteamJsonl };

CatalogFormat catalog_format_from_string(const std::string& tag);

// Immutable item store. Built once by load_catalog, shared read-only after.
class ItemCatalog {
  public:
    ItemCatalog() = default;
    explicit ItemCatalog(std::vector<Item> items);

    const std::vector<Item>& items() const { return items_; }
    size_t size() const { return items_.size(); }

    const Item* find(const std::string& item_id) const;
    const Item& at(const std::string& item_id) const; // throws UnknownItem
    const Item* find_by_title(const std::string& title) const;

    const GenreTaxonomy& taxonomy() const { return taxonomy_; }
    GenreTaxonomy& taxonomy() { return taxonomy_; }

    const std::string& primary_genre(const std::string& item_id) const;

  private:
    std::vector<Item> items_;
    std::unordered_map<std::string, size_t> by_id_;
    std::unordered_map<std::string, size_t> by_title_; // first item wins on duplicate titles
    GenreTaxonomy taxonomy_;
};

ItemCatalog load_catalog(const std::string& path, CatalogFormat format);

} // namespace divrec
