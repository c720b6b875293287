#pragma once

#include <string_view>
#include <vector>

namespace viewcap::vocab {

// One synonym group: words that should embed close together. The first
// `category_count` members are object categories a detector can emit; the
// rest only ever appear in caption text.
struct WordGroup {
  std::vector<std::string_view> words;
  int category_count = 0;
};

// Partition of all noun words (object categories, their caption synonyms,
// the room-type words, and "wall").
const std::vector<WordGroup>& noun_groups();

const std::vector<std::string_view>& stop_words();
const std::vector<std::string_view>& room_types();

// Object categories placeable in a room of the given type (10 each,
// disjoint across types). Throws ConfigError on an unknown room type.
const std::vector<std::string_view>& room_categories(std::string_view room_type);

// All object categories across every room type, in room-type order.
const std::vector<std::string_view>& all_categories();

}  // namespace viewcap::vocab
