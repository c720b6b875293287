#include "viewcap/vocab.hpp"

#include <string>

#include "viewcap/errors.hpp"

namespace viewcap::vocab {

namespace {

// Categories first within each group, caption-only synonyms after.
std::vector<WordGroup> build_noun_groups() {
  return {
      // living room
      {{"couch", "sofa", "settee"}, 1},
      {{"table", "desk", "workbench"}, 2},  // desk is a bedroom category
      {{"television", "tv", "screen"}, 1},
      {{"lamp", "lantern", "light"}, 1},
      {{"bookshelf", "bookcase", "shelf"}, 1},
      {{"rug", "carpet", "mat"}, 1},
      {{"armchair", "recliner", "seat"}, 1},
      {{"fireplace", "hearth", "mantel"}, 1},
      {{"piano", "keyboard", "organ"}, 1},
      {{"plant", "fern", "shrub"}, 1},
      // kitchen
      {{"fridge", "refrigerator", "icebox"}, 1},
      {{"stove", "oven", "cooker"}, 1},
      {{"sink", "washbasin"}, 1},
      {{"counter", "countertop", "worktop"}, 1},
      {{"cabinet", "cupboard"}, 1},
      {{"microwave"}, 1},
      {{"toaster", "grill"}, 1},
      {{"kettle", "teapot", "pot"}, 1},
      {{"pan", "skillet"}, 1},
      {{"jar", "crock", "urn"}, 1},
      // bedroom
      {{"bed", "cot", "bunk"}, 1},
      {{"wardrobe", "closet", "armoire"}, 1},
      {{"dresser", "bureau", "chest"}, 1},
      {{"nightstand", "bedstand"}, 1},
      {{"mirror", "glass"}, 1},
      {{"chair", "stool"}, 1},
      {{"pillow", "cushion"}, 1},
      {{"blanket", "quilt", "duvet"}, 1},
      {{"clock", "timepiece"}, 1},
      // bathroom
      {{"toilet", "commode"}, 1},
      {{"bathtub", "tub"}, 1},
      {{"shower", "showerhead"}, 1},
      {{"towel", "washcloth"}, 1},
      {{"basin", "ewer"}, 1},
      {{"scale", "balance"}, 1},
      {{"hamper", "basket"}, 1},
      {{"sponge", "scrubber"}, 1},
      {{"razor", "shaver"}, 1},
      {{"soap", "detergent"}, 1},
      // caption-only nouns
      {{"wall", "partition"}, 0},
      {{"living_room"}, 0},
      {{"kitchen"}, 0},
      {{"bedroom"}, 0},
      {{"bathroom"}, 0},
  };
}

std::vector<std::string_view> pick_room(std::string_view room) {
  // "desk" lives in the table group embedding-wise but is placed in bedrooms.
  if (room == "living_room")
    return {"couch",     "table", "television", "lamp",  "bookshelf",
            "rug",       "armchair", "fireplace", "piano", "plant"};
  if (room == "kitchen")
    return {"fridge",   "stove",   "sink",    "counter", "cabinet",
            "microwave", "toaster", "kettle", "pan",     "jar"};
  if (room == "bedroom")
    return {"bed",        "wardrobe", "dresser", "nightstand", "mirror",
            "desk",       "chair",    "pillow",  "blanket",    "clock"};
  if (room == "bathroom")
    return {"toilet", "bathtub", "shower", "towel",  "basin",
            "scale",  "hamper",  "sponge", "razor",  "soap"};
  throw ConfigError("unknown room type: " + std::string(room));
}

}  // namespace

const std::vector<WordGroup>& noun_groups() {
  static const std::vector<WordGroup> groups = build_noun_groups();
  return groups;
}

const std::vector<std::string_view>& stop_words() {
  static const std::vector<std::string_view> words = {
      "a", "an", "the", "with", "and", "in", "on", "of", "is", "there"};
  return words;
}

const std::vector<std::string_view>& room_types() {
  static const std::vector<std::string_view> types = {
      "living_room", "kitchen", "bedroom", "bathroom"};
  return types;
}

const std::vector<std::string_view>& room_categories(std::string_view room_type) {
  static const std::vector<std::string_view> living = pick_room("living_room");
  static const std::vector<std::string_view> kitchen = pick_room("kitchen");
  static const std::vector<std::string_view> bedroom = pick_room("bedroom");
  static const std::vector<std::string_view> bathroom = pick_room("bathroom");
  if (room_type == "living_room") return living;
  if (room_type == "kitchen") return kitchen;
  if (room_type == "bedroom") return bedroom;
  if (room_type == "bathroom") return bathroom;
  throw ConfigError("unknown room type: " + std::string(room_type));
}

const std::vector<std::string_view>& all_categories() {
  static const std::vector<std::string_view> all = [] {
    std::vector<std::string_view> out;
    for (auto room : room_types()) {
      const auto& cats = room_categories(room);
      out.insert(out.end(), cats.begin(), cats.end());
    }
    return out;
  }();
  return all;
}

}  // namespace viewcap::vocab
