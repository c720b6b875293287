#include "viewcap/gridscene.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "json.hpp"
#include "viewcap/errors.hpp"
#include "viewcap/rng.hpp"
#include "viewcap/vocab.hpp"

namespace viewcap {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Free cells reachable from the first free cell under 4-connectivity.
bool free_cells_connected(const Scene& s) {
  int total_free = 0;
  Cell start{-1, -1};
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      if (s.at({x, y}) == CellKind::Free) {
        ++total_free;
        if (start.x < 0) start = {x, y};
      }
  if (total_free == 0) return false;
  std::vector<std::uint8_t> seen(size_t(s.width) * size_t(s.height), 0);
  std::queue<Cell> q;
  q.push(start);
  seen[size_t(start.y) * size_t(s.width) + size_t(start.x)] = 1;
  int reached = 0;
  while (!q.empty()) {
    Cell c = q.front();
    q.pop();
    ++reached;
    const Cell steps[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (Cell d : steps) {
      Cell n{c.x + d.x, c.y + d.y};
      if (!s.free_at(n)) continue;
      auto& flag = seen[size_t(n.y) * size_t(s.width) + size_t(n.x)];
      if (!flag) {
        flag = 1;
        q.push(n);
      }
    }
  }
  return reached == total_free;
}

double wrap_deg(double a) {
  a = std::fmod(a + 180.0, 360.0);
  if (a < 0) a += 360.0;
  return a - 180.0;
}

}  // namespace

int Scene::object_at(Cell c) const {
  for (size_t i = 0; i < objects.size(); ++i)
    for (Cell f : objects[i].footprint)
      if (f == c) return int(i);
  return -1;
}

void validate_scene(const Scene& s) {
  if (s.width < 3 || s.height < 3)
    throw ParseError("scene", "width and height must be >= 3");
  if (s.cells.size() != size_t(s.width) * size_t(s.height))
    throw ParseError("scene.cells", "grid size does not match width*height");
  std::set<Cell> taken;
  for (size_t i = 0; i < s.objects.size(); ++i) {
    const auto& obj = s.objects[i];
    const std::string where = "objects[" + std::to_string(i) + "]";
    if (obj.footprint.empty())
      throw ParseError(where + ".footprint", "footprint is empty");
    if (!(obj.salience > 0.0 && obj.salience <= 1.0))
      throw ParseError(where + ".salience", "salience must be in (0, 1]");
    const auto& cats = vocab::all_categories();
    if (std::find(cats.begin(), cats.end(), obj.category) == cats.end())
      throw ParseError(where + ".category",
                       "not an object category: " + obj.category);
    for (size_t k = 0; k < obj.footprint.size(); ++k) {
      Cell c = obj.footprint[k];
      const std::string cw = where + ".footprint[" + std::to_string(k) + "]";
      if (!s.in_bounds(c)) throw ParseError(cw, "cell out of bounds");
      if (s.at(c) != CellKind::Obstacle)
        throw ParseError(cw, "footprint cell is not marked obstacle");
      if (!taken.insert(c).second)
        throw ParseError(cw, "footprint overlaps another object");
    }
  }
  if (!free_cells_connected(s))
    throw ParseError("scene.cells",
                     "free cells must be non-empty and 4-connected");
}

Pose apply_action(const Scene& scene, Pose pose, Action a) {
  Cell c = pose.cell();
  if (a.move != 0) {
    Cell d = kDirStep[size_t(a.move - 1)];
    c = {c.x + d.x, c.y + d.y};
    if (!scene.free_at(c))
      throw InfeasibleAction("move target is blocked or out of bounds");
  }
  return {c.x, c.y, (pose.h + a.rot) % 8};
}

ActionMask feasible_actions(const Scene& scene, Pose pose) {
  ActionMask mask{};
  for (int move = 0; move <= 8; ++move) {
    bool ok = true;
    if (move != 0) {
      Cell d = kDirStep[size_t(move - 1)];
      ok = scene.free_at({pose.x + d.x, pose.y + d.y});
    }
    for (int rot = 0; rot < 8; ++rot)
      mask[size_t(action_index({move, rot}))] = ok;
  }
  return mask;
}

std::vector<Pose> enumerate_viewpoints(const Scene& scene) {
  std::vector<Pose> out;
  out.reserve(size_t(scene.width) * size_t(scene.height) * 8);
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x)
      if (scene.at({x, y}) == CellKind::Free)
        for (int h = 0; h < 8; ++h) out.push_back({x, y, h});
  return out;
}

bool line_of_sight(const Scene& scene, Cell a, Cell b) {
  int target_obj = scene.object_at(b);
  int dx = std::abs(b.x - a.x), dy = std::abs(b.y - a.y);
  int sx = a.x < b.x ? 1 : -1, sy = a.y < b.y ? 1 : -1;
  int err = dx - dy;
  Cell c = a;
  while (true) {
    if (!(c == a) && !(c == b)) {
      if (scene.at(c) == CellKind::Obstacle &&
          (target_obj < 0 || scene.object_at(c) != target_obj))
        return false;
    }
    if (c == b) return true;
    int e2 = 2 * err;
    if (e2 > -dy) {
      err -= dy;
      c.x += sx;
    }
    if (e2 < dx) {
      err += dx;
      c.y += sy;
    }
  }
}

std::vector<VisibleObject> visible_objects(const Scene& scene, Pose pose,
                                           const Visibility& vis) {
  std::vector<VisibleObject> out;
  const double heading = 45.0 * pose.h;
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    bool found = false;
    VisibleObject best{int(i), 0.0, 0.0};
    for (Cell c : scene.objects[i].footprint) {
      double dx = double(c.x - pose.x), dy = double(c.y - pose.y);
      double dist = std::hypot(dx, dy);
      if (dist > vis.range) continue;
      double bearing = wrap_deg(std::atan2(dx, dy) * 180.0 / kPi - heading);
      if (std::abs(bearing) > vis.fov_deg / 2.0) continue;
      if (!line_of_sight(scene, pose.cell(), c)) continue;
      if (!found || dist < best.distance) {
        best.distance = dist;
        best.bearing_deg = bearing;
        found = true;
      }
    }
    if (found) out.push_back(best);
  }
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return scene.objects[size_t(a.object_index)].id <
           scene.objects[size_t(b.object_index)].id;
  });
  return out;
}

Scene generate_scene(const SceneGenConfig& cfg, std::uint64_t seed) {
  if (cfg.width < 5 || cfg.height < 5)
    throw GenerationFailed("generated scenes need width/height >= 5");
  if (cfg.min_objects < 0 || cfg.max_objects < cfg.min_objects)
    throw GenerationFailed("invalid object count range");
  const auto& pool = vocab::room_categories(cfg.room_type);
  Rng rng(hash_all({seed, 0x5ce2eULL}));

  for (int attempt = 0; attempt < 32; ++attempt) {
    Scene s;
    s.width = cfg.width;
    s.height = cfg.height;
    s.room_type = cfg.room_type;
    s.seed = seed;
    s.cells.assign(size_t(cfg.width) * size_t(cfg.height), CellKind::Free);
    for (int x = 0; x < cfg.width; ++x) {
      s.cells[size_t(x)] = CellKind::Obstacle;
      s.cells[size_t(cfg.height - 1) * size_t(cfg.width) + size_t(x)] =
          CellKind::Obstacle;
    }
    for (int y = 0; y < cfg.height; ++y) {
      s.cells[size_t(y) * size_t(cfg.width)] = CellKind::Obstacle;
      s.cells[size_t(y) * size_t(cfg.width) + size_t(cfg.width - 1)] =
          CellKind::Obstacle;
    }

    int want = std::min(cfg.min_objects + int(rng.below(std::uint64_t(
                            cfg.max_objects - cfg.min_objects + 1))),
                        int(pool.size()));
    std::vector<std::string_view> cats(pool.begin(), pool.end());
    for (size_t i = cats.size(); i > 1; --i)
      std::swap(cats[i - 1], cats[rng.below(i)]);

    bool ok = true;
    for (int n = 0; n < want && ok; ++n) {
      bool placed = false;
      for (int t = 0; t < 200 && !placed; ++t) {
        int w = 1 + int(rng.below(2)), h = 1 + int(rng.below(2));
        int x0 = 1 + int(rng.below(std::uint64_t(cfg.width - 1 - w)));
        int y0 = 1 + int(rng.below(std::uint64_t(cfg.height - 1 - h)));
        std::vector<Cell> cells;
        bool clear = true;
        for (int y = y0; y < y0 + h && clear; ++y)
          for (int x = x0; x < x0 + w && clear; ++x) {
            if (s.at({x, y}) != CellKind::Free) clear = false;
            cells.push_back({x, y});
          }
        if (!clear) continue;
        for (Cell c : cells)
          s.cells[size_t(c.y) * size_t(s.width) + size_t(c.x)] =
              CellKind::Obstacle;
        if (!free_cells_connected(s)) {
          for (Cell c : cells)
            s.cells[size_t(c.y) * size_t(s.width) + size_t(c.x)] =
                CellKind::Free;
          continue;
        }
        SceneObject obj;
        obj.id = n;
        obj.category = std::string(cats[size_t(n)]);
        std::sort(cells.begin(), cells.end());
        obj.footprint = std::move(cells);
        obj.salience = 0.5 + 0.5 * rng.uniform01();
        s.objects.push_back(std::move(obj));
        placed = true;
      }
      ok = placed;
    }
    if (!ok) continue;
    validate_scene(s);
    return s;
  }
  throw GenerationFailed("could not place objects while keeping free cells connected");
}

std::string scene_to_json(const Scene& s) {
  nlohmann::json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["room_type"] = s.room_type;
  j["seed"] = s.seed;
  nlohmann::json obstacles = nlohmann::json::array();
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      if (s.at({x, y}) == CellKind::Obstacle)
        obstacles.push_back({x, y});
  j["obstacles"] = obstacles;
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& obj : s.objects) {
    nlohmann::json fp = nlohmann::json::array();
    for (Cell c : obj.footprint) fp.push_back({c.x, c.y});
    objects.push_back({{"id", obj.id},
                       {"category", obj.category},
                       {"footprint", fp},
                       {"salience", obj.salience}});
  }
  j["objects"] = objects;
  return j.dump(2);
}

Scene scene_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("scene", e.what());
  }
  Scene s;
  try {
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.room_type = j.at("room_type").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    if (s.width < 3 || s.height < 3)
      throw ParseError("scene", "width and height must be >= 3");
    s.cells.assign(size_t(s.width) * size_t(s.height), CellKind::Free);
    const auto& obstacles = j.at("obstacles");
    for (size_t i = 0; i < obstacles.size(); ++i) {
      const auto& o = obstacles[i];
      const std::string where = "obstacles[" + std::to_string(i) + "]";
      if (!o.is_array() || o.size() != 2) throw ParseError(where, "expected [x, y]");
      Cell c{o[0].get<int>(), o[1].get<int>()};
      if (!s.in_bounds(c)) throw ParseError(where, "cell out of bounds");
      s.cells[size_t(c.y) * size_t(s.width) + size_t(c.x)] = CellKind::Obstacle;
    }
    const auto& objects = j.at("objects");
    for (size_t i = 0; i < objects.size(); ++i) {
      const auto& o = objects[i];
      const std::string where = "objects[" + std::to_string(i) + "]";
      SceneObject obj;
      obj.id = o.at("id").get<int>();
      obj.category = o.at("category").get<std::string>();
      obj.salience = o.at("salience").get<double>();
      for (const auto& f : o.at("footprint"))
        obj.footprint.push_back({f[0].get<int>(), f[1].get<int>()});
      std::sort(obj.footprint.begin(), obj.footprint.end());
      s.objects.push_back(std::move(obj));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("scene", e.what());
  }
  validate_scene(s);
  return s;
}

}  // namespace viewcap
