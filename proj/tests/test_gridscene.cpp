#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "viewcap/errors.hpp"
#include "viewcap/gridscene.hpp"
#include "viewcap/rng.hpp"

using namespace viewcap;

namespace {

Scene empty_scene(int w, int h) {
  Scene s;
  s.width = w;
  s.height = h;
  s.cells.assign(size_t(w) * size_t(h), CellKind::Free);
  s.room_type = "living_room";
  s.seed = 0;
  return s;
}

void block(Scene& s, Cell c) {
  s.cells[size_t(c.y) * size_t(s.width) + size_t(c.x)] = CellKind::Obstacle;
}

Scene with_object(Scene s, int id, const std::string& cat,
                  std::vector<Cell> cells, double salience = 1.0) {
  for (Cell c : cells) block(s, c);
  std::sort(cells.begin(), cells.end());
  s.objects.push_back({id, cat, std::move(cells), salience});
  return s;
}

}  // namespace

TEST_CASE("apply_action kinematics") {
  Scene s = empty_scene(6, 6);
  // move +x then rotate twice
  Pose p = apply_action(s, {2, 2, 0}, {3, 2});  // move index 3 = direction 2
  CHECK(p == Pose{3, 2, 2});

  // stop is the identity
  Pose q = apply_action(s, {2, 2, 5}, kStop);
  CHECK(q == Pose{2, 2, 5});
  CHECK(is_stop(kStop));

  // blocked cell
  Scene b = empty_scene(6, 6);
  block(b, {2, 3});
  CHECK_THROWS_AS((void)apply_action(b, {2, 2, 0}, Action{1, 7}), InfeasibleAction);
  // out of bounds
  CHECK_THROWS_AS((void)apply_action(s, {5, 5, 0}, Action{3, 0}), InfeasibleAction);
}

TEST_CASE("action indexing is a bijection over 72 actions") {
  std::set<int> seen;
  for (int move = 0; move <= 8; ++move)
    for (int rot = 0; rot < 8; ++rot) {
      int idx = action_index({move, rot});
      CHECK(idx >= 0);
      CHECK(idx < kNumActions);
      seen.insert(idx);
      Action back = action_from_index(idx);
      CHECK(back == Action{move, rot});
    }
  CHECK(seen.size() == 72);
  CHECK(action_index(kStop) == 0);
}

TEST_CASE("feasible_actions on an interior pose of an empty scene") {
  Scene s = empty_scene(5, 5);
  ActionMask mask = feasible_actions(s, {2, 2, 0});
  int count = 0;
  for (bool m : mask) count += m;
  CHECK(count == 72);
}

TEST_CASE("feasible_actions in a dead end has exactly 16 true entries") {
  // 3x3, only (0,1) and (1,1) free
  Scene s = empty_scene(3, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x)
      if (!(Cell{x, y} == Cell{0, 1}) && !(Cell{x, y} == Cell{1, 1}))
        block(s, {x, y});
  ActionMask mask = feasible_actions(s, {0, 1, 0});
  int count = 0;
  for (bool m : mask) count += m;
  CHECK(count == 16);
  CHECK(mask[size_t(action_index(kStop))]);
}

TEST_CASE("stop is always feasible and rotations never blocked") {
  Scene s = empty_scene(4, 4);
  block(s, {1, 0});
  block(s, {0, 1});
  block(s, {1, 1});
  ActionMask mask = feasible_actions(s, {0, 0, 3});
  CHECK(mask[size_t(action_index(kStop))]);
  for (int rot = 0; rot < 8; ++rot) CHECK(mask[size_t(action_index({0, rot}))]);
}

TEST_CASE("feasible action always applies to a valid pose (fuzz)") {
  Rng rng(123);
  for (int trial = 0; trial < 30; ++trial) {
    SceneGenConfig cfg;
    cfg.room_type = trial % 2 ? "kitchen" : "bedroom";
    Scene s = generate_scene(cfg, rng.next_u64());
    auto poses = enumerate_viewpoints(s);
    for (int k = 0; k < 350; ++k) {
      Pose p = poses[rng.below(poses.size())];
      ActionMask mask = feasible_actions(s, p);
      int idx = int(rng.below(kNumActions));
      if (!mask[size_t(idx)]) continue;
      Pose q = apply_action(s, p, action_from_index(idx));
      CHECK(s.free_at(q.cell()));
      CHECK(q.h >= 0);
      CHECK(q.h < 8);
    }
  }
}

TEST_CASE("enumerate_viewpoints counts and order") {
  Scene s = empty_scene(3, 3);
  auto all = enumerate_viewpoints(s);
  CHECK(all.size() == 72);

  Scene s1 = empty_scene(3, 3);
  block(s1, {1, 1});
  CHECK(enumerate_viewpoints(s1).size() == 64);

  // stable and total: no duplicates, row-major then heading
  std::set<std::tuple<int, int, int>> seen;
  for (const Pose& p : all) seen.insert({p.x, p.y, p.h});
  CHECK(seen.size() == all.size());
  CHECK(all[0] == Pose{0, 0, 0});
  CHECK(all[1] == Pose{0, 0, 1});
  CHECK(all[8] == Pose{1, 0, 0});

  SceneGenConfig cfg;
  Scene gen = generate_scene(cfg, 99);
  int free = 0;
  for (int y = 0; y < gen.height; ++y)
    for (int x = 0; x < gen.width; ++x) free += gen.free_at({x, y});
  CHECK(enumerate_viewpoints(gen).size() == size_t(free) * 8);
}

TEST_CASE("line_of_sight") {
  Scene s = empty_scene(9, 9);
  CHECK(line_of_sight(s, {2, 2}, {2, 2}));
  CHECK(line_of_sight(s, {1, 4}, {7, 4}));
  Scene b = s;
  block(b, {4, 4});
  CHECK(!line_of_sight(b, {1, 4}, {7, 4}));
  // target cell itself being an obstacle does not block its own visibility
  CHECK(line_of_sight(b, {1, 4}, {4, 4}));
  // cells of the object containing the target do not block
  Scene o = with_object(empty_scene(9, 9), 0, "couch", {{4, 4}, {5, 4}});
  CHECK(line_of_sight(o, {1, 4}, {5, 4}));
}

TEST_CASE("visible_objects geometry") {
  // object two cells ahead (heading 0 faces +y)
  Scene s = with_object(empty_scene(9, 9), 0, "couch", {{4, 6}});
  auto vis = visible_objects(s, {4, 4, 0});
  REQUIRE(vis.size() == 1);
  CHECK(vis[0].distance == doctest::Approx(2.0));
  CHECK(vis[0].bearing_deg == doctest::Approx(0.0));

  // behind the agent: excluded
  CHECK(visible_objects(s, {4, 4, 4}).empty());

  // out of range: excluded
  Visibility vr{90.0, 10.0};
  Scene far = with_object(empty_scene(20, 20), 0, "couch", {{4, 15}});
  CHECK(visible_objects(far, {4, 4, 0}, vr).empty());  // distance 11
  Scene edge = with_object(empty_scene(20, 20), 0, "couch", {{4, 14}});
  CHECK(visible_objects(edge, {4, 4, 0}, vr).size() == 1);  // distance 10

  // occluded by another object
  Scene occ = with_object(
      with_object(empty_scene(9, 9), 0, "couch", {{4, 6}}), 1, "table", {{4, 5}});
  auto seen = visible_objects(occ, {4, 4, 0});
  REQUIRE(seen.size() == 1);
  CHECK(occ.objects[size_t(seen[0].object_index)].category == "table");
}

TEST_CASE("visibility is monotone in range") {
  Rng rng(7);
  SceneGenConfig cfg;
  Scene s = generate_scene(cfg, 4242);
  auto poses = enumerate_viewpoints(s);
  for (int k = 0; k < 200; ++k) {
    Pose p = poses[rng.below(poses.size())];
    double r1 = 4.0 + 6.0 * rng.uniform01();
    double r2 = r1 + 3.0 * rng.uniform01();
    auto a = visible_objects(s, p, {90.0, r1});
    auto b = visible_objects(s, p, {90.0, r2});
    std::set<int> in_b;
    for (const auto& v : b) in_b.insert(v.object_index);
    for (const auto& v : a) CHECK(in_b.count(v.object_index) == 1);
  }
}

TEST_CASE("generate_scene is deterministic and invariant-clean") {
  SceneGenConfig cfg;
  Scene a = generate_scene(cfg, 1234);
  Scene b = generate_scene(cfg, 1234);
  CHECK(scene_to_json(a) == scene_to_json(b));

  SceneGenConfig none;
  none.min_objects = 0;
  none.max_objects = 0;
  Scene empty = generate_scene(none, 1);
  CHECK(empty.objects.empty());

  Rng rng(777);
  const char* rooms[] = {"living_room", "kitchen", "bedroom", "bathroom"};
  for (int i = 0; i < 200; ++i) {
    SceneGenConfig c;
    c.room_type = rooms[i % 4];
    c.width = 10 + i % 3;
    c.height = 10 + (i / 4) % 3;
    Scene s = generate_scene(c, rng.next_u64());
    CHECK_NOTHROW(validate_scene(s));
  }
}

TEST_CASE("scene json round trip and loader diagnostics") {
  SceneGenConfig cfg;
  Scene s = generate_scene(cfg, 31337);
  Scene back = scene_from_json(scene_to_json(s));
  CHECK(scene_to_json(back) == scene_to_json(s));

  CHECK_THROWS_AS((void)scene_from_json("{"), ParseError);

  // footprint cell not marked obstacle
  std::string bad = R"({"width":5,"height":5,"room_type":"kitchen","seed":1,
    "obstacles":[], "objects":[{"id":0,"category":"sink","footprint":[[2,2]],"salience":0.5}]})";
  try {
    (void)scene_from_json(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.field).find("objects[0].footprint[0]") != std::string::npos);
  }

  // disconnected free cells
  std::string split = R"({"width":5,"height":5,"room_type":"kitchen","seed":1,
    "obstacles":[[2,0],[2,1],[2,2],[2,3],[2,4]], "objects":[]})";
  CHECK_THROWS_AS((void)scene_from_json(split), ParseError);

  // unknown category
  std::string badcat = R"({"width":5,"height":5,"room_type":"kitchen","seed":1,
    "obstacles":[[2,2]], "objects":[{"id":0,"category":"spaceship","footprint":[[2,2]],"salience":0.5}]})";
  CHECK_THROWS_AS((void)scene_from_json(badcat), ParseError);
}
