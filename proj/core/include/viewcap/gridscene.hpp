#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace viewcap {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(Cell a, Cell b) { return a.x == b.x && a.y == b.y; }
  friend bool operator<(Cell a, Cell b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }
};

enum class CellKind : std::uint8_t { Free = 0, Obstacle = 1 };

struct SceneObject {
  int id = 0;
  std::string category;
  std::vector<Cell> footprint;  // non-empty, in bounds, sorted
  double salience = 1.0;        // in (0, 1]
};

// Discretized 2-D room. Immutable after construction; the free cells form a
// single 4-connected component and every object footprint cell is Obstacle.
struct Scene {
  int width = 0;
  int height = 0;
  std::vector<CellKind> cells;  // row-major, cells[y*width + x]
  std::vector<SceneObject> objects;
  std::string room_type;
  std::uint64_t seed = 0;  // doubles as the scene id

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
  }
  CellKind at(Cell c) const { return cells[size_t(c.y) * size_t(width) + size_t(c.x)]; }
  bool free_at(Cell c) const { return in_bounds(c) && at(c) == CellKind::Free; }
  // Index of the object whose footprint covers c, or -1.
  int object_at(Cell c) const;
};

// Throws ParseError (with a field path) on any invariant violation.
void validate_scene(const Scene& scene);

// Heading h in {0..7}: angle 45*h degrees, h=0 faces +y, increasing clockwise.
struct Pose {
  int x = 0;
  int y = 0;
  int h = 0;
  Cell cell() const { return {x, y}; }
  friend bool operator==(Pose a, Pose b) {
    return a.x == b.x && a.y == b.y && a.h == b.h;
  }
};

// Unit step for heading/direction index 0..7 (allocentric).
inline constexpr std::array<Cell, 8> kDirStep = {{
    {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}}};

// Composite action: optional allocentric move (move=0 is "no move",
// move=1..8 is direction 0..7), then rotate by 45*rot degrees clockwise.
struct Action {
  int move = 0;
  int rot = 0;
  friend bool operator==(Action a, Action b) {
    return a.move == b.move && a.rot == b.rot;
  }
};

inline constexpr int kNumActions = 72;
inline constexpr Action kStop{0, 0};

inline constexpr int action_index(Action a) { return a.move * 8 + a.rot; }
inline constexpr Action action_from_index(int idx) { return {idx / 8, idx % 8}; }
inline constexpr bool is_stop(Action a) { return a.move == 0 && a.rot == 0; }

using ActionMask = std::array<bool, kNumActions>;

// Move first, rotate second. Throws InfeasibleAction when the move target is
// out of bounds or an obstacle.
Pose apply_action(const Scene& scene, Pose pose, Action a);

// True exactly for actions whose move target is an in-bounds free cell;
// rotations are never blocked, so the mask always has at least 8 true
// entries and Stop is always feasible.
ActionMask feasible_actions(const Scene& scene, Pose pose);

// All discrete viewpoints: 8 headings per free cell, row-major then heading.
std::vector<Pose> enumerate_viewpoints(const Scene& scene);

// True iff no cell strictly between a and b on the Bresenham ray is an
// obstacle, ignoring cells of the object that contains b.
bool line_of_sight(const Scene& scene, Cell a, Cell b);

struct Visibility {
  double fov_deg = 90.0;  // full field of view
  double range = 10.0;    // max distance, in cells
};

struct VisibleObject {
  int object_index = 0;    // into scene.objects
  double distance = 0.0;   // to nearest qualifying footprint cell, in cells
  double bearing_deg = 0;  // relative to heading, in (-180, 180]
};

// Objects with a footprint cell within range, inside the field of view, and
// in line of sight; sorted by distance then object id.
std::vector<VisibleObject> visible_objects(const Scene& scene, Pose pose,
                                           const Visibility& vis = {});

struct SceneGenConfig {
  int width = 12;
  int height = 12;
  std::string room_type = "living_room";
  int min_objects = 5;
  int max_objects = 9;
};

// Deterministic for fixed (config, seed). Generated scenes have a solid
// perimeter wall; objects are 1x1..2x2 footprints with distinct categories
// drawn from the room-type profile. Throws GenerationFailed when the
// connectivity invariant cannot be met within the retry budget.
Scene generate_scene(const SceneGenConfig& cfg, std::uint64_t seed);

std::string scene_to_json(const Scene& scene);
// Validates all invariants; throws ParseError with a field diagnostic.
Scene scene_from_json(const std::string& text);

}  // namespace viewcap
