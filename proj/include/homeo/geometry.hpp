#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "homeo/rng.hpp"

namespace homeo {

inline constexpr double kArenaSize = 40.0;
inline constexpr double kMaxStepLength = 10.0;
/// Clearance used both for start-state rejection and for stopping before walls.
inline constexpr double kWallClearance = 1e-6;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct ActionVec {
  double dx = 0.0;
  double dy = 0.0;
  friend bool operator==(const ActionVec&, const ActionVec&) = default;
};

double norm(const ActionVec& a);
double distance(const Point& p, const Point& q);

enum class RoomId { Bottom, Middle, Top };
std::string_view to_string(RoomId room);

enum class StartStrategy { UniformAnywhere, UniformBottomRoom };
std::string_view to_string(StartStrategy s);
std::optional<StartStrategy> parse_start_strategy(std::string_view s);

/// Horizontal wall spanning the full arena width at height `y`, with an open
/// door gap (door_lo, door_hi). The wall proper is the two closed segments
/// [0, door_lo] and [door_hi, 40].
struct Wall {
  double y = 0.0;
  double door_lo = 0.0;
  double door_hi = 0.0;
};

struct RoomLayout {
  std::vector<Wall> walls;
  /// y-coordinates separating Bottom|Middle and Middle|Top.
  double lower_split = kArenaSize / 3.0;
  double upper_split = 2.0 * kArenaSize / 3.0;

  /// Walls at y=40/3 (door (8,12)) and y=80/3 (door (28,32)).
  static RoomLayout three_rooms();
  static RoomLayout three_rooms(double wall1_y, double door1_lo, double door1_hi, double wall2_y,
                                double door2_lo, double door2_hi);
  /// Same room bands, no walls. Used for learner sanity checks.
  static RoomLayout open_arena();

  /// Throws ConfigError if a three-room layout breaks its invariants.
  void validate() const;
};

struct StepOutcome {
  Point next;
  bool collided = false;
  bool crossed_door = false;
};

/// Rescales to norm 10 when longer, otherwise returns the input unchanged.
ActionVec clamp_action(double raw_dx, double raw_dy);

/// Earliest t in (0, 1] where p + t (q - p) touches a closed wall segment.
std::optional<double> segment_wall_intersection(const RoomLayout& layout, const Point& p,
                                                const Point& q);

/// Euclidean distance from p to the nearest closed wall segment (infinity if none).
double distance_to_walls(const RoomLayout& layout, const Point& p);

RoomId room_of(const RoomLayout& layout, const Point& p);

/// One deterministic environment transition.
StepOutcome step(const RoomLayout& layout, const Point& s, const ActionVec& a);

/// Start state; resamples points within kWallClearance of a wall.
Point reset(const RoomLayout& layout, StartStrategy strategy, Rng& rng);

/// Uniform draw on the disc of radius max_len (angle uniform, radius max_len*sqrt(u)).
ActionVec random_action(Rng& rng, double max_len = kMaxStepLength);

}  // namespace homeo
