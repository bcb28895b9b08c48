#include "homeo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "homeo/errors.hpp"

namespace homeo {

double norm(const ActionVec& a) { return std::hypot(a.dx, a.dy); }

double distance(const Point& p, const Point& q) { return std::hypot(p.x - q.x, p.y - q.y); }

std::string_view to_string(RoomId room) {
  switch (room) {
    case RoomId::Bottom:
      return "bottom";
    case RoomId::Middle:
      return "middle";
    case RoomId::Top:
      return "top";
  }
  return "?";
}

std::string_view to_string(StartStrategy s) {
  return s == StartStrategy::UniformAnywhere ? "uniform_anywhere" : "uniform_bottom_room";
}

std::optional<StartStrategy> parse_start_strategy(std::string_view s) {
  if (s == "uniform_anywhere") return StartStrategy::UniformAnywhere;
  if (s == "uniform_bottom_room") return StartStrategy::UniformBottomRoom;
  return std::nullopt;
}

RoomLayout RoomLayout::three_rooms() {
  return three_rooms(kArenaSize / 3.0, 8.0, 12.0, 2.0 * kArenaSize / 3.0, 28.0, 32.0);
}

RoomLayout RoomLayout::three_rooms(double wall1_y, double door1_lo, double door1_hi,
                                   double wall2_y, double door2_lo, double door2_hi) {
  RoomLayout layout;
  layout.walls = {{wall1_y, door1_lo, door1_hi}, {wall2_y, door2_lo, door2_hi}};
  layout.lower_split = wall1_y;
  layout.upper_split = wall2_y;
  return layout;
}

RoomLayout RoomLayout::open_arena() { return RoomLayout{}; }

void RoomLayout::validate() const {
  if (!(0.0 < lower_split && lower_split < upper_split && upper_split < kArenaSize)) {
    throw ConfigError("room layout: splits must satisfy 0 < lower < upper < 40");
  }
  if (walls.empty()) return;
  if (walls.size() != 2) throw ConfigError("room layout: expected exactly two walls");
  for (const Wall& w : walls) {
    if (!(0.0 < w.y && w.y < kArenaSize)) {
      throw ConfigError("room layout: wall y must lie strictly inside the arena");
    }
    if (!(0.0 < w.door_lo && w.door_lo < w.door_hi && w.door_hi < kArenaSize)) {
      throw ConfigError("room layout: door gap must satisfy 0 < lo < hi < 40");
    }
  }
  if (!(walls[0].y < walls[1].y)) throw ConfigError("room layout: walls must be ordered by y");
  const bool disjoint =
      walls[0].door_hi <= walls[1].door_lo || walls[1].door_hi <= walls[0].door_lo;
  if (!disjoint) throw ConfigError("room layout: door gaps overlap in x");
  if (lower_split != walls[0].y || upper_split != walls[1].y) {
    throw ConfigError("room layout: room bands must coincide with the walls");
  }
}

ActionVec clamp_action(double raw_dx, double raw_dy) {
  const double n = std::hypot(raw_dx, raw_dy);
  if (n <= kMaxStepLength) return {raw_dx, raw_dy};
  const double scale = kMaxStepLength / n;
  return {raw_dx * scale, raw_dy * scale};
}

namespace {

bool on_wall(const Wall& w, double x) {
  return (x >= 0.0 && x <= w.door_lo) || (x >= w.door_hi && x <= kArenaSize);
}

}  // namespace

std::optional<double> segment_wall_intersection(const RoomLayout& layout, const Point& p,
                                                const Point& q) {
  const double dy = q.y - p.y;
  std::optional<double> best;
  for (const Wall& w : layout.walls) {
    if (dy == 0.0) {
      // Motion parallel to the wall: contact only if travelling along it.
      if (p.y != w.y) continue;
      if (on_wall(w, p.x)) {
        // p itself is on the wall; t must be > 0 so take the smallest positive.
        best = best ? std::min(*best, std::numeric_limits<double>::min()) : std::numeric_limits<double>::min();
        continue;
      }
      // Starting inside the door gap and sliding along y = w.y.
      const double dx = q.x - p.x;
      const double edge = dx > 0.0 ? w.door_hi : w.door_lo;
      const double t = (edge - p.x) / dx;
      if (t > 0.0 && t <= 1.0) best = best ? std::min(*best, t) : t;
      continue;
    }
    const double t = (w.y - p.y) / dy;
    if (!(t > 0.0 && t <= 1.0)) continue;
    const double x = p.x + t * (q.x - p.x);
    if (on_wall(w, x)) best = best ? std::min(*best, t) : t;
  }
  return best;
}

double distance_to_walls(const RoomLayout& layout, const Point& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const Wall& w : layout.walls) {
    const double dy = p.y - w.y;
    const double left = std::max(p.x - w.door_lo, 0.0) + std::max(0.0 - p.x, 0.0);
    const double right = std::max(w.door_hi - p.x, 0.0) + std::max(p.x - kArenaSize, 0.0);
    best = std::min({best, std::hypot(left, dy), std::hypot(right, dy)});
  }
  return best;
}

RoomId room_of(const RoomLayout& layout, const Point& p) {
  if (p.y < layout.lower_split) return RoomId::Bottom;
  if (p.y < layout.upper_split) return RoomId::Middle;
  return RoomId::Top;
}

StepOutcome step(const RoomLayout& layout, const Point& s, const ActionVec& a) {
  // Truncate the motion segment at the arena rectangle.
  double t_bound = 1.0;
  auto limit = [&t_bound](double pos, double delta) {
    if (delta > 0.0) {
      t_bound = std::min(t_bound, (kArenaSize - pos) / delta);
    } else if (delta < 0.0) {
      t_bound = std::min(t_bound, (0.0 - pos) / delta);
    }
  };
  limit(s.x, a.dx);
  limit(s.y, a.dy);
  t_bound = std::max(t_bound, 0.0);

  const double dx = t_bound * a.dx;
  const double dy = t_bound * a.dy;
  Point target{std::clamp(s.x + dx, 0.0, kArenaSize), std::clamp(s.y + dy, 0.0, kArenaSize)};

  StepOutcome out;
  const double len = std::hypot(dx, dy);
  if (len == 0.0) {
    out.next = s;
    return out;
  }

  if (auto hit = segment_wall_intersection(layout, s, target)) {
    const double t_stop = std::max(0.0, *hit - kWallClearance / len);
    out.next = {s.x + t_stop * dx, s.y + t_stop * dy};
    out.collided = true;
  } else {
    out.next = target;
  }

  for (const Wall& w : layout.walls) {
    const bool crosses = (s.y < w.y && out.next.y >= w.y) || (s.y >= w.y && out.next.y < w.y);
    if (!crosses || out.next.y == s.y) continue;
    const double t = (w.y - s.y) / (out.next.y - s.y);
    const double x = s.x + t * (out.next.x - s.x);
    if (x > w.door_lo && x < w.door_hi) out.crossed_door = true;
  }
  return out;
}

Point reset(const RoomLayout& layout, StartStrategy strategy, Rng& rng) {
  const double y_max =
      strategy == StartStrategy::UniformBottomRoom ? layout.lower_split : kArenaSize;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Point p{rng.uniform(0.0, kArenaSize), rng.uniform(0.0, y_max)};
    if (distance_to_walls(layout, p) > kWallClearance) return p;
  }
  throw ConfigError("reset: no valid start state after 1000 attempts; check the room layout");
}

ActionVec random_action(Rng& rng, double max_len) {
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double radius = max_len * std::sqrt(rng.uniform());
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace homeo
