#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace hcov {

// Discrete motion set. Enum order doubles as the network output index
// and the argmax tie-break order.
enum class Action : int { North = 0, South = 1, East = 2, West = 3, Stay = 4 };

inline constexpr int kNumActions = 5;

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

// North is +y, East is +x.
inline constexpr std::array<Cell, kNumActions> kActionDelta = {
    Cell{0, 1}, Cell{0, -1}, Cell{1, 0}, Cell{-1, 0}, Cell{0, 0}};

inline Cell apply_action(Cell c, Action a) {
  const Cell d = kActionDelta[static_cast<int>(a)];
  return {c.x + d.x, c.y + d.y};
}

inline const char* action_name(Action a) {
  switch (a) {
    case Action::North: return "N";
    case Action::South: return "S";
    case Action::East: return "E";
    case Action::West: return "W";
    case Action::Stay: return "STAY";
  }
  return "?";
}

}  // namespace hcov
