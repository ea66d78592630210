#pragma once

#include <cstdint>
#include <vector>

#include "hcov/action.hpp"

namespace hcov {

/// Hilbert index of cell (x,y) on a 2^order x 2^order grid.
/// Orientation: the order-1 curve visits (0,0),(0,1),(1,1),(1,0).
/// Throws std::domain_error on out-of-range input.
std::uint64_t xy_to_index(int x, int y, int order);

/// Inverse of xy_to_index. Throws std::domain_error on out-of-range input.
Cell d_to_xy(std::uint64_t d, int order);

/// Hilbert ordering of an arbitrary width x height workspace, embedded in
/// the smallest enclosing power-of-two square. Cells outside the workspace
/// or marked blocked are inactive; ranks are compacted over active cells
/// in curve order. Immutable after construction.
class HilbertMap {
 public:
  /// blocked, when non-empty, is row-major width*height (index y*width+x).
  HilbertMap(int width, int height, const std::vector<std::uint8_t>& blocked = {});

  int order() const { return order_; }
  int side() const { return side_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t active_count() const { return cells_.size(); }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }
  bool active(int x, int y) const;

  /// Rank of an active cell along the compacted curve. Throws on inactive cells.
  std::size_t rank_of(int x, int y) const;
  Cell cell_of_rank(std::size_t rank) const;

  /// rank / (A-1). Throws if the cell is inactive or fewer than 2 active cells.
  double normalized_index(int x, int y) const;

  /// Single-step action advancing toward the next-ranked active cell.
  /// Non-adjacent successors use the Manhattan-reducing action, ties broken
  /// N > E > S > W. The last rank maps to Stay.
  Action curve_action(int x, int y) const;

 private:
  int order_, side_, width_, height_;
  std::vector<long> rank_;   // side*side, -1 for inactive
  std::vector<Cell> cells_;  // rank -> cell
};

}  // namespace hcov
