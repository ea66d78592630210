#include "hcov/hilbert.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <utility>

namespace hcov {

namespace {

// Quadrant rotation/reflection used by the iterative encode/decode.
void rot(std::uint64_t n, std::uint64_t& x, std::uint64_t& y, std::uint64_t rx,
         std::uint64_t ry) {
  if (ry == 0) {
    if (rx == 1) {
      x = n - 1 - x;
      y = n - 1 - y;
    }
    std::swap(x, y);
  }
}

void check_order(int order) {
  if (order < 1 || order > 31) {
    throw std::domain_error("hilbert: order must be in [1,31], got " +
                            std::to_string(order));
  }
}

}  // namespace

std::uint64_t xy_to_index(int x, int y, int order) {
  check_order(order);
  const std::uint64_t n = 1ull << order;
  if (x < 0 || y < 0 || static_cast<std::uint64_t>(x) >= n ||
      static_cast<std::uint64_t>(y) >= n) {
    throw std::domain_error("hilbert: coordinate out of range");
  }
  std::uint64_t ux = static_cast<std::uint64_t>(x);
  std::uint64_t uy = static_cast<std::uint64_t>(y);
  std::uint64_t d = 0;
  for (std::uint64_t s = n / 2; s > 0; s /= 2) {
    const std::uint64_t rx = (ux & s) ? 1 : 0;
    const std::uint64_t ry = (uy & s) ? 1 : 0;
    d += s * s * ((3 * rx) ^ ry);
    rot(n, ux, uy, rx, ry);
  }
  return d;
}

Cell d_to_xy(std::uint64_t d, int order) {
  check_order(order);
  const std::uint64_t n = 1ull << order;
  if (d >= n * n) {
    throw std::domain_error("hilbert: index out of range");
  }
  std::uint64_t x = 0, y = 0, t = d;
  for (std::uint64_t s = 1; s < n; s *= 2) {
    const std::uint64_t rx = 1 & (t / 2);
    const std::uint64_t ry = 1 & (t ^ rx);
    rot(s, x, y, rx, ry);
    x += s * rx;
    y += s * ry;
    t /= 4;
  }
  return {static_cast<int>(x), static_cast<int>(y)};
}

HilbertMap::HilbertMap(int width, int height,
                       const std::vector<std::uint8_t>& blocked)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::domain_error("HilbertMap: empty workspace");
  }
  if (!blocked.empty() &&
      blocked.size() != static_cast<std::size_t>(width) * height) {
    throw std::domain_error("HilbertMap: blocked mask size mismatch");
  }
  const int longest = std::max(width, height);
  order_ = 1;
  while ((1 << order_) < longest) ++order_;
  side_ = 1 << order_;

  rank_.assign(static_cast<std::size_t>(side_) * side_, -1);
  const std::uint64_t total = static_cast<std::uint64_t>(side_) * side_;
  for (std::uint64_t d = 0; d < total; ++d) {
    const Cell c = d_to_xy(d, order_);
    if (!in_bounds(c.x, c.y)) continue;
    if (!blocked.empty() &&
        blocked[static_cast<std::size_t>(c.y) * width_ + c.x]) {
      continue;
    }
    rank_[static_cast<std::size_t>(c.y) * side_ + c.x] =
        static_cast<long>(cells_.size());
    cells_.push_back(c);
  }
  if (cells_.empty()) {
    throw std::domain_error("HilbertMap: no active cells");
  }
}

bool HilbertMap::active(int x, int y) const {
  if (x < 0 || y < 0 || x >= side_ || y >= side_) return false;
  return rank_[static_cast<std::size_t>(y) * side_ + x] >= 0;
}

std::size_t HilbertMap::rank_of(int x, int y) const {
  if (!active(x, y)) {
    throw std::domain_error("HilbertMap: rank_of on inactive cell");
  }
  return static_cast<std::size_t>(rank_[static_cast<std::size_t>(y) * side_ + x]);
}

Cell HilbertMap::cell_of_rank(std::size_t rank) const {
  if (rank >= cells_.size()) {
    throw std::domain_error("HilbertMap: rank out of range");
  }
  return cells_[rank];
}

double HilbertMap::normalized_index(int x, int y) const {
  if (cells_.size() < 2) {
    throw std::domain_error("HilbertMap: normalized index needs >= 2 active cells");
  }
  return static_cast<double>(rank_of(x, y)) /
         static_cast<double>(cells_.size() - 1);
}

Action HilbertMap::curve_action(int x, int y) const {
  const std::size_t r = rank_of(x, y);
  if (r + 1 == cells_.size()) return Action::Stay;
  const Cell next = cells_[r + 1];
  const int dx = next.x - x;
  const int dy = next.y - y;
  if (std::abs(dx) + std::abs(dy) == 1) {
    if (dy == 1) return Action::North;
    if (dy == -1) return Action::South;
    if (dx == 1) return Action::East;
    return Action::West;
  }
  // Non-adjacent successor (compacted curve): first Manhattan-reducing
  // action in N > E > S > W order.
  const int dist = std::abs(dx) + std::abs(dy);
  for (Action a : {Action::North, Action::East, Action::South, Action::West}) {
    const Cell c = apply_action({x, y}, a);
    if (std::abs(next.x - c.x) + std::abs(next.y - c.y) < dist) return a;
  }
  return Action::Stay;  // unreachable for dist > 0
}

}  // namespace hcov
