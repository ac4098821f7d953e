#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace swarmalloc::sim {

enum class Geometry { checkerboard, striped, four_rectangles, halved };

/// Square arena of unit tiles, each white or black, with a strict white
/// majority. Tile (x, y) covers [x, x+1) x [y, y+1) in arena coordinates.
class Environment {
 public:
  static constexpr int side = 36;
  static constexpr int tile_count = side * side;

  Geometry geometry() const { return geometry_; }
  double fill_ratio() const { return fill_; }

  bool white_at(int x, int y) const {
    if (x < 0 || x >= side || y < 0 || y >= side)
      throw std::domain_error("tile out of range");
    return tiles_[std::size_t(y) * side + std::size_t(x)] != 0;
  }

  bool white_at_position(double px, double py) const {
    const int x = std::clamp(int(std::floor(px)), 0, side - 1);
    const int y = std::clamp(int(std::floor(py)), 0, side - 1);
    return tiles_[std::size_t(y) * side + std::size_t(x)] != 0;
  }

  int white_count() const {
    return int(std::accumulate(tiles_.begin(), tiles_.end(), 0));
  }

  /// One row per line, top row (y = 0) first, '1' white and '0' black.
  std::string to_bitmap() const {
    std::string out;
    out.reserve(tile_count + side);
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x)
        out.push_back(tiles_[std::size_t(y) * side + std::size_t(x)] ? '1' : '0');
      out.push_back('\n');
    }
    return out;
  }

  friend Environment generate_environment(Geometry g, double f, std::uint64_t seed);

 private:
  Geometry geometry_ = Geometry::checkerboard;
  double fill_ = 0.0;
  std::array<std::uint8_t, tile_count> tiles_{};

  std::uint8_t& at(int x, int y) {
    return tiles_[std::size_t(y) * side + std::size_t(x)];
  }
};

namespace detail {

inline void scatter_white(std::array<std::uint8_t, Environment::tile_count>& tiles,
                          int white, std::uint64_t seed) {
  std::array<std::int16_t, Environment::tile_count> idx{};
  std::iota(idx.begin(), idx.end(), std::int16_t(0));
  Rng rng(seed);
  for (int i = 0; i < white; ++i) {
    const std::int64_t j = rng.uniform_int(i, Environment::tile_count - 1);
    std::swap(idx[std::size_t(i)], idx[std::size_t(j)]);
    tiles[std::size_t(idx[std::size_t(i)])] = 1;
  }
}

}  // namespace detail

/// Deterministic arena construction with an exact white tile count of
/// lround(f * 1296). The checkerboard geometry scatters tiles with the given
/// seed; the other geometries are seed independent.
inline Environment generate_environment(Geometry g, double f, std::uint64_t seed) {
  if (!(f > 0.5) || !(f < 1.0))
    throw std::domain_error("fill ratio must lie in (0.5, 1)");
  const int S = Environment::side;
  const int white = int(std::lround(f * Environment::tile_count));
  if (white * 2 <= Environment::tile_count)
    throw std::domain_error("fill ratio rounds away the white majority");

  Environment env;
  env.geometry_ = g;
  env.fill_ = f;

  switch (g) {
    case Geometry::checkerboard:
      detail::scatter_white(env.tiles_, white, seed);
      break;

    case Geometry::striped: {
      // Vertical bars, nominally five columns wide, trimmed to three around
      // the middle so the pattern swaps color under x -> 35-x. That keeps the
      // bands along the left and right walls color-balanced, so robots that
      // spend extra time near walls see the same mix as the open middle. The
      // white surplus over the base 18 columns converts whole black columns
      // starting from the arena center, plus at most one mixed column.
      static constexpr int bounds[] = {0, 5, 10, 13, 18, 23, 26, 31, 36};
      std::array<std::uint8_t, 36> colw{};
      for (int b = 0; b + 1 < int(std::size(bounds)); ++b)
        for (int x = bounds[b]; x < bounds[b + 1]; ++x)
          colw[std::size_t(x)] = (b % 2 == 0) ? 1 : 0;
      std::vector<int> black;
      for (int x = 0; x < S; ++x)
        if (!colw[std::size_t(x)]) black.push_back(x);
      std::sort(black.begin(), black.end(), [](int a, int b) {
        return std::fabs(a - 17.5) < std::fabs(b - 17.5);
      });
      int surplus = white - 18 * S;
      std::size_t next = 0;
      for (; surplus >= S && next < black.size(); ++next, surplus -= S)
        colw[std::size_t(black[next])] = 1;
      for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) env.at(x, y) = colw[std::size_t(x)];
      if (surplus > 0 && next < black.size()) {
        const int x = black[next];
        const int y0 = (S - surplus) / 2;
        for (int y = y0; y < y0 + surplus; ++y) env.at(x, y) = 1;
      }
      break;
    }

    case Geometry::four_rectangles: {
      // White top-left and bottom-right quadrants split at v, with v chosen
      // to land closest to the requested count, then per-tile touch-up along
      // the split.
      int v = 1;
      long bestd = std::numeric_limits<long>::max();
      for (int cand = 1; cand < S; ++cand) {
        const long count = long(cand) * cand + long(S - cand) * (S - cand);
        const long d = std::labs(count - white);
        if (d < bestd) {
          bestd = d;
          v = cand;
        }
      }
      for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x)
          env.at(x, y) = ((x < v && y < v) || (x >= v && y >= v)) ? 1 : 0;
      long delta = long(v) * v + long(S - v) * (S - v) - white;
      if (delta > 0) {
        for (int x = v - 1; x >= 0 && delta > 0; --x)
          for (int y = v - 1; y >= 0 && delta > 0; --y)
            if (env.at(x, y)) {
              env.at(x, y) = 0;
              --delta;
            }
      } else if (delta < 0) {
        for (int x = v; x < S && delta < 0; ++x)
          for (int y = 0; y < v && delta < 0; ++y)
            if (!env.at(x, y)) {
              env.at(x, y) = 1;
              ++delta;
            }
      }
      break;
    }

    case Geometry::halved: {
      // Solid white block on the left, one jagged boundary column.
      const int full = white / S;
      const int rem = white % S;
      for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x)
          env.at(x, y) = (x < full || (x == full && y < rem)) ? 1 : 0;
      break;
    }
  }
  return env;
}

inline const char* geometry_name(Geometry g) {
  switch (g) {
    case Geometry::checkerboard: return "checkerboard";
    case Geometry::striped: return "striped";
    case Geometry::four_rectangles: return "four_rectangles";
    case Geometry::halved: return "halved";
  }
  return "unknown";
}

}  // namespace swarmalloc::sim
