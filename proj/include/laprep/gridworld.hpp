#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laprep/rng.hpp"

namespace laprep::grid {

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

/// y grows downwards: Up is (0, -1).
enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr std::size_t kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kActions{Action::Up, Action::Down, Action::Left,
                                                          Action::Right};

Action opposite(Action a);
Cell offset(Action a);

struct GridState {
  std::size_t index = 0;
  Cell xy;
  bool operator==(const GridState&) const = default;
};

enum class ReprKind { Index, Position };

std::string_view repr_name(ReprKind kind);
ReprKind parse_repr(std::string_view name);

/// Immutable maze layout. Open cells are enumerated row-major and that order
/// defines the state index.
class GridSpec {
 public:
  /// ASCII map: '#' wall, '.' open, 'G' open goal cell (at most one).
  static GridSpec parse(std::string_view text, std::string name = "maze");
  static GridSpec load(const std::filesystem::path& path);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::string& name() const { return name_; }
  std::size_t num_states() const { return open_cells_.size(); }
  const std::vector<Cell>& open_cells() const { return open_cells_; }
  const std::vector<Cell>& walls() const { return walls_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  bool is_open(Cell c) const;
  std::optional<std::size_t> index_of(Cell c) const;

  GridState state(std::size_t index) const;
  GridState state_at(Cell c) const;
  const std::optional<GridState>& goal() const { return goal_; }

  /// The map back as ASCII ('G' included when a goal is recorded).
  std::string to_text() const;

 private:
  GridSpec() = default;

  int width_ = 0;
  int height_ = 0;
  std::string name_;
  std::vector<Cell> open_cells_;
  std::vector<Cell> walls_;
  std::vector<std::int64_t> index_grid_;  // -1 for walls
  std::optional<GridState> goal_;
};

/// Deterministic move; blocked moves leave the agent in place.
GridState step(const GridSpec& spec, GridState s, Action a);

std::size_t feature_dim(const GridSpec& spec, ReprKind kind);

/// Writes the raw features of `s` into `out` (size feature_dim).
void encode_into(const GridSpec& spec, GridState s, ReprKind kind, std::span<double> out);
std::vector<double> encode(const GridSpec& spec, GridState s, ReprKind kind);

Action uniform_policy_action(Rng& rng);

/// Breadth-first shortest-path lengths from `from` to every state.
std::vector<std::size_t> bfs_distances(const GridSpec& spec, GridState from);

}  // namespace laprep::grid
