#include "laprep/gridworld.hpp"

#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "laprep/error.hpp"

namespace laprep::grid {

Action opposite(Action a) {
  switch (a) {
    case Action::Up: return Action::Down;
    case Action::Down: return Action::Up;
    case Action::Left: return Action::Right;
    case Action::Right: return Action::Left;
  }
  return a;
}

Cell offset(Action a) {
  switch (a) {
    case Action::Up: return {0, -1};
    case Action::Down: return {0, 1};
    case Action::Left: return {-1, 0};
    case Action::Right: return {1, 0};
  }
  return {0, 0};
}

std::string_view repr_name(ReprKind kind) {
  return kind == ReprKind::Index ? "index" : "position";
}

ReprKind parse_repr(std::string_view name) {
  if (name == "index") return ReprKind::Index;
  if (name == "position") return ReprKind::Position;
  fail(ErrorCode::InvalidArgument, "unknown representation '" + std::string(name) + "'");
}

GridSpec GridSpec::parse(std::string_view text, std::string name) {
  std::vector<std::string> rows;
  {
    std::string line;
    std::istringstream in{std::string(text)};
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      rows.push_back(line);
    }
    while (!rows.empty() && rows.back().empty()) rows.pop_back();
  }
  if (rows.empty() || rows.front().empty()) fail(ErrorCode::NoOpenCells, "empty maze");
  const std::size_t width = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != width) fail(ErrorCode::NonRectangular, "maze rows differ in length");
  }

  GridSpec spec;
  spec.name_ = std::move(name);
  spec.width_ = static_cast<int>(width);
  spec.height_ = static_cast<int>(rows.size());
  spec.index_grid_.assign(width * rows.size(), -1);
  std::optional<Cell> goal_cell;
  for (int y = 0; y < spec.height_; ++y) {
    for (int x = 0; x < spec.width_; ++x) {
      const char ch = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
      const Cell c{x, y};
      switch (ch) {
        case '#': spec.walls_.push_back(c); break;
        case 'G':
          if (goal_cell) fail(ErrorCode::InvalidMaze, "more than one goal marker");
          goal_cell = c;
          [[fallthrough]];
        case '.':
          spec.index_grid_[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] =
              static_cast<std::int64_t>(spec.open_cells_.size());
          spec.open_cells_.push_back(c);
          break;
        default:
          fail(ErrorCode::InvalidMaze, std::string("unexpected character '") + ch + "' in maze");
      }
    }
  }
  if (spec.open_cells_.empty()) fail(ErrorCode::NoOpenCells, "maze has no open cells");

  // Connectivity of the 4-neighbourhood graph.
  std::vector<char> seen(spec.open_cells_.size(), 0);
  std::deque<std::size_t> frontier{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    for (Action a : kActions) {
      const Cell n{spec.open_cells_[u].x + offset(a).x, spec.open_cells_[u].y + offset(a).y};
      if (auto idx = spec.index_of(n); idx && !seen[*idx]) {
        seen[*idx] = 1;
        ++reached;
        frontier.push_back(*idx);
      }
    }
  }
  if (reached != spec.open_cells_.size()) {
    fail(ErrorCode::Disconnected, "open cells form more than one connected region");
  }
  if (goal_cell) spec.goal_ = spec.state_at(*goal_cell);
  return spec;
}

GridSpec GridSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open maze file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.stem().string());
}

bool GridSpec::is_open(Cell c) const { return index_of(c).has_value(); }

std::optional<std::size_t> GridSpec::index_of(Cell c) const {
  if (!in_bounds(c)) return std::nullopt;
  const auto v = index_grid_[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
                             static_cast<std::size_t>(c.x)];
  if (v < 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

GridState GridSpec::state(std::size_t index) const {
  if (index >= open_cells_.size()) fail(ErrorCode::InvalidArgument, "state index out of range");
  return {index, open_cells_[index]};
}

GridState GridSpec::state_at(Cell c) const {
  const auto idx = index_of(c);
  if (!idx) fail(ErrorCode::InvalidArgument, "cell is not open");
  return {*idx, c};
}

std::string GridSpec::to_text() const {
  std::string out;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const Cell c{x, y};
      if (!is_open(c)) out += '#';
      else if (goal_ && goal_->xy == c) out += 'G';
      else out += '.';
    }
    out += '\n';
  }
  return out;
}

GridState step(const GridSpec& spec, GridState s, Action a) {
  const Cell d = offset(a);
  const Cell next{s.xy.x + d.x, s.xy.y + d.y};
  if (auto idx = spec.index_of(next)) return {*idx, next};
  return s;
}

std::size_t feature_dim(const GridSpec& spec, ReprKind kind) {
  return kind == ReprKind::Index ? spec.num_states() : 2;
}

namespace {
double scale_coord(int v, int extent) {
  if (extent <= 1) return 0.0;
  return 2.0 * static_cast<double>(v) / static_cast<double>(extent - 1) - 1.0;
}
}  // namespace

void encode_into(const GridSpec& spec, GridState s, ReprKind kind, std::span<double> out) {
  if (out.size() != feature_dim(spec, kind)) {
    fail(ErrorCode::ShapeMismatch, "feature buffer has the wrong size");
  }
  if (kind == ReprKind::Index) {
    std::fill(out.begin(), out.end(), 0.0);
    out[s.index] = 1.0;
  } else {
    out[0] = scale_coord(s.xy.x, spec.width());
    out[1] = scale_coord(s.xy.y, spec.height());
  }
}

std::vector<double> encode(const GridSpec& spec, GridState s, ReprKind kind) {
  std::vector<double> out(feature_dim(spec, kind));
  encode_into(spec, s, kind, out);
  return out;
}

Action uniform_policy_action(Rng& rng) {
  return kActions[uniform_index(rng, kNumActions)];
}

std::vector<std::size_t> bfs_distances(const GridSpec& spec, GridState from) {
  constexpr auto kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(spec.num_states(), kInf);
  std::deque<std::size_t> frontier{from.index};
  dist[from.index] = 0;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop_front();
    for (Action a : kActions) {
      const auto v = step(spec, spec.state(u), a).index;
      if (dist[v] == kInf) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace laprep::grid
