#include "nlfd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>

#include "nlfd/error.hpp"

namespace nlfd {

const char* to_string(BoundaryMode mode) noexcept {
  return mode == BoundaryMode::periodic ? "periodic" : "exterior_zero";
}

BoundaryMode boundary_mode_from_string(const std::string& name) {
  if (name == "exterior_zero") return BoundaryMode::exterior_zero;
  if (name == "periodic") return BoundaryMode::periodic;
  throw Error(ErrorCode::invalid_argument, "unknown boundary mode '" + name + "'");
}

Grid::Grid(int dim, double half_width, int points_per_axis, BoundaryMode mode)
    : dim_(dim), half_width_(half_width), n_(points_per_axis), mode_(mode) {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorCode::invalid_argument, "grid dimension must be 1 or 2");
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error(ErrorCode::invalid_argument, "grid half width must be positive");
  }
  if (points_per_axis < 16) {
    throw Error(ErrorCode::invalid_argument, "grid needs at least 16 points per axis");
  }
  if (points_per_axis % 2 != 0) {
    throw Error(ErrorCode::invalid_argument, "points per axis must be even");
  }
}

double Grid::cell_volume() const noexcept {
  const double h = spacing();
  return dim_ == 1 ? h : h * h;
}

std::size_t Grid::size() const noexcept {
  const auto n = static_cast<std::size_t>(n_);
  return dim_ == 1 ? n : n * n;
}

std::array<int, 2> Grid::axis_indices(std::size_t cell) const noexcept {
  if (dim_ == 1) return {static_cast<int>(cell), 0};
  const auto n = static_cast<std::size_t>(n_);
  return {static_cast<int>(cell / n), static_cast<int>(cell % n)};
}

Point Grid::center(std::size_t cell) const noexcept {
  const auto idx = axis_indices(cell);
  if (dim_ == 1) return {coordinate(idx[0]), 0.0};
  return {coordinate(idx[0]), coordinate(idx[1])};
}

bool Grid::operator==(const Grid& other) const noexcept {
  return dim_ == other.dim_ && half_width_ == other.half_width_ && n_ == other.n_ &&
         mode_ == other.mode_;
}

Grid make_grid(int dim, double half_width, int points_per_axis, BoundaryMode mode) {
  return Grid(dim, half_width, points_per_axis, mode);
}

Field::Field(const Grid& g, double fill) : grid(g), values(g.size(), fill) {}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::grid_mismatch, "field length does not match grid size");
  }
}

double integrate(const Field& field) {
  double sum = 0.0;
  for (double v : field.values) sum += v;
  return sum * field.grid.cell_volume();
}

double max_norm(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double min_value(std::span<const double> values) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values) m = std::min(m, v);
  return m;
}

double distance(const Point& a, const Point& b) noexcept {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

std::vector<std::size_t> ball_restriction(const Field& field, const Point& center, double radius) {
  const Grid& g = field.grid;
  if (!(radius >= 0.5 * g.spacing())) {
    throw Error(ErrorCode::degenerate_ball, "ball radius below half a cell");
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (distance(g.center(c), center) < radius) out.push_back(c);
  }
  if (out.empty()) {
    throw Error(ErrorCode::degenerate_ball, "ball contains no cell centre");
  }
  return out;
}

void write_field_csv(const Field& field, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot open " + path);
  os << std::setprecision(17);
  const Grid& g = field.grid;
  os << (g.dim() == 1 ? "x,value\n" : "x,y,value\n");
  for (std::size_t c = 0; c < g.size(); ++c) {
    const Point p = g.center(c);
    os << p[0] << ',';
    if (g.dim() == 2) os << p[1] << ',';
    os << field.values[c] << '\n';
  }
}

void write_field_binary(const Field& field, double time, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::io_error, "cannot open " + path);
  const std::int64_t dim = field.grid.dim();
  const std::int64_t n = field.grid.points_per_axis();
  const double L = field.grid.half_width();
  os.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&L), sizeof L);
  os.write(reinterpret_cast<const char*>(&time), sizeof time);
  os.write(reinterpret_cast<const char*>(field.values.data()),
           static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (!os) throw Error(ErrorCode::io_error, "write failed for " + path);
}

FieldFile read_field_binary(const std::string& path, BoundaryMode mode) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::io_error, "cannot open " + path);
  std::int64_t dim = 0;
  std::int64_t n = 0;
  double L = 0.0;
  double time = 0.0;
  is.read(reinterpret_cast<char*>(&dim), sizeof dim);
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&L), sizeof L);
  is.read(reinterpret_cast<char*>(&time), sizeof time);
  if (!is) throw Error(ErrorCode::io_error, "truncated header in " + path);
  Grid g(static_cast<int>(dim), L, static_cast<int>(n), mode);
  std::vector<double> values(g.size());
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!is) throw Error(ErrorCode::io_error, "truncated payload in " + path);
  return {Field(g, std::move(values)), time};
}

}  // namespace nlfd
