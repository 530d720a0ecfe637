#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nlfd {

enum class BoundaryMode { exterior_zero, periodic };

const char* to_string(BoundaryMode mode) noexcept;
BoundaryMode boundary_mode_from_string(const std::string& name);

/// Point in R^N for N <= 2; unused trailing coordinates are zero.
using Point = std::array<double, 2>;

/// Uniform cell-centred lattice on the box [-L, L]^N.
///
/// Node coordinates along each axis are x_i = -L + (i + 1/2) h with h = 2L/n,
/// so no node sits on the box boundary. Cells are stored row-major: the cell
/// with axis indices (i, j) has linear index i * n + j.
class Grid {
 public:
  Grid(int dim, double half_width, int points_per_axis, BoundaryMode mode);

  int dim() const noexcept { return dim_; }
  double half_width() const noexcept { return half_width_; }
  int points_per_axis() const noexcept { return n_; }
  BoundaryMode boundary_mode() const noexcept { return mode_; }
  double spacing() const noexcept { return 2.0 * half_width_ / n_; }
  double cell_volume() const noexcept;
  std::size_t size() const noexcept;

  /// Coordinate of axis index i (identical for every axis).
  double coordinate(int i) const noexcept { return -half_width_ + (i + 0.5) * spacing(); }
  Point center(std::size_t cell) const noexcept;
  std::array<int, 2> axis_indices(std::size_t cell) const noexcept;

  bool operator==(const Grid& other) const noexcept;
  bool operator!=(const Grid& other) const noexcept { return !(*this == other); }

 private:
  int dim_;
  double half_width_;
  int n_;
  BoundaryMode mode_;
};

Grid make_grid(int dim, double half_width, int points_per_axis,
               BoundaryMode mode = BoundaryMode::exterior_zero);

/// Sampled scalar field, one value per grid cell.
struct Field {
  Grid grid;
  std::vector<double> values;

  explicit Field(const Grid& g, double fill = 0.0);
  Field(const Grid& g, std::vector<double> v);

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<const double> view() const noexcept { return values; }
};

/// Midpoint rule: h^N * sum of values.
double integrate(const Field& field);

double max_norm(std::span<const double> values);
double min_value(std::span<const double> values);

/// Indices of cells whose centres lie in the open ball B_radius(center).
/// Throws degenerate_ball when radius < h/2 or the set is empty.
std::vector<std::size_t> ball_restriction(const Field& field, const Point& center, double radius);

/// Norm of r = |x - center| for a cell centre.
double distance(const Point& a, const Point& b) noexcept;

void write_field_csv(const Field& field, const std::string& path);

/// Flat binary layout: int64 dim, int64 n, float64 L, float64 time, then n^N
/// float64 values in row-major order, native (little-endian) byte order.
void write_field_binary(const Field& field, double time, const std::string& path);

struct FieldFile {
  Field field;
  double time;
};

FieldFile read_field_binary(const std::string& path,
                            BoundaryMode mode = BoundaryMode::exterior_zero);

}  // namespace nlfd
