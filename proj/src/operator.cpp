#include "nlfd/operator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>

#include "nlfd/error.hpp"
#include "nlfd/special.hpp"

namespace nlfd {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

using Complex = std::complex<double>;

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int k = 0; k < exp; ++k) r *= base;
  return r;
}

}  // namespace

// Circular convolution with a fixed real even kernel on a P^N periodic buffer.
struct DiscreteOperator::Convolver {
  int dim = 1;
  int n = 0;
  int P = 0;
  std::vector<double> spectrum;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  std::size_t buffer_size() const { return ipow(static_cast<std::size_t>(P), dim); }
  std::size_t spectrum_size() const {
    return dim == 1 ? static_cast<std::size_t>(P / 2 + 1)
                    : static_cast<std::size_t>(P) * static_cast<std::size_t>(P / 2 + 1);
  }

  Convolver(int dim_, int n_, int P_, const std::vector<double>& circulant)
      : dim(dim_), n(n_), P(P_) {
    std::vector<double> real(buffer_size());
    std::vector<Complex> freq(spectrum_size());
    {
      std::lock_guard lock(fftw_planner_mutex());
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      if (dim == 1) {
        forward = fftw_plan_dft_r2c_1d(P, real.data(), as_fftw(freq.data()), flags);
        backward = fftw_plan_dft_c2r_1d(P, as_fftw(freq.data()), real.data(), flags);
      } else {
        forward = fftw_plan_dft_r2c_2d(P, P, real.data(), as_fftw(freq.data()), flags);
        backward = fftw_plan_dft_c2r_2d(P, P, as_fftw(freq.data()), real.data(), flags);
      }
    }
    real = circulant;
    fftw_execute_dft_r2c(forward, real.data(), as_fftw(freq.data()));
    spectrum.resize(freq.size());
    const double scale = 1.0 / static_cast<double>(buffer_size());
    for (std::size_t k = 0; k < freq.size(); ++k) spectrum[k] = freq[k].real() * scale;
  }

  ~Convolver() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  void convolve(std::span<const double> f, std::span<double> out) const {
    std::vector<double> real(buffer_size(), 0.0);
    std::vector<Complex> freq(spectrum_size());
    const std::size_t un = static_cast<std::size_t>(n);
    const std::size_t uP = static_cast<std::size_t>(P);
    if (dim == 1) {
      std::copy(f.begin(), f.end(), real.begin());
    } else {
      for (std::size_t i = 0; i < un; ++i) {
        std::copy_n(f.begin() + i * un, un, real.begin() + i * uP);
      }
    }
    fftw_execute_dft_r2c(forward, real.data(), as_fftw(freq.data()));
    for (std::size_t k = 0; k < freq.size(); ++k) freq[k] *= spectrum[k];
    fftw_execute_dft_c2r(backward, as_fftw(freq.data()), real.data());
    if (dim == 1) {
      std::copy_n(real.begin(), un, out.begin());
    } else {
      for (std::size_t i = 0; i < un; ++i) {
        std::copy_n(real.begin() + i * uP, un, out.begin() + i * un);
      }
    }
  }
};

namespace {

// Mean of the amplitude along a ray: int_0^1 a(x, x + d t^{-1/sigma} e) dt.
double ray_amplitude(const KernelSpec& kernel, const Point& x, const Point& e, double d) {
  if (kernel.family() == KernelFamily::fractional_power || kernel.epsilon() == 0.0) return 1.0;
  constexpr int kPanels = 40;
  const auto& rule = special::gauss_legendre(12);
  const double inv_sigma = 1.0 / kernel.sigma();
  double total = 0.0;
  double hi = 1.0;
  for (int k = 0; k < kPanels; ++k) {
    const double lo = 0.5 * hi;
    total += special::integrate_rule(rule, lo, hi, [&](double t) {
      const double r = d * std::pow(t, -inv_sigma);
      return kernel.amplitude(x, {x[0] + r * e[0], x[1] + r * e[1]});
    });
    hi = lo;
  }
  const double far = kernel.far_field_constant().value_or(kernel.normalization()) /
                     kernel.normalization();
  total += hi * far;
  const double lambda = kernel.lambda();
  return std::clamp(total, 1.0 / lambda, lambda);
}

// Exterior integral of J(x, .) over the complement of [-L, L]^N.
double exterior_leak(const KernelSpec& kernel, const Point& x, double L) {
  const double sigma = kernel.sigma();
  const double mu = kernel.normalization();
  if (kernel.dim() == 1) {
    const double dl = x[0] + L;
    const double dr = L - x[0];
    return mu / sigma *
           (std::pow(dl, -sigma) * ray_amplitude(kernel, x, {-1.0, 0.0}, dl) +
            std::pow(dr, -sigma) * ray_amplitude(kernel, x, {1.0, 0.0}, dr));
  }
  // Polar form mu/sigma * int rho(theta)^{-sigma} I(theta) dtheta, one side at a time.
  // Angle phi is measured from the outward side normal, so rho = d / cos(phi).
  const auto& rule = special::gauss_legendre(12);
  struct Side {
    Point normal;
    Point tangent;
    double d;
    double t_plus;   // extent along the tangent to the corner
    double t_minus;
  };
  const Side sides[4] = {
      {{1.0, 0.0}, {0.0, 1.0}, L - x[0], L - x[1], L + x[1]},
      {{-1.0, 0.0}, {0.0, -1.0}, L + x[0], L + x[1], L - x[1]},
      {{0.0, 1.0}, {-1.0, 0.0}, L - x[1], L + x[0], L - x[0]},
      {{0.0, -1.0}, {1.0, 0.0}, L + x[1], L - x[0], L + x[0]},
  };
  double total = 0.0;
  for (const Side& s : sides) {
    auto integrand = [&](double phi) {
      const double c = std::cos(phi);
      const double sn = std::sin(phi);
      const Point e{c * s.normal[0] + sn * s.tangent[0], c * s.normal[1] + sn * s.tangent[1]};
      const double rho = s.d / c;
      return std::pow(rho, -sigma) * ray_amplitude(kernel, x, e, rho);
    };
    for (double end : {std::atan(s.t_plus / s.d), -std::atan(s.t_minus / s.d)}) {
      // Panels graded toward the corner angle.
      double a = 0.0;
      for (int k = 1; k <= 8; ++k) {
        const double b = k == 8 ? end : end * (1.0 - std::pow(0.5, k));
        total += std::abs(special::integrate_rule(rule, std::min(a, b), std::max(a, b), integrand));
        a = b;
      }
    }
  }
  return mu / sigma * total;
}

// sum_{m != 0 outside the directly summed shells} of the periodic images, 1D.
double periodic_tail_1d(double mu, double sigma, double h, int n, int d, int M) {
  const double nn = n;
  return mu * std::pow(h, -sigma) * std::pow(nn, -(1.0 + sigma)) *
         (special::hurwitz_zeta(1.0 + sigma, M + 1.0 + d / nn) +
          special::hurwitz_zeta(1.0 + sigma, M + 1.0 - d / nn));
}

double square_exterior_moment(double sigma) {
  // int_0^{2 pi} max(|cos|, |sin|)^sigma dtheta = 8 int_0^{pi/4} cos^sigma.
  return 8.0 * special::integrate_rule(special::gauss_legendre(32), 0.0, std::numbers::pi / 4.0,
                                       [&](double t) { return std::pow(std::cos(t), sigma); });
}

}  // namespace

DiscreteOperator DiscreteOperator::assemble_quadrature(const Grid& grid, const KernelSpec& kernel,
                                                       const AssemblyOptions& options) {
  if (grid.dim() != kernel.dim()) {
    throw Error(ErrorCode::grid_mismatch, "kernel and grid dimensions differ");
  }
  if (options.validate_kernel) {
    const HjReport report = validate_hj(kernel, 1000, options.validation_seed);
    if (!report.swap_symmetry_ok || !report.envelope_ok) {
      throw Error(ErrorCode::invalid_argument, "kernel fails symmetry or envelope validation");
    }
    if (kernel.sigma() >= 1.0 && !report.z_evenness_ok) {
      throw Error(ErrorCode::invalid_argument, "kernel lacks z-evenness but sigma >= 1");
    }
  }
  const bool periodic = grid.boundary_mode() == BoundaryMode::periodic;
  if (periodic && kernel.family() == KernelFamily::midpoint_general && kernel.epsilon() != 0.0) {
    throw Error(ErrorCode::invalid_argument, "midpoint_general kernels are not periodic");
  }

  DiscreteOperator op(grid, kernel);
  const int N = grid.dim();
  const int n = grid.points_per_axis();
  const double h = grid.spacing();
  const double hN = grid.cell_volume();
  const double mu = kernel.normalization();
  const double sigma = kernel.sigma();
  const bool rank_one = kernel.family() == KernelFamily::midpoint_general;

  op.nearest_factor_ = options.near_field_correction
                           ? 1.0 - special::lattice_zeta(N, N + sigma - 2.0) / (2.0 * N)
                           : 1.0;

  // Offset profile t(z) h^N; the rank-one modulation of the midpoint family is applied separately.
  auto base = [&](double z0, double z1) {
    if (rank_one) return mu * std::pow(std::hypot(z0, z1), -(N + sigma)) * hN;
    return kernel.eval_offset({z0, z1}) * hN;
  };

  const std::size_t un = static_cast<std::size_t>(n);
  const std::size_t cells = grid.size();
  op.table_.assign(N == 1 ? un : un * un, 0.0);
  if (!periodic) {
    for (std::size_t a = 0; a < un; ++a) {
      for (std::size_t b = 0; b < (N == 1 ? 1 : un); ++b) {
        if (a == 0 && b == 0) continue;
        op.table_[a * (N == 1 ? 1 : un) + b] = base(a * h, b * h);
      }
    }
  } else if (N == 1) {
    const int M = options.periodic_images > 0 ? options.periodic_images : 64;
    const double P = n * h;
    // Offsets d and n - d are the same periodic distance; compute once so W is exactly symmetric.
    for (int d = 1; d <= n / 2; ++d) {
      double sum = 0.0;
      for (int m = -M; m <= M; ++m) sum += base(d * h + m * P, 0.0);
      sum += periodic_tail_1d(mu, sigma, h, n, d, M) * (kernel.far_field_constant().value_or(mu) / mu);
      op.table_[static_cast<std::size_t>(d)] = sum;
      op.table_[static_cast<std::size_t>(n - d)] = sum;
    }
  } else {
    const int M = options.periodic_images > 0 ? options.periodic_images : 6;
    const double P = n * h;
    const double Q = (M + 0.5) * P;
    const double tail = mu / sigma * std::pow(Q, -sigma) * square_exterior_moment(sigma) /
                        (static_cast<double>(n) * n) *
                        (kernel.far_field_constant().value_or(mu) / mu);
    for (int a = 0; a <= n / 2; ++a) {
      for (int b = 0; b <= n / 2; ++b) {
        if (a == 0 && b == 0) continue;
        double sum = 0.0;
        for (int m1 = -M; m1 <= M; ++m1) {
          for (int m2 = -M; m2 <= M; ++m2) sum += base(a * h + m1 * P, b * h + m2 * P);
        }
        for (int ra : {a, (n - a) % n}) {
          for (int rb : {b, (n - b) % n}) {
            op.table_[static_cast<std::size_t>(ra) * un + static_cast<std::size_t>(rb)] = sum + tail;
          }
        }
      }
    }
  }
  // Nearest-neighbour correction (offsets of unit lattice length).
  auto correct = [&](std::size_t idx) { op.table_[idx] += (op.nearest_factor_ - 1.0) * base(h, 0.0); };
  if (N == 1) {
    correct(1);
    if (periodic) correct(un - 1);
  } else {
    correct(1);
    correct(un);
    if (periodic) {
      correct(un - 1);
      correct((un - 1) * un);
    }
  }

  // Circulant embedding.
  const int P = periodic ? n : 2 * n;
  const std::size_t uP = static_cast<std::size_t>(P);
  std::vector<double> circ(N == 1 ? uP : uP * uP, 0.0);
  if (periodic) {
    circ = op.table_;
  } else if (N == 1) {
    for (std::size_t k = 1; k < un; ++k) {
      circ[k] = op.table_[k];
      circ[uP - k] = op.table_[k];
    }
  } else {
    for (int a = -(n - 1); a < n; ++a) {
      for (int b = -(n - 1); b < n; ++b) {
        const std::size_t ia = static_cast<std::size_t>((a + P) % P);
        const std::size_t ib = static_cast<std::size_t>((b + P) % P);
        circ[ia * uP + ib] = op.table_[static_cast<std::size_t>(std::abs(a)) * un +
                                       static_cast<std::size_t>(std::abs(b))];
      }
    }
  }
  op.convolver_ = std::make_shared<const Convolver>(N, n, P, circ);

  if (rank_one) {
    op.modulation_amplitude_ = kernel.epsilon();
    op.modulation_.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      op.modulation_[c] = std::sin(kernel.scale() * grid.center(c)[0]);
    }
  }

  // Row sums.
  op.row_sums_.assign(cells, 0.0);
  if (N == 1 && !periodic) {
    std::vector<double> prefix(un, 0.0);
    for (std::size_t k = 1; k < un; ++k) prefix[k] = prefix[k - 1] + op.table_[k];
    for (std::size_t i = 0; i < un; ++i) op.row_sums_[i] = prefix[i] + prefix[un - 1 - i];
  } else if (periodic) {
    double total = 0.0;
    for (double t : op.table_) total += t;
    std::fill(op.row_sums_.begin(), op.row_sums_.end(), total);
  } else {
    std::vector<double> ones(cells, 1.0);
    op.convolver_->convolve(ones, op.row_sums_);
  }
  if (rank_one) {
    std::vector<double> ts(cells);
    op.convolver_->convolve(op.modulation_, ts);
    for (std::size_t c = 0; c < cells; ++c) {
      op.row_sums_[c] += op.modulation_amplitude_ * op.modulation_[c] * ts[c];
    }
  }

  op.leak_.assign(cells, 0.0);
  if (!periodic) {
    const double L = grid.half_width();
    for (std::size_t c = 0; c < cells; ++c) op.leak_[c] = exterior_leak(kernel, grid.center(c), L);
  }
  return op;
}

double DiscreteOperator::weight(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  const std::size_t n = static_cast<std::size_t>(grid_.points_per_axis());
  const bool periodic = grid_.boundary_mode() == BoundaryMode::periodic;
  auto offset = [&](std::size_t a, std::size_t b) -> std::size_t {
    if (periodic) return (b + n - a) % n;
    return a > b ? a - b : b - a;
  };
  double t;
  if (grid_.dim() == 1) {
    t = table_[offset(i, j)];
  } else {
    t = table_[offset(i / n, j / n) * n + offset(i % n, j % n)];
  }
  if (!modulation_.empty()) t *= 1.0 + modulation_amplitude_ * (modulation_[i] * modulation_[j]);
  return t;
}

void DiscreteOperator::apply_weights(std::span<const double> f, std::span<double> out) const {
  if (f.size() != grid_.size() || out.size() != grid_.size()) {
    throw Error(ErrorCode::grid_mismatch, "field size does not match operator grid");
  }
  convolver_->convolve(f, out);
  if (!modulation_.empty()) {
    std::vector<double> sf(f.size()), tsf(f.size());
    for (std::size_t c = 0; c < f.size(); ++c) sf[c] = modulation_[c] * f[c];
    convolver_->convolve(sf, tsf);
    for (std::size_t c = 0; c < f.size(); ++c) out[c] += modulation_amplitude_ * modulation_[c] * tsf[c];
  }
}

void DiscreteOperator::apply(std::span<const double> f, std::span<double> out) const {
  apply_weights(f, out);
  for (std::size_t c = 0; c < f.size(); ++c) out[c] = (row_sums_[c] + leak_[c]) * f[c] - out[c];
}

Field DiscreteOperator::apply(const Field& field) const {
  if (field.grid != grid_) throw Error(ErrorCode::grid_mismatch, "field lives on a different grid");
  Field out(grid_);
  apply(field.values, out.values);
  return out;
}

std::vector<double> DiscreteOperator::dense_weights() const {
  const std::size_t cells = grid_.size();
  std::vector<double> dense(cells * cells);
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t j = 0; j < cells; ++j) dense[i * cells + j] = weight(i, j);
  }
  return dense;
}

void DiscreteOperator::write_diagnostics_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  out << std::setprecision(17);
  out << (grid_.dim() == 1 ? "x,row_sum,leak\n" : "x,y,row_sum,leak\n");
  for (std::size_t c = 0; c < grid_.size(); ++c) {
    const Point p = grid_.center(c);
    out << p[0] << ',';
    if (grid_.dim() == 2) out << p[1] << ',';
    out << row_sums_[c] << ',' << leak_[c] << '\n';
  }
}

Field apply_spectral(const Field& field, double sigma) {
  const Grid& grid = field.grid;
  if (grid.boundary_mode() != BoundaryMode::periodic) {
    throw Error(ErrorCode::invalid_argument, "spectral application needs a periodic grid");
  }
  const int n = grid.points_per_axis();
  const std::size_t un = static_cast<std::size_t>(n);
  const double base = std::numbers::pi / grid.half_width();
  std::vector<double> real = field.values;
  const std::size_t half = un / 2 + 1;
  std::vector<Complex> freq(grid.dim() == 1 ? half : un * half);
  fftw_plan fwd;
  fftw_plan bwd;
  {
    std::lock_guard lock(fftw_planner_mutex());
    const unsigned flags = FFTW_ESTIMATE;
    if (grid.dim() == 1) {
      fwd = fftw_plan_dft_r2c_1d(n, real.data(), as_fftw(freq.data()), flags);
      bwd = fftw_plan_dft_c2r_1d(n, as_fftw(freq.data()), real.data(), flags);
    } else {
      fwd = fftw_plan_dft_r2c_2d(n, n, real.data(), as_fftw(freq.data()), flags);
      bwd = fftw_plan_dft_c2r_2d(n, n, as_fftw(freq.data()), real.data(), flags);
    }
  }
  real = field.values;
  fftw_execute(fwd);
  auto wavenumber = [&](std::size_t k) {
    return static_cast<double>(k <= un / 2 ? static_cast<long>(k) : static_cast<long>(k) - n);
  };
  const double norm = 1.0 / static_cast<double>(grid.size());
  if (grid.dim() == 1) {
    for (std::size_t k = 0; k < half; ++k) {
      freq[k] *= std::pow(base * static_cast<double>(k), sigma) * norm;
    }
  } else {
    for (std::size_t a = 0; a < un; ++a) {
      for (std::size_t b = 0; b < half; ++b) {
        const double xi = base * std::hypot(wavenumber(a), static_cast<double>(b));
        freq[a * half + b] *= std::pow(xi, sigma) * norm;
      }
    }
  }
  fftw_execute(bwd);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  return Field(grid, std::move(real));
}

double energy(const DiscreteOperator& op, std::span<const double> f, std::span<const double> g) {
  const std::size_t cells = op.grid().size();
  if (f.size() != cells || g.size() != cells) {
    throw Error(ErrorCode::grid_mismatch, "field size does not match operator grid");
  }
  double pairs = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < cells; ++j) row += op.weight(i, j) * (f[i] - f[j]) * (g[i] - g[j]);
    pairs += row;
  }
  double exterior = 0.0;
  const auto leak = op.leak();
  for (std::size_t i = 0; i < cells; ++i) exterior += leak[i] * f[i] * g[i];
  return pairs + exterior;
}

double energy(const DiscreteOperator& op, const Field& f, const Field& g) {
  if (f.grid != op.grid() || g.grid != op.grid()) {
    throw Error(ErrorCode::grid_mismatch, "fields live on a different grid");
  }
  return energy(op, std::span<const double>(f.values), std::span<const double>(g.values));
}

double pairing(const DiscreteOperator& op, std::span<const double> f, std::span<const double> g) {
  std::vector<double> lf(f.size());
  op.apply(f, lf);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += lf[i] * g[i];
  return sum;
}

double smooth_cutoff(double s) noexcept {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double a = std::exp(-1.0 / (2.0 - s));
  const double b = std::exp(-1.0 / (s - 1.0));
  return a / (a + b);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorCode::invalid_argument, "slope fit needs >= 2 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

CutoffScalingTable cutoff_scaling_check(const KernelSpec& kernel, double q,
                                        const std::vector<double>& radii, double spacing,
                                        double box_factor) {
  if (!(q >= 1.0)) throw Error(ErrorCode::invalid_argument, "q must be at least 1");
  const int N = kernel.dim();
  CutoffScalingTable table;
  table.q = q;
  table.expected_slope = -kernel.sigma() + (std::isinf(q) ? 0.0 : N / q);
  std::vector<double> rs, norms;
  for (double R : radii) {
    const double L = box_factor * R;
    int n = static_cast<int>(std::lround(2.0 * L / spacing));
    n += n % 2;
    const Grid grid = make_grid(N, L, n, BoundaryMode::exterior_zero);
    const DiscreteOperator op = DiscreteOperator::assemble_quadrature(grid, kernel);
    Field phi(grid);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      phi[c] = smooth_cutoff(distance(grid.center(c), {0.0, 0.0}) / R);
    }
    const Field lphi = op.apply(phi);
    double norm;
    if (std::isinf(q)) {
      norm = max_norm(lphi.values);
    } else {
      double acc = 0.0;
      for (double v : lphi.values) acc += std::pow(std::abs(v), q);
      acc *= grid.cell_volume();
      // Outside the box L phi_R ~ -mu |x|^{-(N+sigma)} int phi_R.
      const double far = kernel.normalization() * integrate(phi);
      const double decay = (N + kernel.sigma()) * q - N;
      const double surface = N == 1 ? 2.0 : 2.0 * std::numbers::pi;
      acc += surface * std::pow(far, q) * std::pow(L, -decay) / decay;
      norm = std::pow(acc, 1.0 / q);
    }
    table.rows.push_back({R, norm});
    rs.push_back(R);
    norms.push_back(norm);
  }
  table.slope = loglog_slope(rs, norms);
  return table;
}

}  // namespace nlfd
