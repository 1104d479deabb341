#include "core/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <tuple>

namespace fourtop::post {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Eigen::VectorXd FineField::solid_indicator() const {
  if (channels() == 1) return values.col(0);
  return (1.0 - values.col(0).array()).matrix();
}

FineField extract_highres(net::Network& network,
                          const opt::InputMap& input_map,
                          const fea::GridMesh& mesh,
                          const mat::MaterialCatalog* catalog, int s) {
  if (s < 1) throw std::invalid_argument("extract_highres: s must be >= 1");

  FineField f;
  f.nx = mesh.nelx * s;
  f.ny = mesh.nely * s;
  f.s = s;
  f.h = mesh.h;
  const Eigen::Index n = static_cast<Eigen::Index>(f.nx) * f.ny;

  // evaluate in blocks; eval mode is row-independent so blocking is exact
  f.values.resize(n, network.arch().n_o);
  constexpr Eigen::Index kBlock = 16384;
  Eigen::MatrixXd points(std::min(kBlock, n), 2);
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, n - start);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index idx = start + r;
      const Eigen::Index ix = idx % f.nx;
      const Eigen::Index iy = idx / f.nx;
      points(r, 0) = (ix + 0.5) * mesh.h / s;
      points(r, 1) = (iy + 0.5) * mesh.h / s;
    }
    f.values.middleRows(start, rows) =
        network.forward(input_map(points.topRows(rows)), net::Mode::kEval);
  }

  // passive overrides at fine resolution: a pixel inherits its parent element
  auto override_element = [&](int e, bool solid) {
    const int ei = e % mesh.nelx;
    const int ej = e / mesh.nelx;
    for (int b = 0; b < s; ++b)
      for (int a = 0; a < s; ++a) {
        const Eigen::Index row =
            static_cast<Eigen::Index>(ej * s + b) * f.nx + (ei * s + a);
        if (f.values.cols() == 1) {
          f.values(row, 0) = solid ? 1.0 : 1e-3;
        } else {
          int strongest = 1;
          for (int i = 2; i < catalog->size(); ++i)
            if (catalog->entries[i].young > catalog->entries[strongest].young)
              strongest = i;
          f.values.row(row).setZero();
          f.values(row, solid ? strongest : 0) = 1.0;
        }
      }
  };
  for (int e : mesh.passive_solid) override_element(e, true);
  for (int e : mesh.passive_void) override_element(e, false);
  return f;
}

FineField fine_from_elements(const fea::GridMesh& mesh,
                             const Eigen::MatrixXd& densities) {
  FineField f;
  f.nx = mesh.nelx;
  f.ny = mesh.nely;
  f.s = 1;
  f.h = mesh.h;
  f.values = densities;
  return f;
}

Spectrum1D density_spectrum(const Eigen::VectorXd& samples, double spacing,
                            double h) {
  const Eigen::Index n = samples.size();
  if (n < 4)
    throw std::invalid_argument("density_spectrum: need at least 4 samples");
  if (!(spacing > 0.0))
    throw std::invalid_argument("density_spectrum: spacing must be positive");

  const Eigen::Index half = n / 2;
  Spectrum1D sp;
  sp.freq.resize(half + 1);
  sp.mag.resize(half + 1);
  const double scale = 1.0 / std::sqrt(double(n));
  for (Eigen::Index k = 0; k <= half; ++k) {
    double re = 0.0, im = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      // angle reduced mod n to keep precision for large k*j
      const double ang = 2.0 * kPi * double((k * j) % n) / double(n);
      re += samples[j] * std::cos(ang);
      im -= samples[j] * std::sin(ang);
    }
    const double p2 = re * re + im * im;
    const bool self_conjugate = (k == 0) || (n % 2 == 0 && k == half);
    sp.mag[k] = scale * std::sqrt(self_conjugate ? p2 : 2.0 * p2);
    sp.freq[k] = 2.0 * h * double(k) / (double(n) * spacing);
  }
  return sp;
}

Spectrum2D density_spectrum(const Eigen::MatrixXd& grid, double spacing,
                            double h) {
  const Eigen::Index ny = grid.rows(), nx = grid.cols();
  if (ny * nx < 4)
    throw std::invalid_argument("density_spectrum: need at least 4 samples");
  if (!(spacing > 0.0))
    throw std::invalid_argument("density_spectrum: spacing must be positive");

  using Cplx = std::complex<double>;
  using CMat = Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic>;

  auto dft_axis = [](const CMat& in, bool along_rows) {
    // along_rows: transform each row (length = cols)
    const Eigen::Index m = along_rows ? in.cols() : in.rows();
    CMat out = in;
    Eigen::VectorXcd twiddle(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index idx = 0; idx < m; ++idx) {
        const double ang = -2.0 * kPi * double((k * idx) % m) / double(m);
        twiddle[idx] = Cplx(std::cos(ang), std::sin(ang));
      }
      if (along_rows)
        out.col(k) = in * twiddle;
      else
        out.row(k) = twiddle.transpose() * in;
    }
    return out;
  };

  CMat x = grid.cast<Cplx>();
  x = dft_axis(x, true);   // along x
  x = dft_axis(x, false);  // along y

  Spectrum2D sp;
  sp.mag = x.cwiseAbs() / std::sqrt(double(nx * ny));
  sp.fx.resize(nx);
  sp.fy.resize(ny);
  for (Eigen::Index k = 0; k < nx; ++k) {
    const double kk = k <= nx / 2 ? double(k) : double(k) - double(nx);
    sp.fx[k] = 2.0 * h * kk / (double(nx) * spacing);
  }
  for (Eigen::Index k = 0; k < ny; ++k) {
    const double kk = k <= ny / 2 ? double(k) : double(k) - double(ny);
    sp.fy[k] = 2.0 * h * kk / (double(ny) * spacing);
  }
  return sp;
}

namespace {

// 1D squared-distance transform by the lower envelope of parabolas.
void dt_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n, 0);
  std::vector<double> z(n + 1, 0.0);
  int k = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

Eigen::MatrixXd distance_transform(const std::vector<std::uint8_t>& solid,
                                   int nx, int ny) {
  if (static_cast<int>(solid.size()) != nx * ny)
    throw std::invalid_argument("distance_transform: mask size mismatch");

  // pad with a one-pixel void ring so the image border counts as void
  const int px = nx + 2, py = ny + 2;
  const double inf = 1e18;
  std::vector<double> g(static_cast<std::size_t>(px) * py, 0.0);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x)
      g[static_cast<std::size_t>(y + 1) * px + (x + 1)] =
          solid[static_cast<std::size_t>(y) * nx + x] ? inf : 0.0;

  std::vector<double> col(py), colD(py);
  for (int x = 0; x < px; ++x) {
    for (int y = 0; y < py; ++y) col[y] = g[static_cast<std::size_t>(y) * px + x];
    dt_1d(col, colD);
    for (int y = 0; y < py; ++y) g[static_cast<std::size_t>(y) * px + x] = colD[y];
  }
  std::vector<double> row(px), rowD(px);
  Eigen::MatrixXd dist(ny, nx);
  for (int y = 0; y < py; ++y) {
    for (int x = 0; x < px; ++x) row[x] = g[static_cast<std::size_t>(y) * px + x];
    dt_1d(row, rowD);
    if (y >= 1 && y <= ny)
      for (int x = 1; x <= nx; ++x) dist(y - 1, x - 1) = std::sqrt(rowD[x]);
  }
  return dist;
}

FeatureSizeReport feature_size(const FineField& field, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("feature_size: threshold must lie in (0, 1)");

  FeatureSizeReport rep;
  rep.threshold = threshold;
  const int nx = field.nx, ny = field.ny;
  const Eigen::VectorXd ind = field.solid_indicator();
  std::vector<std::uint8_t> solid(static_cast<std::size_t>(nx) * ny, 0);
  std::size_t n_solid = 0;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const bool s = ind[static_cast<Eigen::Index>(y) * nx + x] >= threshold;
      solid[static_cast<std::size_t>(y) * nx + x] = s ? 1 : 0;
      n_solid += s;
    }

  rep.thickness_map = Eigen::MatrixXd::Zero(ny, nx);
  if (n_solid == 0) {
    rep.empty_solid = true;
    return rep;
  }

  const Eigen::MatrixXd edt = distance_transform(solid, nx, ny);
  const double pixel = field.spacing();

  // medial axis: local EDT maxima over the 8-neighborhood
  std::vector<std::tuple<double, int, int>> skeleton;  // edt, x, y
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const double d0 = edt(y, x);
      if (d0 <= 0.0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int xx = x + dx, yy = y + dy;
          const double dn =
              (xx < 0 || yy < 0 || xx >= nx || yy >= ny) ? 0.0 : edt(yy, xx);
          if (dn > d0) {
            is_max = false;
            break;
          }
        }
      if (is_max) skeleton.emplace_back(d0, x, y);
    }

  // local thickness: every solid pixel takes the diameter of the largest
  // medial-axis ball covering it. Aggregating over pixels weights members by
  // area, so isolated speckles cannot dominate the median.
  rep.thickness_map = Eigen::MatrixXd::Zero(ny, nx);
  for (const auto& [r, cx, cy] : skeleton) {
    const int reach = static_cast<int>(std::floor(r));
    const double t = 2.0 * pixel * r;
    for (int dy = -reach; dy <= reach; ++dy) {
      const int y = cy + dy;
      if (y < 0 || y >= ny) continue;
      for (int dx = -reach; dx <= reach; ++dx) {
        const int x = cx + dx;
        if (x < 0 || x >= nx) continue;
        if (solid[static_cast<std::size_t>(y) * nx + x] &&
            dx * dx + dy * dy <= r * r && rep.thickness_map(y, x) < t)
          rep.thickness_map(y, x) = t;
      }
    }
  }

  std::vector<double> per_pixel;
  per_pixel.reserve(n_solid);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x)
      if (solid[static_cast<std::size_t>(y) * nx + x] &&
          rep.thickness_map(y, x) > 0.0)
        per_pixel.push_back(rep.thickness_map(y, x));

  std::sort(per_pixel.begin(), per_pixel.end());
  const std::size_t m = per_pixel.size();
  rep.min_thickness = per_pixel.front();
  rep.max_thickness = per_pixel.back();
  rep.median_thickness =
      m % 2 == 1 ? per_pixel[m / 2]
                 : 0.5 * (per_pixel[m / 2 - 1] + per_pixel[m / 2]);
  return rep;
}

}  // namespace fourtop::post
