#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "core/materials.hpp"
#include "core/optimizer.hpp"

namespace fourtop::post {

// Densities sampled on an s x s sub-grid per element. Point (ix, iy) lives at
// row iy*nx + ix of values; iy grows with y.
struct FineField {
  int nx = 0;
  int ny = 0;
  int s = 1;
  double h = 1.0;           // coarse element edge length
  Eigen::MatrixXd values;   // (nx*ny) x n_o

  double spacing() const { return h / s; }
  int channels() const { return static_cast<int>(values.cols()); }
  double at(int ix, int iy, int c = 0) const {
    return values(static_cast<Eigen::Index>(iy) * nx + ix, c);
  }
  // rho for single-channel fields, 1 - rho_void otherwise
  Eigen::VectorXd solid_indicator() const;
};

// Forward-only sampling of the trained field on the fine grid (eval mode,
// running batch statistics); passive overrides are applied per parent
// element. Performs no weight updates.
FineField extract_highres(net::Network& network, const opt::InputMap& input_map,
                          const fea::GridMesh& mesh,
                          const mat::MaterialCatalog* catalog, int s);

// Element-center densities replicated to a FineField (used by the mesh-based
// baseline, s = 1).
FineField fine_from_elements(const fea::GridMesh& mesh,
                             const Eigen::MatrixXd& densities);

// Frequency axes carry f of cos(pi f x / h): half-cycles per h.
// Magnitudes use unitary 1/sqrt(N) scaling so Parseval holds as
// sum(mag^2) == sum(samples^2).
struct Spectrum1D {
  Eigen::VectorXd freq;
  Eigen::VectorXd mag;  // one-sided, energy-folded
};

Spectrum1D density_spectrum(const Eigen::VectorXd& samples, double spacing,
                            double h = 1.0);

struct Spectrum2D {
  Eigen::VectorXd fx;   // size nx, wrapped order (0.., then negative)
  Eigen::VectorXd fy;   // size ny
  Eigen::MatrixXd mag;  // ny x nx, two-sided
};

Spectrum2D density_spectrum(const Eigen::MatrixXd& grid /* ny x nx */,
                            double spacing, double h = 1.0);

// Exact squared Euclidean distance transform (Felzenszwalb-Huttenlocher),
// solid pixels to the nearest void pixel center; everything outside the
// image counts as void. Returns distances in pixels, 0 on void pixels.
Eigen::MatrixXd distance_transform(const std::vector<std::uint8_t>& solid,
                                   int nx, int ny);

struct FeatureSizeReport {
  bool empty_solid = false;
  double min_thickness = 0.0;
  double median_thickness = 0.0;
  double max_thickness = 0.0;
  double threshold = 0.5;
  Eigen::MatrixXd thickness_map;  // ny x nx, mesh length units, 0 on void
};

// Member thickness as twice the distance transform read on the medial axis
// (local maxima of the EDT), aggregated over the skeleton.
FeatureSizeReport feature_size(const FineField& field, double threshold = 0.5);

}  // namespace fourtop::post
