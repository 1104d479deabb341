#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/postproc.hpp"

namespace fourtop::post {

// 8-bit pixel buffer, top row first. Single-channel fields map density to
// grayscale (0 = void/white, 1 = solid/black); multi-material fields color
// each pixel by the argmax phase of the catalog.
struct PixelBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 gray, 3 rgb
  std::vector<unsigned char> data;
};

PixelBuffer render_pixels(const FineField& field,
                          const mat::MaterialCatalog* catalog);

void write_png(const std::filesystem::path& path, const PixelBuffer& pixels);

// Density grid as comma-delimited text, 6 significant digits, one '#' header
// line carrying the grid shape; rows run top to bottom like the image.
void write_density_csv(const std::filesystem::path& path,
                       const FineField& field);
Eigen::MatrixXd read_density_csv(const std::filesystem::path& path);

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<opt::HistoryRow>& history);

void write_spectrum_csv(const std::filesystem::path& path,
                        const Spectrum2D& spectrum);

void write_features_csv(const std::filesystem::path& path,
                        const FeatureSizeReport& report);

}  // namespace fourtop::post
