#include "core/export.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fourtop::post {

PixelBuffer render_pixels(const FineField& field,
                          const mat::MaterialCatalog* catalog) {
  PixelBuffer px;
  px.width = field.nx;
  px.height = field.ny;
  const bool multi = field.channels() > 1;
  if (multi && (!catalog || catalog->size() != field.channels()))
    throw std::invalid_argument(
        "render_pixels: multi-material field needs a matching catalog");
  px.channels = multi ? 3 : 1;
  px.data.resize(static_cast<std::size_t>(px.width) * px.height * px.channels);

  for (int iy = 0; iy < field.ny; ++iy) {
    const int out_row = field.ny - 1 - iy;  // y up -> top row first
    for (int ix = 0; ix < field.nx; ++ix) {
      const std::size_t o =
          (static_cast<std::size_t>(out_row) * px.width + ix) * px.channels;
      if (!multi) {
        const double v = std::clamp(field.at(ix, iy), 0.0, 1.0);
        px.data[o] = static_cast<unsigned char>(std::lround(255.0 * (1.0 - v)));
      } else {
        int best = 0;
        for (int c = 1; c < field.channels(); ++c)
          if (field.at(ix, iy, c) > field.at(ix, iy, best)) best = c;
        const auto& color = catalog->entries[best].color;
        px.data[o] = color[0];
        px.data[o + 1] = color[1];
        px.data[o + 2] = color[2];
      }
    }
  }
  return px;
}

void write_png(const std::filesystem::path& path, const PixelBuffer& pixels) {
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw IoError("cannot open image for writing: " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw IoError("png encoding failed: " + path.string());
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, pixels.width, pixels.height, 8,
               pixels.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride =
      static_cast<std::size_t>(pixels.width) * pixels.channels;
  for (int r = 0; r < pixels.height; ++r)
    png_write_row(png,
                  const_cast<png_bytep>(pixels.data.data() + r * stride));
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

void write_density_csv(const std::filesystem::path& path,
                       const FineField& field) {
  std::ofstream os = open_out(path);
  os << "# nx=" << field.nx << " ny=" << field.ny << " s=" << field.s
     << " h=" << fmt(field.h) << "\n";
  const Eigen::VectorXd ind = field.solid_indicator();
  for (int iy = field.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < field.nx; ++ix) {
      if (ix) os << ',';
      os << fmt(ind[static_cast<Eigen::Index>(iy) * field.nx + ix]);
    }
    os << '\n';
  }
  if (!os) throw IoError("failed while writing: " + path.string());
}

Eigen::MatrixXd read_density_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path.string());
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty density grid: " + path.string());
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size())
      throw IoError("ragged density grid: " + path.string());
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<opt::HistoryRow>& history) {
  std::ofstream os = open_out(path);
  os << "epoch,loss,compliance,volume_or_mass_fraction,gray_fraction,alpha,p\n";
  for (const auto& r : history)
    os << r.epoch << ',' << fmt(r.loss, "%.10g") << ','
       << fmt(r.compliance, "%.10g") << ','
       << fmt(r.vol_or_mass_fraction, "%.10g") << ','
       << fmt(r.gray_fraction, "%.10g") << ',' << fmt(r.alpha, "%.10g") << ','
       << fmt(r.p, "%.10g") << '\n';
  if (!os) throw IoError("failed while writing: " + path.string());
}

void write_spectrum_csv(const std::filesystem::path& path,
                        const Spectrum2D& spectrum) {
  std::ofstream os = open_out(path);
  os << "fx,fy,magnitude\n";
  for (Eigen::Index ky = 0; ky < spectrum.fy.size(); ++ky)
    for (Eigen::Index kx = 0; kx < spectrum.fx.size(); ++kx)
      os << fmt(spectrum.fx[kx]) << ',' << fmt(spectrum.fy[ky]) << ','
         << fmt(spectrum.mag(ky, kx)) << '\n';
  if (!os) throw IoError("failed while writing: " + path.string());
}

void write_features_csv(const std::filesystem::path& path,
                        const FeatureSizeReport& report) {
  std::ofstream os = open_out(path);
  os << "min_thickness,median_thickness,max_thickness,threshold,empty_solid\n";
  os << fmt(report.min_thickness) << ',' << fmt(report.median_thickness) << ','
     << fmt(report.max_thickness) << ',' << fmt(report.threshold) << ','
     << (report.empty_solid ? 1 : 0) << '\n';
  if (!os) throw IoError("failed while writing: " + path.string());
}

}  // namespace fourtop::post
