#include "nats/viewshed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nats/errors.hpp"

namespace nats {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

double Dem::height_interpolated(double row, double col) const {
  double r = std::clamp(row, 0.0, static_cast<double>(rows - 1));
  double c = std::clamp(col, 0.0, static_cast<double>(cols - 1));
  int r0 = static_cast<int>(std::floor(r));
  int c0 = static_cast<int>(std::floor(c));
  int r1 = std::min(r0 + 1, rows - 1);
  int c1 = std::min(c0 + 1, cols - 1);
  double fr = r - r0;
  double fc = c - c0;
  double top = height_at(r0, c0) * (1.0 - fc) + height_at(r0, c1) * fc;
  double bot = height_at(r1, c0) * (1.0 - fc) + height_at(r1, c1) * fc;
  return top * (1.0 - fr) + bot * fr;
}

Dem load_dem(std::istream& in, std::optional<double> nodata_fill) {
  Dem dem;
  long line_no = 0;
  std::string line;

  // Header: key/value pairs until the first line that starts numerically.
  std::optional<int> ncols, nrows;
  std::optional<double> cellsize, nodata;
  std::streampos data_start = in.tellg();
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) {  // blank line
      data_start = in.tellg();
      continue;
    }
    if (!key.empty() && (std::isdigit(static_cast<unsigned char>(key[0])) ||
                         key[0] == '-' || key[0] == '+' || key[0] == '.')) {
      break;  // first data row
    }
    double value;
    if (!(ls >> value)) {
      throw ParseError("header entry '" + key + "' has no numeric value", line_no);
    }
    std::string k = lower(key);
    if (k == "ncols") ncols = static_cast<int>(value);
    else if (k == "nrows") nrows = static_cast<int>(value);
    else if (k == "cellsize") cellsize = value;
    else if (k == "xllcorner" || k == "xllcenter") dem.x_origin = value;
    else if (k == "yllcorner" || k == "yllcenter") dem.y_origin = value;
    else if (k == "nodata_value") nodata = value;
    else throw ParseError("unknown header key '" + key + "'", line_no);
    data_start = in.tellg();
  }
  if (!ncols || !nrows || !cellsize) {
    throw ParseError("header must declare ncols, nrows and cellsize", line_no);
  }
  if (*ncols < 1 || *nrows < 1) {
    throw ParseError("raster dimensions must be positive", line_no);
  }
  if (*cellsize <= 0.0) {
    throw ParseError("cellsize must be positive", line_no);
  }

  dem.rows = *nrows;
  dem.cols = *ncols;
  dem.resolution = *cellsize;
  dem.heights.reserve(static_cast<std::size_t>(dem.rows) * dem.cols);

  // Re-read from the first data line, one row per line.
  in.clear();
  in.seekg(data_start);
  long data_line = line_no - 1;
  for (int r = 0; r < dem.rows; ++r) {
    if (!std::getline(in, line)) {
      throw ParseError("expected " + std::to_string(dem.rows) +
                       " data rows, got " + std::to_string(r), data_line + r);
    }
    ++data_line;
    std::istringstream ls(line);
    for (int c = 0; c < dem.cols; ++c) {
      double h;
      if (!(ls >> h)) {
        throw ParseError("row has " + std::to_string(c) + " values, expected " +
                         std::to_string(dem.cols), data_line);
      }
      if (nodata && h == *nodata) {
        if (!nodata_fill) {
          throw ParseError("nodata cell without a fill value", data_line);
        }
        h = *nodata_fill;
      }
      if (!std::isfinite(h)) {
        throw ParseError("non-finite height", data_line);
      }
      dem.heights.push_back(h);
    }
    double extra;
    if (ls >> extra) {
      throw ParseError("row has more than " + std::to_string(dem.cols) +
                       " values", data_line);
    }
  }
  return dem;
}

Dem load_dem(const std::string& path, std::optional<double> nodata_fill) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open DEM file '" + path + "'");
  }
  return load_dem(in, nodata_fill);
}

CoarseGrid coarsen(const Dem& dem, double spacing) {
  if (spacing < dem.resolution) {
    throw ConfigError("coarse spacing must be at least the DEM resolution");
  }
  double ratio = spacing / dem.resolution;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ConfigError("coarse spacing must be an integer multiple of the DEM "
                      "resolution");
  }

  CoarseGrid grid;
  grid.spacing = spacing;
  grid.spacing_pixels = std::round(ratio);
  int node_rows = static_cast<int>(std::floor(dem.height_meters() / spacing)) + 1;
  int node_cols = static_cast<int>(std::floor(dem.width_meters() / spacing)) + 1;
  grid.env = GridEnvironment(node_rows, node_cols, spacing);
  grid.node_elevation.reserve(static_cast<std::size_t>(node_rows) * node_cols);
  for (int i = 0; i < node_rows; ++i) {
    for (int j = 0; j < node_cols; ++j) {
      auto [pr, pc] = grid.node_pixel(i, j);
      grid.node_elevation.push_back(dem.height_interpolated(pr, pc));
    }
  }
  return grid;
}

bool line_of_sight(const Dem& dem, double from_row, double from_col,
                   double to_row, double to_col, double eye_height) {
  double eye_z = dem.height_interpolated(from_row, from_col) + eye_height;
  double target_z = dem.height_interpolated(to_row, to_col) + eye_height;
  double dist = std::hypot(to_row - from_row, to_col - from_col);
  int steps = static_cast<int>(std::ceil(dist));  // one sample per pixel
  for (int k = 1; k < steps; ++k) {
    double t = static_cast<double>(k) / steps;
    double terrain = dem.height_interpolated(from_row + t * (to_row - from_row),
                                             from_col + t * (to_col - from_col));
    double line_z = eye_z + t * (target_z - eye_z);
    if (terrain > line_z + 1e-9) return false;
  }
  return true;
}

bool line_of_sight(const Dem& dem, const CoarseGrid& grid, int from_node,
                   int to_node, double eye_height) {
  auto [fr, fc] = grid.env.unflatten(from_node);
  auto [tr, tc] = grid.env.unflatten(to_node);
  auto [fpr, fpc] = grid.node_pixel(fr, fc);
  auto [tpr, tpc] = grid.node_pixel(tr, tc);
  return line_of_sight(dem, fpr, fpc, tpr, tpc, eye_height);
}

std::vector<double> viewshed_mask(const Dem& dem, const CoarseGrid& grid,
                                  int from_node, double eye_height, int stride) {
  if (stride < 1) {
    throw ConfigError("viewshed stride must be at least 1");
  }
  auto [obs_row, obs_col] = grid.env.unflatten(from_node);
  auto [obs_pr, obs_pc] = grid.node_pixel(obs_row, obs_col);

  const double half = grid.spacing_pixels / 2.0;
  std::vector<double> fractions(static_cast<std::size_t>(grid.env.cells()), 0.0);
  for (int node = 0; node < grid.env.cells(); ++node) {
    auto [nr, nc] = grid.env.unflatten(node);
    auto [npr, npc] = grid.node_pixel(nr, nc);
    int r_lo = std::max(0, static_cast<int>(std::ceil(npr - half)));
    int r_hi = std::min(dem.rows - 1, static_cast<int>(std::floor(npr + half - 0.5)));
    int c_lo = std::max(0, static_cast<int>(std::ceil(npc - half)));
    int c_hi = std::min(dem.cols - 1, static_cast<int>(std::floor(npc + half - 0.5)));
    long visible = 0, total = 0;
    for (int r = r_lo; r <= r_hi; r += stride) {
      for (int c = c_lo; c <= c_hi; c += stride) {
        ++total;
        if (line_of_sight(dem, obs_pr, obs_pc, r, c, eye_height)) ++visible;
      }
    }
    fractions[static_cast<std::size_t>(node)] =
        total > 0 ? static_cast<double>(visible) / static_cast<double>(total) : 0.0;
  }
  return fractions;
}

DemVisibility::DemVisibility(const Dem& dem, const CoarseGrid& grid,
                             double eye_height, double fraction_threshold,
                             int stride)
    : nodes_(grid.env.cells()), threshold_(fraction_threshold) {
  fractions_.reserve(static_cast<std::size_t>(nodes_) * nodes_);
  for (int from = 0; from < nodes_; ++from) {
    std::vector<double> row = viewshed_mask(dem, grid, from, eye_height, stride);
    fractions_.insert(fractions_.end(), row.begin(), row.end());
  }
}

bool DemVisibility::visible(int from_cell, int to_cell) const {
  return fraction(from_cell, to_cell) >= threshold_;
}

double DemVisibility::fraction(int from_cell, int to_cell) const {
  return fractions_[static_cast<std::size_t>(from_cell) * nodes_ +
                    static_cast<std::size_t>(to_cell)];
}

}  // namespace nats
