#ifndef NATS_VIEWSHED_HPP
#define NATS_VIEWSHED_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nats/grid.hpp"
#include "nats/sensing.hpp"

namespace nats {

/// Digital elevation map: row-major height raster, row 0 northmost,
/// square pixels of `resolution` meters. Read-only after load.
struct Dem {
  int rows = 0;
  int cols = 0;
  double resolution = 1.0;  // meters per pixel
  double x_origin = 0.0;    // lower-left corner (informational)
  double y_origin = 0.0;
  std::vector<double> heights;  // rows*cols, meters

  double height_at(int row, int col) const {
    return heights[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
                   static_cast<std::size_t>(col)];
  }

  /// Bilinear height at a point given in pixel units (pixel centers at
  /// integer coordinates), clamped to the raster.
  double height_interpolated(double row, double col) const;

  double width_meters() const { return cols * resolution; }
  double height_meters() const { return rows * resolution; }
};

/// Parse an ESRI ASCII grid (ncols/nrows/xllcorner/yllcorner/cellsize
/// [nodata_value] header followed by row-major heights, north row first).
/// Nodata cells are an error unless nodata_fill provides a replacement.
Dem load_dem(std::istream& in, std::optional<double> nodata_fill = std::nullopt);
Dem load_dem(const std::string& path, std::optional<double> nodata_fill = std::nullopt);

/// Waypoint lattice laid over a DEM: nodes every `spacing` meters starting
/// at the raster's top-left pixel center, elevation sampled at the node.
struct CoarseGrid {
  GridEnvironment env;          // rows/cols of the node lattice, cell_size = spacing
  double spacing = 0.0;         // meters between nodes
  std::vector<double> node_elevation;  // env.cells()

  /// Node position in DEM pixel units.
  std::pair<double, double> node_pixel(int node_row, int node_col) const {
    return {node_row * spacing_pixels, node_col * spacing_pixels};
  }
  double spacing_pixels = 0.0;
};

/// spacing must be a positive integer multiple of the DEM resolution.
CoarseGrid coarsen(const Dem& dem, double spacing);

/// True iff the straight segment between the two points clears the terrain.
/// Both endpoints are eye points `eye_height` above their ground; the ray is
/// sampled every DEM pixel with bilinear heights, and a sample strictly above
/// the sight line blocks it. Coordinates in pixel units.
bool line_of_sight(const Dem& dem, double from_row, double from_col,
                   double to_row, double to_col, double eye_height);

/// Convenience overload between coarse-grid nodes.
bool line_of_sight(const Dem& dem, const CoarseGrid& grid, int from_node,
                   int to_node, double eye_height);

/// Fraction of each coarse node's constituent DEM pixels (the spacing-sized
/// block nearest the node) visible from `from_node`, in [0,1]. `stride`
/// subsamples the block's pixels (1 = every pixel).
std::vector<double> viewshed_mask(const Dem& dem, const CoarseGrid& grid,
                                  int from_node, double eye_height,
                                  int stride = 1);

/// Pairwise node visibility for sensing: a target node is occluded when its
/// visible fraction from the observer falls below `fraction_threshold`.
/// The table is computed up front so trials can share it read-only.
class DemVisibility : public VisibilityOracle {
 public:
  DemVisibility(const Dem& dem, const CoarseGrid& grid, double eye_height,
                double fraction_threshold, int stride = 1);

  bool visible(int from_cell, int to_cell) const override;
  double fraction(int from_cell, int to_cell) const;

 private:
  int nodes_;
  double threshold_;
  std::vector<double> fractions_;  // nodes_ x nodes_
};

}  // namespace nats

#endif  // NATS_VIEWSHED_HPP
