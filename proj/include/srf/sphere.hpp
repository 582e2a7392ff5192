#pragma once

#include <cstdint>
#include <vector>

namespace srf {

/// Point on the unit sphere: colatitude theta in [0, pi], longitude phi in
/// [0, 2*pi).
struct SkyCoord {
  double theta = 0.0;
  double phi = 0.0;
};

enum class Ordering { Ring, Nested };

/// Euclidean (chordal) distance 2 sin(Theta/2) between two points at angular
/// distance Theta; lies in [0, 2].
double chordal_distance(const SkyCoord& a, const SkyCoord& b);

/// Coordinate scaling with modulus algebra:
/// (theta, phi) -> (factor*theta mod pi, factor*phi mod 2*pi).
SkyCoord scale_coord(const SkyCoord& x, double factor);

/// HEALPix pixelization of the unit sphere: 12*nside^2 equal-area pixels,
/// nside a power of two, in ring or nested ordering.
class PixelGrid {
 public:
  explicit PixelGrid(std::int64_t nside, Ordering ordering = Ordering::Ring);

  std::int64_t nside() const { return nside_; }
  Ordering ordering() const { return ordering_; }
  std::int64_t npix() const { return 12 * nside_ * nside_; }

  /// Center of the pixel with the given index (in this grid's ordering).
  SkyCoord pixel_center(std::int64_t index) const;

  /// Index (in this grid's ordering) of the pixel containing the point.
  std::int64_t ang_to_pix(const SkyCoord& coord) const;

  std::int64_t ring_to_nest(std::int64_t ring_index) const;
  std::int64_t nest_to_ring(std::int64_t nest_index) const;

  /// Index conversion from this grid's ordering to the requested one.
  std::int64_t to_ordering(std::int64_t index, Ordering target) const;

  bool operator==(const PixelGrid& other) const {
    return nside_ == other.nside_ && ordering_ == other.ordering_;
  }

 private:
  std::int64_t nside_;
  int order_;  // log2(nside)
  Ordering ordering_;
};

/// Sky region: either the full sphere or a spherical cap.
class Window {
 public:
  static Window full_sky();
  static Window cap(const SkyCoord& center, double radius);

  /// Cap whose solid angle is the given area in steradians,
  /// radius = arccos(1 - area / (2 pi)).
  static Window cap_of_area(const SkyCoord& center, double area_steradians);

  bool is_full_sky() const { return full_; }
  const SkyCoord& center() const { return center_; }
  double radius() const { return radius_; }

  bool contains(const SkyCoord& point) const;

 private:
  Window() = default;
  bool full_ = true;
  SkyCoord center_;
  double radius_ = 0.0;
};

/// Equal-area partition of a grid into cells of 4^j nested-consecutive
/// pixels; each cell is one pixel of the coarser grid nside / 2^j. The
/// sphere's total measure is normalized to 1, so the per-cell measure is the
/// exact rational 4^j / (12 nside^2).
class DyadicMesh {
 public:
  DyadicMesh(const PixelGrid& grid, int group_order);

  const PixelGrid& grid() const { return grid_; }
  int group_order() const { return group_order_; }
  std::int64_t pixels_per_cell() const { return pixels_per_cell_; }
  std::int64_t cell_count() const { return cell_count_; }

  /// Exact rational cell measure: measure_num()/measure_den() with
  /// measure_num * cell_count == measure_den.
  std::int64_t measure_num() const { return pixels_per_cell_; }
  std::int64_t measure_den() const { return grid_.npix(); }
  double cell_measure() const;
  double log2_cell_measure() const;

  /// Nested index of pixel t of cell c (t in [0, pixels_per_cell)).
  std::int64_t cell_pixel_nest(std::int64_t cell, std::int64_t t) const {
    return cell * pixels_per_cell_ + t;
  }

 private:
  PixelGrid grid_;
  int group_order_;
  std::int64_t pixels_per_cell_;
  std::int64_t cell_count_;
};

/// Partition of the grid into cells of 4^group_order nested pixels.
/// Requires 4^group_order <= nside^2.
DyadicMesh build_mesh(const PixelGrid& grid, int group_order);

/// Per-cell inclusion flags: a cell is included iff all of its pixel centers
/// lie inside the window.
std::vector<char> window_mask(const DyadicMesh& mesh, const Window& window);

}  // namespace srf
