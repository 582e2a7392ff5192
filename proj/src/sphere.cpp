#include "srf/sphere.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace srf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kTwoThird = 2.0 / 3.0;

// Standard HEALPix face constants (Gorski et al.): jrll/jpll locate each of
// the 12 base faces in ring/phi units.
constexpr int kJrll[12] = {2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4};
constexpr int kJpll[12] = {1, 3, 5, 7, 0, 2, 4, 6, 1, 3, 5, 7};

std::int64_t isqrt(std::int64_t v) {
  auto res = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v) + 0.5));
  while (res * res > v) --res;
  while ((res + 1) * (res + 1) <= v) ++res;
  return res;
}

// Bit interleaving for the nested scheme (z-order within a face).
std::uint64_t spread_bits(std::uint64_t v) {
  v &= 0xFFFFFFFFULL;
  v = (v | (v << 16)) & 0x0000FFFF0000FFFFULL;
  v = (v | (v << 8)) & 0x00FF00FF00FF00FFULL;
  v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0FULL;
  v = (v | (v << 2)) & 0x3333333333333333ULL;
  v = (v | (v << 1)) & 0x5555555555555555ULL;
  return v;
}

std::uint64_t compress_bits(std::uint64_t v) {
  v &= 0x5555555555555555ULL;
  v = (v | (v >> 1)) & 0x3333333333333333ULL;
  v = (v | (v >> 2)) & 0x0F0F0F0F0F0F0F0FULL;
  v = (v | (v >> 4)) & 0x00FF00FF00FF00FFULL;
  v = (v | (v >> 8)) & 0x0000FFFF0000FFFFULL;
  v = (v | (v >> 16)) & 0x00000000FFFFFFFFULL;
  return v;
}

struct FaceCoord {
  std::int64_t ix, iy;
  int face;
};

double positive_fmod(double value, double modulus) {
  double r = std::fmod(value, modulus);
  if (r < 0.0) r += modulus;
  return r;
}

}  // namespace

double chordal_distance(const SkyCoord& a, const SkyCoord& b) {
  // cos(Theta) via the spherical law of cosines, clamped for roundoff.
  const double cos_theta = std::cos(a.theta) * std::cos(b.theta) +
                           std::sin(a.theta) * std::sin(b.theta) *
                               std::cos(a.phi - b.phi);
  const double clamped = std::fmax(-1.0, std::fmin(1.0, cos_theta));
  // 2 sin(Theta/2) = sqrt(2 (1 - cos Theta))
  return std::sqrt(2.0 * (1.0 - clamped));
}

SkyCoord scale_coord(const SkyCoord& x, double factor) {
  if (!(factor > 0.0))
    throw std::domain_error("scale_coord: factor must be positive");
  return SkyCoord{positive_fmod(factor * x.theta, kPi),
                  positive_fmod(factor * x.phi, kTwoPi)};
}

PixelGrid::PixelGrid(std::int64_t nside, Ordering ordering)
    : nside_(nside), ordering_(ordering) {
  if (nside < 1 || (nside & (nside - 1)) != 0)
    throw std::invalid_argument("PixelGrid: nside must be a power of two");
  order_ = 0;
  while ((std::int64_t{1} << order_) < nside_) ++order_;
}

namespace {

// ring index decomposition -> (ix, iy, face), HEALPix index algebra.
FaceCoord ring_to_xyf(std::int64_t pix, std::int64_t nside) {
  const std::int64_t npix = 12 * nside * nside;
  const std::int64_t ncap = 2 * nside * (nside - 1);
  std::int64_t iring, iphi, kshift, nr;
  int face;

  if (pix < ncap) {  // north polar cap
    iring = (1 + isqrt(1 + 2 * pix)) >> 1;
    iphi = (pix + 1) - 2 * iring * (iring - 1);
    kshift = 0;
    nr = iring;
    face = 0;
    std::int64_t tmp = iphi - 1;
    if (tmp >= 2 * iring) {
      face = 2;
      tmp -= 2 * iring;
    }
    if (tmp >= iring) ++face;
  } else if (pix < npix - ncap) {  // equatorial belt
    const std::int64_t ip = pix - ncap;
    iring = ip / (4 * nside) + nside;
    iphi = ip % (4 * nside) + 1;
    kshift = (iring + nside) & 1;
    nr = nside;
    const std::int64_t ire = iring - nside + 1;
    const std::int64_t irm = 2 * nside + 2 - ire;
    const std::int64_t ifm = (iphi - ire / 2 + nside - 1) / nside;
    const std::int64_t ifp = (iphi - irm / 2 + nside - 1) / nside;
    if (ifp == ifm)
      face = static_cast<int>((ifp == 4) ? 4 : ifp + 4);
    else if (ifp < ifm)
      face = static_cast<int>(ifp);
    else
      face = static_cast<int>(ifm + 8);
  } else {  // south polar cap
    const std::int64_t ip = npix - pix;
    const std::int64_t iring_s = (1 + isqrt(2 * ip - 1)) >> 1;
    iphi = 4 * iring_s + 1 - (ip - 2 * iring_s * (iring_s - 1));
    kshift = 0;
    nr = iring_s;
    iring = 4 * nside - iring_s;
    face = 8;
    std::int64_t tmp = iphi - 1;
    if (tmp >= 2 * nr) {
      face = 10;
      tmp -= 2 * nr;
    }
    if (tmp >= nr) ++face;
  }

  const std::int64_t irt = iring - kJrll[face] * nside + 1;
  std::int64_t ipt = 2 * iphi - kJpll[face] * nr - kshift - 1;
  if (ipt >= 2 * nside) ipt -= 8 * nside;

  return FaceCoord{(ipt - irt) >> 1, (-(ipt + irt)) >> 1, face};
}

std::int64_t xyf_to_ring(const FaceCoord& fc, std::int64_t nside) {
  const std::int64_t npix = 12 * nside * nside;
  const std::int64_t ncap = 2 * nside * (nside - 1);
  const std::int64_t nl4 = 4 * nside;
  const std::int64_t jr = kJrll[fc.face] * nside - fc.ix - fc.iy - 1;

  std::int64_t nr, kshift, n_before;
  if (jr < nside) {
    nr = jr;
    n_before = 2 * nr * (nr - 1);
    kshift = 0;
  } else if (jr > 3 * nside) {
    nr = nl4 - jr;
    n_before = npix - 2 * (nr + 1) * nr;
    kshift = 0;
  } else {
    nr = nside;
    n_before = ncap + (jr - nside) * nl4;
    kshift = (jr - nside) & 1;
  }

  std::int64_t jp = (kJpll[fc.face] * nr + fc.ix - fc.iy + 1 + kshift) / 2;
  if (jp > nl4)
    jp -= nl4;
  else if (jp < 1)
    jp += nl4;

  return n_before + jp - 1;
}

FaceCoord nest_to_xyf(std::int64_t pix, int order) {
  const std::int64_t npface = std::int64_t{1} << (2 * order);
  const int face = static_cast<int>(pix >> (2 * order));
  const std::uint64_t within = static_cast<std::uint64_t>(pix & (npface - 1));
  return FaceCoord{static_cast<std::int64_t>(compress_bits(within)),
                   static_cast<std::int64_t>(compress_bits(within >> 1)),
                   face};
}

std::int64_t xyf_to_nest(const FaceCoord& fc, int order) {
  return (static_cast<std::int64_t>(fc.face) << (2 * order)) +
         static_cast<std::int64_t>(
             spread_bits(static_cast<std::uint64_t>(fc.ix)) |
             (spread_bits(static_cast<std::uint64_t>(fc.iy)) << 1));
}

// z = cos(theta) and phi of a ring-ordered pixel center.
SkyCoord ring_pix_center(std::int64_t pix, std::int64_t nside) {
  const std::int64_t npix = 12 * nside * nside;
  const std::int64_t ncap = 2 * nside * (nside - 1);
  const double fact1 = 1.5 * static_cast<double>(nside);
  const double fact2 = 3.0 * static_cast<double>(nside) * static_cast<double>(nside);

  double z, phi;
  if (pix < ncap) {  // north polar cap
    const std::int64_t iring = (1 + isqrt(1 + 2 * pix)) >> 1;
    const std::int64_t iphi = (pix + 1) - 2 * iring * (iring - 1);
    z = 1.0 - static_cast<double>(iring * iring) / fact2;
    phi = (iphi - 0.5) * kHalfPi / static_cast<double>(iring);
  } else if (pix < npix - ncap) {  // equatorial belt
    const std::int64_t ip = pix - ncap;
    const std::int64_t iring = ip / (4 * nside) + nside;
    const std::int64_t iphi = ip % (4 * nside) + 1;
    const double fodd = ((iring + nside) & 1) ? 1.0 : 0.5;
    z = static_cast<double>(2 * nside - iring) / fact1;
    phi = (iphi - fodd) * kPi / (2.0 * static_cast<double>(nside));
  } else {  // south polar cap
    const std::int64_t ip = npix - pix;
    const std::int64_t iring = (1 + isqrt(2 * ip - 1)) >> 1;
    const std::int64_t iphi = 4 * iring + 1 - (ip - 2 * iring * (iring - 1));
    z = -1.0 + static_cast<double>(iring * iring) / fact2;
    phi = (iphi - 0.5) * kHalfPi / static_cast<double>(iring);
  }
  return SkyCoord{std::acos(std::fmax(-1.0, std::fmin(1.0, z))), phi};
}

std::int64_t ang_to_pix_ring(const SkyCoord& coord, std::int64_t nside) {
  const std::int64_t npix = 12 * nside * nside;
  const std::int64_t ncap = 2 * nside * (nside - 1);
  const double z = std::cos(coord.theta);
  const double za = std::fabs(z);
  const double tt = positive_fmod(coord.phi, kTwoPi) / kHalfPi;  // in [0, 4)
  const double dnside = static_cast<double>(nside);

  if (za <= kTwoThird) {  // equatorial belt
    const double temp1 = dnside * (0.5 + tt);
    const double temp2 = dnside * z * 0.75;
    const auto jp = static_cast<std::int64_t>(temp1 - temp2);
    const auto jm = static_cast<std::int64_t>(temp1 + temp2);
    const std::int64_t ir = nside + 1 + jp - jm;  // in {1, 2 nside + 1}
    const std::int64_t kshift = 1 - (ir & 1);
    std::int64_t ip = (jp + jm - nside + kshift + 1) / 2;
    ip = ((ip % (4 * nside)) + 4 * nside) % (4 * nside);
    return ncap + (ir - 1) * 4 * nside + ip;
  }
  // polar caps
  const double tp = tt - std::floor(tt);
  const double tmp = dnside * std::sqrt(3.0 * (1.0 - za));
  auto jp = static_cast<std::int64_t>(tp * tmp);
  auto jm = static_cast<std::int64_t>((1.0 - tp) * tmp);
  const std::int64_t ir = jp + jm + 1;
  auto ip = static_cast<std::int64_t>(tt * static_cast<double>(ir));
  ip = ((ip % (4 * ir)) + 4 * ir) % (4 * ir);
  return (z > 0) ? 2 * ir * (ir - 1) + ip : npix - 2 * ir * (ir + 1) + ip;
}

}  // namespace

SkyCoord PixelGrid::pixel_center(std::int64_t index) const {
  if (index < 0 || index >= npix())
    throw std::out_of_range("pixel_center: index " + std::to_string(index) +
                            " out of range for nside " + std::to_string(nside_));
  const std::int64_t ring_index =
      (ordering_ == Ordering::Ring) ? index : nest_to_ring(index);
  return ring_pix_center(ring_index, nside_);
}

std::int64_t PixelGrid::ang_to_pix(const SkyCoord& coord) const {
  const std::int64_t ring_index = ang_to_pix_ring(coord, nside_);
  return (ordering_ == Ordering::Ring) ? ring_index : ring_to_nest(ring_index);
}

std::int64_t PixelGrid::ring_to_nest(std::int64_t ring_index) const {
  if (ring_index < 0 || ring_index >= npix())
    throw std::out_of_range("ring_to_nest: index out of range");
  return xyf_to_nest(ring_to_xyf(ring_index, nside_), order_);
}

std::int64_t PixelGrid::nest_to_ring(std::int64_t nest_index) const {
  if (nest_index < 0 || nest_index >= npix())
    throw std::out_of_range("nest_to_ring: index out of range");
  return xyf_to_ring(nest_to_xyf(nest_index, order_), nside_);
}

std::int64_t PixelGrid::to_ordering(std::int64_t index, Ordering target) const {
  if (ordering_ == target) return index;
  return (target == Ordering::Nested) ? ring_to_nest(index)
                                      : nest_to_ring(index);
}

Window Window::full_sky() { return Window(); }

Window Window::cap(const SkyCoord& center, double radius) {
  if (!(radius > 0.0) || radius > kPi)
    throw std::invalid_argument("Window::cap: radius must lie in (0, pi]");
  Window w;
  w.full_ = false;
  w.center_ = center;
  w.radius_ = radius;
  return w;
}

Window Window::cap_of_area(const SkyCoord& center, double area_steradians) {
  if (!(area_steradians > 0.0) || area_steradians > 4.0 * kPi)
    throw std::invalid_argument("Window::cap_of_area: area outside (0, 4*pi]");
  const double c = 1.0 - area_steradians / kTwoPi;
  return cap(center, std::acos(std::fmax(-1.0, std::fmin(1.0, c))));
}

bool Window::contains(const SkyCoord& point) const {
  if (full_) return true;
  // chordal radius comparison avoids acos near the boundary
  return chordal_distance(center_, point) <=
         2.0 * std::sin(0.5 * radius_) + 1e-15;
}

DyadicMesh::DyadicMesh(const PixelGrid& grid, int group_order)
    : grid_(grid), group_order_(group_order) {
  if (group_order < 0)
    throw std::invalid_argument("DyadicMesh: group order must be >= 0");
  pixels_per_cell_ = std::int64_t{1} << (2 * group_order);
  if (pixels_per_cell_ > grid.nside() * grid.nside())
    throw std::invalid_argument(
        "DyadicMesh: 4^group_order exceeds nside^2; cells would span faces");
  cell_count_ = grid.npix() / pixels_per_cell_;
}

double DyadicMesh::cell_measure() const {
  return static_cast<double>(measure_num()) /
         static_cast<double>(measure_den());
}

double DyadicMesh::log2_cell_measure() const {
  return std::log2(static_cast<double>(measure_num())) -
         std::log2(static_cast<double>(measure_den()));
}

DyadicMesh build_mesh(const PixelGrid& grid, int group_order) {
  return DyadicMesh(grid, group_order);
}

std::vector<char> window_mask(const DyadicMesh& mesh, const Window& window) {
  const std::int64_t cells = mesh.cell_count();
  std::vector<char> mask(static_cast<std::size_t>(cells), 1);
  if (window.is_full_sky()) return mask;

  // Nested pixel centers are what define cell membership; the grid's own
  // ordering only matters for value lookup, not geometry.
  const PixelGrid nested(mesh.grid().nside(), Ordering::Nested);
  const std::int64_t per_cell = mesh.pixels_per_cell();
  for (std::int64_t c = 0; c < cells; ++c) {
    bool inside = true;
    for (std::int64_t t = 0; t < per_cell && inside; ++t)
      inside = window.contains(nested.pixel_center(mesh.cell_pixel_nest(c, t)));
    mask[static_cast<std::size_t>(c)] = inside ? 1 : 0;
  }
  return mask;
}

}  // namespace srf
