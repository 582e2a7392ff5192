#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "srf/estimator.hpp"
#include "srf/fitting.hpp"
#include "srf/models.hpp"
#include "srf/spherical_map.hpp"

namespace srf {

/// Binary sky-map container: header {magic "SRFM", u32 version = 1,
/// u32 nside, u32 ordering (0 = ring, 1 = nested), u64 pixel count},
/// then little-endian IEEE f64 values, one per pixel.
void write_map_file(std::ostream& out, const SphericalMap& map);
SphericalMap read_map_file(std::istream& in);
void write_map_file(const std::string& path, const SphericalMap& map);
SphericalMap read_map_file(const std::string& path);

/// CSV interchange: header "pixel_index,value", one row per pixel. The grid
/// ordering is not part of the CSV and must be supplied; nside is inferred
/// from the row count.
void write_map_csv(std::ostream& out, const SphericalMap& map);
SphericalMap read_map_csv(std::istream& in, Ordering ordering);

/// Curve CSV: header "q,T[,alpha,f]". Readers accept both shapes.
void write_curve_csv(std::ostream& out, const RenyiCurve& curve,
                     const SpectrumCurve* spectrum = nullptr);
RenyiCurve read_curve_csv(std::istream& in);

/// Window description carried in result documents.
struct WindowInfo {
  bool full_sky = true;
  double theta = 0.0;
  double phi = 0.0;
  double radius = 0.0;
};

/// Structured output of estimate/fit runs; serializes to JSON and
/// re-validates against its own schema on read-back.
struct ResultDocument {
  std::vector<double> q;
  std::vector<double> T;
  std::vector<double> alpha;
  std::vector<double> f;

  // estimator context (when produced by `estimate`)
  bool has_estimator = false;
  std::int64_t nside = 0;
  int group_order = 0;
  std::int64_t cell_count = 0;
  WindowInfo window;
  bool verbatim_alpha = false;
  double shift = 0.0;

  std::vector<FitResult> fits;
  std::vector<std::pair<std::string, ValidityReport>> validity;

  // provenance, always present
  std::uint64_t seed = 0;
  std::string config_hash;
};

std::string result_document_to_json(const ResultDocument& doc);
ResultDocument result_document_from_json(const std::string& text);

/// FNV-1a hash of a canonical configuration string, as fixed-width hex.
std::string config_hash_hex(const std::string& canonical);

}  // namespace srf
