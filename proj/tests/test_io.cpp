#include "srf/io.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "srf/random.hpp"

using srf::Ordering;
using srf::PixelGrid;
using srf::ResultDocument;
using srf::SphericalMap;

namespace {

SphericalMap random_map(std::int64_t nside, Ordering ordering,
                        std::uint64_t seed) {
  PixelGrid grid(nside, ordering);
  SphericalMap map{grid, {}};
  srf::RandomStream rng(seed);
  map.values.resize(static_cast<std::size_t>(grid.npix()));
  for (double& v : map.values) v = rng.next_normal();
  return map;
}

}  // namespace

TEST_CASE("map file roundtrip preserves bits, header, and ordering") {
  for (Ordering ordering : {Ordering::Ring, Ordering::Nested}) {
    const SphericalMap map = random_map(8, ordering, 321);
    std::stringstream buffer;
    srf::write_map_file(buffer, map);

    // header layout: magic + 3 u32 + u64 = 24 bytes, then 8 bytes per pixel
    CHECK(buffer.str().size() == 24 + 8 * map.values.size());
    CHECK(buffer.str().substr(0, 4) == "SRFM");

    const SphericalMap back = srf::read_map_file(buffer);
    CHECK(back.grid.nside() == map.grid.nside());
    CHECK(back.grid.ordering() == ordering);
    CHECK(back.values == map.values);
  }
}

TEST_CASE("map file rejects corruption") {
  const SphericalMap map = random_map(2, Ordering::Ring, 5);
  std::stringstream buffer;
  srf::write_map_file(buffer, map);
  std::string bytes = buffer.str();

  std::stringstream bad_magic(std::string("XXXX") + bytes.substr(4));
  CHECK_THROWS_AS(srf::read_map_file(bad_magic), std::runtime_error);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(srf::read_map_file(truncated), std::runtime_error);

  std::string wrong_count = bytes;
  wrong_count[16] = 7;  // corrupt the pixel count field
  std::stringstream mismatched(wrong_count);
  CHECK_THROWS_AS(srf::read_map_file(mismatched), std::runtime_error);
}

TEST_CASE("map csv roundtrip and validation") {
  const SphericalMap map = random_map(4, Ordering::Nested, 17);
  std::stringstream buffer;
  srf::write_map_csv(buffer, map);
  const SphericalMap back = srf::read_map_csv(buffer, Ordering::Nested);
  CHECK(back.values == map.values);
  CHECK(back.grid.nside() == 4);

  std::stringstream no_header("1,2\n");
  CHECK_THROWS_AS(srf::read_map_csv(no_header, Ordering::Ring),
                  std::runtime_error);

  std::stringstream wrong_rows("pixel_index,value\n0,1\n1,2\n");
  CHECK_THROWS_AS(srf::read_map_csv(wrong_rows, Ordering::Ring),
                  std::runtime_error);
}

TEST_CASE("curve csv roundtrip, with and without spectrum columns") {
  srf::RenyiCurve curve;
  for (double q = 0.5; q <= 2.0 + 1e-12; q += 0.25) {
    curve.q.push_back(q);
    curve.T.push_back(q - 1.0 - 0.01 * q * q);
  }
  std::stringstream plain;
  srf::write_curve_csv(plain, curve);
  const srf::RenyiCurve back = srf::read_curve_csv(plain);
  CHECK(back.q == curve.q);
  CHECK(back.T == curve.T);

  srf::SpectrumCurve spectrum;
  spectrum.q = curve.q;
  spectrum.alpha.assign(curve.q.size(), 1.0);
  spectrum.f.assign(curve.q.size(), 1.0);
  std::stringstream wide;
  srf::write_curve_csv(wide, curve, &spectrum);
  const srf::RenyiCurve back_wide = srf::read_curve_csv(wide);
  CHECK(back_wide.T == curve.T);

  std::stringstream empty("q,T\n");
  CHECK_THROWS_AS(srf::read_curve_csv(empty), std::runtime_error);
}

TEST_CASE("result document roundtrip validates its own schema") {
  ResultDocument doc;
  for (double q = 1.0; q <= 2.0 + 1e-12; q += 0.5) {
    doc.q.push_back(q);
    doc.T.push_back(q - 1.0);
    doc.alpha.push_back(1.0);
    doc.f.push_back(1.0);
  }
  doc.has_estimator = true;
  doc.nside = 16;
  doc.group_order = 3;
  doc.cell_count = 48;
  doc.window.full_sky = false;
  doc.window.theta = 0.5;
  doc.window.phi = 1.5;
  doc.window.radius = 0.3;
  doc.shift = -2.5;
  doc.seed = 7;
  doc.config_hash = srf::config_hash_hex("test");

  srf::FitResult fit;
  fit.family = srf::ModelFamily::LogGamma;
  fit.params = {{"A", 0.7}, {"B", 0.33}};
  fit.natural_params = {{"lambda", 3.03}};
  fit.rmse = 1e-10;
  fit.residuals = {0.0, 0.0, 0.0};
  fit.converged = true;
  fit.iterations = 12;
  doc.fits.push_back(fit);

  doc.validity.emplace_back(
      "lognormal(b=2, sigma2=1)",
      srf::check_conditions(srf::ModelSpec::log_normal(2.0, 1.0), 1.0, 1.0));

  const std::string text = srf::result_document_to_json(doc);
  const ResultDocument back = srf::result_document_from_json(text);
  CHECK(back.q == doc.q);
  CHECK(back.T == doc.T);
  CHECK(back.nside == 16);
  CHECK(back.window.full_sky == false);
  CHECK(back.window.radius == 0.3);
  CHECK(back.seed == 7);
  CHECK(back.config_hash == doc.config_hash);
  REQUIRE(back.fits.size() == 1);
  CHECK(back.fits[0].family == srf::ModelFamily::LogGamma);
  CHECK(back.fits[0].converged);
  REQUIRE(back.validity.size() == 1);
  CHECK(back.validity[0].second.satisfied);

  // byte-identical reserialization
  CHECK(srf::result_document_to_json(back) == text);
}

TEST_CASE("result document rejects malformed input") {
  CHECK_THROWS_AS(srf::result_document_from_json("{\"schema\":\"nope\"}"),
                  std::runtime_error);
  CHECK_THROWS_AS(srf::result_document_from_json("not json at all"),
                  std::runtime_error);
  // mismatched array lengths
  const char* bad = R"({"schema":"srf-result-v1","q":[1,2],"T":[0],
    "alpha":[1,1],"f":[1,1],"fits":[],
    "provenance":{"seed":0,"config_hash":"x"}})";
  CHECK_THROWS_AS(srf::result_document_from_json(bad), std::runtime_error);
}

TEST_CASE("config hash is deterministic and input-sensitive") {
  CHECK(srf::config_hash_hex("abc") == srf::config_hash_hex("abc"));
  CHECK(srf::config_hash_hex("abc") != srf::config_hash_hex("abd"));
  CHECK(srf::config_hash_hex("").size() == 16);
}
