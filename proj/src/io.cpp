#include "srf/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace srf {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'S', 'R', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32_le(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

void put_u64_le(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

std::uint32_t get_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("map file: truncated header");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64_le(std::istream& in) {
  std::uint64_t lo = get_u32_le(in);
  std::uint64_t hi = get_u32_le(in);
  return lo | (hi << 32);
}

void put_f64_le(std::ostream& out, double value) {
  put_u64_le(out, std::bit_cast<std::uint64_t>(value));
}

double get_f64_le(std::istream& in) {
  return std::bit_cast<double>(get_u64_le(in));
}

std::int64_t nside_from_count(std::uint64_t count) {
  const auto nside =
      static_cast<std::int64_t>(std::llround(std::sqrt(count / 12.0)));
  if (nside < 1 || 12 * nside * nside != static_cast<std::int64_t>(count) ||
      (nside & (nside - 1)) != 0)
    throw std::runtime_error(
        "map data: pixel count is not 12 * nside^2 for a power-of-two nside");
  return nside;
}

}  // namespace

void write_map_file(std::ostream& out, const SphericalMap& map) {
  validate_map(map);
  out.write(kMagic, 4);
  put_u32_le(out, kVersion);
  put_u32_le(out, static_cast<std::uint32_t>(map.grid.nside()));
  put_u32_le(out, map.grid.ordering() == Ordering::Nested ? 1u : 0u);
  put_u64_le(out, static_cast<std::uint64_t>(map.grid.npix()));
  for (double v : map.values) put_f64_le(out, v);
  if (!out) throw std::runtime_error("map file: write failed");
}

SphericalMap read_map_file(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("map file: bad magic (expected SRFM)");
  const std::uint32_t version = get_u32_le(in);
  if (version != kVersion)
    throw std::runtime_error("map file: unsupported version " +
                             std::to_string(version));
  const std::uint32_t nside = get_u32_le(in);
  const std::uint32_t ordering = get_u32_le(in);
  if (ordering > 1) throw std::runtime_error("map file: bad ordering flag");
  const std::uint64_t count = get_u64_le(in);
  PixelGrid grid(static_cast<std::int64_t>(nside),
                 ordering ? Ordering::Nested : Ordering::Ring);
  if (count != static_cast<std::uint64_t>(grid.npix()))
    throw std::runtime_error("map file: pixel count does not match nside");

  SphericalMap map{grid, std::vector<double>(count)};
  for (auto& v : map.values) v = get_f64_le(in);
  if (!in) throw std::runtime_error("map file: truncated payload");
  validate_map(map);
  return map;
}

void write_map_file(const std::string& path, const SphericalMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_map_file(out, map);
}

SphericalMap read_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return read_map_file(in);
}

void write_map_csv(std::ostream& out, const SphericalMap& map) {
  validate_map(map);
  out << "pixel_index,value\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < map.values.size(); ++i)
    out << i << ',' << map.values[i] << '\n';
}

SphericalMap read_map_csv(std::istream& in, Ordering ordering) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("pixel_index", 0) != 0)
    throw std::runtime_error("map csv: expected header pixel_index,value");
  std::vector<std::pair<std::uint64_t, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("map csv: malformed row: " + line);
    rows.emplace_back(std::stoull(line.substr(0, comma)),
                      std::stod(line.substr(comma + 1)));
  }
  const std::int64_t nside = nside_from_count(rows.size());
  SphericalMap map{PixelGrid(nside, ordering),
                   std::vector<double>(rows.size(), 0.0)};
  std::vector<char> seen(rows.size(), 0);
  for (const auto& [index, value] : rows) {
    if (index >= rows.size() || seen[index])
      throw std::runtime_error("map csv: bad or duplicate pixel index " +
                               std::to_string(index));
    seen[index] = 1;
    map.values[index] = value;
  }
  validate_map(map);
  return map;
}

void write_curve_csv(std::ostream& out, const RenyiCurve& curve,
                     const SpectrumCurve* spectrum) {
  out << (spectrum ? "q,T,alpha,f\n" : "q,T\n");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < curve.q.size(); ++i) {
    out << curve.q[i] << ',' << curve.T[i];
    if (spectrum) out << ',' << spectrum->alpha[i] << ',' << spectrum->f[i];
    out << '\n';
  }
}

RenyiCurve read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("q,T", 0) != 0)
    throw std::runtime_error("curve csv: expected header q,T[,alpha,f]");
  RenyiCurve curve;
  curve.provenance = "csv";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    if (!std::getline(row, field, ','))
      throw std::runtime_error("curve csv: malformed row: " + line);
    const double q = std::stod(field);
    if (!std::getline(row, field, ','))
      throw std::runtime_error("curve csv: malformed row: " + line);
    curve.q.push_back(q);
    curve.T.push_back(std::stod(field));
  }
  if (curve.q.empty()) throw std::runtime_error("curve csv: no data rows");
  return curve;
}

namespace {

json fit_to_json(const FitResult& fit) {
  json params = json::object();
  for (const auto& [name, value] : fit.params) params[name] = value;
  json natural = json::object();
  for (const auto& [name, value] : fit.natural_params) natural[name] = value;
  return json{{"family", family_name(fit.family)},
              {"verbatim", fit.verbatim},
              {"params", params},
              {"natural_params", natural},
              {"rmse", fit.rmse},
              {"residuals", fit.residuals},
              {"converged", fit.converged},
              {"iterations", fit.iterations}};
}

json validity_to_json(const std::string& model, const ValidityReport& report) {
  auto checks = json::array();
  for (const auto& c : report.checks)
    checks.push_back(json{{"name", c.name},
                          {"required", c.required},
                          {"actual", c.actual},
                          {"passed", c.passed}});
  auto extensions = json::array();
  for (const auto& c : report.extensions)
    extensions.push_back(json{{"name", c.name},
                              {"required", c.required},
                              {"actual", c.actual},
                              {"passed", c.passed}});
  return json{{"model", model},
              {"satisfied", report.satisfied},
              {"checks", checks},
              {"extensions", extensions}};
}

void validate_document_json(const json& j) {
  if (!j.is_object()) throw std::runtime_error("result document: not an object");
  if (j.value("schema", "") != "srf-result-v1")
    throw std::runtime_error("result document: missing or unknown schema tag");
  for (const char* key : {"q", "T", "alpha", "f"})
    if (!j.contains(key) || !j.at(key).is_array())
      throw std::runtime_error(std::string("result document: missing array ") +
                               key);
  const std::size_t n = j.at("q").size();
  for (const char* key : {"T", "alpha", "f"})
    if (j.at(key).size() != n)
      throw std::runtime_error(
          "result document: q/T/alpha/f lengths differ");
  if (!j.contains("provenance") || !j.at("provenance").is_object() ||
      !j.at("provenance").contains("seed") ||
      !j.at("provenance").contains("config_hash"))
    throw std::runtime_error("result document: provenance missing");
  if (!j.contains("fits") || !j.at("fits").is_array())
    throw std::runtime_error("result document: fits missing");
  for (const auto& fit : j.at("fits"))
    if (!fit.contains("family") || !fit.contains("rmse") ||
        !fit.contains("params"))
      throw std::runtime_error("result document: malformed fit block");
}

ModelFamily family_from_name(const std::string& name) {
  for (ModelFamily family :
       {ModelFamily::LogNormal, ModelFamily::LogGamma,
        ModelFamily::LogNegInvGamma, ModelFamily::ChiSquare,
        ModelFamily::EvenPower, ModelFamily::ChiSquareK,
        ModelFamily::ChiSquareEps})
    if (family_name(family) == name) return family;
  throw std::runtime_error("unknown model family: " + name);
}

}  // namespace

std::string result_document_to_json(const ResultDocument& doc) {
  json j{{"schema", "srf-result-v1"},
         {"q", doc.q},
         {"T", doc.T},
         {"alpha", doc.alpha},
         {"f", doc.f}};
  if (doc.has_estimator) {
    json window{{"kind", doc.window.full_sky ? "full" : "cap"}};
    if (!doc.window.full_sky) {
      window["theta"] = doc.window.theta;
      window["phi"] = doc.window.phi;
      window["radius"] = doc.window.radius;
    }
    j["estimator"] = json{{"nside", doc.nside},
                          {"group_order", doc.group_order},
                          {"cell_count", doc.cell_count},
                          {"window", window},
                          {"alpha_mode",
                           doc.verbatim_alpha ? "verbatim" : "base2"},
                          {"shift", doc.shift}};
  }
  auto fits = json::array();
  for (const auto& fit : doc.fits) fits.push_back(fit_to_json(fit));
  j["fits"] = fits;
  auto validity = json::array();
  for (const auto& [model, report] : doc.validity)
    validity.push_back(validity_to_json(model, report));
  j["validity"] = validity;
  j["provenance"] = json{{"seed", doc.seed},
                         {"config_hash", doc.config_hash},
                         {"generator", "srf"}};

  validate_document_json(j);  // every emitted document passes its own schema
  return j.dump(2);
}

ResultDocument result_document_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("result document: parse error: ") +
                             e.what());
  }
  validate_document_json(j);

  ResultDocument doc;
  doc.q = j.at("q").get<std::vector<double>>();
  doc.T = j.at("T").get<std::vector<double>>();
  doc.alpha = j.at("alpha").get<std::vector<double>>();
  doc.f = j.at("f").get<std::vector<double>>();
  if (j.contains("estimator")) {
    const auto& est = j.at("estimator");
    doc.has_estimator = true;
    doc.nside = est.value("nside", std::int64_t{0});
    doc.group_order = est.value("group_order", 0);
    doc.cell_count = est.value("cell_count", std::int64_t{0});
    doc.verbatim_alpha = est.value("alpha_mode", "base2") == "verbatim";
    doc.shift = est.value("shift", 0.0);
    const auto& window = est.at("window");
    doc.window.full_sky = window.value("kind", "full") == "full";
    if (!doc.window.full_sky) {
      doc.window.theta = window.value("theta", 0.0);
      doc.window.phi = window.value("phi", 0.0);
      doc.window.radius = window.value("radius", 0.0);
    }
  }
  for (const auto& fit_json : j.at("fits")) {
    FitResult fit;
    fit.family = family_from_name(fit_json.at("family").get<std::string>());
    fit.verbatim = fit_json.value("verbatim", false);
    for (const auto& [name, value] : fit_json.at("params").items())
      fit.params.emplace_back(name, value.get<double>());
    if (fit_json.contains("natural_params"))
      for (const auto& [name, value] : fit_json.at("natural_params").items())
        fit.natural_params.emplace_back(name, value.get<double>());
    fit.rmse = fit_json.at("rmse").get<double>();
    if (fit_json.contains("residuals"))
      fit.residuals = fit_json.at("residuals").get<std::vector<double>>();
    fit.converged = fit_json.value("converged", false);
    fit.iterations = fit_json.value("iterations", 0);
    doc.fits.push_back(std::move(fit));
  }
  if (j.contains("validity"))
    for (const auto& v : j.at("validity")) {
      ValidityReport report;
      report.satisfied = v.value("satisfied", false);
      for (const auto& c : v.at("checks"))
        report.checks.push_back(ConditionCheck{c.at("name").get<std::string>(),
                                               c.at("required").get<double>(),
                                               c.at("actual").get<double>(),
                                               c.at("passed").get<bool>()});
      if (v.contains("extensions"))
        for (const auto& c : v.at("extensions"))
          report.extensions.push_back(
              ConditionCheck{c.at("name").get<std::string>(),
                             c.at("required").get<double>(),
                             c.at("actual").get<double>(),
                             c.at("passed").get<bool>()});
      doc.validity.emplace_back(v.value("model", "unknown"), std::move(report));
    }
  doc.seed = j.at("provenance").at("seed").get<std::uint64_t>();
  doc.config_hash = j.at("provenance").at("config_hash").get<std::string>();
  return doc;
}

std::string config_hash_hex(const std::string& canonical) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

}  // namespace srf
