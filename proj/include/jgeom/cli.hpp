// Report documents and subcommand logic behind the jgeom executable.
//
// JSON is canonical; CSV and Markdown are projections of the same document.
// Objects serialize with sorted keys and reals rounded to 15 significant
// digits, so a command and seed always produce byte-identical output.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jgeom/geometry.hpp"
#include "jgeom/models.hpp"
#include "jgeom/subspace.hpp"

namespace jgeom::cli {

using json = nlohmann::json;

inline constexpr const char* kSchema = "jordan-geom/1";
inline constexpr const char* kToolVersion = "1.0.0";

/// Bad input: unreadable files, malformed JSON, unknown names.  Exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Format { Json, Csv, Markdown };

inline Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "md") return Format::Markdown;
  throw UsageError("unknown format: " + s);
}

inline double round15(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return std::strtod(buf, nullptr);
}

inline json real(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round15(x);
}

inline json reals(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

inline json angle_json(double radians, std::size_t multiplicity) {
  return {{"radians", real(radians)},
          {"degrees", real(radians * 180.0 / std::numbers::pi)},
          {"multiplicity", multiplicity}};
}

inline json spectrum_json(const JordanSpectrum& s) {
  json a = json::array();
  for (const auto& c : s.classes) a.push_back(angle_json(c.angle, c.multiplicity));
  return a;
}

inline json spectrum_json(const std::vector<AngleMultiplicity>& s) {
  json a = json::array();
  for (const auto& c : s) a.push_back(angle_json(c.angle, c.multiplicity));
  return a;
}

inline json quaternion_json(const Quaternion& q) { return json::array({real(q.w), real(q.x), real(q.y), real(q.z)}); }

inline json model_json(const ModelSpec& s) {
  json params = json::object();
  switch (s.name) {
    case ModelName::Affine:
      params["n"] = s.n;
      params["m"] = s.m;
      params["slope"] = reals(s.slope.entries());
      params["offset"] = reals(s.offset);
      break;
    case ModelName::Circle:
    case ModelName::Cylinder: params["radius"] = real(s.radius); break;
    case ModelName::CatenoidCrossR: params["c"] = real(s.waist); break;
    case ModelName::LoCone: params["a"] = quaternion_json(s.axis); break;
    case ModelName::LoGraph: params["epsilon"] = quaternion_json(s.axis); break;
    case ModelName::QuadraticGraph: break;
  }
  const auto q0 = build(s)->reference_plane();
  json q0j = json::array();
  for (const auto& v : q0.vectors()) q0j.push_back(reals(v));
  return {{"name", std::string(model_name(s.name))},
          {"parameters", params},
          {"reference_plane", {{"ambient_dim", q0.ambient_dim}, {"vectors", q0j}}}};
}

inline json identity_json(const IdentityResidual& r, std::size_t sample) {
  return {{"kind", "identity"},
          {"identity", std::string(identity_name(r.id))},
          {"sample", sample},
          {"param", reals(r.param)},
          {"residual", real(r.residual)},
          {"tolerance", real(r.tolerance)},
          {"terms", r.terms},
          {"pass", r.pass},
          {"status", r.pass ? "pass" : "fail"}};
}

inline json skipped_json(IdentityId id, const std::string& reason) {
  return {{"kind", "identity"},
          {"identity", std::string(identity_name(id))},
          {"pass", false},
          {"status", "skipped"},
          {"reason", reason}};
}

inline json cja_json(const CJAReport& r) {
  return {{"kind", "cja"},
          {"is_cja", r.is_cja},
          {"pass", r.is_cja},
          {"status", r.is_cja ? "pass" : "fail"},
          {"samples", r.samples.size()},
          {"reference_spectrum", spectrum_json(r.reference_spectrum)},
          {"reference_tangent_spectrum", spectrum_json(r.reference_tangent)},
          {"g_n", r.g_n},
          {"g_t", r.g_t},
          {"r", r.r},
          {"max_deviation", real(r.max_deviation)},
          {"angle_tol", real(r.angle_tol)}};
}

// ---------------------------------------------------------------------------
// Report document

struct ReportDocument {
  std::string tool_version = kToolVersion;
  std::string command;
  std::uint64_t seed = 0;
  std::optional<json> model;
  std::vector<json> results;
  json extra = json::object();  // command-specific summary fields

  std::size_t count(const char* status) const {
    std::size_t n = 0;
    for (const auto& r : results)
      if (r.value("status", "") == status) ++n;
    return n;
  }
  std::size_t passed() const { return count("pass"); }
  std::size_t failed() const { return count("fail"); }
  std::size_t skipped() const { return count("skipped"); }
};

inline json to_json(const ReportDocument& d) {
  json summary = d.extra;
  summary["pass"] = d.passed();
  summary["fail"] = d.failed();
  summary["skipped"] = d.skipped();
  return {{"schema", kSchema},
          {"tool_version", d.tool_version},
          {"command", d.command},
          {"seed", d.seed},
          {"model", d.model ? *d.model : json(nullptr)},
          {"results", d.results},
          {"summary", summary}};
}

inline ReportDocument from_json(const json& j) {
  if (j.value("schema", "") != kSchema) throw UsageError("unsupported report schema");
  ReportDocument d;
  d.tool_version = j.at("tool_version").get<std::string>();
  d.command = j.at("command").get<std::string>();
  d.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("model").is_null()) d.model = j.at("model");
  for (const auto& r : j.at("results")) d.results.push_back(r);
  d.extra = j.at("summary");
  for (const char* k : {"pass", "fail", "skipped"}) d.extra.erase(k);
  return d;
}

namespace detail {

inline std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline Table table_for(const ReportDocument& d) {
  Table t;
  if (d.command == "jordan") {
    t.header = {"radians", "degrees", "multiplicity"};
    for (const auto& c : d.results.at(0).at("spectrum"))
      t.rows.push_back({cell(c["radians"]), cell(c["degrees"]), cell(c["multiplicity"])});
  } else if (d.command == "cja") {
    t.header = {"space", "radians", "degrees", "multiplicity"};
    const auto& r = d.results.at(0);
    for (const char* key : {"reference_spectrum", "reference_tangent_spectrum"})
      for (const auto& c : r.at(key))
        t.rows.push_back({key == std::string("reference_spectrum") ? "normal" : "tangent", cell(c["radians"]),
                          cell(c["degrees"]), cell(c["multiplicity"])});
  } else if (d.command == "verify") {
    t.header = {"identity", "sample", "status", "residual", "tolerance", "terms"};
    for (const auto& r : d.results)
      t.rows.push_back({cell(r["identity"]), cell(r.value("sample", json(nullptr))), cell(r["status"]),
                        cell(r.value("residual", json(nullptr))), cell(r.value("tolerance", json(nullptr))),
                        cell(r.value("terms", json(nullptr)))});
  } else {
    t.header = {"name", "description"};
    for (const auto& r : d.results) t.rows.push_back({cell(r["name"]), cell(r["description"])});
  }
  return t;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace detail

inline std::string render(const ReportDocument& d, Format f) {
  if (f == Format::Json) return to_json(d).dump(2) + "\n";
  const detail::Table t = detail::table_for(d);
  std::ostringstream os;
  if (f == Format::Csv) {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << detail::csv_escape(cells[i]);
      os << "\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return os.str();
  }
  auto line = [&](const std::vector<std::string>& cells) {
    os << "|";
    for (const auto& c : cells) os << " " << c << " |";
    os << "\n";
  };
  os << "## " << d.command << "\n\n";
  line(t.header);
  os << "|";
  for (std::size_t i = 0; i < t.header.size(); ++i) os << "---|";
  os << "\n";
  for (const auto& r : t.rows) line(r);
  os << "\npass " << d.passed() << ", fail " << d.failed() << ", skipped " << d.skipped() << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands

struct Outcome {
  ReportDocument doc;
  int exit_code = 0;
};

/// Parses {"ambient_dim": d, "vectors": [[...], ...]} and orthonormalizes.
inline Subspace parse_subspace(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("malformed JSON: ") + e.what());
  }
  try {
    if (!j.is_object()) throw UsageError("subspace must be a JSON object");
    const auto d = j.at("ambient_dim").get<std::int64_t>();
    if (d <= 0) throw UsageError("ambient_dim must be positive");
    std::vector<Vector> vecs;
    for (const auto& row : j.at("vectors")) {
      Vector v = row.get<Vector>();
      if (v.size() != static_cast<std::size_t>(d)) throw UsageError("vector length differs from ambient_dim");
      if (!all_finite(v)) throw UsageError("non-finite vector entry");
      vecs.push_back(std::move(v));
    }
    return Subspace::span(vecs);
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid subspace: ") + e.what());
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(std::string("invalid subspace: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline Outcome cmd_jordan(const std::string& p_file, const std::string& q_file, double cluster_tol) {
  if (!(cluster_tol > 0)) throw UsageError("cluster tolerance must be positive");
  const Subspace p = parse_subspace(read_file(p_file));
  const Subspace q = parse_subspace(read_file(q_file));
  if (p.ambient_dim != q.ambient_dim) throw UsageError("dimension mismatch");
  const JordanSpectrum s = jordan_spectrum(p, q, cluster_tol);
  ReportDocument d;
  d.command = "jordan";
  d.results.push_back({{"kind", "jordan"},
                       {"dim_p", p.dim()},
                       {"dim_q", q.dim()},
                       {"ambient_dim", p.ambient_dim},
                       {"cluster_tol", real(cluster_tol)},
                       {"spectrum", spectrum_json(s)},
                       {"pass", true},
                       {"status", "pass"}});
  return {d, 0};
}

inline Outcome cmd_cja(const ModelSpec& spec, std::size_t samples, std::uint64_t seed, double angle_tol) {
  const auto imm = build(spec);
  const Subspace q0 = imm->reference_plane();
  const CJAReport rep = cja_check(*imm, q0, samples, seed, angle_tol);
  ReportDocument d;
  d.command = "cja";
  d.seed = seed;
  d.model = model_json(spec);
  d.results.push_back(cja_json(rep));
  d.extra["is_cja"] = rep.is_cja;
  // v at the reference spectrum; infinite when a normal angle is pi/2
  double v = 1.0;
  bool finite = true;
  for (const auto& c : rep.reference_spectrum) {
    if (kHalfPi - c.angle <= 1e-9) finite = false;
    v /= std::pow(std::cos(c.angle), static_cast<double>(c.multiplicity));
  }
  d.extra["v"] = finite ? real(v) : json(nullptr);
  return {d, rep.is_cja ? 0 : 1};
}

inline std::vector<IdentityId> parse_identities(const std::string& list) {
  if (list == "all") return {std::begin(kAllIdentities), std::end(kAllIdentities)};
  std::vector<IdentityId> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto id = parse_identity(item);
    if (!id) throw UsageError("unknown identity: " + item);
    out.push_back(*id);
  }
  if (out.empty()) throw UsageError("no identities given");
  return out;
}

inline Outcome cmd_verify(const ModelSpec& spec, const std::vector<IdentityId>& ids, std::size_t samples,
                          std::uint64_t seed) {
  if (samples == 0) throw UsageError("need at least one sample");
  const auto imm = build(spec);
  Rng rng(seed);
  std::vector<Sample> pts;
  for (std::size_t s = 0; s < samples; ++s) pts.push_back(imm->sample(rng));
  ReportDocument d;
  d.command = "verify";
  d.seed = seed;
  d.model = model_json(spec);
  for (IdentityId id : ids) {
    try {
      for (std::size_t s = 0; s < pts.size(); ++s) {
        try {
          d.results.push_back(identity_json(verify_identity(*pts[s].chart, id, pts[s].param), s));
        } catch (const InapplicableIdentity&) {
          throw;
        } catch (const Error& e) {
          // a numerical failure at one sample counts against the identity
          d.results.push_back({{"kind", "identity"},
                               {"identity", std::string(identity_name(id))},
                               {"sample", s},
                               {"param", reals(pts[s].param)},
                               {"pass", false},
                               {"status", "fail"},
                               {"reason", e.what()}});
        }
      }
    } catch (const InapplicableIdentity& e) {
      d.results.push_back(skipped_json(id, e.what()));
    }
  }
  return {d, d.failed() == 0 ? 0 : 1};
}

inline ReportDocument cmd_models_list() {
  ReportDocument d;
  d.command = "models";
  for (ModelName m : kAllModels)
    d.results.push_back({{"kind", "model"},
                         {"name", std::string(model_name(m))},
                         {"description", std::string(model_summary(m))},
                         {"constant_angles", build(m)->constant_angles()}});
  return d;
}

inline ModelSpec model_from_cli(const std::string& name, const std::vector<std::string>& params) {
  const auto m = parse_model_name(name);
  if (!m) throw UsageError("unknown model: " + name);
  try {
    return parse_model_spec(*m, params);
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

}  // namespace jgeom::cli
