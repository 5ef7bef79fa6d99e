#include "cman/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cman {
namespace {

constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double num_from(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json mat_rows(const Mat& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < M.cols(); ++j) r.push_back(num(M(i, j)));
    rows.push_back(r);
  }
  return rows;
}

Mat mat_from_rows(const json& rows) {
  const auto r = rows.size();
  const auto c = r ? rows[0].size() : 0;
  Mat M(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw Error(ErrorKind::input, "json: ragged matrix");
    for (std::size_t j = 0; j < c; ++j) M(i, j) = num_from(rows[i][j]);
  }
  return M;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Vec vec_from(const json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = num_from(a[i]);
  return v;
}

void check_schema(const json& j, const char* what) {
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != kSchemaVersion) {
    throw Error(ErrorKind::input, std::string(what) + ": missing or unsupported schema_version");
  }
}

// Table of scalar ConstantsConfig fields shared by both directions.
struct DoubleField {
  const char* name;
  double ConstantsConfig::*ptr;
};
struct IntField {
  const char* name;
  int ConstantsConfig::*ptr;
};
constexpr DoubleField kDoubles[] = {
    {"delta", &ConstantsConfig::delta},
    {"eta", &ConstantsConfig::eta},
    {"alpha", &ConstantsConfig::alpha},
    {"lambda", &ConstantsConfig::lambda},
    {"eps0", &ConstantsConfig::eps0},
    {"eps1", &ConstantsConfig::eps1},
    {"Cmn", &ConstantsConfig::Cmn},
    {"trunc_alpha", &ConstantsConfig::trunc_alpha},
    {"trunc_beta", &ConstantsConfig::trunc_beta},
    {"sigma", &ConstantsConfig::sigma},
    {"theta", &ConstantsConfig::theta},
    {"gamma", &ConstantsConfig::gamma},
    {"tau_exp", &ConstantsConfig::tau_exp},
    {"lip_constant", &ConstantsConfig::lip_constant},
    {"decay_theta", &ConstantsConfig::decay_theta},
    {"interp_radius_factor", &ConstantsConfig::interp_radius_factor},
    {"grid_h", &ConstantsConfig::grid_h},
};
constexpr IntField kInts[] = {
    {"m", &ConstantsConfig::m},
    {"n", &ConstantsConfig::n},
    {"n0", &ConstantsConfig::n0},
    {"k0", &ConstantsConfig::k0},
    {"nodes_per_rho", &ConstantsConfig::nodes_per_rho},
    {"poly_degree", &ConstantsConfig::poly_degree},
    {"harmonic_degree", &ConstantsConfig::harmonic_degree},
    {"kernel_profile", &ConstantsConfig::kernel_profile},
};

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* what) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* name : keys) ok |= k == name;
    if (!ok) throw Error(ErrorKind::input, std::string(what) + ": unknown key '" + k + "'");
  }
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::input, std::string("json: bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& b) {
  std::string out;
  out.reserve((b.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < b.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t(b[i]) << 16) | (i + 1 < b.size() ? std::uint32_t(b[i + 1]) << 8 : 0) |
                            (i + 2 < b.size() ? std::uint32_t(b[i + 2]) : 0);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += i + 1 < b.size() ? kB64[(v >> 6) & 63] : '=';
    out += i + 2 < b.size() ? kB64[v & 63] : '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw Error(ErrorKind::input, "base64: length not a multiple of 4");
  auto val = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      int d = 0;
      if (c == '=') {
        ++pad;
      } else if ((d = val(c)) < 0) {
        throw Error(ErrorKind::input, "base64: invalid character");
      }
      v = (v << 6) | std::uint32_t(d);
    }
    out.push_back(std::uint8_t(v >> 16));
    if (pad < 2) out.push_back(std::uint8_t(v >> 8));
    if (pad < 1) out.push_back(std::uint8_t(v));
  }
  return out;
}

std::string encode_mask(const std::vector<std::uint8_t>& mask) {
  std::vector<std::uint8_t> bytes((mask.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) bytes[i / 8] |= std::uint8_t(1u << (i % 8));
  return base64_encode(bytes);
}

std::vector<std::uint8_t> decode_mask(const std::string& text, std::size_t count) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != (count + 7) / 8) throw Error(ErrorKind::input, "mask: length does not match node count");
  std::vector<std::uint8_t> mask(count);
  for (std::size_t i = 0; i < count; ++i) mask[i] = (bytes[i / 8] >> (i % 8)) & 1u;
  return mask;
}

json to_json(const GridFunction& g) {
  json values = json::array();
  for (double v : g.raw()) values.push_back(num(v));
  return json{{"center", {g.center().x(), g.center().y()}},
              {"radius", g.radius()},
              {"h", g.h()},
              {"n", g.n()},
              {"side", g.side()},
              {"values", std::move(values)}};
}

GridFunction grid_from_json(const json& j) {
  try {
    GridFunction g(Vec2(j.at("center")[0].get<double>(), j.at("center")[1].get<double>()), j.at("radius").get<double>(),
                   j.at("h").get<double>(), j.at("n").get<int>());
    const json& v = j.at("values");
    if (v.size() != g.raw().size()) throw Error(ErrorKind::input, "grid: value count does not match the lattice");
    for (std::size_t i = 0; i < v.size(); ++i) g.raw()[i] = num_from(v[i]);
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::input, std::string("grid: ") + e.what());
  }
}

json to_json(const Frame& f) { return json{{"m", f.m()}, {"rotation", mat_rows(f.rotation())}}; }

Frame frame_from_json(const json& j) {
  try {
    return Frame(mat_from_rows(j.at("rotation")), j.at("m").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::input, std::string("frame: ") + e.what());
  }
}

json to_json(const SampledCurrent& T) {
  json defects = json::array();
  for (const auto& d : T.defects) {
    defects.push_back(json{{"position", vec_json(d.position)}, {"tangent", mat_rows(d.tangent)}, {"mass", d.mass}});
  }
  return json{{"schema_version", kSchemaVersion},
              {"type", "SampledCurrent"},
              {"dims", {{"m", T.m()}, {"n", T.n()}}},
              {"frame", to_json(T.frame)},
              {"source", T.source ? T.source->describe() : std::string()},
              {"grid", to_json(T.base)},
              {"defects", std::move(defects)}};
}

SampledCurrent current_from_json(const json& j) {
  check_schema(j, "SampledCurrent");
  try {
    SampledCurrent T;
    T.frame = frame_from_json(j.at("frame"));
    T.base = grid_from_json(j.at("grid"));
    for (const auto& d : j.at("defects")) {
      DefectSample s;
      s.position = vec_from(d.at("position"));
      s.tangent = mat_from_rows(d.at("tangent"));
      s.mass = d.at("mass").get<double>();
      T.defects.push_back(std::move(s));
    }
    T.refresh_mask();
    T.validate();
    return T;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::input, std::string("SampledCurrent: ") + e.what());
  }
}

json to_json(const LipApprox& A) {
  return json{{"schema_version", kSchemaVersion},
              {"type", "LipApprox"},
              {"f", to_json(A.f)},
              {"K", encode_mask(A.K)},
              {"r", A.r},
              {"s", A.s},
              {"threshold", A.threshold},
              {"lip_bound", A.lip_bound},
              {"stats",
               {{"lip_const", num(A.stats.lip_const)},
                {"bad_measure", num(A.stats.bad_measure)},
                {"energy_gap", num(A.stats.energy_gap)},
                {"E", num(A.E)},
                {"bad_bound", num(A.stats.bad_bound)},
                {"bad_bound_coarse", num(A.stats.bad_bound_coarse)},
                {"slice_radius", num(A.stats.slice_radius)},
                {"competitor_gap", num(A.stats.competitor_gap)}}}};
}

json to_json(const Interpolant& I) {
  // Full derivative tensors D^l g(q') flattened row-major: entry (i_1..i_l)
  // is the partial with a = #{i = 0}, b = #{i = 1}.
  json jets = json::array();
  for (int c = 0; c < I.jets.rows(); ++c) {
    json orders = json::array();
    for (int l = 0; l <= 4; ++l) {
      json t = json::array();
      for (int idx = 0; idx < (1 << l); ++idx) {
        const int b = std::popcount(static_cast<unsigned>(idx));
        t.push_back(num(I.jets(c, jet_index(l - b, b))));
      }
      orders.push_back(std::move(t));
    }
    jets.push_back(std::move(orders));
  }
  return json{{"schema_version", kSchemaVersion},
              {"type", "Interpolant"},
              {"provenance", {{"p", vec_json(I.p)}, {"rho", I.rho}, {"plane", to_json(I.plane)}}},
              {"center", {I.center.x(), I.center.y()}},
              {"h", I.h},
              {"E", num(I.E)},
              {"admissibility", {{"lhs", num(I.admissibility_lhs)}, {"rhs", num(I.admissibility_rhs)}}},
              {"harmonic_residual", num(I.harmonic_residual)},
              {"jets", std::move(jets)},
              {"grid", to_json(I.g)}};
}

json to_json(const BlendedSurface& H) {
  const DyadicGrid& G = H.pou.grid();
  return json{{"schema_version", kSchemaVersion},
              {"type", "BlendedSurface"},
              {"k", H.k},
              {"n0", G.n0},
              {"cubes", G.size()},
              {"bump_width", H.pou.width()},
              {"half_side", G.half_side},
              {"values", to_json(H.h)}};
}

json to_json(const ConstantsConfig& c) {
  json j = json::object();
  for (const auto& f : kInts) j[f.name] = c.*(f.ptr);
  for (const auto& f : kDoubles) j[f.name] = c.*(f.ptr);
  return j;
}

ConstantsConfig constants_from_json(const json& j) {
  ConstantsConfig c;
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const auto& f : kInts) {
      if (k == f.name) {
        get_if(j, f.name, c.*(f.ptr));
        known = true;
      }
    }
    for (const auto& f : kDoubles) {
      if (k == f.name) {
        get_if(j, f.name, c.*(f.ptr));
        known = true;
      }
    }
    if (!known) throw Error(ErrorKind::input, "constants: unknown key '" + k + "'");
  }
  return c;
}

json to_json(const SurfaceSpec& s) {
  json coeffs = json::array();
  for (const auto& c : s.harmonic_coeffs) coeffs.push_back({c[0], c[1]});
  return json{{"kind", to_string(s.kind)},
              {"epsilon", s.epsilon},
              {"tilt", mat_rows(s.tilt)},
              {"harmonic_coeffs", std::move(coeffs)},
              {"base", to_string(s.base)},
              {"defect_fraction", s.defect_fraction},
              {"defect_mass", s.defect_mass},
              {"seed", s.seed},
              {"resolution", s.resolution},
              {"radius", s.radius}};
}

SurfaceSpec surface_from_json(const json& j) {
  reject_unknown(j, {"kind", "epsilon", "tilt", "harmonic_coeffs", "base", "defect_fraction", "defect_mass", "seed",
                     "resolution", "radius"},
                 "surface");
  SurfaceSpec s;
  std::string kind = to_string(s.kind), base = to_string(s.base);
  get_if(j, "kind", kind);
  get_if(j, "base", base);
  s.kind = surface_kind_from_string(kind);
  s.base = surface_kind_from_string(base);
  get_if(j, "epsilon", s.epsilon);
  if (j.contains("tilt")) s.tilt = mat_from_rows(j["tilt"]);
  if (j.contains("harmonic_coeffs")) {
    for (const auto& c : j["harmonic_coeffs"]) s.harmonic_coeffs.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  }
  get_if(j, "defect_fraction", s.defect_fraction);
  get_if(j, "defect_mass", s.defect_mass);
  get_if(j, "seed", s.seed);
  get_if(j, "resolution", s.resolution);
  get_if(j, "radius", s.radius);
  return s;
}

json to_json(const RunConfig& c) {
  return json{{"surface", to_json(c.surface)},
              {"constants", to_json(c.constants)},
              {"k_min", c.k_min},
              {"k_max", c.k_max},
              {"checks", c.checks},
              {"out", c.out},
              {"seed", c.seed},
              {"plane_mode", to_string(c.plane_mode)},
              {"blend_samples", c.blend_samples}};
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::input, "run config: expected a JSON object");
  reject_unknown(j, {"schema_version", "surface", "constants", "k_min", "k_max", "checks", "out", "seed",
                     "plane_mode", "blend_samples"},
                 "run config");
  RunConfig c;
  if (j.contains("surface")) c.surface = surface_from_json(j["surface"]);
  if (j.contains("constants")) c.constants = constants_from_json(j["constants"]);
  get_if(j, "k_min", c.k_min);
  get_if(j, "k_max", c.k_max);
  get_if(j, "checks", c.checks);
  get_if(j, "out", c.out);
  get_if(j, "seed", c.seed);
  std::string mode = to_string(c.plane_mode);
  get_if(j, "plane_mode", mode);
  c.plane_mode = plane_mode_from_string(mode);
  get_if(j, "blend_samples", c.blend_samples);
  return c;
}

json to_json(const CertReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back(json{{"name", c.name},
                          {"lhs", num(c.lhs)},
                          {"rhs", num(c.rhs)},
                          {"ratio", num(c.ratio)},
                          {"slack", c.slack},
                          {"pass", c.pass},
                          {"fitted_constant", c.fitted_constant ? num(*c.fitted_constant) : json(nullptr)},
                          {"fitted_exponent", c.fitted_exponent ? num(*c.fitted_exponent) : json(nullptr)},
                          {"inputs_hash", c.inputs_hash},
                          {"detail", c.detail}});
  }
  json meta = json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  return json{{"schema_version", kSchemaVersion},
              {"type", "CertReport"},
              {"metadata", std::move(meta)},
              {"all_pass", r.all_pass()},
              {"checks", std::move(checks)}};
}

std::string report_csv(const CertReport& r) {
  std::ostringstream os;
  os << "# columns: name,lhs,rhs,ratio,slack,pass,fitted_constant,fitted_exponent,inputs_hash,detail\n";
  for (const auto& c : r.checks) {
    os << csv_text(c.name) << ',' << csv_num(c.lhs) << ',' << csv_num(c.rhs) << ',' << csv_num(c.ratio) << ','
       << csv_num(c.slack) << ',' << (c.pass ? 1 : 0) << ','
       << (c.fitted_constant ? csv_num(*c.fitted_constant) : "") << ','
       << (c.fitted_exponent ? csv_num(*c.fitted_exponent) : "") << ',' << c.inputs_hash << ','
       << csv_text(c.detail) << '\n';
  }
  return os.str();
}

std::string blended_csv(const BlendedSurface& H) {
  std::ostringstream os;
  const int n = H.h.n();
  os << "# columns: q1,q2";
  for (int c = 0; c < n; ++c) {
    for (int l = 0; l <= 4; ++l)
      for (int b = 0; b <= l; ++b) os << ",d" << (l - b) << b << "_h" << c;
  }
  os << "   (dab_hc = d^a/dq1^a d^b/dq2^b of component c)\n";
  for (std::size_t k = 0; k < H.jet.node_count(); ++k) {
    const Vec2 q = H.jet.node(k);
    os << csv_num(q.x()) << ',' << csv_num(q.y());
    for (int c = 0; c < n; ++c) {
      for (int l = 0; l <= 4; ++l)
        for (int b = 0; b <= l; ++b)
          os << ',' << csv_num(H.jet.raw()[k * H.jet.n() + c * jet_size(4) + jet_index(l - b, b)]);
    }
    os << '\n';
  }
  return os.str();
}

std::string excess_csv(const std::vector<ExcessReport>& rows) {
  std::ostringstream os;
  int angles = 0;
  for (const auto& r : rows) angles = std::max(angles, r.plane.m() * r.plane.n());
  os << "# columns: kind,r";
  for (int a = 0; a < angles; ++a) os << ",plane_angle_" << a + 1;
  os << ",value   (plane angles: atan of the plane's tilt entries, row-major)\n";
  for (const auto& r : rows) {
    os << to_string(r.kind) << ',' << csv_num(r.region.radius);
    const Mat L = r.plane.tilt();
    int written = 0;
    for (int i = 0; i < L.rows(); ++i)
      for (int j = 0; j < L.cols(); ++j, ++written) os << ',' << csv_num(std::atan(L(i, j)));
    for (; written < angles; ++written) os << ',';
    os << ',' << csv_num(r.value) << '\n';
  }
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

}  // namespace cman
