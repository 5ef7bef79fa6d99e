// Command-line driver: surface generation, single stages, and the full
// certification run. Exit codes: 0 pass, 1 check failure, 2 input or stage error.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cman/io.hpp"

namespace {

using namespace cman;

struct Common {
  std::string config;
  std::optional<int> k;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string checks;
};

RunConfig load(const Common& o) {
  RunConfig cfg;
  if (!o.config.empty()) {
    json j;
    try {
      j = json::parse(read_file(o.config));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::input, "config '" + o.config + "': " + e.what());
    }
    cfg = run_config_from_json(j);
  }
  if (o.k) cfg.k_min = cfg.k_max = *o.k;
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.surface.seed = *o.seed;
  }
  if (!o.checks.empty()) {
    cfg.checks.clear();
    std::stringstream ss(o.checks);
    for (std::string c; std::getline(ss, c, ',');)
      if (!c.empty()) cfg.checks.push_back(c);
  }
  if (!o.out.empty()) cfg.out = o.out;
  cfg.validate();
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create '" + dir + "': " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (std::filesystem::path(dir) / name).string(); }

void print_summary(const CertReport& r) {
  for (const auto& c : r.checks) {
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << "  ratio=" << c.ratio;
    if (!c.detail.empty()) std::cerr << "  " << c.detail;
    std::cerr << "\n";
  }
}

json report_json(const PipelineResult& res, const RunConfig& cfg) {
  json j = to_json(res.report);
  j["config"] = to_json(cfg);
  json levels = json::array();
  for (const auto& L : res.levels) {
    levels.push_back(json{{"k", L.k},
                          {"c0_error", L.c0_error},
                          {"c3_norm", L.c3_norm},
                          {"holder", L.holder},
                          {"max_admissibility_ratio", L.max_admissibility_ratio}});
  }
  j["levels"] = std::move(levels);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Center-manifold construction and certification on sampled graphs"};
  app.require_subcommand(1);
  Common o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "RunConfig JSON file");
    sub->add_option("--k", o.k, "dyadic level (overrides the config's k range)");
    sub->add_option("--out", o.out, "output file or directory");
    sub->add_option("--seed", o.seed, "seed for every randomised step");
    sub->add_option("--checks", o.checks, "comma-separated check names");
  };
  auto* gen = app.add_subcommand("generate", "sample the configured surface (SampledCurrent JSON)");
  auto* apx = app.add_subcommand("approximate", "Lipschitz approximation over a cylinder at the origin");
  double apx_radius = 0.5;
  apx->add_option("--radius", apx_radius, "cylinder radius");
  auto* itp = app.add_subcommand("interpolate", "interpolant at a base point for level k");
  std::vector<double> center = {0.0, 0.0};
  itp->add_option("--center", center, "base point in pi_0")->expected(2);
  auto* bld = app.add_subcommand("blend", "blended surface h_k for each configured level");
  auto* cert = app.add_subcommand("certify", "run the selected checks and write the report");
  auto* run = app.add_subcommand("run", "full pipeline: surface, levels, checks, exports");
  for (auto* s : {gen, apx, itp, bld, cert, run}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = load(o);
    if (*gen) {
      emit(cfg.out, dump(to_json(generate_surface(cfg.surface))));
      return 0;
    }
    if (*apx) {
      const SampledCurrent T = generate_surface(cfg.surface);
      const LipApprox A = approximate(T, Region::cylinder(Vec::Zero(2), apx_radius, T.frame), cfg.constants);
      emit(cfg.out, dump(to_json(A)));
      return 0;
    }
    if (*itp) {
      const SampledCurrent T = generate_surface(cfg.surface);
      const double rho = cfg.constants.interp_radius_factor * std::ldexp(1.0, -cfg.k_min);
      const Vec p = base_point(T, Vec2(center[0], center[1]));
      const Interpolant I = interpolate(T, p, rho, Frame::identity(T.m(), T.n()), cfg.constants);
      emit(cfg.out, dump(to_json(I)));
      return 0;
    }
    if (*bld) {
      const SampledCurrent T = generate_surface(cfg.surface);
      const std::string dir = cfg.out.empty() ? "." : cfg.out;
      ensure_dir(dir);
      for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
        const DyadicGrid grid = dyadic_grid(k, cfg.constants.n0, 2);
        const PartitionOfUnity pou(grid);
        const BlendedSurface H =
            blend(level_interpolants(T, grid, cfg.plane_mode, cfg.constants), pou, cfg.blend_samples);
        write_file(join(dir, "blend_k" + std::to_string(k) + ".json"), dump(to_json(H)));
        write_file(join(dir, "blend_k" + std::to_string(k) + ".csv"), blended_csv(H));
      }
      return 0;
    }
    // certify and run
    const PipelineResult res = run_pipeline(cfg);
    const std::string dir = cfg.out.empty() ? "." : cfg.out;
    ensure_dir(dir);
    write_file(join(dir, "report.json"), dump(report_json(res, cfg)));
    write_file(join(dir, "report.csv"), report_csv(res.report));
    if (*run) {
      write_file(join(dir, "config.json"), dump(to_json(cfg)));
      for (const auto& L : res.levels) {
        write_file(join(dir, "blend_k" + std::to_string(L.k) + ".json"), dump(to_json(L.H)));
        write_file(join(dir, "blend_k" + std::to_string(L.k) + ".csv"), blended_csv(L.H));
      }
    }
    print_summary(res.report);
    return res.report.all_pass() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
