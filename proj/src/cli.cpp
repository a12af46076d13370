#include "eulertopo/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numeric>
#include <random>
#include <sstream>

#include "eulertopo/invariants.hpp"
#include "eulertopo/kernels.hpp"
#include "eulertopo/labsim.hpp"
#include "eulertopo/quench.hpp"

namespace eulertopo::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct RunConfig {
  std::string mode;
  double m = 1.0;
  int nx = 20, ny = 20, nt = 64;
  std::uint64_t seed = 1;
  std::string out = "out";
  long shots = 3000;
  std::string noise = "none";  // none | paper
  double duration = 40.0;
  int steps = 400;
  std::vector<double> target1 = {0.30, 0.20, 0.93};
  std::vector<double> target2 = {-0.22, -0.32, 0.92};
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header) : out_(path) {
    if (!out_) throw Error("cannot open " + path.string());
    out_ << header << "\n";
  }
  void row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ",";
      out_ << fmt17(values[i]);
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

json config_echo(const RunConfig& c) {
  json j;
  j["mode"] = c.mode;
  j["m"] = c.m;
  j["grid"] = {c.nx, c.ny, c.nt};
  j["seed"] = c.seed;
  j["shots"] = c.shots;
  j["noise"] = c.noise;
  j["duration"] = c.duration;
  j["steps"] = c.steps;
  j["target1"] = c.target1;
  j["target2"] = c.target2;
  j["kernel_backend"] = kernels::backend_name();
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string());
  out << j.dump(2) << "\n";
}

int cmd_euler(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  const BZGrid<Vec3> nf = n_field(cfg.m, cfg.nx, cfg.ny);
  {
    CsvWriter csv(dir / "nfield.csv", "kx,ky,nx,ny,nz");
    for (int i = 0; i < cfg.nx; ++i)
      for (int j = 0; j < cfg.ny; ++j) {
        const Momentum k = nf.node(i, j);
        const Vec3& n = nf.at(i, j);
        csv.row({k.kx, k.ky, n.x(), n.y(), n.z()});
      }
  }
  const double xi = winding_number(nf);
  const double xi_direct = euler_class_direct(nf);
  const int chern = chern_number_fhs(lower_band_states(nf));
  const auto gauge = fix_gauge(frame_grid(cfg.m, cfg.nx, cfg.ny));
  json j;
  j["config"] = config_echo(cfg);
  j["xi_solid_angle"] = xi;
  j["xi_direct"] = xi_direct;
  j["chern"] = chern;
  j["orientable"] = gauge.orientable;
  write_json(dir / "euler.json", j);
  return 0;
}

int cmd_wilson(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  const BZGrid<BlochFrame> frames = frame_grid(cfg.m, cfg.nx, cfg.ny);
  json j;
  j["config"] = config_echo(cfg);
  for (Axis axis : {Axis::x, Axis::y}) {
    const WilsonSpectrum spec = wilson_spectrum(frames, axis);
    const std::string tag = (axis == Axis::x) ? "x" : "y";
    CsvWriter csv(dir / ("wilson_" + tag + ".csv"), "transverse_k,theta1,theta2");
    double max_pairing = 0.0;
    for (size_t t = 0; t < spec.transverse_k.size(); ++t) {
      csv.row({spec.transverse_k[t], spec.branches[t][0], spec.branches[t][1]});
      max_pairing = std::max(max_pairing, std::abs(spec.branches[t][0] + spec.branches[t][1]));
    }
    j["winding_" + tag] = wilson_winding(spec);
    j["max_pairing_defect_" + tag] = max_pairing;
  }
  write_json(dir / "wilson.json", j);
  return 0;
}

int cmd_espec(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  const BZGrid<BlochFrame> frames = frame_grid(cfg.m, cfg.nx, cfg.ny);
  json j;
  j["config"] = config_echo(cfg);
  for (Axis axis : {Axis::x, Axis::y}) {
    const int L = ((axis == Axis::x) ? cfg.nx : cfg.ny) / 2;
    const auto spectra = entanglement_spectrum(frames, axis, L);
    const std::string tag = (axis == Axis::x) ? "x" : "y";
    CsvWriter csv(dir / ("espec_" + tag + ".csv"), "conserved_k,index,xi");
    double closest_to_half = 1.0;
    for (const auto& s : spectra)
      for (size_t n = 0; n < s.xi.size(); ++n) {
        csv.row({s.conserved_k, double(n), s.xi[n]});
        closest_to_half = std::min(closest_to_half, std::abs(s.xi[n] - 0.5));
      }
    j["min_distance_to_half_" + tag] = closest_to_half;
  }
  write_json(dir / "espec.json", j);
  return 0;
}

int cmd_berry(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  const auto nodes = locate_dirac_nodes(1e-6);
  const double radius = 0.1 * kPi;
  const int npts = 16;
  auto loop_phase = [&](double cx, double cy) {
    std::vector<Vec3> states;
    for (int i = 0; i <= npts; ++i) {
      const double th = 2.0 * kPi * i / npts;
      const Momentum k(cx + radius * std::cos(th), cy + radius * std::sin(th));
      states.push_back(eig_frame(perturbed_ham(k)).u1);
    }
    // close the loop on the starting state, sign-aligned by continuity
    states.back() = states.front();
    return berry_phase(states);
  };
  json j;
  j["config"] = config_echo(cfg);
  json loops = json::array();
  double sum = 0.0;
  for (const auto& node : nodes) {
    const double gamma = loop_phase(node.k.kx, node.k.ky);
    sum += gamma;
    loops.push_back({{"center_kx", node.k.kx},
                     {"center_ky", node.k.ky},
                     {"radius", radius},
                     {"points", npts},
                     {"gamma", gamma}});
  }
  j["loops"] = loops;
  j["control_gamma_at_origin"] = loop_phase(0.0, 0.0);
  j["sum_mod_2pi"] = std::fmod(sum, 2.0 * kPi);
  write_json(dir / "berry.json", j);
  return 0;
}

int cmd_dirac(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  const auto nodes = locate_dirac_nodes(1e-6);
  json j;
  j["config"] = config_echo(cfg);
  json arr = json::array();
  for (const auto& n : nodes)
    arr.push_back({{"kx", n.k.kx}, {"ky", n.k.ky}, {"gap", n.gap}});
  j["nodes"] = arr;
  write_json(dir / "dirac.json", j);
  return 0;
}

int cmd_quench(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  const BZGrid<Vec3> af = a_field(cfg.m, cfg.nx, cfg.ny);
  {
    CsvWriter csv(dir / "afield.csv", "kx,ky,ax,ay,az");
    for (int i = 0; i < cfg.nx; ++i)
      for (int j = 0; j < cfg.ny; ++j) {
        const Momentum k = af.node(i, j);
        const Vec3& a = af.at(i, j);
        csv.row({k.kx, k.ky, a.x(), a.y(), a.z()});
      }
  }
  const HopfField field = build_hopf_field(cfg.m, cfg.nx, cfg.ny, cfg.nt);
  const Vec3 t1 = Vec3(cfg.target1[0], cfg.target1[1], cfg.target1[2]).normalized();
  const Vec3 t2 = Vec3(cfg.target2[0], cfg.target2[1], cfg.target2[2]).normalized();
  const auto loops1 = extract_preimage(field, t1);
  const auto loops2 = extract_preimage(field, t2);
  auto dump_loops = [&](const std::vector<Polyline3>& loops, const std::string& tag) {
    for (size_t idx = 0; idx < loops.size(); ++idx) {
      CsvWriter csv(dir / ("preimage_" + tag + "_" + std::to_string(idx) + ".csv"), "kx,ky,t");
      for (const Vec3& p : loops[idx].points) csv.row({p.x(), p.y(), p.z()});
    }
  };
  dump_loops(loops1, "p1");
  dump_loops(loops2, "p2");

  auto patch_of = [&](const Polyline3& line) {
    double mean = 0.0;
    for (const Vec3& p : line.points) mean += wrap_angle(p.y());
    mean /= double(line.points.size());
    return mean > 0.0 ? Patch::upper : Patch::lower;
  };
  const double cell = 2.0 * kPi / cfg.nx;
  json link;
  for (Patch patch : {Patch::upper, Patch::lower}) {
    const std::string tag = (patch == Patch::upper) ? "upper" : "lower";
    double gauss = 0.0;
    bool have_pair = false;
    for (const auto& la : loops1) {
      if (!la.closed || patch_of(la) != patch) continue;
      for (const auto& lb : loops2) {
        if (!lb.closed || patch_of(lb) != patch) continue;
        gauss += gauss_linking(la, lb, 0.1 * cell);
        have_pair = true;
      }
    }
    link["patch_chern_" + tag] = patch_chern(cfg.m, patch, cfg.nx, cfg.ny);
    link["gauss_" + tag] = have_pair ? json(gauss) : json();
    link["chi_" + tag] = hopf_invariant(field, patch);
  }
  json j;
  j["config"] = config_echo(cfg);
  j["loops_p1"] = loops1.size();
  j["loops_p2"] = loops2.size();
  j["linking"] = link;
  write_json(dir / "linking.json", j);
  return 0;
}

int cmd_labsim(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  DetectionModel model;
  model.shots = cfg.shots;
  AdiabaticSchedule schedule;
  schedule.duration = cfg.duration;
  schedule.steps = cfg.steps;
  const bool sample = (cfg.noise == "paper");

  BZGrid<Vec3> reconstructed(cfg.nx, cfg.ny);
  std::vector<double> fidelities;
  {
    CsvWriter csv(dir / "fidelity.csv", "kx,ky,fidelity_vs_exact,prep_fidelity");
    for (int i = 0; i < cfg.nx; ++i) {
      for (int j = 0; j < cfg.ny; ++j) {
        const Momentum k = reconstructed.node(i, j);
        const Momentum kstar = nearest_high_symmetry_point(k);
        const std::uint64_t seed =
            cfg.seed + 1000003ULL * static_cast<std::uint64_t>(i * cfg.ny + j);
        const PipelineResult r =
            pipeline_measure_state(cfg.m, k, kstar, schedule, model, seed, sample);
        reconstructed.at(i, j) = r.psi_real;
        fidelities.push_back(r.fidelity_vs_exact);
        csv.row({k.kx, k.ky, r.fidelity_vs_exact, r.prep_fidelity});
        json rj;
        rj["k"] = {k.kx, k.ky};
        json rows = json::array();
        for (int a = 0; a < 3; ++a) {
          json row = json::array();
          for (int b = 0; b < 3; ++b)
            row.push_back({std::real(r.rho(a, b)), std::imag(r.rho(a, b))});
          rows.push_back(row);
        }
        rj["rho"] = rows;
        rj["seed"] = seed;
        rj["model"] = {{"N1", model.N1},        {"N2", model.N2},
                       {"N3", model.N3},        {"shots", model.shots},
                       {"sampled", sample}};
        write_json(dir / ("rho_" + std::to_string(i) + "_" + std::to_string(j) + ".json"), rj);
      }
    }
  }
  // Align reconstructed vectors for the winding evaluation: the solid-angle
  // sum is sign-sensitive, so re-use the analytic field as reference.
  BZGrid<BlochFrame> pseudo(cfg.nx, cfg.ny);
  for (int i = 0; i < cfg.nx; ++i)
    for (int j = 0; j < cfg.ny; ++j) {
      BlochFrame f;
      f.u3 = reconstructed.at(i, j);
      f.e1 = -1.0;
      f.e2 = -1.0;
      f.e3 = 1.0;
      pseudo.at(i, j) = f;
    }
  const auto fixed = fix_gauge(pseudo);
  BZGrid<Vec3> field(cfg.nx, cfg.ny);
  for (int i = 0; i < cfg.nx; ++i)
    for (int j = 0; j < cfg.ny; ++j) field.at(i, j) = fixed.frames.at(i, j).u3;

  const double mean =
      std::accumulate(fidelities.begin(), fidelities.end(), 0.0) / fidelities.size();
  double var = 0.0;
  for (double f : fidelities) var += (f - mean) * (f - mean);
  var /= fidelities.size();

  json j;
  j["config"] = config_echo(cfg);
  j["xi_solid_angle"] = winding_number(field);
  j["chern"] = chern_number_fhs(lower_band_states(field));
  j["orientable"] = fixed.orientable;
  j["mean_fidelity"] = mean;
  j["std_fidelity"] = std::sqrt(var);
  j["min_fidelity"] = *std::min_element(fidelities.begin(), fidelities.end());
  write_json(dir / "summary.json", j);
  return 0;
}

int cmd_fragile(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  const std::vector<double> svals = {0.0, 0.25, 0.5, 0.75, 1.0};
  json j;
  j["config"] = config_echo(cfg);
  json gaps = json::array();
  double max_theta_s1 = 0.0;
  for (size_t si = 0; si < svals.size(); ++si) {
    const double s = svals[si];
    const WilsonSpectrum spec = wilson_spectrum_four_band(cfg.m, s, cfg.nx, cfg.ny);
    CsvWriter csv(dir / ("fragile_s" + std::to_string(si) + ".csv"),
                  "transverse_k,theta1,theta2,theta3");
    for (size_t t = 0; t < spec.transverse_k.size(); ++t)
      csv.row({spec.transverse_k[t], spec.branches[t][0], spec.branches[t][1],
               spec.branches[t][2]});
    // Gap about theta = 0 measured at ky = 0: the largest |theta| of the
    // branch triple there (the winding pair sits at 0 at s = 0).
    double gap0 = 0.0;
    for (size_t t = 0; t < spec.transverse_k.size(); ++t) {
      if (std::abs(spec.transverse_k[t]) > 1e-12) continue;
      for (double th : spec.branches[t]) gap0 = std::max(gap0, std::abs(th));
    }
    gaps.push_back({{"s", s}, {"gap_at_ky0", gap0}});
    if (s == 1.0)
      for (const auto& br : spec.branches)
        for (double th : br) max_theta_s1 = std::max(max_theta_s1, std::abs(th));
  }
  j["gap_at_triple_point"] = gaps;
  j["max_abs_theta_s1"] = max_theta_s1;
  write_json(dir / "fragile.json", j);
  return 0;
}

int cmd_identity_check(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(-kPi, kPi);
  json j;
  j["config"] = config_echo(cfg);
  json per_m = json::array();
  for (double m : {1.0, 3.0}) {
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
      const Momentum k(uni(rng), uni(rng));
      worst = std::max(worst, integrand_identity_residual(m, k, 1e-3));
    }
    per_m.push_back({{"m", m}, {"max_residual_h1e-3", worst}});
  }
  j["samples"] = per_m;
  const double r_big = integrand_identity_residual(1.0, Momentum(0.3, 0.7), 0.2);
  const double r_small = integrand_identity_residual(1.0, Momentum(0.3, 0.7), 0.1);
  j["order_check"] = {{"h", 0.2}, {"residual", r_big}, {"residual_half", r_small},
                      {"ratio", r_big / std::max(r_small, 1e-300)}};
  write_json(dir / "identity.json", j);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<std::string> argv_s = args;
  std::vector<char*> argv;
  argv.reserve(argv_s.size() + 1);
  static std::string name = "eulertopo";
  argv.push_back(name.data());
  for (auto& s : argv_s) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, char** argv) {
  CLI::App app{"Three-band Euler-insulator toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string grid_spec;
  std::string config_file;
  bool m_set = false, grid_set = false, seed_set = false, out_set = false, shots_set = false,
       noise_set = false, duration_set = false, steps_set = false;

  const std::vector<std::string> modes = {"euler",  "wilson",  "espec",   "berry",         "dirac",
                                          "quench", "labsim",  "fragile", "identity-check"};
  std::vector<CLI::App*> subs;
  for (const auto& mode : modes) {
    CLI::App* sub = app.add_subcommand(mode);
    sub->add_option("--m", cfg.m)->each([&](const std::string&) { m_set = true; });
    sub->add_option("--grid", grid_spec)->each([&](const std::string&) { grid_set = true; });
    sub->add_option("--seed", cfg.seed)->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--out", cfg.out)->each([&](const std::string&) { out_set = true; });
    sub->add_option("--config", config_file);
    sub->add_option("--shots", cfg.shots)->each([&](const std::string&) { shots_set = true; });
    sub->add_option("--noise", cfg.noise)
        ->check(CLI::IsMember({"paper", "none"}))
        ->each([&](const std::string&) { noise_set = true; });
    sub->add_option("--duration", cfg.duration)
        ->each([&](const std::string&) { duration_set = true; });
    sub->add_option("--steps", cfg.steps)->each([&](const std::string&) { steps_set = true; });
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (size_t i = 0; i < modes.size(); ++i)
    if (subs[i]->parsed()) cfg.mode = modes[i];

  try {
    // Precedence: defaults < config file < explicit flags.
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw InvalidParameter("config file not found: " + config_file);
      json j = json::parse(in);
      if (j.contains("m") && !m_set) cfg.m = j["m"].get<double>();
      if (j.contains("grid") && !grid_set) grid_spec = j["grid"].get<std::string>();
      if (j.contains("seed") && !seed_set) cfg.seed = j["seed"].get<std::uint64_t>();
      if (j.contains("out") && !out_set) cfg.out = j["out"].get<std::string>();
      if (j.contains("shots") && !shots_set) cfg.shots = j["shots"].get<long>();
      if (j.contains("noise") && !noise_set) cfg.noise = j["noise"].get<std::string>();
      if (j.contains("duration") && !duration_set) cfg.duration = j["duration"].get<double>();
      if (j.contains("steps") && !steps_set) cfg.steps = j["steps"].get<int>();
      if (j.contains("target1")) cfg.target1 = j["target1"].get<std::vector<double>>();
      if (j.contains("target2")) cfg.target2 = j["target2"].get<std::vector<double>>();
    }
    if (!grid_spec.empty()) {
      int nx = 0, ny = 0, nt = 0;
      const int parsed = std::sscanf(grid_spec.c_str(), "%dx%dx%d", &nx, &ny, &nt);
      if (parsed < 2) throw InvalidParameter("grid spec must be NXxNY or NXxNYxNT");
      cfg.nx = nx;
      cfg.ny = ny;
      if (parsed == 3) cfg.nt = nt;
    }
    if (cfg.nx < 4 || cfg.ny < 4 || cfg.nt < 4)
      throw InvalidParameter("grid sizes must be >= 4");
    if (cfg.target1.size() != 3 || cfg.target2.size() != 3)
      throw InvalidParameter("targets must have three components");
    require_valid_m(cfg.m);
    fs::create_directories(cfg.out);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (cfg.mode == "euler") return cmd_euler(cfg);
    if (cfg.mode == "wilson") return cmd_wilson(cfg);
    if (cfg.mode == "espec") return cmd_espec(cfg);
    if (cfg.mode == "berry") return cmd_berry(cfg);
    if (cfg.mode == "dirac") return cmd_dirac(cfg);
    if (cfg.mode == "quench") return cmd_quench(cfg);
    if (cfg.mode == "labsim") return cmd_labsim(cfg);
    if (cfg.mode == "fragile") return cmd_fragile(cfg);
    if (cfg.mode == "identity-check") return cmd_identity_check(cfg);
    std::cerr << "config error: unknown mode\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace eulertopo::cli
