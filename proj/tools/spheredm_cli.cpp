// Experiment driver: builds kernel differentiation matrices on the sphere and
// writes spectrum dumps, coupling-norm tables, local/global spectra distances,
// energy trajectories, and decomposition reports as CSV/JSON.

#include "spheredm/spheredm.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace spheredm;
using nlohmann::json;

struct Config {
  std::string experiment;
  std::string family = "fibonacci";
  std::vector<int> n_list;
  std::string kernel = "ss:m=3";
  std::string op = "p=0,-1";
  int mtilde = -1;  // -1: kernel's minimal CPD order
  std::vector<double> k_list;
  double dt = 0.0;  // 0: default step from the spectral radius
  int steps = 1000;
  std::string out = "spheredm_out";
  std::string points_file;
  unsigned long seed = 0;
  std::string exclude = "full";  // or "single"
};

std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  std::istringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

std::string echo(const Config& c) {
  std::ostringstream os;
  os.precision(17);
  os << "experiment=" << c.experiment << " family=" << c.family << " N=";
  for (size_t i = 0; i < c.n_list.size(); ++i) os << (i ? "," : "") << c.n_list[i];
  os << " kernel=" << c.kernel << " operator=" << c.op << " mtilde=" << c.mtilde << " K=";
  for (size_t i = 0; i < c.k_list.size(); ++i) os << (i ? "," : "") << c.k_list[i];
  os << " dt=" << c.dt << " steps=" << c.steps << " seed=" << c.seed
     << " exclude=" << c.exclude;
  if (!c.points_file.empty()) os << " points-file=" << c.points_file;
  return os.str();
}

/// Write-temp-then-rename so partially written outputs never appear.
void write_atomic(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file " + tmp);
    out << body;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::invalid_argument("cannot move output into place: " + path);
}

PointFamily parse_family(const std::string& s) {
  if (s == "fibonacci") return PointFamily::fibonacci;
  if (s == "hammersley") return PointFamily::hammersley;
  if (s == "min_energy") return PointFamily::min_energy;
  if (s == "file") return PointFamily::file;
  throw std::invalid_argument("family: expected fibonacci|hammersley|min_energy|file, got '" +
                              s + "'");
}

PointSet make_points(const Config& c, int n) {
  switch (parse_family(c.family)) {
    case PointFamily::fibonacci: return generate_fibonacci(n);
    case PointFamily::hammersley: return generate_hammersley(n);
    case PointFamily::min_energy: return generate_min_energy(n, 500);
    case PointFamily::file: {
      if (c.points_file.empty())
        throw std::invalid_argument("family=file requires --points-file");
      return load_pointset(c.points_file);
    }
  }
  throw std::invalid_argument("unreachable family");
}

int effective_mtilde(const Config& c, const ZonalKernel& kernel) {
  return c.mtilde >= 0 ? c.mtilde : kernel.cpd_order();
}

/// Deterministic unit-norm state, independent of the standard library's
/// distribution implementations.
Vector seeded_state(int n, unsigned long seed) {
  Vector u(n);
  std::uint64_t state = 0x853c49e6748fea9bull ^ (seed * 0x9e3779b97f4a7c15ull + 1);
  for (int i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    u(i) = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
  }
  u.normalize();
  return u;
}

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> messages;
  void fail(const std::string& msg) {
    ok = false;
    messages.push_back("reject: " + msg);
  }
  void note(const std::string& msg) { messages.push_back(msg); }
};

ValidationReport validate(const Config& c) {
  ValidationReport r;
  const ZonalKernel kernel = parse_kernel(c.kernel);
  const SpectralOperator op = parse_operator(c.op);
  const int mtilde = effective_mtilde(c, kernel);
  if (mtilde < kernel.cpd_order())
    r.fail("mtilde " + std::to_string(mtilde) + " below the kernel's minimal CPD order " +
           std::to_string(kernel.cpd_order()));
  const auto compat = check_compatibility(kernel, op, std::max(mtilde, kernel.cpd_order()));
  if (!compat.accepted)
    r.fail(compat.diagnostic);
  else
    r.note("compatibility: " + compat.diagnostic);
  for (int n : c.n_list) {
    if (c.family == "fibonacci" && n % 2 == 0)
      r.fail("fibonacci point sets need odd N, got " + std::to_string(n));
    if (n <= mtilde * mtilde)
      r.fail("N = " + std::to_string(n) + " does not exceed the polynomial dimension " +
             std::to_string(mtilde * mtilde));
    const double bytes = 8.0 * static_cast<double>(n) * static_cast<double>(n);
    if (bytes > 8e9)
      r.note("warning: N = " + std::to_string(n) + " needs about " + std::to_string(bytes) +
             " bytes per dense matrix");
    for (double k : c.k_list) {
      if (!(k > 0.0)) {
        r.fail("K must be positive, got " + std::to_string(k));
        continue;
      }
      const int sten = stencil_size(k, n, mtilde * mtilde);
      r.note("K=" + std::to_string(k) + ", N=" + std::to_string(n) + " -> stencil size " +
             std::to_string(sten));
    }
  }
  return r;
}

std::string csv_header(const Config& c, const std::string& columns) {
  return "# config: " + echo(c) + "\n" + columns + "\n";
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int run_points(const Config& c) {
  if (c.n_list.size() != 1) throw std::invalid_argument("points: need exactly one --N");
  const PointSet x = make_points(c, c.n_list[0]);
  std::ostringstream os;
  os << "# config: " << echo(c) << "\n";
  os.precision(17);
  for (int j = 0; j < x.size(); ++j)
    os << x[j].x << " " << x[j].y << " " << x[j].z << "\n";
  write_atomic(c.out, os.str());
  return 0;
}

int run_dm(const Config& c) {
  if (c.n_list.size() != 1) throw std::invalid_argument("dm: need exactly one --N");
  if (c.k_list.size() > 1) throw std::invalid_argument("dm: at most one --K");
  const ZonalKernel kernel = parse_kernel(c.kernel);
  const SpectralOperator op = parse_operator(c.op);
  const PointSet x = make_points(c, c.n_list[0]);
  std::ostringstream os;
  os << "# config: " << echo(c) << "\n";
  if (c.k_list.empty()) {
    const GlobalDM dm = global_dm_cpd(kernel, op, x, effective_mtilde(c, kernel));
    os.precision(17);
    for (int col = 0; col < dm.m.cols(); ++col)
      for (int row = 0; row < dm.m.rows(); ++row)
        os << row << " " << col << " " << dm.m(row, col) << "\n";
  } else {
    const LocalDM dm =
        assemble_local_dm(kernel, op, x, c.k_list[0], effective_mtilde(c, kernel));
    dm.write_coo(os);
  }
  write_atomic(c.out, os.str());
  return 0;
}

void dump_spectrum(const Config& c, const SpectrumReport& rep, const std::string& path) {
  std::ostringstream os;
  os << csv_header(c, "re,im");
  for (const auto& e : rep.spectrum.eigenvalues)
    os << fmt(e.real()) << "," << fmt(e.imag()) << "\n";
  write_atomic(path, os.str());
}

int run_spectra(const Config& c) {
  if (c.n_list.size() != 1 || c.k_list.size() != 1)
    throw std::invalid_argument("spectra: need exactly one --N and one --K");
  const ZonalKernel kernel = parse_kernel(c.kernel);
  const SpectralOperator op = parse_operator(c.op);
  const int mtilde = effective_mtilde(c, kernel);
  const PointSet x = make_points(c, c.n_list[0]);
  const GlobalDM dm = global_dm_cpd(kernel, op, x, mtilde);
  const LocalDM local = assemble_local_dm(kernel, op, x, c.k_list[0], mtilde);
  const SpectrumReport rg = spectrum_report(dm.m);
  const SpectrumReport rl = spectrum_report(local.to_dense());
  dump_spectrum(c, rg, c.out + ".global.csv");
  dump_spectrum(c, rl, c.out + ".local.csv");
  const ExclusionMultiplicity mult =
      c.exclude == "single" ? ExclusionMultiplicity::single : ExclusionMultiplicity::full;
  const DistanceReport dist = filtered_spectra_distance(rl, rg, op, mtilde, mult);
  json j;
  j["config"] = echo(c);
  j["N"] = c.n_list[0];
  j["K"] = c.k_list[0];
  j["stencil_n"] = local.stencils().n;
  j["global"] = {{"radius", rg.spectral_radius},
                 {"max_abs_imag", rg.max_abs_imag},
                 {"min_real", rg.min_real}};
  j["local"] = {{"radius", rl.spectral_radius},
                {"max_abs_imag", rl.max_abs_imag},
                {"min_real", rl.min_real}};
  j["dist_rel"] = dist.value;
  j["dist_abs"] = dist.value_abs;
  write_atomic(c.out + ".summary.json", j.dump(2) + "\n");
  return 0;
}

int run_rnorm(const Config& c) {
  if (c.n_list.empty()) throw std::invalid_argument("rnorm: need --N list");
  const ZonalKernel kernel = parse_kernel(c.kernel);
  const SpectralOperator op = parse_operator(c.op);
  const int mtilde = effective_mtilde(c, kernel);
  const auto rows = r_norm_table(kernel, op, mtilde, parse_family(c.family), c.n_list);
  const int m_col = kernel.kind() == KernelKind::surface_spline ? kernel.spline_order() : 0;
  std::ostringstream os;
  os << csv_header(c, "family,kernel,m,mtilde,N,q,normR");
  std::vector<double> qs, rs;
  for (const auto& row : rows) {
    if (!row.ok) {
      os << "# skipped N=" << row.n << ": " << row.error << "\n";
      continue;
    }
    os << c.family << "," << c.kernel << "," << m_col << "," << mtilde << "," << row.n << ","
       << fmt(row.q) << "," << fmt(row.norm_r) << "\n";
    if (row.norm_r > 0.0) {
      qs.push_back(row.q);
      rs.push_back(row.norm_r);
    }
  }
  write_atomic(c.out + ".csv", os.str());
  json j;
  j["config"] = echo(c);
  j["model"] = "algebraic";
  if (qs.size() >= 3) {
    const FitResult fit = fit_rate(qs, rs, FitModel::algebraic);
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["rms_residual"] = fit.rms_residual;
  } else {
    j["slope"] = nullptr;
    j["note"] = "fewer than 3 positive rows; no fit";
  }
  write_atomic(c.out + ".fit.json", j.dump(2) + "\n");
  return 0;
}

int run_localdist(const Config& c) {
  if (c.n_list.size() != 1 || c.k_list.empty())
    throw std::invalid_argument("localdist: need exactly one --N and a --K list");
  const ZonalKernel kernel = parse_kernel(c.kernel);
  const SpectralOperator op = parse_operator(c.op);
  const int mtilde = effective_mtilde(c, kernel);
  if (mtilde == 0)
    throw std::invalid_argument("localdist: needs mtilde >= 1 for the decomposition bounds");
  const int n = c.n_list[0];
  const PointSet x = make_points(c, n);
  const GlobalDM dm = global_dm_cpd(kernel, op, x, mtilde);
  const BlockDecomposition bd = decompose(dm);
  const SylvesterSolution sylv = sylvester_diagonalize(bd, op, mtilde);
  const SpectrumReport rg = spectrum_report(dm.m);
  const ExclusionMultiplicity mult =
      c.exclude == "single" ? ExclusionMultiplicity::single : ExclusionMultiplicity::full;
  const int m_col = kernel.kind() == KernelKind::surface_spline ? kernel.spline_order() : 0;

  std::ostringstream os;
  os << csv_header(c, "family,kernel,m,mtilde,N,K,n,dist_rel,dist_abs,bound_prop42,bound_thm44");
  std::vector<double> ks, dists;
  for (double k : c.k_list) {
    const LocalDM local = assemble_local_dm(kernel, op, x, k, mtilde);
    const Matrix dense = local.to_dense();
    const SpectrumReport rl = spectrum_report(dense);
    const DistanceReport dist = filtered_spectra_distance(rl, rg, op, mtilde, mult);
    const double diff = spectral_norm(dm.m - dense);
    const double bound42 = bauer_fike_cpd(bd, diff);
    double bound44 = std::numeric_limits<double>::quiet_NaN();
    if (sylv.kind != SylvesterCase::defective && sylv.gamma > 0.0)
      bound44 = bauer_fike_diag(bd, sylv, diff).bound;
    os << c.family << "," << c.kernel << "," << m_col << "," << mtilde << "," << n << ","
       << fmt(k) << "," << local.stencils().n << "," << fmt(dist.value) << ","
       << fmt(dist.value_abs) << "," << fmt(bound42) << "," << fmt(bound44) << "\n";
    ks.push_back(k);
    dists.push_back(dist.value);
  }
  write_atomic(c.out + ".csv", os.str());
  json j;
  j["config"] = echo(c);
  j["model"] = "exponential";
  if (ks.size() >= 3) {
    const FitResult fit = fit_rate(ks, dists, FitModel::exponential);
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["rms_residual"] = fit.rms_residual;
  } else {
    j["slope"] = nullptr;
    j["note"] = "fewer than 3 K values; no fit";
  }
  write_atomic(c.out + ".fit.json", j.dump(2) + "\n");
  return 0;
}

int run_energy(const Config& c) {
  if (c.n_list.size() != 1) throw std::invalid_argument("energy: need exactly one --N");
  const ZonalKernel kernel = parse_kernel(c.kernel);
  const SpectralOperator op = parse_operator(c.op);
  const int mtilde = effective_mtilde(c, kernel);
  const PointSet x = make_points(c, c.n_list[0]);
  const GlobalDM dm = global_dm_cpd(kernel, op, x, mtilde);
  std::function<double(const Vector&)> energy;
  std::string energy_kind;
  if (dm.mode == DmMode::cpd) {
    energy = CpdEnergy(dm.ingredients->a);
    energy_kind = "cpd_seminorm";
  } else {
    energy = PdEnergy(dm.ingredients->phi);
    energy_kind = "pd_norm";
  }
  const double dt = c.dt > 0.0 ? c.dt : default_dt(dm.m);
  const Vector u0 = seeded_state(x.size(), c.seed);
  const EvolutionRun run = evolve(dm.m, u0, dt, c.steps, energy);
  std::ostringstream os;
  os << csv_header(c, "t,energy,l2norm");
  for (size_t i = 0; i < run.times.size(); ++i)
    os << fmt(run.times[i]) << "," << fmt(run.energies[i]) << "," << fmt(run.l2_norms[i])
       << "\n";
  write_atomic(c.out + ".csv", os.str());
  bool monotone = true;
  double max_increase = 0.0;
  for (size_t i = 1; i < run.energies.size(); ++i) {
    const double inc = run.energies[i] - run.energies[i - 1];
    max_increase = std::max(max_increase, inc);
    if (inc > 1e-12) monotone = false;
  }
  json j;
  j["config"] = echo(c);
  j["energy"] = energy_kind;
  j["dt"] = dt;
  j["steps"] = c.steps;
  j["monotone"] = monotone;
  j["max_increase"] = max_increase;
  write_atomic(c.out + ".verdict.json", j.dump(2) + "\n");
  return 0;
}

int run_report(const Config& c) {
  if (c.n_list.size() != 1) throw std::invalid_argument("report: need exactly one --N");
  const ZonalKernel kernel = parse_kernel(c.kernel);
  const SpectralOperator op = parse_operator(c.op);
  const int mtilde = effective_mtilde(c, kernel);
  if (mtilde == 0)
    throw std::invalid_argument("report: needs mtilde >= 1 (the decomposition is trivial for "
                                "a plain PD kernel)");
  const PointSet x = make_points(c, c.n_list[0]);
  const GlobalDM dm = global_dm_cpd(kernel, op, x, mtilde);
  const BlockDecomposition bd = decompose(dm);
  const SylvesterSolution sylv = sylvester_diagonalize(bd, op, mtilde);
  json j = decomposition_report(dm, bd, sylv);
  j["config"] = echo(c);
  write_atomic(c.out + ".json", j.dump(2) + "\n");
  return 0;
}

void load_config_file(const std::string& path, Config& c) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = line.substr(first, eq - first);
    std::string value = line.substr(eq + 1);
    while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
    try {
      if (key == "family") c.family = value;
      else if (key == "N") c.n_list = parse_int_list(value);
      else if (key == "kernel") c.kernel = value;
      else if (key == "operator") c.op = value;
      else if (key == "mtilde") c.mtilde = std::stoi(value);
      else if (key == "K") c.k_list = parse_double_list(value);
      else if (key == "dt") c.dt = std::stod(value);
      else if (key == "steps") c.steps = std::stoi(value);
      else if (key == "out") c.out = value;
      else if (key == "points-file") c.points_file = value;
      else if (key == "seed") c.seed = std::stoul(value);
      else if (key == "exclude") c.exclude = value;
      else
        throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel differentiation matrices on the sphere: spectra, perturbation bounds, "
               "and energy-stability experiments"};
  app.require_subcommand(1);

  std::string config_path, family, kernel, op, out, points_file, exclude;
  std::string n_arg, k_arg;
  int mtilde = -1, steps = 0;
  double dt = 0.0;
  unsigned long seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file; flags override it");
    sub->add_option("--family", family, "fibonacci|hammersley|min_energy|file");
    sub->add_option("--N", n_arg, "point count, or comma-separated list");
    sub->add_option("--kernel", kernel, "'ss:m=<int>' or 'imq:eps=<real>'");
    sub->add_option("--operator", op, "'p=a0,a1,...' for p(x) = a0 + a1 x + ...");
    sub->add_option("--mtilde", mtilde, "CPD order (default: kernel minimum)");
    sub->add_option("--K", k_arg, "stencil parameter, or comma-separated list");
    sub->add_option("--dt", dt, "time step (default: 1 / (2 rho))");
    sub->add_option("--steps", steps, "number of time steps");
    sub->add_option("--out", out, "output path or prefix");
    sub->add_option("--points-file", points_file, "input points for family=file");
    sub->add_option("--seed", seed, "seed for the initial state");
    sub->add_option("--exclude", exclude,
                    "polynomial-eigenvalue exclusion multiplicity: full|single");
  };

  for (const char* name :
       {"points", "dm", "spectra", "rnorm", "localdist", "energy", "report", "validate"})
    add_common(app.add_subcommand(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Config cfg;
    auto* sub = app.get_subcommands().front();
    cfg.experiment = sub->get_name();
    if (!config_path.empty()) load_config_file(config_path, cfg);
    if (sub->count("--family")) cfg.family = family;
    if (sub->count("--N")) cfg.n_list = parse_int_list(n_arg);
    if (sub->count("--kernel")) cfg.kernel = kernel;
    if (sub->count("--operator")) cfg.op = op;
    if (sub->count("--mtilde")) cfg.mtilde = mtilde;
    if (sub->count("--K")) cfg.k_list = parse_double_list(k_arg);
    if (sub->count("--dt")) cfg.dt = dt;
    if (sub->count("--steps")) cfg.steps = steps;
    if (sub->count("--out")) cfg.out = out;
    if (sub->count("--points-file")) cfg.points_file = points_file;
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--exclude")) cfg.exclude = exclude;
    if (cfg.n_list.empty() && cfg.experiment != "validate")
      throw std::invalid_argument("--N is required");

    const ValidationReport report = validate(cfg);
    if (cfg.experiment == "validate") {
      for (const auto& msg : report.messages) std::cout << msg << "\n";
      std::cout << (report.ok ? "pass" : "fail") << "\n";
      return report.ok ? 0 : 2;
    }
    if (!report.ok) {
      for (const auto& msg : report.messages) std::cerr << msg << "\n";
      return 2;
    }

    if (cfg.experiment == "points") return run_points(cfg);
    if (cfg.experiment == "dm") return run_dm(cfg);
    if (cfg.experiment == "spectra") return run_spectra(cfg);
    if (cfg.experiment == "rnorm") return run_rnorm(cfg);
    if (cfg.experiment == "localdist") return run_localdist(cfg);
    if (cfg.experiment == "energy") return run_energy(cfg);
    if (cfg.experiment == "report") return run_report(cfg);
    throw std::invalid_argument("unknown experiment " + cfg.experiment);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
