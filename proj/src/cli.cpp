#include "dynbc/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynbc/assembly.hpp"
#include "dynbc/errors.hpp"
#include "dynbc/evolve.hpp"
#include "dynbc/geometry.hpp"
#include "dynbc/multiplier.hpp"
#include "dynbc/operator.hpp"
#include "dynbc/spectral.hpp"

namespace dynbc
{

namespace
{

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

using Member = std::variant<double RunConfig::*, int RunConfig::*, std::string RunConfig::*,
                            bool RunConfig::*, std::uint64_t RunConfig::*>;

struct Field
{
  const char *key;    // JSON key
  const char *flags;  // CLI11 option names
  Member member;
  const char *help;
};

const std::vector<Field> &fields()
{
  static const std::vector<Field> table = {
      {"command", "", &RunConfig::command, ""},
      {"r0", "--r0", &RunConfig::r0, "inner radius"},
      {"r1", "--r1", &RunConfig::r1, "outer radius"},
      {"n_r", "--n-r,--nr", &RunConfig::n_r, "radial node layers"},
      {"n_theta", "--n-theta,--ntheta", &RunConfig::n_theta, "angular nodes per layer"},
      {"alpha", "--alpha", &RunConfig::alpha, "feedback gain (0: undamped)"},
      {"T", "-T,--final-time", &RunConfig::T, "simulate: final time"},
      {"dt", "--dt", &RunConfig::dt, "simulate: time step (0: half the shortest edge)"},
      {"smooth_k", "--smooth-k", &RunConfig::smooth_k, "simulate: resolvent smoothing order"},
      {"init", "--init", &RunConfig::init, "simulate: initial data, bump or random"},
      {"fit_lo", "--fit-lo", &RunConfig::fit_lo, "simulate: decay fit window start"},
      {"fit_hi", "--fit-hi", &RunConfig::fit_hi, "simulate: decay fit window end"},
      {"omega_min", "--omega-min", &RunConfig::omega_min, "sweep: lowest frequency"},
      {"omega_max", "--omega-max", &RunConfig::omega_max, "sweep: highest frequency"},
      {"samples", "--samples", &RunConfig::samples, "sweep: number of frequencies"},
      {"jobs", "--jobs", &RunConfig::jobs, "sweep: worker threads"},
      {"allow_unresolved", "--allow-unresolved", &RunConfig::allow_unresolved,
       "sweep: do not cap omega-max at 1/h"},
      {"count", "--count", &RunConfig::count, "spectrum: number of eigenvalues"},
      {"shift_re", "--shift-re", &RunConfig::shift_re, "spectrum: shift real part"},
      {"shift_im", "--shift-im", &RunConfig::shift_im, "spectrum: shift imaginary part"},
      {"field", "--field", &RunConfig::field, "check-h: radial, rotation or levelset"},
      {"ax", "--ax", &RunConfig::ax, "check-h: level-set x scale"},
      {"ay", "--ay", &RunConfig::ay, "check-h: level-set y scale"},
      {"mesh_out", "--mesh-out", &RunConfig::mesh_out, "mesh file"},
      {"dump_matrices", "--dump-matrices", &RunConfig::dump_matrices, "matrix dump directory"},
      {"trace_out", "--trace-out", &RunConfig::trace_out, "energy trace CSV"},
      {"state_out", "--state-out", &RunConfig::state_out, "final state CSV"},
      {"sweep_out", "--sweep-out", &RunConfig::sweep_out, "resolvent sweep CSV"},
      {"spectrum_out", "--spectrum-out", &RunConfig::spectrum_out, "eigenvalue CSV"},
      {"report_out", "--report-out", &RunConfig::report_out, "hypothesis report"},
      {"samples_out", "--samples-out", &RunConfig::samples_out, "hypothesis samples CSV"},
      {"seed", "--seed", &RunConfig::seed, "seed for all random inputs"},
  };
  return table;
}

template <typename T>
void read_json_value(const json &value, const std::string &key, T &target)
{
  try
  {
    target = value.get<T>();
  }
  catch (const json::exception &)
  {
    throw ValidationError("config key '" + key + "' has the wrong type");
  }
}

void load_config_file(const std::string &path, RunConfig &config)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ValidationError("cannot read config file " + path);
  }
  json doc;
  try
  {
    doc = json::parse(in);
  }
  catch (const json::exception &e)
  {
    throw ValidationError("malformed config file " + path + ": " + e.what());
  }
  if (!doc.is_object())
  {
    throw ValidationError("config file must hold a JSON object");
  }
  for (const auto &[key, value] : doc.items())
  {
    const auto it = std::find_if(fields().begin(), fields().end(),
                                 [&](const Field &f) { return key == f.key; });
    if (it == fields().end())
    {
      throw ValidationError("unknown config key '" + key + "'");
    }
    std::visit([&](auto member) { read_json_value(value, key, config.*member); }, it->member);
  }
}

// --config is located before the main parse so that every other flag overrides it.
std::string find_config_path(const std::vector<std::string> &args)
{
  std::string path;
  for (std::size_t i = 0; i < args.size(); i++)
  {
    if (args[i] == "--config")
    {
      if (i + 1 >= args.size())
      {
        throw ValidationError("--config requires a path");
      }
      path = args[i + 1];
    }
    else if (args[i].rfind("--config=", 0) == 0)
    {
      path = args[i].substr(9);
    }
  }
  return path;
}

void require(bool ok, const std::string &message)
{
  if (!ok)
  {
    throw ValidationError(message);
  }
}

void require_writable_parent(const std::string &path, const char *what)
{
  if (path.empty())
  {
    return;
  }
  const fs::path parent = fs::path(path).parent_path();
  require(parent.empty() || fs::is_directory(parent),
          std::string(what) + ": directory " + parent.string() + " does not exist");
  require(!fs::is_directory(path), std::string(what) + ": " + path + " is a directory");
}

std::string timestamp()
{
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream os;
  os << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

class ArtifactWriter
{
public:
  explicit ArtifactWriter(std::string resolved_config)
    : config_(std::move(resolved_config))
  {
  }

  void write(const std::string &path, const std::string &body, std::ostream &err)
  {
    write_file(path, body);
    std::ostringstream meta;
    meta << "tool=" << kToolVersion << '\n'
         << "config=" << config_ << '\n'
         << "timestamp=" << timestamp() << '\n';
    write_file(path + ".meta", meta.str());
    err << "wrote " << path << '\n';
  }

private:
  static void write_file(const std::string &path, const std::string &body)
  {
    std::ofstream out(path, std::ios::binary);
    out << body;
    out.close();
    if (!out)
    {
      throw std::runtime_error("cannot write " + path);
    }
  }

  std::string config_;
};

template <typename Writer, typename Value>
std::string render(Writer writer, const Value &value)
{
  std::ostringstream os;
  writer(os, value);
  return os.str();
}

LevelSetDomain ellipse_domain(const RunConfig &c)
{
  const double ax2 = c.ax * c.ax, ay2 = c.ay * c.ay;
  LevelSetDomain d;
  d.f = [=](const Vec2 &x) { return 0.5 * (x.x() * x.x() / ax2 + x.y() * x.y() / ay2); };
  d.grad_f = [=](const Vec2 &x) { return Vec2(x.x() / ax2, x.y() / ay2); };
  d.hessian = [=](const Vec2 &) {
    Mat2 H;
    H << 1.0 / ax2, 0.0, 0.0, 1.0 / ay2;
    return H;
  };
  d.k0 = 0.5 * c.r0 * c.r0;
  d.k1 = 0.5 * c.r1 * c.r1;
  return d;
}

AssembledSystem make_system(const Mesh &mesh, double alpha)
{
  return alpha > 0.0 ? build_system(mesh, alpha) : build_undamped_system(mesh);
}

struct Seeds
{
  std::uint64_t init, power, eigen;
};

Seeds derive_seeds(std::uint64_t seed)
{
  std::mt19937_64 master(seed);
  Seeds s;
  s.init = master();
  s.power = master();
  s.eigen = master();
  return s;
}

// Fills defaults that depend on the mesh so that the meta sidecar records actual values.
RunConfig resolve_defaults(RunConfig c, const Mesh &mesh)
{
  if (c.dt == 0.0)
  {
    c.dt = default_time_step(mesh);
  }
  if (c.fit_lo == 0.0)
  {
    c.fit_lo = std::min(5.0 * (c.r1 - c.r0), 0.5 * c.T);
  }
  if (c.fit_hi == 0.0)
  {
    c.fit_hi = c.T;
  }
  if (c.command == "sweep" && !c.allow_unresolved)
  {
    c.omega_max = std::min(c.omega_max, resolved_frequency_limit(mesh));
  }
  if (c.command == "simulate" && c.trace_out.empty())
  {
    c.trace_out = "trace.csv";
  }
  if (c.command == "sweep" && c.sweep_out.empty())
  {
    c.sweep_out = "sweep.csv";
  }
  if (c.command == "spectrum" && c.spectrum_out.empty())
  {
    c.spectrum_out = "spectrum.csv";
  }
  if (c.command == "mesh" && c.mesh_out.empty())
  {
    c.mesh_out = "mesh.txt";
  }
  return c;
}

void dump_system(const AssembledSystem &sys, const RunConfig &c, ArtifactWriter &writer,
                 std::ostream &err)
{
  if (c.dump_matrices.empty())
  {
    return;
  }
  fs::create_directories(c.dump_matrices);
  const std::pair<const char *, const SparseMatrix *> items[] = {
      {"M_bulk", &sys.M_bulk}, {"K_bulk", &sys.K_bulk}, {"M_g0", &sys.M_g0},
      {"K_g0", &sys.K_g0},     {"M_g1", &sys.M_g1},     {"K_tot", &sys.K_tot},
      {"M_H", &sys.M_H}};
  for (const auto &[name, m] : items)
  {
    writer.write((fs::path(c.dump_matrices) / (std::string(name) + ".txt")).string(),
                 render(write_matrix, *m), err);
  }
}

void run_mesh(const RunConfig &, const Mesh &mesh, std::ostream &out)
{
  out << "nodes=" << mesh.node_count() << '\n'
      << "triangles=" << mesh.triangle_count() << '\n'
      << "boundary_edges=" << mesh.boundary_edges().size() << '\n'
      << "h_min=" << mesh.min_edge_length() << '\n'
      << "h_max=" << mesh.max_edge_length() << '\n'
      << "gamma0_length=" << boundary_length(mesh, BoundaryTag::GammaZero) << '\n'
      << "gamma1_length=" << boundary_length(mesh, BoundaryTag::GammaOne) << '\n';
}

void run_simulate(const RunConfig &c, const Mesh &mesh, const Seeds &seeds,
                  ArtifactWriter &writer, std::ostream &err)
{
  const AssembledSystem sys = make_system(mesh, c.alpha);
  dump_system(sys, c, writer, err);

  State Y;
  if (c.init == "random")
  {
    std::mt19937_64 rng(seeds.init);
    Y = random_state(sys.size(), rng);
  }
  else
  {
    const Vec2 center(0.5 * (c.r0 + c.r1), 0.0);
    Y = gaussian_bump(mesh, center, 0.3 * (c.r1 - c.r0));
  }
  const State X0 = c.smooth_k > 0 ? smooth_data(sys, Y, c.smooth_k).X0 : Y;
  const EnergyTrace trace = simulate(sys, X0, c.T, c.dt);
  writer.write(c.trace_out, render(write_trace_csv, trace), err);
  if (!c.state_out.empty())
  {
    MidpointPropagator prop(sys, c.dt);
    State X = X0;
    for (std::size_t k = 1; k < trace.times.size(); k++)
    {
      X = prop.step(X);
    }
    writer.write(c.state_out, render(write_state_csv, X), err);
  }

  const double E0 = trace.energies.front();
  err << std::setprecision(6) << "steps=" << trace.times.size() - 1 << " dt=" << trace.dt
      << " E0=" << E0 << " E(T)=" << trace.energies.back() << '\n'
      << "balance: max step error " << trace.max_balance_error / E0
      << " (relative), dissipated " << trace.cumulative_dissipation << '\n';
  try
  {
    const DecayFit fit = fit_decay(trace, c.fit_lo, c.fit_hi);
    err << "decay fit on [" << fit.t_lo << ", " << fit.t_hi << "]: exponent " << fit.exponent
        << ", sup t E / |X0|_D^2 = " << fit.sup_tE << " (" << fit.samples << " samples)\n";
  }
  catch (const InvalidArgument &e)
  {
    err << "decay fit skipped: " << e.what() << '\n';
  }
}

void run_spectrum(const RunConfig &c, const Mesh &mesh, const Seeds &seeds,
                  ArtifactWriter &writer, std::ostream &err)
{
  const AssembledSystem sys = make_system(mesh, c.alpha);
  dump_system(sys, c, writer, err);
  EigenSettings settings;
  settings.seed = seeds.eigen;
  const SpectrumResult spec =
      quadratic_eigs(sys, c.count, Complex(c.shift_re, c.shift_im), settings);
  writer.write(c.spectrum_out, render(write_spectrum_csv, spec), err);
  double worst = 0.0;
  for (double r : spec.residuals)
  {
    worst = std::max(worst, r);
  }
  err << std::setprecision(6) << spec.eigenvalues.size() << " eigenvalues (" << spec.method
      << "), min Re mu = " << spec.min_real_part << ", max residual = " << worst << '\n';
}

void run_sweep(const RunConfig &c, const Mesh &mesh, const Seeds &seeds,
               ArtifactWriter &writer, std::ostream &err)
{
  if (!(c.omega_max > c.omega_min))
  {
    throw InvalidArgument("omega-max capped at the mesh limit 1/h does not exceed omega-min");
  }
  const AssembledSystem sys = make_system(mesh, c.alpha);
  dump_system(sys, c, writer, err);
  SweepSettings settings;
  settings.jobs = c.jobs;
  settings.power.seed = seeds.power;
  const SweepResult sweep = resolvent_sweep(sys, c.omega_min, c.omega_max, c.samples, settings);
  writer.write(c.sweep_out, render(write_sweep_csv, sweep), err);
  err << std::setprecision(6) << "omega in [" << c.omega_min << ", " << c.omega_max << "], "
      << sweep.samples.size() << " samples, " << sweep.peaks.size() << " peaks\n"
      << "slope=" << sweep.slope << (sweep.slope_from_peaks ? " (peaks)" : " (all samples)")
      << " sup_scaled=" << sweep.sup_scaled << '\n';
}

void run_check_h(const RunConfig &c, const Mesh &mesh, ArtifactWriter &writer,
                 std::ostream &out, std::ostream &err)
{
  VectorField field;
  if (c.field == "rotation")
  {
    field = rotation_field();
  }
  else if (c.field == "levelset")
  {
    field = levelset_field(ellipse_domain(c));
  }
  else
  {
    field = radial_field();
  }
  const MultiplierReport report = check_hypotheses(field, mesh);
  const std::string text = render(write_report, report);
  out << text;
  if (!c.report_out.empty())
  {
    writer.write(c.report_out, text, err);
  }
  if (!c.samples_out.empty())
  {
    writer.write(c.samples_out, render(write_samples_csv, report), err);
  }
}

}  // namespace

RunConfig parse_command_line(const std::vector<std::string> &args)
{
  RunConfig config;
  const std::string config_path = find_config_path(args);
  if (!config_path.empty())
  {
    load_config_file(config_path, config);
  }

  CLI::App app("Wave equation with dynamic boundary feedback on an annulus: simulation, "
               "spectrum, resolvent sweeps and multiplier checks.",
               "dynbc");
  app.set_version_flag("--version", kToolVersion);
  std::string ignored_path;
  app.add_option("--config", ignored_path, "JSON config file; flags override its values");
  app.add_option("command", config.command, "mesh, simulate, spectrum, sweep or check-h");
  for (const Field &f : fields())
  {
    if (std::string(f.flags).empty())
    {
      continue;
    }
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(config.*member)>;
          if constexpr (std::is_same_v<T, bool>)
          {
            app.add_flag(f.flags, config.*member, f.help);
          }
          else
          {
            app.add_option(f.flags, config.*member, f.help);
          }
        },
        f.member);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try
  {
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp &)
  {
    throw HelpRequested(app.help());
  }
  catch (const CLI::CallForVersion &)
  {
    throw HelpRequested(std::string(kToolVersion) + "\n");
  }
  catch (const CLI::ParseError &e)
  {
    throw ValidationError(e.what());
  }
  return config;
}

void validate(const RunConfig &c)
{
  static const std::vector<std::string> commands = {"mesh", "simulate", "spectrum", "sweep",
                                                    "check-h"};
  require(!c.command.empty(), "no command given (mesh, simulate, spectrum, sweep, check-h)");
  require(std::find(commands.begin(), commands.end(), c.command) != commands.end(),
          "unknown command '" + c.command + "'");

  require(std::isfinite(c.r0) && c.r0 > 0.0, "r0 must be positive");
  require(std::isfinite(c.r1) && c.r1 > c.r0, "r1 must exceed r0");
  require(c.n_r >= 2, "n_r must be at least 2");
  require(c.n_theta >= 8, "n_theta must be at least 8");
  require(std::isfinite(c.alpha) && c.alpha >= 0.0, "alpha must be nonnegative");

  require(std::isfinite(c.T) && c.T > 0.0, "T must be positive");
  require(std::isfinite(c.dt) && c.dt >= 0.0 && c.dt <= c.T, "dt must lie in [0, T]");
  require(c.smooth_k >= 0, "smooth_k must be nonnegative");
  require(c.init == "bump" || c.init == "random", "init must be bump or random");
  require(std::isfinite(c.fit_lo) && c.fit_lo >= 0.0, "fit_lo must be nonnegative");
  require(std::isfinite(c.fit_hi) && c.fit_hi >= 0.0, "fit_hi must be nonnegative");
  require(c.fit_hi == 0.0 || c.fit_lo == 0.0 || c.fit_hi > c.fit_lo,
          "fit_hi must exceed fit_lo");

  require(std::isfinite(c.omega_min) && c.omega_min >= 1.0, "omega_min must be at least 1");
  require(std::isfinite(c.omega_max) && c.omega_max > c.omega_min,
          "omega_max must exceed omega_min");
  require(c.samples >= 8, "samples must be at least 8");
  require(c.jobs >= 1, "jobs must be at least 1");

  require(c.count >= 1, "count must be at least 1");
  require(std::isfinite(c.shift_re) && std::isfinite(c.shift_im), "shift must be finite");

  require(c.field == "radial" || c.field == "rotation" || c.field == "levelset",
          "field must be radial, rotation or levelset");
  require(std::isfinite(c.ax) && c.ax > 0.0 && std::isfinite(c.ay) && c.ay > 0.0,
          "ax and ay must be positive");

  require_writable_parent(c.mesh_out, "mesh_out");
  require_writable_parent(c.trace_out, "trace_out");
  require_writable_parent(c.state_out, "state_out");
  require_writable_parent(c.sweep_out, "sweep_out");
  require_writable_parent(c.spectrum_out, "spectrum_out");
  require_writable_parent(c.report_out, "report_out");
  require_writable_parent(c.samples_out, "samples_out");
  if (!c.dump_matrices.empty())
  {
    require(!fs::exists(c.dump_matrices) || fs::is_directory(c.dump_matrices),
            "dump_matrices: " + c.dump_matrices + " is not a directory");
  }
}

std::string config_to_json(const RunConfig &config)
{
  json doc = json::object();
  for (const Field &f : fields())
  {
    std::visit([&](auto member) { doc[f.key] = config.*member; }, f.member);
  }
  return doc.dump();
}

int run(const RunConfig &config, std::ostream &out, std::ostream &err)
{
  try
  {
    Mesh mesh = config.command == "check-h" && config.field == "levelset"
                    ? build_levelset_mesh(ellipse_domain(config), config.n_r, config.n_theta)
                    : build_annulus_mesh(config.r0, config.r1, config.n_r, config.n_theta);
    const RunConfig c = resolve_defaults(config, mesh);
    if (c.command == "sweep" && c.omega_max < config.omega_max)
    {
      err << "omega_max capped at the mesh limit 1/h = " << c.omega_max << '\n';
    }
    ArtifactWriter writer(config_to_json(c));
    const Seeds seeds = derive_seeds(c.seed);

    if (!c.mesh_out.empty())
    {
      writer.write(c.mesh_out, render(write_mesh, mesh), err);
    }
    if (c.command == "mesh")
    {
      run_mesh(c, mesh, out);
      const auto problems = check_mesh(mesh);
      for (const auto &p : problems)
      {
        err << "mesh check: " << p << '\n';
      }
      return problems.empty() ? 0 : 1;
    }
    if (c.command == "simulate")
    {
      run_simulate(c, mesh, seeds, writer, err);
    }
    else if (c.command == "spectrum")
    {
      run_spectrum(c, mesh, seeds, writer, err);
    }
    else if (c.command == "sweep")
    {
      run_sweep(c, mesh, seeds, writer, err);
    }
    else
    {
      run_check_h(c, mesh, writer, out, err);
    }
    return 0;
  }
  catch (const std::exception &e)
  {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cli_main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  RunConfig config;
  try
  {
    config = parse_command_line(args);
    validate(config);
  }
  catch (const HelpRequested &h)
  {
    out << h.what();
    return 0;
  }
  catch (const ValidationError &e)
  {
    err << "invalid configuration: " << e.what() << '\n';
    return 2;
  }
  return run(config, out, err);
}

}  // namespace dynbc
