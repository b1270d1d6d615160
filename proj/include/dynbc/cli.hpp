#ifndef DYNBC_CLI_HPP
#define DYNBC_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynbc
{

inline constexpr const char *kToolVersion = "dynbc 1.0.0";

// Bad flags, bad config files or out-of-range parameters; maps to exit status 2.
class ValidationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// --help or --version; carries the text to print with exit status 0.
class HelpRequested : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig
{
  std::string command;  // mesh | simulate | spectrum | sweep | check-h

  // Geometry.
  double r0 = 1.0;
  double r1 = 2.0;
  int n_r = 8;
  int n_theta = 32;
  double alpha = 1.0;  // 0 selects the undamped system

  // simulate
  double T = 50.0;
  double dt = 0.0;  // 0: half the shortest edge
  int smooth_k = 2;  // 0: no smoothing
  std::string init = "bump";  // bump | random
  double fit_lo = 0.0;  // 0: five radial transit times
  double fit_hi = 0.0;  // 0: T

  // sweep
  double omega_min = 1.0;
  double omega_max = 20.0;
  int samples = 40;
  int jobs = 1;
  bool allow_unresolved = false;  // keep omega_max above the mesh limit 1/h

  // spectrum
  int count = 40;
  double shift_re = 0.0;
  double shift_im = 2.0;

  // check-h
  std::string field = "radial";  // radial | rotation | levelset
  double ax = 1.0;  // level-set semi-axis scales
  double ay = 1.0;

  // Outputs; empty means "not requested" except for each command's primary artifact.
  std::string mesh_out;
  std::string dump_matrices;
  std::string trace_out;
  std::string state_out;
  std::string sweep_out;
  std::string spectrum_out;
  std::string report_out;
  std::string samples_out;

  std::uint64_t seed = 1;
};

// Flags override values from --config <json>. Throws ValidationError or HelpRequested.
RunConfig parse_command_line(const std::vector<std::string> &args);

// Throws ValidationError on any precondition violation; touches no files.
void validate(const RunConfig &config);

std::string config_to_json(const RunConfig &config);

// Runs a validated config; returns the exit status (0 success, 1 computation error).
int run(const RunConfig &config, std::ostream &out, std::ostream &err);

// Full front-end: parse, validate, run. Returns 0, 1 or 2.
int cli_main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace dynbc

#endif  // DYNBC_CLI_HPP
