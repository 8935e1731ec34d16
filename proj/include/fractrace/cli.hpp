#pragma once

#include <complex>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fractrace/dynamics.hpp"
#include "fractrace/errors.hpp"

namespace fractrace {

/// Bad command line (unknown command, missing or malformed flags).
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Command {
  ml_eval,
  zeros,
  classify,
  trajectory,
  inverse_curve,
  scan,
  eist,
  eidt,
  self_intersect,
  reproduce_figures,
};

struct RunConfig {
  Command command = Command::ml_eval;
  double alpha = 0.5;
  double beta = 1.0;
  std::optional<RealMatrix> matrix;
  std::optional<Vector> x0;
  std::optional<Vector> point;   // eist target p / eidt partner x
  std::vector<Complex> z;        // ml-eval arguments
  double t_min = 0.0;
  double t_max = 3.0;
  int samples = 600;
  std::pair<double, double> re{-1.0, 1.0};
  std::pair<double, double> im{-1.0, 1.0};
  std::size_t max_count = 1000;
  double R = kDefaultSearchBound;
  double T = 1.0;
  double T_max = 3.0;  // eidt window for the x0 trajectory
  int grid = 200;      // eidt coarse grid per axis
  std::string out;     // CSV path; empty writes to the output stream
  std::string svg;     // optional SVG path
  std::string outdir = ".";
  double tol_scale = 1.0;
};

/// Parses argv (argv[0] is the program name). Throws UsageError. The
/// FRACTRACE_TOL_SCALE environment variable is read here.
RunConfig parse_args(int argc, const char* const* argv);

/// Executes one command. Returns 0 on success, 1 on domain / numerical errors
/// (message on `err`), 2 on usage errors.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with the exit-code mapping; --help prints usage and returns 0.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Figure data for the worked examples written to `outdir`: fig1, fig2, fig3a,
/// fig3b as CSV + SVG pairs. Returns a short summary (one line per file plus
/// the IVP residual of each underlying trajectory).
std::string reproduce_figures(const std::string& outdir);

}  // namespace fractrace
