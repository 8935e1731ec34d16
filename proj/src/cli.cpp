#include "fractrace/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "fractrace/io.hpp"

namespace fractrace {

namespace {

struct HelpRequested {
  std::string text;
};

const char* kAlphaHelp =
    "order alpha in (0,1]; decimal literal, e.g. 0.3333333333 for 1/3 (the 10-digit "
    "truncation moves zeros by ~1e-10, far below the 1e-3 comparison tolerance)";

struct RawArgs {
  std::string matrix, x0, point, re, im;
  std::vector<std::string> z;
};

RunConfig parse_impl(int argc, const char* const* argv) {
  RunConfig cfg;
  RawArgs raw;
  CLI::App app{"fractrace: Mittag-Leffler functions, their zeros and trajectory intersections of "
               "linear Caputo systems D^alpha x = A x"};
  app.require_subcommand(1);

  std::map<CLI::App*, Command> commands;
  auto sub = [&](const char* name, const char* help, Command c) {
    CLI::App* s = app.add_subcommand(name, help);
    commands[s] = c;
    return s;
  };
  auto add_alpha = [&](CLI::App* s) { s->add_option("--alpha", cfg.alpha, kAlphaHelp)->required(); };
  auto add_matrix = [&](CLI::App* s) {
    s->add_option("--matrix", raw.matrix, "rows separated by ';', entries by ','")->required();
  };
  auto add_x0 = [&](CLI::App* s) { s->add_option("--x0", raw.x0, "initial state, comma separated")->required(); };
  auto add_out = [&](CLI::App* s) {
    s->add_option("--out", cfg.out, "CSV output path (default: standard output)");
    s->add_option("--svg", cfg.svg, "optional SVG plot path");
  };
  auto add_window = [&](CLI::App* s) {
    s->add_option("--t-min", cfg.t_min, "first sample time")->check(CLI::NonNegativeNumber);
    s->add_option("--t-max", cfg.t_max, "last sample time")->check(CLI::PositiveNumber);
    s->add_option("--samples", cfg.samples, "number of samples")->check(CLI::Range(2, 10000000));
  };
  auto add_R = [&](CLI::App* s) {
    s->add_option("--R", cfg.R, "zero search modulus (clamped to the evaluation domain)")
        ->check(CLI::PositiveNumber);
  };

  auto* ml = sub("ml-eval", "evaluate E_{alpha,beta}(z)", Command::ml_eval);
  add_alpha(ml);
  ml->add_option("--beta", cfg.beta, "second parameter");
  ml->add_option("--z", raw.z, "argument 're,im' (repeatable)")->required();
  add_out(ml);

  auto* zs = sub("zeros", "zeros of E_{alpha,beta} in a rectangle", Command::zeros);
  add_alpha(zs);
  zs->add_option("--beta", cfg.beta, "second parameter");
  zs->add_option("--re", raw.re, "real range lo:hi")->required();
  zs->add_option("--im", raw.im, "imaginary range lo:hi")->required();
  zs->add_option("--max-count", cfg.max_count, "maximum number of zeros reported");
  add_out(zs);

  auto* cl = sub("classify", "Type I / Type II verdict", Command::classify);
  add_alpha(cl);
  add_matrix(cl);
  add_R(cl);
  add_out(cl);

  auto* tr = sub("trajectory", "u(t; x0) on a uniform grid", Command::trajectory);
  add_alpha(tr);
  add_matrix(tr);
  add_x0(tr);
  add_window(tr);
  add_out(tr);

  auto* ic = sub("inverse-curve", "gamma_{x0}(t) on a uniform grid", Command::inverse_curve);
  add_alpha(ic);
  add_matrix(ic);
  add_x0(ic);
  add_window(ic);
  add_out(ic);

  auto* sc = sub("scan", "determinant of the solution operator over t", Command::scan);
  add_alpha(sc);
  add_matrix(sc);
  add_window(sc);
  add_out(sc);

  auto* ei = sub("eist", "initial states reaching p at time T", Command::eist);
  add_alpha(ei);
  add_matrix(ei);
  ei->add_option("--p", raw.point, "target point")->required();
  ei->add_option("--T", cfg.T, "meeting time")->required()->check(CLI::PositiveNumber);
  add_out(ei);

  auto* ed = sub("eidt", "meeting of u(.; x0) and u(.; x) at distinct times", Command::eidt);
  add_alpha(ed);
  add_matrix(ed);
  add_x0(ed);
  ed->add_option("--x", raw.point, "second initial state")->required();
  ed->add_option("--T-max", cfg.T_max, "time window of the x0 trajectory")->check(CLI::PositiveNumber);
  ed->add_option("--t-max", cfg.t_max, "time window of the x trajectory")->check(CLI::PositiveNumber);
  ed->add_option("--grid", cfg.grid, "coarse grid points per axis")->check(CLI::Range(3, 100000));
  add_out(ed);

  auto* si = sub("self-intersect", "multiple points of u(.; x0)", Command::self_intersect);
  add_alpha(si);
  add_matrix(si);
  add_x0(si);
  add_R(si);
  add_out(si);

  auto* rf = sub("reproduce-figures", "write the example figures as CSV + SVG", Command::reproduce_figures);
  rf->add_option("--outdir", cfg.outdir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  for (auto& [s, c] : commands)
    if (s->parsed()) cfg.command = c;

  try {
    if (!raw.matrix.empty()) cfg.matrix = parse_matrix(raw.matrix);
    if (!raw.x0.empty()) cfg.x0 = parse_vector(raw.x0);
    if (!raw.point.empty()) cfg.point = parse_vector(raw.point);
    if (!raw.re.empty()) cfg.re = parse_range(raw.re);
    if (!raw.im.empty()) cfg.im = parse_range(raw.im);
    for (const auto& z : raw.z) {
      const Vector v = parse_vector(z);
      if (v.size() != 2) throw InvalidParam("--z expects 're,im'");
      cfg.z.emplace_back(v(0), v(1));
    }
    if (const char* env = std::getenv("FRACTRACE_TOL_SCALE"); env && *env) {
      cfg.tol_scale = parse_double(env);
      if (!(cfg.tol_scale > 0.0)) throw InvalidParam("FRACTRACE_TOL_SCALE must be positive");
    }
  } catch (const InvalidParam& e) {
    throw UsageError(e.what());
  }
  if (cfg.t_min >= cfg.t_max) throw UsageError("--t-min must be below --t-max");
  if (cfg.matrix && cfg.x0 && cfg.x0->size() != cfg.matrix->rows())
    throw UsageError("--x0 length does not match the matrix dimension");
  if (cfg.matrix && cfg.point && cfg.point->size() != cfg.matrix->rows())
    throw UsageError("point length does not match the matrix dimension");
  return cfg;
}

std::vector<double> window(const RunConfig& c) {
  std::vector<double> g(static_cast<std::size_t>(c.samples));
  for (int j = 0; j < c.samples; ++j)
    g[static_cast<std::size_t>(j)] =
        j + 1 == c.samples ? c.t_max : c.t_min + (c.t_max - c.t_min) * j / (c.samples - 1);
  return g;
}

std::vector<std::string> state_header(const char* first, const char* prefix, Eigen::Index n) {
  std::vector<std::string> h;
  if (first) h.emplace_back(first);
  for (Eigen::Index i = 1; i <= n; ++i) h.push_back(prefix + std::to_string(i));
  return h;
}

void put(CsvWriter& w, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w.cell(v(i));
}

// Runs `body` against the CSV destination (file or `out`).
void with_output(const RunConfig& c, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (c.out.empty()) {
    body(out);
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Error("cannot open " + c.out + " for writing");
  body(f);
  if (!f) throw Error("failed writing " + c.out);
}

void write_svg(const std::string& path, const SvgPlot& plot) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  plot.write(f);
}

Polyline curve_of(const std::vector<TimedState>& samples, const std::string& color, double width = 1.5) {
  Polyline l;
  l.color = color;
  l.width = width;
  for (const auto& s : samples) {
    if (s.x.size() >= 2)
      l.points.emplace_back(s.x(0), s.x(1));
    else
      l.points.emplace_back(s.t, s.x(0));
  }
  return l;
}

FractionalSystem system_of(const RunConfig& c) {
  if (!c.matrix) throw UsageError("--matrix is required");
  FractionalSystem sys{c.alpha, *c.matrix};
  sys.validate();
  return sys;
}

void emit_states(const RunConfig& c, std::ostream& out, const Trajectory& tr, const char* prefix) {
  with_output(c, out, [&](std::ostream& os) {
    CsvWriter w(os, state_header("t", prefix, tr.x0.size()));
    for (const auto& s : tr.samples) {
      w.cell(s.t);
      put(w, s.x);
      w.end_row();
    }
  });
  if (!c.svg.empty()) {
    SvgPlot plot;
    plot.add(curve_of(tr.samples, "#1b7f3a"));
    write_svg(c.svg, plot);
  }
}

void execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Tolerances tol = Tolerances{}.scaled(c.tol_scale);
  switch (c.command) {
    case Command::ml_eval: {
      const MLParams p{c.alpha, c.beta};
      with_output(c, out, [&](std::ostream& os) {
        CsvWriter w(os, {"alpha", "beta", "z_re", "z_im", "re", "im", "est_rel_error", "method",
                         "accuracy_degraded"});
        for (Complex z : c.z) {
          const EvalResult r = ml_eval(p, z);
          w.cell(c.alpha).cell(c.beta).cell(z.real()).cell(z.imag()).cell(r.value.real());
          w.cell(r.value.imag()).cell(r.est_rel_error).cell(to_string(r.method));
          w.cell(r.accuracy_degraded ? "true" : "false");
          w.end_row();
        }
      });
      return;
    }
    case Command::zeros: {
      const MLParams p{c.alpha, c.beta};
      const auto zs = find_zeros(p, {c.re.first, c.re.second, c.im.first, c.im.second}, c.max_count);
      with_output(c, out, [&](std::ostream& os) {
        CsvWriter w(os, {"alpha", "beta", "re", "im", "residual", "index"});
        for (const auto& z : zs) {
          w.cell(c.alpha).cell(c.beta).cell(z.location.real()).cell(z.location.imag());
          w.cell(z.residual).cell(static_cast<long long>(z.index));
          w.end_row();
        }
      });
      if (!c.svg.empty()) {
        SvgPlot plot("zeros of E_{alpha,beta}");
        for (const auto& z : zs) plot.add_marker(z.location.real(), z.location.imag(), "#b2182b");
        write_svg(c.svg, plot);
      }
      return;
    }
    case Command::classify: {
      const FractionalSystem sys = system_of(c);
      const Classification cls = classify(sys, c.R, tol);
      out << to_string(cls.verdict) << "\n";
      out << "search_bound " << format_double(cls.search_bound) << "\n";
      out << "asymptotic_flags";
      if (cls.asymptotic_flags.empty()) out << " none";
      for (Complex l : cls.asymptotic_flags)
        out << ' ' << format_double(l.real()) << (l.imag() < 0 ? "" : "+") << format_double(l.imag()) << 'i';
      out << "\n";
      for (const auto& r : cls.criticals)
        out << "critical T=" << format_double(r.T) << " eigenvalue=" << format_double(r.eigenvalue.real())
            << (r.eigenvalue.imag() < 0 ? "" : "+") << format_double(r.eigenvalue.imag())
            << "i zero=" << format_double(r.zero.location.real())
            << (r.zero.location.imag() < 0 ? "" : "+") << format_double(r.zero.location.imag()) << "i\n";
      if (!c.out.empty()) {
        with_output(c, out, [&](std::ostream& os) {
          CsvWriter w(os, {"eigen_re", "eigen_im", "zero_re", "zero_im", "T", "arg_mismatch"});
          for (const auto& r : cls.criticals) {
            w.cell(r.eigenvalue.real()).cell(r.eigenvalue.imag()).cell(r.zero.location.real());
            w.cell(r.zero.location.imag()).cell(r.T).cell(r.arg_mismatch);
            w.end_row();
          }
        });
      }
      return;
    }
    case Command::trajectory: {
      if (!c.x0) throw UsageError("--x0 is required");
      emit_states(c, out, solve_trajectory(system_of(c), *c.x0, window(c)), "x");
      return;
    }
    case Command::inverse_curve: {
      if (!c.x0) throw UsageError("--x0 is required");
      emit_states(c, out, inverse_curve(system_of(c), *c.x0, window(c)), "x");
      return;
    }
    case Command::scan: {
      const FractionalSystem sys = system_of(c);
      const auto reports = invertibility_scan(sys.params(), sys.A, window(c));
      with_output(c, out, [&](std::ostream& os) {
        CsvWriter w(os, {"t", "det_re", "det_im", "invertible"});
        for (const auto& r : reports) {
          w.cell(r.t).cell(r.det_value.real()).cell(r.det_value.imag());
          w.cell(r.invertible ? "true" : "false");
          w.end_row();
        }
      });
      return;
    }
    case Command::eist: {
      if (!c.point) throw UsageError("--p is required");
      const FractionalSystem sys = system_of(c);
      const auto res = eist_preimage(sys, *c.point, c.T, tol);
      with_output(c, out, [&](std::ostream& os) {
        CsvWriter w(os, state_header("role", "x", sys.A.rows()));
        if (const auto* x = std::get_if<Vector>(&res)) {
          w.cell("point");
          put(w, *x);
          w.end_row();
        } else {
          const auto& aff = std::get<AffineSet>(res);
          w.cell("base");
          put(w, aff.base);
          w.end_row();
          for (Eigen::Index j = 0; j < aff.directions.dim(); ++j) {
            w.cell("direction");
            put(w, aff.directions.vectors.col(j));
            w.end_row();
          }
        }
      });
      return;
    }
    case Command::eidt: {
      if (!c.x0 || !c.point) throw UsageError("--x0 and --x are required");
      const FractionalSystem sys = system_of(c);
      std::vector<double> Tg(static_cast<std::size_t>(c.grid)), tg(static_cast<std::size_t>(c.grid));
      for (int j = 0; j < c.grid; ++j) {
        Tg[static_cast<std::size_t>(j)] = c.T_max * j / (c.grid - 1);
        tg[static_cast<std::size_t>(j)] = c.t_max * j / (c.grid - 1);
      }
      const auto wit = eidt_witness(sys, *c.x0, *c.point, Tg, tg, tol);
      with_output(c, out, [&](std::ostream& os) {
        auto header = state_header("T", "m", sys.A.rows());
        header.insert(header.begin() + 1, "t");
        header.emplace_back("residual");
        CsvWriter w(os, header);
        if (wit) {
          w.cell(wit->T).cell(wit->t);
          put(w, wit->meeting_point);
          w.cell(wit->residual);
          w.end_row();
        }
      });
      if (!wit) err << "no distinct-time meeting found on the searched windows\n";
      return;
    }
    case Command::self_intersect: {
      if (!c.x0) throw UsageError("--x0 is required");
      const FractionalSystem sys = system_of(c);
      const auto mps = multiple_points(sys, *c.x0, c.R, tol);
      with_output(c, out, [&](std::ostream& os) {
        auto header = state_header("T", "p", sys.A.rows());
        for (const char* h : {"kind", "velocity_norm", "t1", "t2", "crossing_gap"}) header.emplace_back(h);
        CsvWriter w(os, header);
        for (const auto& m : mps) {
          w.cell(m.T);
          put(w, m.p);
          w.cell(to_string(m.kind)).cell(m.velocity_norm);
          const bool node = m.kind == PointKind::node;
          w.cell(node ? m.detail.t1 : std::nan("")).cell(node ? m.detail.t2 : std::nan(""));
          w.cell(node ? m.detail.crossing_gap : std::nan(""));
          w.end_row();
        }
      });
      return;
    }
    case Command::reproduce_figures:
      out << reproduce_figures(c.outdir);
      return;
  }
}

}  // namespace

RunConfig parse_args(int argc, const char* const* argv) {
  try {
    return parse_impl(argc, argv);
  } catch (const HelpRequested& h) {
    throw UsageError(h.text);
  }
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    execute(config, out, err);
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidParam& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_impl(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  return run(cfg, out, err);
}

}  // namespace fractrace
