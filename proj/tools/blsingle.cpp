// blsingle: compile, solve and inspect single-upper-variable bilevel LPs.
//
// Exit codes: 0 ok, 1 infeasible or negative verification, 2 usage or parse
// error, 3 instance too large for the requested method.

#include "blsingle/io.hpp"
#include "blsingle/reductions.hpp"
#include "blsingle/solvers.hpp"
#include "blsingle/tent_map.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

using namespace blsingle;

namespace {

enum Exit { kOk = 0, kNegative = 1, kUsage = 2, kTooLarge = 3 };

struct Options {
  bool decimal = false;
  bool verbose = false;
  unsigned jobs = 1;
};

Options opts;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ModelError("cannot write " + path);
}

Rational parse_scalar(const std::string& text) {
  try {
    return Rational::parse(text, false);
  } catch (const std::invalid_argument& e) {
    throw ModelError(e.what());
  }
}

std::string show(const Rational& r) { return opts.decimal ? r.str() + " " + r.decimal(12) : r.str(); }

std::string show(const RationalVec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i].str();
  if (opts.decimal) {
    s += " |";
    for (const auto& x : v) s += " " + x.decimal(12);
  }
  return s;
}

void tent_note() {
  if (opts.verbose)
    std::cerr << "note: tent map f_u uses the middle branch 2 - 3*theta, so that u_{i-1} = 3 u_i - 2 z_i\n";
}

int compile_sat(const std::string& cnf_path, const std::string& out_path) {
  const Cnf F = io::parse_dimacs(read_file(cnf_path));
  const auto art = build_sat_blp(F);
  write_file(out_path, io::serialize_instance(art.instance));
  if (opts.verbose)
    std::cerr << "n " << art.n << ", p " << art.p << ", lower variables " << art.instance.n << ", rows " << art.instance.m
              << ", M bits " << bit_length(art.M.num()) << "\n";
  return kOk;
}

int compile_ilp(const std::string& ilp_path, const std::string& out_path) {
  const ZeroOneIlp ilp = io::parse_ilp(read_file(ilp_path));
  const auto art = ilp_to_blp(ilp);
  write_file(out_path, io::serialize_instance(art.instance));
  if (opts.verbose)
    std::cerr << "r " << ilp.r << ", lower variables " << art.instance.n << ", rows " << art.instance.m << ", M bits "
              << bit_length(art.M.num()) << "\n";
  return kOk;
}

int solve_global(const std::string& inst_path, const std::string& method, std::size_t cap) {
  const BlpSingle b = io::parse_instance(read_file(inst_path));
  std::optional<GlobalResult> res;
  if (method == "candidates") {
    res = global_solve_candidates(b, opts.jobs);
  } else if (method == "sweep") {
    res = global_solve_sweep(to_standard_form(b));
  } else {
    const auto om = global_solve_omega(to_general(b), cap, opts.jobs);
    if (om.status == OmegaStatus::TooLarge) {
      std::cerr << "omega: " << to_general(b).m1() << " lower rows exceed the cap of " << cap << "\n";
      return kTooLarge;
    }
    if (om.status == OmegaStatus::Unbounded) {
      std::cout << "status unbounded\n";
      return kNegative;
    }
    if (om.status == OmegaStatus::Solved) res = GlobalResult{om.value, om.x2.front()};
  }
  if (!res) {
    std::cout << "status infeasible\n";
    return kNegative;
  }
  std::cout << "status optimal\nvalue " << show(res->value) << "\nx2 " << show(res->x2) << "\n";
  return kOk;
}

int solve_local(const std::string& inst_path) {
  const BlpSingle b = io::parse_instance(read_file(inst_path));
  const auto res = local_search(b);
  if (!res) {
    std::cout << "status infeasible\n";
    return kNegative;
  }
  std::cout << "status local-optimal\n"
            << "x2 " << show(res->x2) << "\n"
            << "value " << show(res->value) << "\n"
            << "left " << to_string(res->left) << "\n"
            << "right " << to_string(res->right) << "\n"
            << "iterations " << res->iterations << "\n"
            << "sbound " << res->sbound << "\n"
            << "x1 " << show(res->x1) << "\n";
  return kOk;
}

int lower_eval(std::size_t n, const std::string& theta_text) {
  tent_note();
  const Rational theta = parse_scalar(theta_text);
  const auto sol = tent::solve_lower_analytic(n, theta);
  std::cout << "z " << show(sol.z) << "\nf " << show(sol.f) << "\ns " << show(sol.s) << "\nt " << show(sol.t)
            << "\nu " << show(sol.u) << "\n";
  return kOk;
}

int decode(std::size_t n, const std::string& theta_text, const std::string& codec_name) {
  tent_note();
  const Rational theta = parse_scalar(theta_text);
  const auto d = tent::decode_theta(theta, n, tent::parse_codec(codec_name));
  if (!d.binary) {
    std::cout << "non-binary\n";
    return kOk;
  }
  std::cout << "mu";
  for (int bit : d.mu) std::cout << " " << bit;
  std::cout << "\n";
  if (codec_name == "lemma4iii") std::cout << "z_top " << d.z_top << "\n";
  return kOk;
}

int psi(const std::string& inst_path, const std::string& csv_path) {
  const BlpSingle b = io::parse_instance(read_file(inst_path));
  const auto prof = psi_profile(to_standard_form(b));
  if (!prof) {
    std::cout << "status infeasible\n";
    return kNegative;
  }
  std::ostringstream csv;
  write_profile_csv(csv, *prof, opts.decimal);
  if (csv_path.empty()) std::cout << csv.str();
  else write_file(csv_path, csv.str());
  return kOk;
}

int plot_tentmap(std::size_t n, std::size_t denominator, const std::string& svg_path, const std::string& csv_path) {
  tent_note();
  const auto rows = tent::emit_tentmap_table(n, denominator);
  std::ostringstream csv;
  tent::write_table_csv(csv, rows, opts.decimal);
  if (!svg_path.empty()) {
    std::ostringstream svg;
    tent::write_table_svg(svg, rows);
    write_file(svg_path, svg.str());
  }
  if (!csv_path.empty()) write_file(csv_path, csv.str());
  if (svg_path.empty() && csv_path.empty()) std::cout << csv.str();
  return kOk;
}

int verify_sat(const std::string& cnf_path, const std::string& inst_path) {
  const Cnf F = io::parse_dimacs(read_file(cnf_path));
  const BlpSingle given = io::parse_instance(read_file(inst_path));
  const auto art = build_sat_blp(F);
  if (!(given == art.instance)) {
    std::cout << "mismatch: instance is not the compilation of the formula\n";
    return kNegative;
  }
  bool sat = false;
  for (std::size_t mask = 0; mask < (std::size_t{1} << F.nvars) && !sat; ++mask) {
    std::vector<int> mu(F.nvars);
    for (std::size_t i = 0; i < F.nvars; ++i) mu[i] = static_cast<int>((mask >> i) & 1u);
    sat = F.satisfied_by(mu);
  }
  const auto res = global_solve_candidates(given, opts.jobs);
  const Rational expected = sat ? Rational(-1) : Rational(0);
  std::cout << "satisfiable " << (sat ? "yes" : "no") << "\nvalue " << (res ? show(res->value) : "none") << "\n";
  if (!res || res->value != expected) {
    std::cout << "dichotomy violated\n";
    return kNegative;
  }
  std::cout << "dichotomy holds\n";
  return kOk;
}

int verify_point(const std::string& inst_path, const std::string& x2_text, const std::string& x1_path) {
  const BlpSingle b = io::parse_instance(read_file(inst_path));
  const Rational x2 = parse_scalar(x2_text);
  const RationalVec x1 = io::parse_vector(read_file(x1_path));
  if (x1.size() != b.n) throw ModelError("x1 has " + std::to_string(x1.size()) + " entries, instance has " + std::to_string(b.n));
  const bool ok = check_bilevel_feasible(b, x2, x1);
  std::cout << (ok ? "bilevel-feasible" : "not bilevel-feasible") << "\n";
  return ok ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-upper-variable bilevel LP toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--decimal", opts.decimal, "Add 12-digit decimal renderings to numeric output");
  app.add_flag("-v,--verbose", opts.verbose, "Extra diagnostics on stderr");
  app.add_option("-j,--jobs", opts.jobs, "Worker threads for candidate and pattern enumeration")
      ->check(CLI::Range(1u, 256u));

  std::function<int()> action;
  std::string in_path, out_path, aux_path, theta, codec = "lemma4iii", method = "candidates", csv_path, svg_path;
  std::size_t n = 0, denominator = 0, cap = 14;

  auto* compile = app.add_subcommand("compile", "Build an instance file")->require_subcommand(1);
  auto* compile_sat_cmd = compile->add_subcommand("sat", "From a DIMACS 3CNF formula");
  compile_sat_cmd->add_option("cnf", in_path, "Formula")->required();
  compile_sat_cmd->add_option("-o,--output", out_path, "Instance file")->required();
  compile_sat_cmd->callback([&] { action = [&] { return compile_sat(in_path, out_path); }; });
  auto* compile_ilp_cmd = compile->add_subcommand("ilp", "From a 0-1 ILP document");
  compile_ilp_cmd->add_option("ilp", in_path, "ILP document")->required();
  compile_ilp_cmd->add_option("-o,--output", out_path, "Instance file")->required();
  compile_ilp_cmd->callback([&] { action = [&] { return compile_ilp(in_path, out_path); }; });

  auto* solve = app.add_subcommand("solve", "Solve an instance")->require_subcommand(1);
  auto* global = solve->add_subcommand("global", "Global optimum");
  global->add_option("instance", in_path, "Instance file")->required();
  global->add_option("--method", method, "candidates | sweep | omega")
      ->check(CLI::IsMember({"candidates", "sweep", "omega"}));
  global->add_option("--cap", cap, "Largest lower row count for omega");
  global->callback([&] { action = [&] { return solve_global(in_path, method, cap); }; });
  auto* local = solve->add_subcommand("local", "Local optimum by bisection");
  local->add_option("instance", in_path, "Instance file")->required();
  local->callback([&] { action = [&] { return solve_local(in_path); }; });

  auto* lower = app.add_subcommand("lower-eval", "Closed-form lower solution at theta");
  lower->add_option("-n", n, "Formula variables")->required()->check(CLI::PositiveNumber);
  lower->add_option("--theta", theta, "theta as p/q")->required();
  lower->callback([&] { action = [&] { return lower_eval(n, theta); }; });

  auto* dec = app.add_subcommand("decode", "Read a bit vector out of theta");
  dec->add_option("--theta", theta, "theta as p/q")->required();
  dec->add_option("-n", n, "Bits")->required()->check(CLI::PositiveNumber);
  dec->add_option("--codec", codec, "lemma4iii | section5")->check(CLI::IsMember({"lemma4iii", "section5"}));
  dec->callback([&] { action = [&] { return decode(n, theta, codec); }; });

  auto* psi_cmd = app.add_subcommand("psi", "Trace the value function");
  psi_cmd->add_option("instance", in_path, "Instance file")->required();
  psi_cmd->add_option("--csv", csv_path, "Write the profile here instead of stdout");
  psi_cmd->callback([&] { action = [&] { return psi(in_path, csv_path); }; });

  auto* plot = app.add_subcommand("plot", "Tables for plotting")->require_subcommand(1);
  auto* tentmap = plot->add_subcommand("tentmap", "Tent-map coordinates on a theta grid");
  tentmap->add_option("-n", n, "Formula variables")->required()->check(CLI::PositiveNumber);
  tentmap->add_option("-d,--denominator", denominator, "Grid denominator")->required()->check(CLI::PositiveNumber);
  tentmap->add_option("--svg", svg_path, "SVG output");
  tentmap->add_option("--csv", csv_path, "CSV output");
  tentmap->callback([&] { action = [&] { return plot_tentmap(n, denominator, svg_path, csv_path); }; });

  auto* verify = app.add_subcommand("verify", "Checks")->require_subcommand(1);
  auto* vsat = verify->add_subcommand("sat", "Value dichotomy against a truth table");
  vsat->add_option("cnf", in_path, "Formula")->required();
  vsat->add_option("instance", aux_path, "Instance file")->required();
  vsat->callback([&] { action = [&] { return verify_sat(in_path, aux_path); }; });
  auto* vpoint = verify->add_subcommand("point", "Bilevel feasibility of a point");
  vpoint->add_option("instance", in_path, "Instance file")->required();
  vpoint->add_option("--x2", theta, "x2 as p/q")->required();
  vpoint->add_option("--x1", aux_path, "File with x1 entries")->required();
  vpoint->callback([&] { action = [&] { return verify_point(in_path, theta, aux_path); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  try {
    return action ? action() : kUsage;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNegative;
  }
}
