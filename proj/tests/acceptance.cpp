// Acceptance run: one PASS/FAIL line per criterion, exact rational checks.
// Exit status is non-zero when any criterion fails.

#include "blsingle/lex_simplex.hpp"
#include "blsingle/rational.hpp"
#include "blsingle/reductions.hpp"
#include "blsingle/solvers.hpp"
#include "blsingle/tent_map.hpp"
#include "generators.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace blsingle;
using gen::q;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string mu_str(const std::vector<int>& mu) {
  std::string s;
  for (int b : mu) s += b ? '1' : '0';
  return s;
}

RationalVec lift_block(const tent::CoordinateLayout& L, const tent::LowerSolution& sol, std::size_t width) {
  RationalVec x(width);
  for (std::size_t i = 0; i < L.len; ++i) {
    x[L.z(i)] = sol.z[i];
    x[L.f(i)] = sol.f[i];
    x[L.s(i)] = sol.s[i];
    x[L.t(i)] = sol.t[i];
    x[L.u(i)] = sol.u[i];
  }
  return x;
}

std::vector<Cnf> canonical_set() {
  std::vector<Cnf> all;
  for (std::size_t n = 1; n <= 3; ++n)
    for (auto& F : gen::canonical_formulas(n, 4)) all.push_back(std::move(F));
  return all;
}

// 1. value -1 on satisfiable formulas, 0 otherwise
Outcome sat_dichotomy(const std::vector<Cnf>& canonical, std::string& note) {
  Outcome out;
  const auto t0 = Clock::now();
  std::vector<Cnf> formulas = canonical;
  std::mt19937_64 rng(101);
  for (int k = 0; k < 200; ++k)
    formulas.push_back(gen::random_cnf(rng, static_cast<std::size_t>(gen::uniform(rng, 1, 6)),
                                       static_cast<std::size_t>(gen::uniform(rng, 1, 12))));
  std::size_t sat = 0;
  for (const auto& F : formulas) {
    const bool truth = gen::truth_table_sat(F);
    sat += truth;
    const auto res = global_solve_candidates(build_sat_blp(F));
    const Rational expected = truth ? Rational(-1) : Rational(0);
    if (!res || res->value != expected) {
      out.fail("formula " + io::write_dimacs(F) + " value " + (res ? res->value.str() : "none"));
      continue;
    }
    if (truth) {
      const auto d = tent::decode_theta(res->x2, F.nvars, tent::Codec::Lemma4iii);
      if (!d.binary || !F.satisfied_by(d.mu)) out.fail("optimal theta does not decode to a model");
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 120) out.fail("took " + std::to_string(secs) + " s");
  note = std::to_string(formulas.size()) + " formulas (" + std::to_string(canonical.size()) + " canonical, " +
         std::to_string(sat) + " satisfiable), " + std::to_string(secs).substr(0, 5) + " s";
  return out;
}

// 2. closed form vs weighted and lexicographic LPs
Outcome lower_level_cross_check(std::string& note) {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  const long den_max = 6561;  // 3^8
  const RationalVec etas = {Rational(1), q(1, 2), q(1, 7)};
  for (int k = 0; k < 200; ++k) {
    const long d = gen::uniform(rng, 1, den_max);
    const Rational theta = q(gen::uniform(rng, 0, d), d);
    const std::size_t n = static_cast<std::size_t>(gen::uniform(rng, 1, 4));
    const auto analytic = tent::solve_lower_analytic(n, theta);
    for (const auto& eta : etas) {
      const auto clp = tent::coordinate_lp(n + 1, theta, eta);
      const auto res = solve_lex(clp.lp);
      if (res.status != LpStatus::Optimal || tent::read_coordinates(clp.layout, res.solution.values) != analytic)
        out.fail("weighted LP differs at theta " + theta.str() + " eta " + eta.str());
    }
    const auto clp = tent::coordinate_lp(n + 1, theta);
    const auto res = solve_lex(clp.lp);
    if (res.status != LpStatus::Optimal || tent::read_coordinates(clp.layout, res.solution.values) != analytic)
      out.fail("lexicographic LP differs at theta " + theta.str());
  }
  const double secs = seconds_since(t0);
  if (secs >= 120) out.fail("took " + std::to_string(secs) + " s");
  note = "200 thetas x 4 LPs, " + std::to_string(secs).substr(0, 5) + " s";
  return out;
}

// 3. the basic solution at n = 1, eta = 1
Outcome appendix_basis(std::string& note) {
  Outcome out;
  for (const Rational& theta : {Rational(0), q(1, 18), q(1, 9)}) {
    const auto clp = tent::coordinate_lp(2, theta, Rational(1));
    const auto res = solve_lex(clp.lp);
    if (res.status != LpStatus::Optimal) {
      out.fail("LP not optimal at " + theta.str());
      continue;
    }
    const auto& L = clp.layout;
    const auto& x = res.solution.values;
    RationalVec expected(L.end());
    expected[L.f(0)] = q(1, 2);
    expected[L.f(1)] = q(1, 2);
    expected[L.u(0)] = Rational(3) * theta;
    expected[L.u(1)] = theta;
    for (std::size_t j = 0; j < L.end(); ++j)
      if (x[j] != expected[j]) out.fail("column " + std::to_string(j) + " at theta " + theta.str() + " is " + x[j].str());
    if (theta == q(1, 18)) {
      const Interval iv = stability_interval(clp.lp, res.solution, clp.theta_col);
      if (!iv.lo || !iv.hi || *iv.lo > Rational(0) || *iv.hi != q(1, 9))
        out.fail("basis range at 1/18 is not [0, 1/9]");
    }
  }
  note = "theta in {0, 1/18, 1/9}";
  return out;
}

// 4. penalty reformulation on tiny general instances
Outcome penalty_equivalence(std::string& note) {
  Outcome out;
  std::mt19937_64 rng(404);
  int accepted = 0, tried = 0;
  while (accepted < 100 && tried < 5000) {
    ++tried;
    const BlpGeneral g = gen::random_tiny_general(rng);
    const auto orig = global_solve_omega(g);
    if (orig.status != OmegaStatus::Solved) continue;
    const Rational M = penalty_threshold(g);
    const auto pen = apply_penalty(g, M, SlackCap::Unbounded);
    const auto relaxed = global_solve_omega(pen.blp, 14, 1, pen.e_col);
    if (relaxed.status != OmegaStatus::Solved) continue;
    ++accepted;
    if (relaxed.value != orig.value) out.fail("v(Q) = " + orig.value.str() + " but v(Q') = " + relaxed.value.str());
    if (!relaxed.probe_max || !relaxed.probe_max->is_zero())
      out.fail("an optimum of Q' has e = " + (relaxed.probe_max ? relaxed.probe_max->str() : "?"));
  }
  if (accepted < 100) out.fail("only " + std::to_string(accepted) + " instances passed the filter");
  note = std::to_string(accepted) + " instances of " + std::to_string(tried) + " drawn";
  return out;
}

struct IlpTruth {
  bool feasible = false;
  Rational value;
};

IlpTruth brute_force(const ZeroOneIlp& ilp) {
  IlpTruth t;
  for (std::size_t mask = 0; mask < (std::size_t{1} << ilp.r); ++mask) {
    const auto z = gen::bits_of(mask, ilp.r);
    if (!ilp.feasible(z)) continue;
    Rational v;
    for (std::size_t i = 0; i < ilp.r; ++i)
      if (z[i]) v += ilp.c[i];
    if (!t.feasible || v < t.value) t = {true, v};
  }
  return t;
}

bool decodes_to_optimum(const ZeroOneIlp& ilp, const IlpTruth& truth, const Rational& theta) {
  const auto d = tent::decode_theta(theta, ilp.r, tent::Codec::Section5);
  if (!d.binary || !ilp.feasible(d.mu)) return false;
  Rational v;
  for (std::size_t i = 0; i < ilp.r; ++i)
    if (d.mu[i]) v += ilp.c[i];
  return v == truth.value;
}

// One compiled ILP.  Candidate thetas are evaluated through the lower-level
// LP; with `sweep` the whole value function is traced as well.
void check_ilp(const ZeroOneIlp& ilp, bool sweep, Outcome& out) {
  const IlpTruth truth = brute_force(ilp);
  if (!truth.feasible) return;
  const auto art = ilp_to_blp(ilp);
  const StandardBlp sf = to_standard_form(art.instance);
  // encodings of infeasible bit vectors may fall outside [l, u] since e <= 1
  std::vector<std::pair<Rational, Rational>> cand;
  for (std::size_t mask = 0; mask < (std::size_t{1} << ilp.r); ++mask) {
    const Rational th = tent::encode_mu(gen::bits_of(mask, ilp.r), tent::Codec::Section5);
    if (const auto pt = evaluate(sf, th)) cand.emplace_back(th, pt->value);
  }
  if (cand.empty()) {
    out.fail("no encoded theta is lower-feasible");
    return;
  }
  Rational best = cand.front().second;
  for (const auto& [th, v] : cand) best = min(best, v);
  const std::string tag = io::serialize_ilp(ilp);
  if (best != truth.value) out.fail("candidate value " + best.str() + " vs " + truth.value.str() + " for " + tag);
  for (const auto& [th, v] : cand)
    if (v == best && !decodes_to_optimum(ilp, truth, th)) out.fail("optimal theta " + th.str() + " decodes badly");
  if (!sweep) return;
  const auto prof = psi_profile(sf);
  if (!prof) {
    out.fail("sweep found no feasible theta");
    return;
  }
  const auto gmin = profile_minimum(*prof);
  if (gmin.value != truth.value) out.fail("sweep value " + gmin.value.str() + " vs " + truth.value.str() + " for " + tag);
  for (std::size_t k = 0; k < prof->breakpoints.size(); ++k)
    if (prof->values[k] == gmin.value && !decodes_to_optimum(ilp, truth, prof->breakpoints[k]))
      out.fail("optimal breakpoint " + prof->breakpoints[k].str() + " decodes badly");
  for (std::size_t k = 0; k < prof->slopes.size(); ++k)
    if (prof->slopes[k].is_zero() && prof->values[k] == gmin.value) {
      const Rational mid = (prof->breakpoints[k] + prof->breakpoints[k + 1]) / Rational(2);
      if (!decodes_to_optimum(ilp, truth, mid)) out.fail("optimal theta " + mid.str() + " decodes badly");
    }
}

// 5. compiled 0-1 ILPs
Outcome ilp_bijection(std::string& note) {
  Outcome out;
  const auto t0 = Clock::now();
  std::size_t knapsacks = 0, swept = 0, randoms = 0;
  // max v.z s.t. w.z <= W with items (v_i, w_i) in {1, 2}^2 and W in [0, 2r].
  // Item order does not matter, so items are drawn as non-decreasing type codes.
  for (std::size_t r = 1; r <= 4; ++r) {
    std::vector<int> types(r, 0);
    for (;;) {
      for (long W = 0; W <= static_cast<long>(2 * r); ++W) {
        ZeroOneIlp ilp;
        ilp.r = r;
        RationalVec w(r);
        for (std::size_t i = 0; i < r; ++i) {
          ilp.c.push_back(Rational(-1 - (types[i] & 1)));
          w[i] = Rational(-1 - (types[i] >> 1));
        }
        ilp.A = {w};
        ilp.a = {Rational(-W)};
        const bool sweep = r <= 2 || (r == 3 && W == 3);
        check_ilp(ilp, sweep, out);
        ++knapsacks;
        swept += sweep;
      }
      std::size_t i = r;
      while (i > 0 && types[i - 1] == 3) --i;
      if (i == 0) break;
      ++types[i - 1];
      std::fill(types.begin() + static_cast<long>(i), types.end(), types[i - 1]);
    }
  }
  std::mt19937_64 rng(505);
  while (randoms < 100) {
    const std::size_t r = static_cast<std::size_t>(gen::uniform(rng, 1, 5));
    const ZeroOneIlp ilp = gen::random_ilp(rng, r, static_cast<std::size_t>(gen::uniform(rng, 1, 3)));
    if (!brute_force(ilp).feasible) continue;
    const bool sweep = r <= 3 && randoms % 4 == 0;
    check_ilp(ilp, sweep, out);
    ++randoms;
    swept += sweep;
  }
  note = std::to_string(knapsacks) + " knapsacks + " + std::to_string(randoms) + " random ILPs, " +
         std::to_string(swept) + " swept, " + std::to_string(seconds_since(t0)).substr(0, 5) + " s";
  return out;
}

// Slopes of the profile on either side of x2.
std::pair<Derivative, Derivative> profile_slopes(const PsiProfile& p, const Rational& x2) {
  Derivative left{Derivative::Boundary, {}}, right{Derivative::Boundary, {}};
  for (std::size_t k = 0; k < p.slopes.size(); ++k) {
    const Rational& a = p.breakpoints[k];
    const Rational& b = p.breakpoints[k + 1];
    if (a < x2 && x2 <= b) left = Derivative::of(p.slopes[k]);
    if (a <= x2 && x2 < b) right = Derivative::of(p.slopes[k]);
  }
  return {left, right};
}

void check_local(const BlpSingle& b, Outcome& out, std::size_t& certified, const std::string& tag) {
  const auto res = local_search(b);
  const auto prof = psi_profile(to_standard_form(b));
  if (!res || !prof) {
    if (res.has_value() != prof.has_value()) out.fail(tag + ": feasibility disagreement");
    return;
  }
  ++certified;
  if (!check_bilevel_feasible(b, res->x2, res->x1)) out.fail(tag + ": point not bilevel feasible");
  if (b.upper_value(res->x1, res->x2) != res->value || prof->at(res->x2) != res->value)
    out.fail(tag + ": value mismatch at " + res->x2.str());
  const auto [left, right] = profile_slopes(*prof, res->x2);
  if (!locally_optimal(left, right)) out.fail(tag + ": not locally optimal at " + res->x2.str());
  if (left != res->left || right != res->right) out.fail(tag + ": reported derivatives differ from the profile");
  if (res->iterations > 2 * res->sbound + 2) out.fail(tag + ": too many bisection steps");
}

// 6. local search
Outcome local_search_certified(std::string& note) {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(606);
  std::size_t certified = 0, reductions = 0;
  for (int k = 0; k < 100; ++k) {
    const auto b = gen::random_single(rng, static_cast<std::size_t>(gen::uniform(rng, 1, 6)),
                                      static_cast<std::size_t>(gen::uniform(rng, 1, 10)));
    check_local(b, out, certified, "random #" + std::to_string(k));
  }
  for (std::size_t n = 1; n <= 2; ++n)
    for (const auto& F : gen::canonical_formulas(n, 2)) {
      check_local(build_sat_blp(F).instance, out, certified, "formula " + io::write_dimacs(F));
      ++reductions;
    }
  for (long c0 : {-1, 1}) {
    ZeroOneIlp ilp;
    ilp.r = 2;
    ilp.c = {Rational(c0), Rational(-1)};
    ilp.A = {{Rational(-1), Rational(-1)}};
    ilp.a = {Rational(-1)};
    check_local(ilp_to_blp(ilp).instance, out, certified, "ilp");
    ++reductions;
  }
  note = std::to_string(certified) + " certified (" + std::to_string(reductions) + " reduction instances), " +
         std::to_string(seconds_since(t0)).substr(0, 5) + " s";
  return out;
}

// 7. continued-fraction rounding
Outcome continued_fractions(std::string& note) {
  Outcome out;
  const BigInt bound = 50;
  const Rational radius(BigInt(1), BigInt(5000));
  std::mt19937_64 rng(707);
  std::size_t fractions = 0;
  for (long den = 1; den <= 50; ++den)
    for (long num = 0; num <= den; ++num) {
      const Rational pq = q(num, den);
      if (pq.den() != den) continue;
      ++fractions;
      if (cf_round(pq, bound) != pq) out.fail("exact " + pq.str());
      for (int k = 0; k < 200; ++k) {
        const long scale = 1'000'000'007;
        const Rational delta = radius * q(gen::uniform(rng, -(scale - 1), scale - 1), scale);
        if (cf_round(pq + delta, bound) != pq) out.fail(pq.str() + " + " + delta.str());
      }
    }
  for (int k = 0; k < 10'000; ++k) {
    const long m = gen::uniform(rng, 1, 30);
    const long d = gen::uniform(rng, 1, 4000);
    const Rational alpha = q(gen::uniform(rng, -2 * d, 2 * d), d);
    const auto got = cf_round(alpha, BigInt(m));
    const Rational tol(BigInt(1), BigInt(2 * m * m));
    std::optional<Rational> brute;
    for (long qq = 1; qq <= m && !brute; ++qq) {
      const Rational cand(floor(alpha * Rational(qq) + q(1, 2)), BigInt(qq));
      if (abs(alpha - cand) < tol) brute = cand;
    }
    if (got != brute) out.fail("alpha " + alpha.str() + " bound " + std::to_string(m));
  }
  note = std::to_string(fractions) + " fractions, 10000 soundness draws";
  return out;
}

// 8. the n = 2 table at denominator 81
Outcome tentmap_table(std::string& note) {
  Outcome out;
  const auto rows = tent::emit_tentmap_table(2, 81);
  if (rows.size() != 82) out.fail("expected 82 rows");
  auto fz = [](const Rational& x) {
    if (3 * x <= Rational(1)) return Rational(0);
    if (3 * x >= Rational(2)) return Rational(1);
    return Rational(3) * x - Rational(1);
  };
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& s = rows[k].sol;
    if (s.u[2] != q(static_cast<long>(k), 81)) out.fail("u3 != theta at row " + std::to_string(k));
    for (std::size_t i = 2; i > 0; --i)
      if (s.u[i - 1] != Rational(3) * s.u[i] - Rational(2) * fz(s.u[i])) out.fail("recursion at row " + std::to_string(k));
    for (std::size_t i = 0; i < 3; ++i)
      if (s.z[i] != fz(s.u[i])) out.fail("z column at row " + std::to_string(k));
  }
  std::size_t switches = 0;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const Rational bend = rows[k + 1].sol.z[0] - Rational(2) * rows[k].sol.z[0] + rows[k - 1].sol.z[0];
    if (!bend.is_zero() && k % 3 != 0) out.fail("z1 bends off the 1/27 grid at row " + std::to_string(k));
  }
  for (std::size_t k = 0; k + 3 < rows.size(); k += 3) {
    const Rational& a = rows[k].sol.z[0];
    const Rational& b = rows[k + 3].sol.z[0];
    if ((!a.is_zero() && a != Rational(1)) || (!b.is_zero() && b != Rational(1)))
      out.fail("z1 not binary at a multiple of 1/27");
    if (a != b) ++switches;
  }
  if (switches == 0) out.fail("z1 never switches");
  note = "82 rows, z1 switches " + std::to_string(switches) + " times";
  return out;
}

// 9. encoded points with e = 1 are bilevel feasible
Outcome encoded_points_feasible(const std::vector<Cnf>& canonical, std::string& note) {
  Outcome out;
  const auto t0 = Clock::now();
  std::size_t points = 0;
  for (const auto& F : canonical) {
    if (F.nvars > 4) continue;
    const auto art = build_sat_blp(F);
    for (std::size_t mask = 0; mask < (std::size_t{1} << F.nvars); ++mask) {
      const auto mu = gen::bits_of(mask, F.nvars);
      const Rational th = tent::encode_mu(mu, tent::Codec::Lemma4iii);
      RationalVec x1 = lift_block(art.layout, tent::solve_lower_analytic(F.nvars, th), art.instance.n);
      x1[art.e_col] = 1;
      ++points;
      if (!check_bilevel_feasible(art.instance, th, x1))
        out.fail("mu " + mu_str(mu) + " for " + io::write_dimacs(F));
    }
  }
  note = std::to_string(points) + " points over " + std::to_string(canonical.size()) + " formulas, " +
         std::to_string(seconds_since(t0)).substr(0, 5) + " s";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::string only = argc > 1 ? argv[1] : "";
  const std::vector<Cnf> canonical = canonical_set();
  using Check = std::function<Outcome(std::string&)>;
  const std::vector<std::pair<std::string, Check>> criteria = {
      {"1 sat-value-dichotomy", [&](std::string& n) { return sat_dichotomy(canonical, n); }},
      {"2 lower-level-cross-oracle", lower_level_cross_check},
      {"3 appendix-basis", appendix_basis},
      {"4 penalty-reformulation", penalty_equivalence},
      {"5 ilp-bijection", ilp_bijection},
      {"6 local-search", local_search_certified},
      {"7 continued-fractions", continued_fractions},
      {"8 tentmap-table", tentmap_table},
      {"9 encoded-points-feasible", [&](std::string& n) { return encoded_points_feasible(canonical, n); }},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && name.rfind(only + " ", 0) != 0) continue;
    std::string note;
    Outcome o;
    try {
      o = run(note);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::cout << (o.ok ? "PASS " : "FAIL ") << name << " :: " << (o.ok ? note : o.detail) << std::endl;
    failures += !o.ok;
  }
  return failures == 0 ? 0 : 1;
}
