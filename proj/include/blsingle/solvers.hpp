#pragma once

// Solvers for single-upper-variable bilevel LPs: standard form, the optimistic
// value function psi(x2), one-sided derivatives, bisection local search, a
// basis sweep of psi, complementarity-pattern enumeration for general bilevel
// LPs, the reduction-family candidate oracle and a bilevel feasibility check.

#include "blsingle/lex_simplex.hpp"
#include "blsingle/model.hpp"
#include "blsingle/rational.hpp"
#include "blsingle/reductions.hpp"
#include "blsingle/tent_map.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace blsingle {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.  Callers write into
/// per-index slots, so results never depend on the job count.
inline void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(jobs, count); ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Coefficients beyond 2^256 in magnitude go to the symbolic big part.
inline Objective split_cost(const RationalVec& c) {
  constexpr long kHuge = 256;
  auto huge = [](const Rational& v) {
    return !v.is_zero() &&
           static_cast<long>(bit_length(v.num())) - static_cast<long>(bit_length(v.den())) > kHuge;
  };
  Rational W;
  for (const auto& v : c)
    if (huge(v) && abs(v) > W) W = abs(v);
  Objective o(c);
  if (W.is_zero()) return o;
  o.big.assign(c.size(), Rational(0));
  o.weight = W;
  for (std::size_t j = 0; j < c.size(); ++j)
    if (huge(c[j])) {
      o.big[j] = c[j] / W;
      o.c[j] = 0;
    }
  return o;
}

// ---------------------------------------------------------------------------
// Standard form

/// a x2 >= b (or = b when `equality`).
struct PureRow {
  Rational a, b;
  bool equality = false;
  bool holds(const Rational& x2) const { return equality ? a * x2 == b : a * x2 >= b; }
};

/// Lower level  min c1'z  s.t.  A z + a2 x2 = b, pure rows on x2, z >= 0, with
/// A of full row rank.  Columns [0, x1_count) of z are the original x1.
struct StandardBlp {
  std::size_t n = 0;  // columns of z
  std::size_t x1_count = 0;
  RationalMat A;
  RationalVec a2, b;
  std::vector<PureRow> pure;
  RationalVec c1, c2;
  Rational c22;
  bool inconsistent = false;  // a dependent row contradicted the others

  std::size_t rows() const { return b.size(); }
  RationalVec x1_of(const RationalVec& z) const { return RationalVec(z.begin(), z.begin() + static_cast<long>(x1_count)); }
};

namespace detail {

inline std::string row_key(const RationalVec& coeffs, const Rational& x2c, const Rational& rhs, const Rational& scale) {
  std::string key;
  for (const auto& v : coeffs) key += (v / scale).str() + ",";
  key += "|" + (x2c / scale).str() + "|" + (rhs / scale).str();
  return key;
}

}  // namespace detail

/// Inequalities gain surplus columns, x1 boxes become x1 + w = 1 with w >= 0,
/// opposite inequality pairs merge into one equality, duplicated rows are
/// dropped, rows without x1 terms (and the x2 box) become pure rows, and
/// equality rows dependent on the others are turned into pure rows.
inline StandardBlp to_standard_form(const BlpSingle& inst) {
  inst.validate();
  const std::size_t n1 = inst.n;
  StandardBlp sf;
  sf.x1_count = n1;
  sf.c22 = inst.c22;
  sf.pure.push_back({1, 0, false});
  sf.pure.push_back({-1, -1, false});

  struct Pending {
    std::size_t row;
    bool equality;
  };
  std::vector<Pending> kept;
  std::map<std::string, std::size_t> seen;  // normalised row -> index in kept
  for (std::size_t r = 0; r < inst.m; ++r) {
    const auto& coeffs = inst.A11[r];
    auto first = std::find_if(coeffs.begin(), coeffs.end(), [](const Rational& v) { return !v.is_zero(); });
    if (first == coeffs.end()) {
      sf.pure.push_back({inst.A12[r], inst.b1[r], false});
      continue;
    }
    const Rational scale = abs(*first);
    const std::string key = detail::row_key(coeffs, inst.A12[r], inst.b1[r], scale);
    if (seen.count(key)) continue;
    const std::string neg = detail::row_key(coeffs, inst.A12[r], inst.b1[r], -scale);
    if (auto it = seen.find(neg); it != seen.end()) {
      kept[it->second].equality = true;
      continue;
    }
    seen.emplace(key, kept.size());
    kept.push_back({r, false});
  }

  std::size_t surplus = 0;
  for (const auto& k : kept)
    if (!k.equality) ++surplus;
  sf.n = 2 * n1 + surplus;

  RationalMat A;
  RationalVec a2, b;
  for (std::size_t j = 0; j < n1; ++j) {
    RationalVec row(sf.n);
    row[j] = 1;
    row[n1 + j] = 1;
    A.push_back(std::move(row));
    a2.emplace_back(0);
    b.emplace_back(1);
  }
  std::size_t next_surplus = 2 * n1;
  for (const auto& k : kept) {
    RationalVec row(sf.n);
    std::copy(inst.A11[k.row].begin(), inst.A11[k.row].end(), row.begin());
    if (!k.equality) row[next_surplus++] = -1;
    A.push_back(std::move(row));
    a2.push_back(inst.A12[k.row]);
    b.push_back(inst.b1[k.row]);
  }

  // rank repair over the z columns, carrying x2 and rhs along
  std::vector<RationalVec> echelon;
  std::vector<std::size_t> pivots;
  for (std::size_t r = 0; r < A.size(); ++r) {
    RationalVec row = A[r];
    row.push_back(a2[r]);
    row.push_back(b[r]);
    for (std::size_t e = 0; e < echelon.size(); ++e) {
      const Rational f = row[pivots[e]];
      if (f.is_zero()) continue;
      for (std::size_t k = 0; k < row.size(); ++k)
        if (!echelon[e][k].is_zero()) row[k] -= f * echelon[e][k];
    }
    std::size_t p = sf.n;
    for (std::size_t k = 0; k < sf.n; ++k)
      if (!row[k].is_zero()) { p = k; break; }
    if (p == sf.n) {
      const Rational& alpha = row[sf.n];
      const Rational& beta = row[sf.n + 1];
      if (alpha.is_zero()) {
        if (!beta.is_zero()) sf.inconsistent = true;
      } else {
        sf.pure.push_back({alpha, beta, true});
      }
      continue;
    }
    const Rational inv = Rational(1) / row[p];
    for (auto& v : row)
      if (!v.is_zero()) v *= inv;
    for (auto& er : echelon) {
      const Rational f = er[p];
      if (f.is_zero()) continue;
      for (std::size_t k = 0; k < row.size(); ++k)
        if (!row[k].is_zero()) er[k] -= f * row[k];
    }
    echelon.push_back(std::move(row));
    pivots.push_back(p);
    sf.A.push_back(A[r]);
    sf.a2.push_back(a2[r]);
    sf.b.push_back(b[r]);
  }

  sf.c1.assign(sf.n, Rational(0));
  sf.c2.assign(sf.n, Rational(0));
  std::copy(inst.c11.begin(), inst.c11.end(), sf.c1.begin());
  std::copy(inst.c21.begin(), inst.c21.end(), sf.c2.begin());
  return sf;
}

/// Lifted LP over (z, x2).  With `fixed`, x2 is pinned and the pure rows are
/// the caller's business; otherwise x2 is free and the pure rows are rows.
inline LexLp lifted_lp(const StandardBlp& sf, const std::optional<Rational>& fixed) {
  LexLp lp;
  for (std::size_t j = 0; j < sf.n; ++j) lp.add_var(Rational(0), std::nullopt);
  if (fixed) lp.add_var(*fixed, *fixed);
  else lp.add_var(std::nullopt, std::nullopt);
  const std::size_t x2 = sf.n;
  for (std::size_t r = 0; r < sf.rows(); ++r) {
    std::vector<std::pair<std::size_t, Rational>> terms;
    for (std::size_t j = 0; j < sf.n; ++j)
      if (!sf.A[r][j].is_zero()) terms.emplace_back(j, sf.A[r][j]);
    if (!sf.a2[r].is_zero()) terms.emplace_back(x2, sf.a2[r]);
    lp.add_eq(terms, sf.b[r]);
  }
  if (!fixed)
    for (const auto& p : sf.pure) {
      if (p.equality) lp.add_eq({{x2, p.a}}, p.b);
      else lp.add_ge({{x2, p.a}}, p.b);
    }
  return lp;
}

struct Bounds {
  Rational lo, hi;
};

/// l = min x2 and u = max x2 over the lower-level feasible set; nullopt when
/// that set is empty.
inline std::optional<Bounds> compute_bounds(const StandardBlp& sf) {
  if (sf.inconsistent) return std::nullopt;
  LexLp lp = lifted_lp(sf, std::nullopt);
  Bounds out;
  for (int dir : {1, -1}) {
    RationalVec c(lp.num_vars);
    c[sf.n] = Rational(dir);
    lp.objectives = {Objective(c)};
    const LpResult res = solve_lp(lp);
    if (res.status == LpStatus::Infeasible) return std::nullopt;
    if (res.status != LpStatus::Optimal) throw SolverError("compute_bounds: x2 unbounded");
    (dir > 0 ? out.lo : out.hi) = res.solution.values[sf.n];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Value function

struct PsiPoint {
  Rational x2;
  Rational value;
  RationalVec z;       // lower solution in standard form
  BasicSolution basis; // over the lifted LP with x2 fixed
  LexLp lp;            // the LP the basis belongs to
};

/// Optimistic value at x2: lexmin (c1'z, c2'z) then + c22 x2.  nullopt when
/// the lower level is infeasible at x2.
inline std::optional<PsiPoint> evaluate(const StandardBlp& sf, const Rational& x2) {
  if (sf.inconsistent) return std::nullopt;
  for (const auto& p : sf.pure)
    if (!p.holds(x2)) return std::nullopt;
  PsiPoint pt;
  pt.x2 = x2;
  pt.lp = lifted_lp(sf, x2);
  RationalVec c1 = sf.c1, c2 = sf.c2;
  c1.emplace_back(0);
  c2.emplace_back(0);
  pt.lp.objectives = {split_cost(c1), split_cost(c2)};
  LpResult res = solve_lex(pt.lp);
  if (res.status == LpStatus::Infeasible) return std::nullopt;
  if (res.status == LpStatus::Unbounded) throw SolverError("evaluate: lower level unbounded");
  pt.basis = std::move(res.solution);
  pt.z.assign(pt.basis.values.begin(), pt.basis.values.begin() + static_cast<long>(sf.n));
  pt.value = pt.basis.objective_values[1] + sf.c22 * x2;
  return pt;
}

inline Rational eval_psi(const StandardBlp& sf, const Rational& x2) {
  auto pt = evaluate(sf, x2);
  if (!pt) throw SolverError("eval_psi: lower level infeasible at x2 = " + x2.str());
  return pt->value;
}

/// Breakpoints of psi are x2-coordinates of vertices of the lifted system, so
/// each is a ratio of two of its minors.  After scaling each row to integers,
/// Hadamard's inequality bounds every minor by H = prod max(1, ||row||_2);
/// hence size <= 1 + 2 bitlen(H).  The polynomial bound f_sol(n+1, sigma)
/// is also valid; the smaller one is returned.
inline std::size_t breakpoint_size_bound(const StandardBlp& sf) {
  std::size_t sigma = 1;
  for (std::size_t r = 0; r < sf.rows(); ++r) {
    for (const auto& v : sf.A[r]) sigma = std::max(sigma, size(v));
    sigma = std::max({sigma, size(sf.a2[r]), size(sf.b[r])});
  }
  for (const auto& p : sf.pure) sigma = std::max({sigma, size(p.a), size(p.b)});
  const std::size_t poly = f_sol_bound(sf.n + 1, sigma);

  BigInt H = 1;
  for (std::size_t r = 0; r < sf.rows(); ++r) {
    BigInt l = 1;
    auto take = [&](const Rational& v) {
      if (!v.is_zero()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.den().get_mpz_t());
    };
    for (const auto& v : sf.A[r]) take(v);
    take(sf.a2[r]);
    take(sf.b[r]);
    BigInt sq = 0;
    auto add = [&](const Rational& v) {
      if (v.is_zero()) return;
      const BigInt k = v.num() * (l / v.den());
      sq += k * k;
    };
    for (const auto& v : sf.A[r]) add(v);
    add(sf.a2[r]);
    add(sf.b[r]);
    BigInt root;
    mpz_sqrt(root.get_mpz_t(), sq.get_mpz_t());
    if (root * root < sq) root += 1;
    if (root > 1) H *= root;
  }
  std::size_t hadamard = 1 + 2 * bit_length(H);
  for (const auto& p : sf.pure)
    if (!p.a.is_zero()) hadamard = std::max(hadamard, size(p.b / p.a));
  return std::min(poly, hadamard);
}

enum class Side { Left, Right };

struct Derivative {
  enum Kind { Slope, Boundary, None } kind = None;
  Rational slope;

  static Derivative of(Rational s) { return {Slope, std::move(s)}; }
  friend bool operator==(const Derivative&, const Derivative&) = default;
};

inline std::string to_string(const Derivative& d) {
  switch (d.kind) {
    case Derivative::Slope: return d.slope.str();
    case Derivative::Boundary: return "boundary";
    case Derivative::None: return "none";
  }
  return "?";
}

/// One-sided derivative of psi at x2 given a bound s on breakpoint sizes.
/// size(x2) <= s: breakpoints are >= 2^-2s away, so a step of 2^-3s stays on
/// one piece.  Otherwise at most one rational of size <= s lies within
/// 2^-(2s+1); continued fractions locate it and the secant stops there.
inline Derivative one_sided_derivative(const StandardBlp& sf, const Bounds& bounds, const Rational& x2,
                                       const Rational& value_at_x2, Side side, std::size_t sbound) {
  if (x2 < bounds.lo || x2 > bounds.hi) return {};
  if (side == Side::Left && x2 == bounds.lo) return {Derivative::Boundary, {}};
  if (side == Side::Right && x2 == bounds.hi) return {Derivative::Boundary, {}};
  Rational y;
  if (size(x2) <= sbound) {
    const Rational eps(BigInt(1), pow2(3 * sbound));
    y = side == Side::Right ? x2 + eps : x2 - eps;
  } else {
    const Rational eps(BigInt(1), pow2(2 * sbound + 1));
    const auto near = cf_round(x2, pow2(sbound));
    if (side == Side::Right) y = (near && *near > x2) ? *near : x2 + eps;
    else y = (near && *near < x2) ? *near : x2 - eps;
  }
  y = side == Side::Right ? min(y, bounds.hi) : max(y, bounds.lo);
  const Rational fy = eval_psi(sf, y);
  return Derivative::of((fy - value_at_x2) / (y - x2));
}

inline Derivative one_sided_derivative(const StandardBlp& sf, const Rational& x2, Side side, std::size_t sbound) {
  auto b = compute_bounds(sf);
  if (!b) return {};
  if (x2 < b->lo || x2 > b->hi) return {};
  return one_sided_derivative(sf, *b, x2, eval_psi(sf, x2), side, sbound);
}

/// Left <= 0 and right >= 0, boundaries counting as satisfied.
inline bool locally_optimal(const Derivative& left, const Derivative& right) {
  const bool l_ok = left.kind == Derivative::Boundary || (left.kind == Derivative::Slope && left.slope.sign() <= 0);
  const bool r_ok = right.kind == Derivative::Boundary || (right.kind == Derivative::Slope && right.slope.sign() >= 0);
  return l_ok && r_ok;
}

struct LocalOpt {
  Rational x2;
  RationalVec z;   // standard-form lower solution
  RationalVec x1;  // original lower variables
  Rational value;
  Derivative left, right;
  std::size_t iterations = 0;  // bisection steps
  std::size_t sbound = 0;
};

/// Bisection on one-sided derivative signs, keeping psi'(l+) < 0 < psi'(u-).
/// The endpoint l is tested before u.
inline std::optional<LocalOpt> local_search(const BlpSingle& inst) {
  const StandardBlp sf = to_standard_form(inst);
  const auto bounds = compute_bounds(sf);
  if (!bounds) return std::nullopt;
  const std::size_t s = breakpoint_size_bound(sf);
  const Bounds full = *bounds;

  auto finish = [&](const Rational& x2, std::size_t iters) {
    auto pt = evaluate(sf, x2);
    if (!pt) throw SolverError("local_search: lost feasibility at " + x2.str());
    LocalOpt out;
    out.x2 = x2;
    out.z = pt->z;
    out.x1 = sf.x1_of(pt->z);
    out.value = pt->value;
    out.left = one_sided_derivative(sf, full, x2, pt->value, Side::Left, s);
    out.right = one_sided_derivative(sf, full, x2, pt->value, Side::Right, s);
    out.iterations = iters;
    out.sbound = s;
    return out;
  };

  Rational lo = full.lo, hi = full.hi;
  if (lo == hi) return finish(lo, 0);
  const Rational f_lo = eval_psi(sf, lo);
  if (one_sided_derivative(sf, full, lo, f_lo, Side::Right, s).slope.sign() >= 0) return finish(lo, 0);
  const Rational f_hi = eval_psi(sf, hi);
  if (one_sided_derivative(sf, full, hi, f_hi, Side::Left, s).slope.sign() <= 0) return finish(hi, 0);

  const Rational stop(BigInt(1), pow2(2 * s + 1));
  std::size_t iters = 0;
  while (hi - lo > stop) {
    ++iters;
    const Rational v = (lo + hi) / Rational(2);
    const Rational fv = eval_psi(sf, v);
    const Derivative left = one_sided_derivative(sf, full, v, fv, Side::Left, s);
    const Derivative right = one_sided_derivative(sf, full, v, fv, Side::Right, s);
    if (locally_optimal(left, right)) return finish(v, iters);
    if (left.slope.sign() > 0) hi = v;
    else lo = v;
  }
  const auto x = cf_round((lo + hi) / Rational(2), pow2(s));
  if (!x || *x < lo || *x > hi) throw SolverError("local_search: no small rational in the final interval");
  return finish(*x, iters);
}

// ---------------------------------------------------------------------------
// Sweep

struct PsiProfile {
  Rational lo, hi;
  RationalVec breakpoints;  // strictly increasing, lo first, hi last
  RationalVec values;
  RationalVec slopes;       // one per segment

  Rational at(const Rational& x2) const {
    if (x2 < lo || x2 > hi) throw std::out_of_range("PsiProfile::at: outside [l, u]");
    if (slopes.empty()) return values.front();
    std::size_t k = 0;
    while (k + 1 < slopes.size() && x2 > breakpoints[k + 1]) ++k;
    return values[k] + slopes[k] * (x2 - breakpoints[k]);
  }
};

namespace detail {

/// Slope of psi along the basis: d/dx2 of c2'z(x2) + c22 x2 where basic
/// values move as beta - T[:, x2] d.
inline Rational basis_slope(const StandardBlp& sf, const PsiPoint& pt) {
  Rational slope = sf.c22;
  const std::size_t param = sf.n;
  for (std::size_t i = 0; i < pt.basis.basis.size(); ++i) {
    const std::size_t col = pt.basis.basis[i];
    if (col >= sf.n) continue;
    const Rational& t = pt.basis.tableau[i][param];
    if (!t.is_zero() && !sf.c2[col].is_zero()) slope -= sf.c2[col] * t;
  }
  return slope;
}

}  // namespace detail

/// Walks [l, u] basis by basis.  At each point the lexicographic basis is
/// followed over its stability interval; a basis that cannot move right is
/// replaced by one found strictly to the right whose interval reaches back.
inline std::optional<PsiProfile> psi_profile(const StandardBlp& sf) {
  const auto bounds = compute_bounds(sf);
  if (!bounds) return std::nullopt;
  PsiProfile prof;
  prof.lo = bounds->lo;
  prof.hi = bounds->hi;

  auto interval_of = [&](const PsiPoint& pt) {
    Interval iv = stability_interval(pt.lp, pt.basis, sf.n);
    Rational a = iv.lo ? max(*iv.lo, prof.lo) : prof.lo;
    Rational b = iv.hi ? min(*iv.hi, prof.hi) : prof.hi;
    return std::pair{a, b};
  };
  auto solve_at = [&](const Rational& x) {
    auto pt = evaluate(sf, x);
    if (!pt) throw SolverError("psi_profile: infeasible inside [l, u] at " + x.str());
    return std::move(*pt);
  };

  Rational x = prof.lo;
  PsiPoint here = solve_at(x);
  prof.breakpoints.push_back(x);
  prof.values.push_back(here.value);
  while (x < prof.hi) {
    PsiPoint seg = here;
    auto [a, b] = interval_of(seg);
    if (b <= x) {
      Rational probe = (x + prof.hi) / Rational(2);
      for (;;) {
        seg = solve_at(probe);
        std::tie(a, b) = interval_of(seg);
        if (a <= x) break;
        probe = (x + a) / Rational(2);
      }
    }
    const Rational slope = detail::basis_slope(sf, seg);
    const Rational end_value = seg.value + slope * (b - seg.x2);
    here = solve_at(b);
    if (here.value != end_value)
      throw SolverError("psi_profile: value jumps at " + b.str() + " (" + end_value.str() + " vs " +
                        here.value.str() + ")");
    const Rational start_value = seg.value + slope * (x - seg.x2);
    if (start_value != prof.values.back())
      throw SolverError("psi_profile: segment does not start at the running value at " + x.str());
    if (!prof.slopes.empty() && prof.slopes.back() == slope) {
      prof.breakpoints.back() = b;
      prof.values.back() = here.value;
    } else {
      prof.slopes.push_back(slope);
      prof.breakpoints.push_back(b);
      prof.values.push_back(here.value);
    }
    x = b;
  }
  return prof;
}

struct GlobalResult {
  Rational value;
  Rational x2;
};

/// Minimum over breakpoints; ties go to the smallest x2.
inline GlobalResult profile_minimum(const PsiProfile& p) {
  GlobalResult best{p.values.front(), p.breakpoints.front()};
  for (std::size_t k = 1; k < p.values.size(); ++k)
    if (p.values[k] < best.value) best = {p.values[k], p.breakpoints[k]};
  return best;
}

inline std::optional<GlobalResult> global_solve_sweep(const StandardBlp& sf) {
  auto prof = psi_profile(sf);
  if (!prof) return std::nullopt;
  return profile_minimum(*prof);
}

inline void write_profile_csv(std::ostream& os, const PsiProfile& p, bool decimal) {
  os << "breakpoint,value,slope_right";
  if (decimal) os << ",breakpoint_dec,value_dec,slope_right_dec";
  os << "\n";
  for (std::size_t k = 0; k < p.breakpoints.size(); ++k) {
    os << p.breakpoints[k] << "," << p.values[k] << ",";
    if (k < p.slopes.size()) os << p.slopes[k];
    if (decimal) {
      os << "," << p.breakpoints[k].decimal() << "," << p.values[k].decimal() << ",";
      if (k < p.slopes.size()) os << p.slopes[k].decimal();
    }
    os << "\n";
  }
}

// ---------------------------------------------------------------------------
// Feasibility check

/// Lower-level optimum value min c11'x1 at fixed x2 over the unit box.
inline std::optional<Rational> lower_value(const BlpSingle& inst, const Rational& x2) {
  if (x2.sign() < 0 || x2 > Rational(1)) return std::nullopt;
  LexLp lp;
  for (std::size_t j = 0; j < inst.n; ++j) lp.add_var(Rational(0), Rational(1));
  for (std::size_t r = 0; r < inst.m; ++r) {
    std::vector<std::pair<std::size_t, Rational>> terms;
    for (std::size_t j = 0; j < inst.n; ++j)
      if (!inst.A11[r][j].is_zero()) terms.emplace_back(j, inst.A11[r][j]);
    lp.add_ge(terms, inst.b1[r] - inst.A12[r] * x2);
  }
  RationalVec c(lp.num_vars);
  std::copy(inst.c11.begin(), inst.c11.end(), c.begin());
  lp.objectives = {split_cost(c)};
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) return std::nullopt;
  return res.solution.objective_values[0];
}

/// (x1, x2) satisfies every lower row and box, and x1 is lower-optimal at x2.
inline bool check_bilevel_feasible(const BlpSingle& inst, const Rational& x2, const RationalVec& x1) {
  inst.validate();
  if (x1.size() != inst.n) return false;
  if (x2.sign() < 0 || x2 > Rational(1)) return false;
  for (const auto& v : x1)
    if (v.sign() < 0 || v > Rational(1)) return false;
  for (std::size_t r = 0; r < inst.m; ++r)
    if (dot(inst.A11[r], x1) + inst.A12[r] * x2 < inst.b1[r]) return false;
  const auto best = lower_value(inst, x2);
  return best && *best == dot(inst.c11, x1);
}

// ---------------------------------------------------------------------------
// Reduction-family candidates

/// Candidate oracle for instances built from a formula (provenance "sat"):
/// theta in {1/6} and the encodings of all bit vectors, lower block from the
/// closed form with e = 0, skipped when a row fails.  For compiled 0-1 ILPs
/// (provenance "ilp") the candidates are the encodings of all bit vectors.
inline std::optional<GlobalResult> global_solve_candidates(const BlpSingle& inst, unsigned jobs = 1) {
  const std::string prov = meta_string(inst, "provenance");
  if (prov != "sat" && prov != "ilp") throw SolverError("candidates oracle needs provenance \"sat\" or \"ilp\"");
  const bool sat = prov == "sat";
  const std::size_t n = meta_count(inst, sat ? "n" : "r");
  const std::size_t len = sat ? n + 1 : n;
  if (n > 24) throw SolverError("candidates oracle: too many variables");
  const tent::CoordinateLayout L{len, 0};
  if (inst.n != L.end() + 1) throw SolverError("candidates oracle: layout does not match instance");

  std::vector<Rational> thetas;
  if (sat) thetas.push_back(Rational(BigInt(1), BigInt(6)));
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<int> mu(n);
    for (std::size_t i = 0; i < n; ++i) mu[i] = static_cast<int>((mask >> i) & 1u);
    thetas.push_back(tent::encode_mu(mu, sat ? tent::Codec::Lemma4iii : tent::Codec::Section5));
  }
  std::vector<std::optional<Rational>> value(thetas.size());
  parallel_for(thetas.size(), jobs, [&](std::size_t k) {
    const Rational& th = thetas[k];
    const tent::LowerSolution sol = tent::solve_coordinates(len, th);
    RationalVec x1(inst.n);
    for (std::size_t i = 0; i < len; ++i) {
      x1[L.z(i)] = sol.z[i];
      x1[L.f(i)] = sol.f[i];
      x1[L.s(i)] = sol.s[i];
      x1[L.t(i)] = sol.t[i];
      x1[L.u(i)] = sol.u[i];
    }
    for (std::size_t r = 0; r < inst.m; ++r)
      if (dot(inst.A11[r], x1) + inst.A12[r] * th < inst.b1[r]) return;
    value[k] = inst.upper_value(x1, th);
  });
  std::optional<GlobalResult> best;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    if (!value[k]) continue;
    if (!best || *value[k] < best->value || (*value[k] == best->value && thetas[k] < best->x2))
      best = GlobalResult{*value[k], thetas[k]};
  }
  return best;
}

inline std::optional<GlobalResult> global_solve_candidates(const SatBlpArtifacts& art, unsigned jobs = 1) {
  return global_solve_candidates(art.instance, jobs);
}

// ---------------------------------------------------------------------------
// Complementarity-pattern enumeration

enum class OmegaStatus { Solved, Infeasible, Unbounded, TooLarge };

inline const char* to_string(OmegaStatus s) {
  switch (s) {
    case OmegaStatus::Solved: return "solved";
    case OmegaStatus::Infeasible: return "infeasible";
    case OmegaStatus::Unbounded: return "unbounded";
    case OmegaStatus::TooLarge: return "too-large";
  }
  return "?";
}

struct OmegaResult {
  OmegaStatus status = OmegaStatus::Infeasible;
  Rational value;
  RationalVec x1, x2;
  std::size_t patterns = 0;           // patterns admitting a dual certificate
  std::optional<Rational> probe_max;  // max of the probed x1 column over all optima
};

namespace detail {

/// Is there lambda >= 0 supported on the pattern with A11' lambda = c11?
inline bool pattern_has_dual(const BlpGeneral& g, std::size_t mask) {
  LexLp lp;
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < g.m1(); ++j)
    if ((mask >> j) & 1u) idx.push_back(lp.add_var(Rational(0), std::nullopt));
  for (std::size_t i = 0; i < g.n1; ++i) {
    std::vector<std::pair<std::size_t, Rational>> terms;
    std::size_t k = 0;
    for (std::size_t j = 0; j < g.m1(); ++j)
      if ((mask >> j) & 1u) {
        if (!g.A11[j][i].is_zero()) terms.emplace_back(idx[k], g.A11[j][i]);
        ++k;
      }
    lp.add_eq(terms, g.c11[i]);
  }
  lp.objectives = {Objective(RationalVec(lp.num_vars))};
  return solve_lp(lp).status == LpStatus::Optimal;
}

/// The polyhedron U_omega: lower rows (tight on the pattern), upper rows and
/// penalizable rows, all variables free.
inline LexLp pattern_polyhedron(const BlpGeneral& g, std::size_t mask) {
  LexLp lp;
  const std::size_t nv = g.n1 + g.n2;
  for (std::size_t j = 0; j < nv; ++j) lp.add_var(std::nullopt, std::nullopt);
  auto row = [&](const RationalVec& a1, const RationalVec& a2, const Rational& rhs, bool tight) {
    std::vector<std::pair<std::size_t, Rational>> terms;
    for (std::size_t i = 0; i < g.n1; ++i)
      if (!a1[i].is_zero()) terms.emplace_back(i, a1[i]);
    for (std::size_t i = 0; i < g.n2; ++i)
      if (!a2[i].is_zero()) terms.emplace_back(g.n1 + i, a2[i]);
    if (tight) lp.add_eq(terms, rhs);
    else lp.add_ge(terms, rhs);
  };
  for (std::size_t j = 0; j < g.m1(); ++j) row(g.A11[j], g.A12[j], g.b1[j], (mask >> j) & 1u);
  for (std::size_t j = 0; j < g.m2(); ++j) row(g.A21[j], g.A22[j], g.b2[j], false);
  for (std::size_t j = 0; j < g.m2p(); ++j) row(g.P21[j], g.P22[j], g.pb2[j], false);
  return lp;
}

inline RationalVec upper_cost(const BlpGeneral& g, std::size_t width) {
  RationalVec c(width);
  std::copy(g.c21.begin(), g.c21.end(), c.begin());
  std::copy(g.c22.begin(), g.c22.end(), c.begin() + static_cast<long>(g.n1));
  return c;
}

}  // namespace detail

/// v = min over patterns omega admitting a dual certificate of
/// min { upper cost : x in U_omega }.  With `probe`, also reports the largest
/// value of that x1 column over all optimal points.
inline OmegaResult global_solve_omega(const BlpGeneral& g, std::size_t cap = 14, unsigned jobs = 1,
                                      std::optional<std::size_t> probe = std::nullopt) {
  g.validate();
  OmegaResult out;
  if (g.m1() > cap || g.m1() >= 63) {
    out.status = OmegaStatus::TooLarge;
    return out;
  }
  const std::size_t patterns = std::size_t{1} << g.m1();
  struct Slot {
    bool member = false;
    LpStatus status = LpStatus::Infeasible;
    Rational value;
    RationalVec x;
  };
  std::vector<Slot> slots(patterns);
  parallel_for(patterns, jobs, [&](std::size_t mask) {
    Slot& s = slots[mask];
    s.member = detail::pattern_has_dual(g, mask);
    if (!s.member) return;
    LexLp lp = detail::pattern_polyhedron(g, mask);
    lp.objectives = {split_cost(detail::upper_cost(g, lp.num_vars))};
    const LpResult res = solve_lp(lp);
    s.status = res.status;
    if (res.status == LpStatus::Optimal) {
      s.value = res.solution.objective_values[0];
      s.x = res.solution.values;
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    const Slot& s = slots[mask];
    if (!s.member) continue;
    ++out.patterns;
    if (s.status == LpStatus::Unbounded) {
      out.status = OmegaStatus::Unbounded;
      return out;
    }
    if (s.status != LpStatus::Optimal) continue;
    if (!best || s.value < slots[*best].value) best = mask;
  }
  if (!best) return out;
  out.status = OmegaStatus::Solved;
  out.value = slots[*best].value;
  out.x1.assign(slots[*best].x.begin(), slots[*best].x.begin() + static_cast<long>(g.n1));
  out.x2.assign(slots[*best].x.begin() + static_cast<long>(g.n1), slots[*best].x.begin() + static_cast<long>(g.n1 + g.n2));

  if (probe) {
    if (*probe >= g.n1) throw SolverError("global_solve_omega: probe column out of range");
    std::vector<std::optional<Rational>> probe_vals(patterns);
    parallel_for(patterns, jobs, [&](std::size_t mask) {
      const Slot& s = slots[mask];
      if (!s.member || s.status != LpStatus::Optimal || s.value != out.value) return;
      LexLp lp = detail::pattern_polyhedron(g, mask);
      const RationalVec c = detail::upper_cost(g, lp.num_vars);
      std::vector<std::pair<std::size_t, Rational>> terms;
      for (std::size_t i = 0; i < c.size(); ++i)
        if (!c[i].is_zero()) terms.emplace_back(i, c[i]);
      lp.add_eq(terms, out.value);
      RationalVec obj(lp.num_vars);
      obj[*probe] = -1;
      lp.objectives = {Objective(obj)};
      const LpResult res = solve_lp(lp);
      if (res.status == LpStatus::Optimal) probe_vals[mask] = res.solution.values[*probe];
      else if (res.status == LpStatus::Unbounded) throw SolverError("probe unbounded on the optimal face");
    });
    for (const auto& v : probe_vals)
      if (v && (!out.probe_max || *v > *out.probe_max)) out.probe_max = v;
  }
  return out;
}

}  // namespace blsingle
