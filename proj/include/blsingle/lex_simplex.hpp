#pragma once

// Exact bounded-variable primal simplex with Bland's rule, lexicographic
// objectives and right-hand-side stability intervals.

#include "blsingle/model.hpp"
#include "blsingle/rational.hpp"

#include <algorithm>
#include <cassert>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace blsingle {

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

/// A basic (vertex) solution together with the data needed to move its
/// right-hand side parametrically.
struct BasicSolution {
  /// Basic column per kept row; indices >= num_vars name the artificial
  /// column of kept row (index - num_vars).
  std::vector<std::size_t> basis;
  RationalVec values;            // structural variables
  RationalVec objective_values;  // one per objective level
  RationalVec basic_values;      // value of basis[i]
  std::vector<std::size_t> rows; // original row indices kept after rank repair
  RationalMat tableau;           // B^{-1} [A_rows | art], one row per basis entry
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  BasicSolution solution;        // meaningful when Optimal
  std::size_t unbounded_level = 0;
};

/// One end of a stability interval; nullopt means unbounded on that side.
struct Interval {
  std::optional<Rational> lo, hi;
  bool contains(const Rational& t) const {
    return (!lo || *lo <= t) && (!hi || t <= *hi);
  }
};

class SimplexError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

/// Rows of [A | b] that are linearly independent, in original order.
/// Returns nullopt when a dependent row is inconsistent.
inline std::optional<std::vector<std::size_t>> independent_rows(const RationalMat& A, const RationalVec& b,
                                                               std::size_t ncols) {
  std::vector<RationalVec> echelon;      // reduced rows incl. rhs at ncols
  std::vector<std::size_t> pivot_col;
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < A.size(); ++r) {
    RationalVec row(A[r]);
    row.push_back(b[r]);
    for (std::size_t e = 0; e < echelon.size(); ++e) {
      const Rational f = row[pivot_col[e]];
      if (f.is_zero()) continue;
      for (std::size_t k = 0; k <= ncols; ++k)
        if (!echelon[e][k].is_zero()) row[k] -= f * echelon[e][k];
    }
    std::size_t p = ncols;
    for (std::size_t k = 0; k < ncols; ++k)
      if (!row[k].is_zero()) { p = k; break; }
    if (p == ncols) {
      if (!row[ncols].is_zero()) return std::nullopt;
      continue;
    }
    const Rational inv = Rational(1) / row[p];
    for (auto& v : row)
      if (!v.is_zero()) v *= inv;
    // keep echelon rows fully reduced in the pivot column
    for (auto& er : echelon) {
      const Rational f = er[p];
      if (f.is_zero()) continue;
      for (std::size_t k = 0; k <= ncols; ++k)
        if (!row[k].is_zero()) er[k] -= f * row[k];
    }
    echelon.push_back(std::move(row));
    pivot_col.push_back(p);
    kept.push_back(r);
  }
  return kept;
}

/// small + weight * big, with exact sign evaluation.
struct Cost {
  Rational small, big;
  bool is_zero() const { return small.is_zero() && big.is_zero(); }
};

class Simplex {
 public:
  Simplex(const LexLp& lp, std::vector<std::size_t> rows)
      : lp_(lp), rows_(std::move(rows)), m_(rows_.size()), n_(lp.num_vars), N_(n_ + m_) {
    lo_.assign(N_, std::nullopt);
    hi_.assign(N_, std::nullopt);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp.lower[j];
      hi_[j] = lp.upper[j];
    }
    for (std::size_t j = n_; j < N_; ++j) lo_[j] = Rational(0);
    locked_.assign(N_, 0);
    pos_.assign(N_, kNone);
    x_.assign(N_, Rational(0));
  }

  /// Phase 1.  Returns false when infeasible.
  bool find_feasible() {
    for (std::size_t j = 0; j < n_; ++j) {
      if (lo_[j] && hi_[j] && *hi_[j] < *lo_[j]) return false;
      x_[j] = lo_[j] ? *lo_[j] : (hi_[j] ? *hi_[j] : Rational(0));
    }
    T_.assign(m_, RationalVec(N_));
    basis_.assign(m_, 0);
    beta_.assign(m_, Rational(0));
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& arow = lp_.A[rows_[i]];
      Rational resid = lp_.b[rows_[i]];
      for (std::size_t j = 0; j < n_; ++j)
        if (!arow[j].is_zero() && !x_[j].is_zero()) resid -= arow[j] * x_[j];
      const bool neg = resid.sign() < 0;
      for (std::size_t j = 0; j < n_; ++j)
        if (!arow[j].is_zero()) T_[i][j] = neg ? -arow[j] : arow[j];
      T_[i][n_ + i] = Rational(1);
      basis_[i] = n_ + i;
      pos_[n_ + i] = i;
      beta_[i] = abs(resid);
      x_[n_ + i] = beta_[i];
    }
    std::vector<Cost> cost(N_);
    for (std::size_t j = n_; j < N_; ++j) cost[j].small = Rational(1);
    set_costs(std::move(cost), Rational(0));
    if (!optimize()) throw SimplexError("phase 1 reported unbounded");
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= n_ && beta_[i].sign() != 0) return false;
    // artificials are pinned at zero from now on
    for (std::size_t j = n_; j < N_; ++j) hi_[j] = Rational(0);
    drive_out_artificials();
    return true;
  }

  /// Optimises one objective over the current face; returns false when
  /// unbounded.  Afterwards nonbasic columns with nonzero reduced cost are
  /// locked at their bound, restricting later levels to the optimal face.
  bool optimize_level(const Objective& obj) {
    std::vector<Cost> cost(N_);
    for (std::size_t j = 0; j < n_; ++j) {
      cost[j].small = obj.c[j];
      if (!obj.big.empty()) cost[j].big = obj.big[j];
    }
    set_costs(std::move(cost), obj.big.empty() ? Rational(0) : obj.weight);
    if (!optimize()) return false;
    for (std::size_t j = 0; j < N_; ++j) {
      if (pos_[j] != kNone || is_fixed(j) || locked_[j]) continue;
      if (sign(reduced_cost(j)) != 0) locked_[j] = 1;
    }
    return true;
  }

  BasicSolution extract(const LexLp& lp) const {
    BasicSolution s;
    s.basis = basis_;
    s.values.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) s.values[basis_[i]] = beta_[i];
    s.basic_values = beta_;
    s.rows = rows_;
    s.tableau = T_;
    for (const auto& o : lp.objectives) s.objective_values.push_back(o.value(s.values));
    return s;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool is_fixed(std::size_t j) const { return lo_[j] && hi_[j] && *lo_[j] == *hi_[j]; }

  void set_costs(std::vector<Cost> cost, Rational weight) {
    cost_ = std::move(cost);
    weight_ = std::move(weight);
    has_big_ = false;
    for (const auto& c : cost_)
      if (!c.big.is_zero()) has_big_ = true;
    if (has_big_) {
      const auto& w = weight_;
      // log2|w| lies in (wlog_lo, wlog_hi)
      wlog_lo_ = static_cast<long>(bit_length(w.num())) - 1 - static_cast<long>(bit_length(w.den()));
    }
  }

  int sign(const Cost& c) const {
    if (c.big.is_zero() || weight_.is_zero()) return c.small.sign();
    const int bs = c.big.sign() * weight_.sign();
    if (c.small.is_zero() || c.small.sign() == bs) return bs;
    // opposite signs: compare |small/big| with |weight|
    const Rational r = abs(c.small / c.big);
    const long rlog_hi = static_cast<long>(bit_length(r.num())) - static_cast<long>(bit_length(r.den())) + 1;
    if (rlog_hi < wlog_lo_) return bs;
    const int cmp = (r <=> abs(weight_)) < 0 ? -1 : ((r == abs(weight_)) ? 0 : 1);
    if (cmp == 0) return 0;
    return cmp < 0 ? bs : -bs;
  }

  Cost reduced_cost(std::size_t j) const {
    Cost d = cost_[j];
    for (std::size_t i : costed_rows_) {
      const Rational& t = T_[i][j];
      if (t.is_zero()) continue;
      const Cost& cb = cost_[basis_[i]];
      if (!cb.small.is_zero()) d.small -= cb.small * t;
      if (!cb.big.is_zero()) d.big -= cb.big * t;
    }
    return d;
  }

  void refresh_costed_rows() {
    costed_rows_.clear();
    for (std::size_t i = 0; i < m_; ++i)
      if (!cost_[basis_[i]].is_zero()) costed_rows_.push_back(i);
  }

  bool at_lower(std::size_t j) const { return lo_[j] && x_[j] == *lo_[j]; }
  bool at_upper(std::size_t j) const { return hi_[j] && x_[j] == *hi_[j]; }

  /// Bland's rule: smallest-index improving column; 0 when optimal.
  int choose_entering(std::size_t& col) const {
    for (std::size_t j = 0; j < N_; ++j) {
      if (pos_[j] != kNone || is_fixed(j) || locked_[j]) continue;
      const int s = sign(reduced_cost(j));
      if (s == 0) continue;
      if (s < 0 && (!hi_[j] || !at_upper(j))) { col = j; return +1; }
      if (s > 0 && (!lo_[j] || !at_lower(j))) { col = j; return -1; }
    }
    return 0;
  }

  /// Runs primal iterations; false on unboundedness.
  bool optimize() {
    refresh_costed_rows();
    while (true) {
      std::size_t j = 0;
      const int dir = choose_entering(j);
      if (dir == 0) return true;

      std::optional<Rational> best;
      std::size_t leave_row = kNone;
      bool leave_to_upper = false;
      for (std::size_t i = 0; i < m_; ++i) {
        const Rational& t = T_[i][j];
        if (t.is_zero()) continue;
        const std::size_t bvar = basis_[i];
        // d x_b / d step = -t * dir
        const bool decreasing = (t.sign() * dir) > 0;
        std::optional<Rational> ratio;
        if (decreasing && lo_[bvar]) ratio = (beta_[i] - *lo_[bvar]) / abs(t);
        else if (!decreasing && hi_[bvar]) ratio = (*hi_[bvar] - beta_[i]) / abs(t);
        if (!ratio) continue;
        if (!best || *ratio < *best || (*ratio == *best && bvar < basis_[leave_row])) {
          best = std::move(ratio);
          leave_row = i;
          leave_to_upper = !decreasing;
        }
      }
      std::optional<Rational> flip;
      if (lo_[j] && hi_[j]) flip = *hi_[j] - *lo_[j];
      if (!best && !flip) return false;

      const bool do_flip = flip && (!best || *flip <= *best);
      const Rational step = do_flip ? *flip : *best;
      if (!step.is_zero()) {
        const Rational delta = dir > 0 ? step : -step;
        for (std::size_t i = 0; i < m_; ++i)
          if (!T_[i][j].is_zero()) beta_[i] -= T_[i][j] * delta;
        x_[j] += delta;
      }
      if (do_flip) {
        x_[j] = dir > 0 ? *hi_[j] : *lo_[j];
        continue;
      }
      const std::size_t leaving = basis_[leave_row];
      x_[leaving] = leave_to_upper ? *hi_[leaving] : *lo_[leaving];
      beta_[leave_row] = x_[j];
      pivot(leave_row, j);
      refresh_costed_rows();
    }
  }

  void pivot(std::size_t r, std::size_t j) {
    auto& pr = T_[r];
    const Rational inv = Rational(1) / pr[j];
    std::vector<std::size_t> nz;
    for (std::size_t k = 0; k < N_; ++k)
      if (!pr[k].is_zero()) {
        pr[k] *= inv;
        nz.push_back(k);
      }
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || T_[i][j].is_zero()) continue;
      const Rational f = T_[i][j];
      auto& row = T_[i];
      for (std::size_t k : nz) row[k] -= f * pr[k];
    }
    pos_[basis_[r]] = kNone;
    basis_[r] = j;
    pos_[j] = r;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (std::size_t k = 0; k < n_; ++k) {
        if (pos_[k] != kNone || is_fixed(k) || T_[i][k].is_zero()) continue;
        // degenerate exchange: the artificial is at zero, values unchanged
        x_[basis_[i]] = Rational(0);
        beta_[i] = x_[k];
        pivot(i, k);
        break;
      }
    }
  }

  const LexLp& lp_;
  std::vector<std::size_t> rows_;
  std::size_t m_, n_, N_;
  RationalMat T_;
  RationalVec beta_;
  RationalVec x_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> pos_;
  std::vector<std::optional<Rational>> lo_, hi_;
  std::vector<char> locked_;
  std::vector<Cost> cost_;
  std::vector<std::size_t> costed_rows_;
  Rational weight_;
  bool has_big_ = false;
  long wlog_lo_ = 0;
};

}  // namespace detail

/// Lexicographically minimises lp.objectives in order.
inline LpResult solve_lex(const LexLp& lp) {
  lp.validate();
  LpResult res;
  auto rows = detail::independent_rows(lp.A, lp.b, lp.num_vars);
  if (!rows) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  detail::Simplex spx(lp, std::move(*rows));
  if (!spx.find_feasible()) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  for (std::size_t k = 0; k < lp.objectives.size(); ++k) {
    if (!spx.optimize_level(lp.objectives[k])) {
      res.status = LpStatus::Unbounded;
      res.unbounded_level = k;
      return res;
    }
  }
  res.status = LpStatus::Optimal;
  res.solution = spx.extract(lp);
  return res;
}

inline LpResult solve_lp(const LexLp& lp) {
  if (lp.objectives.size() != 1) throw ModelError("solve_lp: exactly one objective expected");
  return solve_lex(lp);
}

/// Range of values of the fixed column `param` over which `sol`'s basis stays
/// primal feasible.  Reduced costs do not involve the right-hand side, so the
/// basis stays lexicographically optimal on the whole interval.
inline Interval stability_interval(const LexLp& lp, const BasicSolution& sol, std::size_t param) {
  if (param >= lp.num_vars) throw ModelError("stability_interval: parameter column out of range");
  if (std::find(sol.basis.begin(), sol.basis.end(), param) != sol.basis.end())
    throw ModelError("stability_interval: parameter column is basic");
  const Rational& t0 = sol.values[param];
  if (!lp.lower[param] || !lp.upper[param] || *lp.lower[param] != t0 || *lp.upper[param] != t0)
    throw ModelError("stability_interval: parameter column must be fixed at its current value");
  std::optional<Rational> dlo, dhi;  // admissible shift range
  auto tighten_hi = [&](const Rational& v) { if (!dhi || v < *dhi) dhi = v; };
  auto tighten_lo = [&](const Rational& v) { if (!dlo || v > *dlo) dlo = v; };
  for (std::size_t i = 0; i < sol.basis.size(); ++i) {
    const std::size_t bvar = sol.basis[i];
    std::optional<Rational> lo, hi;
    if (bvar < lp.num_vars) {
      lo = lp.lower[bvar];
      hi = lp.upper[bvar];
    } else {
      lo = Rational(0);
      hi = Rational(0);
    }
    const Rational& beta = sol.basic_values[i];
    if ((lo && beta < *lo) || (hi && beta > *hi))
      throw ModelError("stability_interval: basis is not feasible at the current parameter value");
    const Rational& t = sol.tableau[i][param];
    if (t.is_zero()) continue;
    // x_b(t0 + d) = beta - t d
    if (lo) {
      const Rational lim = (beta - *lo) / t;  // beta - t d >= lo
      if (t.sign() > 0) tighten_hi(lim); else tighten_lo(lim);
    }
    if (hi) {
      const Rational lim = (beta - *hi) / t;  // beta - t d <= hi
      if (t.sign() > 0) tighten_lo(lim); else tighten_hi(lim);
    }
  }
  Interval out;
  if (dlo) out.lo = t0 + *dlo;
  if (dhi) out.hi = t0 + *dhi;
  return out;
}

/// Residual check used by tests and verifiers: A x = b and bounds, exactly.
inline bool satisfies(const LexLp& lp, const RationalVec& x) {
  if (x.size() != lp.num_vars) return false;
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    if (lp.lower[j] && x[j] < *lp.lower[j]) return false;
    if (lp.upper[j] && x[j] > *lp.upper[j]) return false;
  }
  for (std::size_t r = 0; r < lp.A.size(); ++r)
    if (dot(lp.A[r], x) != lp.b[r]) return false;
  return true;
}

}  // namespace blsingle
