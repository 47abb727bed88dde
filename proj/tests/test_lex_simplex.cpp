#include "blsingle/lex_simplex.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace blsingle;

namespace {

Rational q(long p, long d) { return Rational(BigInt(p), BigInt(d)); }

LexLp box_lp(std::size_t n) {
  LexLp lp;
  for (std::size_t j = 0; j < n; ++j) lp.add_var(Rational(0), Rational(1));
  return lp;
}

// Enumerates every vertex of {A x >= b, 0 <= x <= 1} in <= 3 dimensions by
// solving all 3x3 active systems with Cramer's rule.
std::vector<RationalVec> vertices(const RationalMat& A, const RationalVec& b, std::size_t n) {
  RationalMat rows = A;
  RationalVec rhs = b;
  for (std::size_t j = 0; j < n; ++j) {
    RationalVec e(n);
    e[j] = 1;
    rows.push_back(e);
    rhs.push_back(0);
    e[j] = -1;
    rows.push_back(e);
    rhs.push_back(-1);
  }
  std::vector<RationalVec> out;
  const std::size_t m = rows.size();
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t start) {
    if (k == n) {
      RationalMat M(n, RationalVec(n + 1));
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) M[r][c] = rows[pick[r]][c];
        M[r][n] = rhs[pick[r]];
      }
      for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && M[p][c].is_zero()) ++p;
        if (p == n) return;
        std::swap(M[p], M[c]);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == c || M[r][c].is_zero()) continue;
          Rational f = M[r][c] / M[c][c];
          for (std::size_t k2 = 0; k2 <= n; ++k2) M[r][k2] -= f * M[c][k2];
        }
      }
      RationalVec x(n);
      for (std::size_t c = 0; c < n; ++c) x[c] = M[c][n] / M[c][c];
      for (std::size_t r = 0; r < m; ++r)
        if (dot(rows[r], x) < rhs[r]) return;
      out.push_back(x);
      return;
    }
    for (std::size_t i = start; i < m; ++i) {
      pick[k] = i;
      rec(k + 1, i + 1);
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace

TEST(LexSimplex, TrivialBox) {
  LexLp lp = box_lp(2);
  lp.objectives.push_back(Objective(RationalVec{1, -1}));
  auto res = solve_lp(lp);
  ASSERT_EQ(res.status, LpStatus::Optimal);
  EXPECT_EQ(res.solution.values, (RationalVec{0, 1}));
  EXPECT_EQ(res.solution.objective_values[0], Rational(-1));
}

TEST(LexSimplex, LexOrderBreaksTies) {
  // min x then min -y over x + y = 1: the first level is attained at x = 0.
  LexLp lp;
  lp.add_var(Rational(0), std::nullopt);
  lp.add_var(Rational(0), std::nullopt);
  lp.add_eq({{0, 1}, {1, 1}}, 1);
  lp.objectives.push_back(Objective(RationalVec{1, 0}));
  lp.objectives.push_back(Objective(RationalVec{0, -1}));
  auto res = solve_lex(lp);
  ASSERT_EQ(res.status, LpStatus::Optimal);
  EXPECT_EQ(res.solution.values, (RationalVec{0, 1}));

  // tie at level 1 resolved by level 2
  LexLp tie;
  tie.add_var();
  tie.add_var();
  tie.add_eq({{0, 1}, {1, 1}}, 1);
  tie.objectives.push_back(Objective(RationalVec{1, 1}));
  tie.objectives.push_back(Objective(RationalVec{-1, 0}));
  res = solve_lex(tie);
  ASSERT_EQ(res.status, LpStatus::Optimal);
  EXPECT_EQ(res.solution.values, (RationalVec{1, 0}));
}

TEST(LexSimplex, Infeasible) {
  LexLp lp = box_lp(1);
  lp.add_ge({{0, 1}}, 2);
  lp.objectives.push_back(Objective(RationalVec(lp.num_vars)));
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Infeasible);

  LexLp dep;
  dep.add_var();
  dep.add_eq({{0, 1}}, 1);
  dep.add_eq({{0, 2}}, 3);
  dep.objectives.push_back(Objective(RationalVec{0}));
  EXPECT_EQ(solve_lp(dep).status, LpStatus::Infeasible);
}

TEST(LexSimplex, Unbounded) {
  LexLp lp;
  lp.add_var(Rational(0), std::nullopt);
  lp.add_var(std::nullopt, std::nullopt);
  lp.add_eq({{0, 1}, {1, -1}}, 0);
  lp.objectives.push_back(Objective(RationalVec{0, 0}));
  lp.objectives.push_back(Objective(RationalVec{-1, 0}));
  auto res = solve_lex(lp);
  EXPECT_EQ(res.status, LpStatus::Unbounded);
  EXPECT_EQ(res.unbounded_level, 1u);
}

TEST(LexSimplex, RedundantRowsKept) {
  LexLp lp;
  lp.add_var();
  lp.add_var();
  lp.add_eq({{0, 1}, {1, 1}}, 2);
  lp.add_eq({{0, 2}, {1, 2}}, 4);
  lp.objectives.push_back(Objective(RationalVec{1, 2}));
  auto res = solve_lp(lp);
  ASSERT_EQ(res.status, LpStatus::Optimal);
  EXPECT_EQ(res.solution.values, (RationalVec{2, 0}));
  EXPECT_TRUE(satisfies(lp, res.solution.values));
}

TEST(LexSimplex, BigWeightMatchesExpandedCost) {
  // min x + W*y with huge W vs. the same objective with W folded in.
  const Rational W(pow2(4000));
  LexLp lp = box_lp(2);
  lp.add_ge({{0, 1}, {1, 1}}, 1);
  Objective split(RationalVec{1, 0, 0});
  split.big = RationalVec{0, 1, 0};
  split.weight = W;
  lp.objectives.push_back(split);
  auto res = solve_lp(lp);
  ASSERT_EQ(res.status, LpStatus::Optimal);
  EXPECT_EQ(res.solution.values[0], Rational(1));
  EXPECT_EQ(res.solution.values[1], Rational(0));

  LexLp flat = lp;
  flat.objectives = {Objective(RationalVec{1, W, 0})};
  EXPECT_EQ(solve_lp(flat).solution.values, res.solution.values);

  // opposite-sign small part dominating: -W*y + (2W)*y' style
  LexLp lp2 = box_lp(2);
  Objective o(RationalVec{-W * Rational(3), Rational(0)});
  o.big = RationalVec{Rational(2), Rational(1)};
  o.weight = W;
  lp2.objectives.push_back(o);
  res = solve_lp(lp2);
  ASSERT_EQ(res.status, LpStatus::Optimal);
  EXPECT_EQ(res.solution.values, (RationalVec{1, 0}));
  EXPECT_EQ(res.solution.objective_values[0], -W);
}

TEST(LexSimplex, RandomAgainstVertexEnumeration) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<long> coef(-4, 4);
  int optimal = 0;
  for (int it = 0; it < 300; ++it) {
    const std::size_t n = 1 + it % 3, m = it % 4;
    RationalMat A(m, RationalVec(n));
    RationalVec b(m);
    for (auto& r : A)
      for (auto& v : r) v = coef(rng);
    for (auto& v : b) v = q(coef(rng), 2);
    RationalVec c1(n), c2(n);
    for (auto& v : c1) v = coef(rng) / 2;  // frequent ties
    for (auto& v : c2) v = coef(rng);

    LexLp lp = box_lp(n);
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<std::pair<std::size_t, Rational>> row;
      for (std::size_t j = 0; j < n; ++j) row.emplace_back(j, A[r][j]);
      lp.add_ge(row, b[r]);
    }
    RationalVec o1(lp.num_vars), o2(lp.num_vars);
    std::copy(c1.begin(), c1.end(), o1.begin());
    std::copy(c2.begin(), c2.end(), o2.begin());
    lp.objectives = {Objective(o1), Objective(o2)};
    auto res = solve_lex(lp);

    auto verts = vertices(A, b, n);
    if (verts.empty()) {
      EXPECT_EQ(res.status, LpStatus::Infeasible);
      continue;
    }
    ASSERT_EQ(res.status, LpStatus::Optimal);
    ++optimal;
    EXPECT_TRUE(satisfies(lp, res.solution.values));
    Rational best1 = dot(c1, verts[0]);
    for (auto& v : verts) best1 = min(best1, dot(c1, v));
    std::optional<Rational> best2;
    for (auto& v : verts)
      if (dot(c1, v) == best1 && (!best2 || dot(c2, v) < *best2)) best2 = dot(c2, v);
    RationalVec x(res.solution.values.begin(), res.solution.values.begin() + static_cast<long>(n));
    EXPECT_EQ(dot(c1, x), best1);
    EXPECT_EQ(dot(c2, x), *best2);
  }
  EXPECT_GT(optimal, 100);
}

TEST(StabilityInterval, FollowsParameter) {
  // min y s.t. y >= t - 1/2, y >= 0, t fixed: basis changes at t = 1/2.
  for (Rational t0 : {q(1, 4), q(3, 4)}) {
    LexLp lp;
    const std::size_t y = lp.add_var();
    const std::size_t t = lp.add_var(t0, t0);
    lp.add_ge({{y, 1}, {t, -1}}, q(-1, 2));
    RationalVec c(lp.num_vars);
    c[y] = 1;
    lp.objectives.push_back(Objective(c));
    auto res = solve_lp(lp);
    ASSERT_EQ(res.status, LpStatus::Optimal);
    Interval iv = stability_interval(lp, res.solution, t);
    if (t0 < q(1, 2)) {
      EXPECT_FALSE(iv.lo.has_value());
      EXPECT_EQ(iv.hi, q(1, 2));
    } else {
      EXPECT_EQ(iv.lo, q(1, 2));
      EXPECT_FALSE(iv.hi.has_value());
    }
  }
}
