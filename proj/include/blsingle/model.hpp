#pragma once

// Instance data model: single-upper-variable bilevel LPs, general bilevel LPs,
// lexicographic LPs, CNF formulas and 0-1 integer programs.

#include "blsingle/rational.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace blsingle {

/// Thrown when instance data is malformed (bad dimensions, bad document).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// min c21'x1 + c22 x2  s.t.  x1 in argmin{ c11'x1' : A11 x1' + A12 x2 >= b1,
/// 0 <= x1' <= 1, 0 <= x2 <= 1 }.  The unit boxes are implicit.
struct BlpSingle {
  std::size_t n = 0;  // lower variables
  std::size_t m = 0;  // lower constraints
  RationalVec c11;
  RationalVec c21;
  Rational c22;
  RationalMat A11;
  RationalVec A12;
  RationalVec b1;
  /// Free-form provenance ("provenance", "M", "layout", "codec", ...); values
  /// are stored as JSON text so they round-trip verbatim.
  std::map<std::string, std::string> meta;

  void validate() const {
    if (c11.size() != n || c21.size() != n) throw ModelError("BlpSingle: cost length != n");
    if (A11.size() != m || A12.size() != m || b1.size() != m)
      throw ModelError("BlpSingle: constraint count != m");
    for (const auto& row : A11)
      if (row.size() != n) throw ModelError("BlpSingle: A11 row length != n");
  }

  Rational upper_value(const RationalVec& x1, const Rational& x2) const {
    return dot(c21, x1) + c22 * x2;
  }

  friend bool operator==(const BlpSingle& a, const BlpSingle& b) {
    return a.n == b.n && a.m == b.m && a.c11 == b.c11 && a.c21 == b.c21 && a.c22 == b.c22 &&
           a.A11 == b.A11 && a.A12 == b.A12 && a.b1 == b.b1 && a.meta == b.meta;
  }
};

/// General bilevel LP with plain upper rows (A21, A22, b2) and penalizable
/// upper rows (Ā21, Ā22, b̄2).  No implicit variable bounds.
struct BlpGeneral {
  std::size_t n1 = 0, n2 = 0;   // lower / upper variable counts
  RationalVec c11;              // n1
  RationalMat A11;              // m1 x n1
  RationalMat A12;              // m1 x n2
  RationalVec b1;               // m1
  RationalVec c21;              // n1
  RationalVec c22;              // n2
  RationalMat A21, A22;         // m2 x n1, m2 x n2
  RationalVec b2;               // m2
  RationalMat P21, P22;         // m2' x n1, m2' x n2 (penalizable)
  RationalVec pb2;              // m2'

  std::size_t m1() const { return b1.size(); }
  std::size_t m2() const { return b2.size(); }
  std::size_t m2p() const { return pb2.size(); }

  void validate() const {
    auto check = [](const RationalMat& M, std::size_t rows, std::size_t cols, const char* what) {
      if (M.size() != rows) throw ModelError(std::string("BlpGeneral: row count of ") + what);
      for (const auto& r : M)
        if (r.size() != cols) throw ModelError(std::string("BlpGeneral: column count of ") + what);
    };
    if (c11.size() != n1 || c21.size() != n1 || c22.size() != n2)
      throw ModelError("BlpGeneral: cost lengths");
    check(A11, m1(), n1, "A11");
    check(A12, m1(), n2, "A12");
    check(A21, m2(), n1, "A21");
    check(A22, m2(), n2, "A22");
    check(P21, m2p(), n1, "P21");
    check(P22, m2p(), n2, "P22");
  }
};

/// Linear objective, optionally carrying a "big weight" part:
/// value = c.x + weight * (big.x).  The split lets the simplex keep huge
/// penalty constants out of its arithmetic; the value is exact either way.
struct Objective {
  RationalVec c;
  RationalVec big;   // empty or same length as c
  Rational weight;   // meaningful only when big is non-empty

  Objective() = default;
  Objective(RationalVec coeffs) : c(std::move(coeffs)) {}  // NOLINT

  Rational value(const RationalVec& x) const {
    Rational v = dot(c, x);
    if (!big.empty()) v += weight * dot(big, x);
    return v;
  }
};

/// Equality-form LP with per-variable bounds and an ordered list of
/// objectives (lexicographic minimisation).
struct LexLp {
  std::size_t num_vars = 0;
  RationalMat A;  // rows x num_vars
  RationalVec b;
  std::vector<std::optional<Rational>> lower, upper;
  std::vector<Objective> objectives;

  std::size_t add_var(std::optional<Rational> lo = Rational(0), std::optional<Rational> hi = std::nullopt) {
    for (auto& row : A) row.emplace_back();
    for (auto& obj : objectives) {
      obj.c.emplace_back();
      if (!obj.big.empty()) obj.big.emplace_back();
    }
    lower.push_back(std::move(lo));
    upper.push_back(std::move(hi));
    return num_vars++;
  }

  /// sum coeffs.x = rhs over (index, coefficient) pairs.
  void add_eq(const std::vector<std::pair<std::size_t, Rational>>& coeffs, Rational rhs) {
    RationalVec row(num_vars);
    for (const auto& [j, a] : coeffs) row.at(j) += a;
    A.push_back(std::move(row));
    b.push_back(std::move(rhs));
  }

  /// sum coeffs.x >= rhs, via a fresh surplus variable; returns its index.
  std::size_t add_ge(std::vector<std::pair<std::size_t, Rational>> coeffs, Rational rhs) {
    std::size_t s = add_var(Rational(0), std::nullopt);
    coeffs.emplace_back(s, Rational(-1));
    add_eq(coeffs, std::move(rhs));
    return s;
  }

  void validate() const {
    if (objectives.empty()) throw ModelError("LexLp: at least one objective required");
    if (A.size() != b.size()) throw ModelError("LexLp: row/rhs mismatch");
    for (const auto& r : A)
      if (r.size() != num_vars) throw ModelError("LexLp: row length mismatch");
    if (lower.size() != num_vars || upper.size() != num_vars) throw ModelError("LexLp: bound length mismatch");
    for (const auto& o : objectives) {
      if (o.c.size() != num_vars) throw ModelError("LexLp: objective length mismatch");
      if (!o.big.empty() && o.big.size() != num_vars) throw ModelError("LexLp: big objective length mismatch");
    }
  }
};

/// CNF formula; literals are nonzero signed 1-based variable indices.
struct Cnf {
  std::size_t nvars = 0;
  std::vector<std::vector<int>> clauses;

  void validate() const {
    for (const auto& c : clauses) {
      if (c.empty()) throw ModelError("Cnf: empty clause");
      if (c.size() > 3) throw ModelError("Cnf: clause with more than 3 literals");
      for (int lit : c)
        if (lit == 0 || static_cast<std::size_t>(lit < 0 ? -lit : lit) > nvars)
          throw ModelError("Cnf: literal out of range");
    }
  }

  bool satisfied_by(const std::vector<int>& assignment) const {
    for (const auto& c : clauses) {
      bool sat = false;
      for (int lit : c) {
        int v = assignment[static_cast<std::size_t>(lit < 0 ? -lit : lit) - 1];
        if ((lit > 0 && v == 1) || (lit < 0 && v == 0)) { sat = true; break; }
      }
      if (!sat) return false;
    }
    return true;
  }

  friend bool operator==(const Cnf&, const Cnf&) = default;
};

/// min c'z  s.t.  A z >= a, z in {0,1}^r.
struct ZeroOneIlp {
  std::size_t r = 0;
  RationalVec c;
  RationalMat A;
  RationalVec a;

  void validate() const {
    if (c.size() != r) throw ModelError("ZeroOneIlp: cost length != r");
    if (A.size() != a.size()) throw ModelError("ZeroOneIlp: row/rhs mismatch");
    for (const auto& row : A)
      if (row.size() != r) throw ModelError("ZeroOneIlp: row length != r");
  }

  bool feasible(const std::vector<int>& z) const {
    for (std::size_t j = 0; j < A.size(); ++j) {
      Rational lhs;
      for (std::size_t i = 0; i < r; ++i)
        if (z[i]) lhs += A[j][i];
      if (lhs < a[j]) return false;
    }
    return true;
  }
};

}  // namespace blsingle
