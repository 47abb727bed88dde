#pragma once

// Instance builders: CNF matrix encoding, the clause system B_F z >= b_F,
// the penalty transform and its threshold, the SAT -> single-upper-variable
// bilevel LP reduction and the 0-1 ILP compiler.

#include "blsingle/io.hpp"
#include "blsingle/model.hpp"
#include "blsingle/rational.hpp"
#include "blsingle/tent_map.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace blsingle {

struct CnfMatrix {
  std::vector<std::vector<long>> A;  // p x n
  std::vector<long> a;               // p
};

/// Positive literal u_i in clause j: A[j][i] += 1.  Negative: A[j][i] -= 1
/// and a[j] += 1.  Then mu satisfies F iff A mu >= 1 - a.
inline CnfMatrix cnf_matrix(const Cnf& F) {
  F.validate();
  CnfMatrix cm;
  cm.A.assign(F.clauses.size(), std::vector<long>(F.nvars, 0));
  cm.a.assign(F.clauses.size(), 0);
  for (std::size_t j = 0; j < F.clauses.size(); ++j)
    for (int lit : F.clauses[j]) {
      const std::size_t i = static_cast<std::size_t>(lit < 0 ? -lit : lit) - 1;
      if (lit > 0) {
        cm.A[j][i] += 1;
      } else {
        cm.A[j][i] -= 1;
        cm.a[j] += 1;
      }
    }
  return cm;
}

/// Every clause stretched to exactly three literals by repeating its last one.
inline Cnf pad_clauses(const Cnf& F) {
  F.validate();
  Cnf out = F;
  for (auto& c : out.clauses)
    while (c.size() < 3) c.push_back(c.back());
  return out;
}

struct ClauseSystem {
  RationalMat B;  // (p + 2n) x (n + 1), last column is y = z_{n+1}
  RationalVec b;
};

/// B_F z >= b_F over z = (x, y):
///   (A_F row j, 1/2) >= 3/2 - a_F[j]
///   (e_i, 1/2) >= 1/2,  (-e_i, 1/2) >= -1/2
inline ClauseSystem build_BF(const Cnf& F) {
  const CnfMatrix cm = cnf_matrix(F);
  const std::size_t n = F.nvars;
  const Rational half(BigInt(1), BigInt(2));
  ClauseSystem cs;
  for (std::size_t j = 0; j < cm.A.size(); ++j) {
    RationalVec row(n + 1);
    for (std::size_t i = 0; i < n; ++i) row[i] = Rational(cm.A[j][i]);
    row[n] = half;
    cs.B.push_back(std::move(row));
    cs.b.push_back(Rational(BigInt(3), BigInt(2)) - Rational(cm.a[j]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    RationalVec row(n + 1);
    row[i] = 1;
    row[n] = half;
    cs.B.push_back(row);
    cs.b.push_back(half);
    row[i] = -1;
    cs.B.push_back(std::move(row));
    cs.b.push_back(-half);
  }
  return cs;
}

/// Vertex-size polynomial 4 n^2 (n+1) sigma.
inline std::size_t f_sol_bound(std::size_t n, std::size_t sigma) {
  if (n == 0 || sigma == 0) throw std::invalid_argument("f_sol_bound: arguments must be >= 1");
  return 4 * n * n * (n + 1) * sigma;
}

inline std::size_t max_entry_size(const RationalMat& M) {
  std::size_t s = 0;
  for (const auto& r : M)
    for (const auto& v : r) s = std::max(s, size(v));
  return s;
}

inline std::size_t max_entry_size(const RationalVec& v) {
  std::size_t s = 0;
  for (const auto& x : v) s = std::max(s, size(x));
  return s;
}

/// Largest entry size over the constraint data (costs excluded).
inline std::size_t constraint_sigma(const BlpGeneral& g) {
  return std::max({max_entry_size(g.A11), max_entry_size(g.A12), max_entry_size(g.A21), max_entry_size(g.A22),
                   max_entry_size(g.P21), max_entry_size(g.P22), max_entry_size(g.b1), max_entry_size(g.b2),
                   max_entry_size(g.pb2), std::size_t{1}});
}

inline Rational cost_inf_norm(const BlpGeneral& g) {
  Rational c(1);
  for (const auto& v : g.c21) c = max(c, abs(v));
  for (const auto& v : g.c22) c = max(c, abs(v));
  return c;
}

/// 3 n c_inf 4^{f_sol(n+1, sigma)} with n = n1 + n2.
inline Rational penalty_threshold(const BlpGeneral& g) {
  g.validate();
  const std::size_t n = std::max<std::size_t>(g.n1 + g.n2, 1);
  const std::size_t fs = f_sol_bound(n + 1, constraint_sigma(g));
  return Rational(3 * static_cast<long>(n)) * cost_inf_norm(g) * Rational(pow2(2 * fs));
}

enum class SlackCap { One, Unbounded };

struct PenalizedBlp {
  BlpGeneral blp;      // lower variable n1 (the last one) is e
  std::size_t e_col = 0;
  bool certified = false;  // M reached the threshold
};

/// Moves the penalizable rows into the lower level as rows + e*1 >= pb2 with
/// 0 <= e (<= 1), and charges M e in the upper objective.
inline PenalizedBlp apply_penalty(const BlpGeneral& g, const Rational& M, SlackCap cap) {
  g.validate();
  PenalizedBlp out;
  BlpGeneral& h = out.blp;
  h = g;
  out.e_col = g.n1;
  h.n1 = g.n1 + 1;
  h.c11.emplace_back(0);
  h.c21.push_back(M);
  for (auto& r : h.A11) r.emplace_back(0);
  for (auto& r : h.A21) r.emplace_back(0);
  for (std::size_t k = 0; k < g.m2p(); ++k) {
    RationalVec row = g.P21[k];
    row.emplace_back(1);
    h.A11.push_back(std::move(row));
    h.A12.push_back(g.P22[k]);
    h.b1.push_back(g.pb2[k]);
  }
  RationalVec e_row(h.n1);
  e_row[out.e_col] = 1;
  h.A11.push_back(e_row);
  h.A12.emplace_back(g.n2);
  h.b1.emplace_back(0);
  if (cap == SlackCap::One) {
    e_row[out.e_col] = -1;
    h.A11.push_back(e_row);
    h.A12.emplace_back(g.n2);
    h.b1.emplace_back(-1);
  }
  h.P21.clear();
  h.P22.clear();
  h.pb2.clear();
  out.certified = M >= penalty_threshold(g);
  return out;
}

/// BlpSingle as a general bilevel LP: unit boxes of x1 and x2 become lower
/// rows, no upper rows.
inline BlpGeneral to_general(const BlpSingle& b) {
  b.validate();
  BlpGeneral g;
  g.n1 = b.n;
  g.n2 = 1;
  g.c11 = b.c11;
  g.c21 = b.c21;
  g.c22 = {b.c22};
  for (std::size_t r = 0; r < b.m; ++r) {
    g.A11.push_back(b.A11[r]);
    g.A12.push_back({b.A12[r]});
    g.b1.push_back(b.b1[r]);
  }
  auto box = [&](std::size_t col, bool upper_var) {
    for (int sgn : {1, -1}) {
      RationalVec row(b.n);
      Rational x2c;
      if (upper_var) x2c = Rational(sgn); else row[col] = Rational(sgn);
      g.A11.push_back(std::move(row));
      g.A12.push_back({x2c});
      g.b1.emplace_back(sgn > 0 ? 0 : -1);
    }
  };
  for (std::size_t j = 0; j < b.n; ++j) box(j, false);
  box(0, true);
  return g;
}

namespace detail {

/// Accumulates >= rows over x1 columns [0, n1) and the x2 column n1.
struct SingleRows {
  std::size_t n1 = 0;
  RationalMat A11;
  RationalVec A12, b1;

  void add(const tent::LinearRow& row) {
    add_ge(row.terms, row.rhs);
    if (row.equality) {
      auto neg = row.terms;
      for (auto& [j, a] : neg) a = -a;
      add_ge(neg, -row.rhs);
    }
  }
  void add_ge(const std::vector<std::pair<std::size_t, Rational>>& terms, const Rational& rhs) {
    RationalVec r(n1);
    Rational x2;
    for (const auto& [j, a] : terms) {
      if (j == n1) x2 += a; else r.at(j) += a;
    }
    A11.push_back(std::move(r));
    A12.push_back(std::move(x2));
    b1.push_back(rhs);
  }
};

inline nlohmann::json layout_json(const tent::CoordinateLayout& L, std::size_t e_col) {
  nlohmann::json j;
  j["x2"] = "theta";
  j["z"] = {L.z(0), L.len};
  j["f"] = {L.f(0), L.len};
  j["s"] = {L.s(0), L.len};
  j["t"] = {L.t(0), L.len};
  j["u"] = {L.u(0), L.len};
  j["e"] = e_col;
  return j;
}

inline std::string fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// General bilevel LP whose lower level is the weighted coordinate block
/// (boxes as rows, x2 = θ also boxed in the lower level), with the given
/// upper costs over x1 and the given penalizable rows over x1.
inline BlpGeneral coordinate_general(const tent::CoordinateLayout& L, const RationalVec& c21,
                                     const RationalMat& pen_rows, const RationalVec& pen_rhs) {
  const std::size_t n1 = L.end();
  BlpGeneral g;
  g.n1 = n1;
  g.n2 = 1;
  const tent::WeightedCosts w = tent::weighted_coordinates(L.len, Rational(1));
  g.c11.assign(n1, Rational(0));
  for (std::size_t k = 0; k < L.len; ++k) {
    g.c11[L.s(k)] = w.st[k];
    g.c11[L.t(k)] = w.st[k];
    g.c11[L.f(k)] = w.f[k];
  }
  g.c21 = c21;
  g.c22 = {Rational(0)};
  SingleRows rows{n1, {}, {}, {}};
  for (const auto& r : tent::coordinate_rows(L, n1)) rows.add(r);
  for (std::size_t j = 0; j <= n1; ++j) {
    rows.add_ge({{j, 1}}, 0);
    rows.add_ge({{j, -1}}, -1);
  }
  for (std::size_t r = 0; r < rows.A11.size(); ++r) {
    g.A11.push_back(rows.A11[r]);
    g.A12.push_back({rows.A12[r]});
    g.b1.push_back(rows.b1[r]);
  }
  g.P21 = pen_rows;
  for (std::size_t r = 0; r < pen_rows.size(); ++r) g.P22.push_back({Rational(0)});
  g.pb2 = pen_rhs;
  return g;
}

/// The single-variable instance: coordinate rows, then each penalizable row
/// with +e, lower costs weighted, upper costs c21 plus M on e.
inline BlpSingle coordinate_single(const tent::CoordinateLayout& L, std::size_t e_col, const RationalVec& c21,
                                   const RationalMat& pen_rows, const RationalVec& pen_rhs, const Rational& M) {
  const std::size_t n1 = e_col + 1;
  SingleRows rows{n1, {}, {}, {}};
  for (const auto& r : tent::coordinate_rows(L, n1)) rows.add(r);
  for (std::size_t r = 0; r < pen_rows.size(); ++r) {
    std::vector<std::pair<std::size_t, Rational>> terms;
    for (std::size_t j = 0; j < pen_rows[r].size(); ++j)
      if (!pen_rows[r][j].is_zero()) terms.emplace_back(j, pen_rows[r][j]);
    terms.emplace_back(e_col, 1);
    rows.add_ge(terms, pen_rhs[r]);
  }
  BlpSingle b;
  b.n = n1;
  b.m = rows.A11.size();
  b.A11 = std::move(rows.A11);
  b.A12 = std::move(rows.A12);
  b.b1 = std::move(rows.b1);
  const tent::WeightedCosts w = tent::weighted_coordinates(L.len, Rational(1));
  b.c11.assign(n1, Rational(0));
  for (std::size_t k = 0; k < L.len; ++k) {
    b.c11[L.s(k)] = w.st[k];
    b.c11[L.t(k)] = w.st[k];
    b.c11[L.f(k)] = w.f[k];
  }
  b.c21 = c21;
  b.c21.resize(n1);
  b.c21[e_col] = M;
  b.c22 = 0;
  return b;
}

}  // namespace detail

struct SatBlpArtifacts {
  BlpSingle instance;
  Cnf formula;             // as given
  Cnf padded;              // clauses stretched to three literals
  ClauseSystem clauses;    // B_F, b_F of the padded formula
  Rational M, M_paper, M_threshold;
  std::size_t n = 0, p = 0;
  tent::CoordinateLayout layout;  // z, f, s, t, u over n+1 coordinates
  std::size_t e_col = 0;
};

/// Upper costs over the lower block: 2 sum_{i<=n}(z_{n+1} - 2 f_i) - (2/n) sum_{i<=n} f_i.
inline RationalVec sat_upper_costs(const tent::CoordinateLayout& L, std::size_t n, std::size_t width) {
  RationalVec c(width);
  c[L.z(n)] = Rational(2 * static_cast<long>(n));
  const Rational fc = Rational(-4) - Rational(BigInt(2), BigInt(static_cast<unsigned long>(n)));
  for (std::size_t i = 0; i < n; ++i) c[L.f(i)] = fc;
  return c;
}

/// B_F rows lifted onto the z columns of the layout.
inline RationalMat lift_clause_rows(const ClauseSystem& cs, const tent::CoordinateLayout& L, std::size_t width) {
  RationalMat rows;
  for (const auto& r : cs.B) {
    RationalVec row(width);
    for (std::size_t k = 0; k < r.size(); ++k) row[L.z(k)] = r[k];
    rows.push_back(std::move(row));
  }
  return rows;
}

/// The weighted reduction with B_F kept as a penalizable upper constraint;
/// its Lemma-3 threshold is the M we must reach.
inline BlpGeneral sat_weight_general(const Cnf& F) {
  const Cnf padded = pad_clauses(F);
  const std::size_t n = F.nvars;
  const tent::CoordinateLayout L{n + 1, 0};
  const ClauseSystem cs = build_BF(padded);
  return detail::coordinate_general(L, sat_upper_costs(L, n, L.end()), lift_clause_rows(cs, L, L.end()), cs.b);
}

/// 3 (5n+7) 4^{f_sol(5n+3, size(6)) + 1}
inline Rational sat_paper_M(std::size_t n) {
  const std::size_t fs = f_sol_bound(5 * n + 3, size(Rational(6)));
  return Rational(3 * static_cast<long>(5 * n + 7)) * Rational(pow2(2 * (fs + 1)));
}

inline SatBlpArtifacts build_sat_blp(const Cnf& F) {
  F.validate();
  if (F.nvars == 0) throw ModelError("build_sat_blp: formula needs at least one variable");
  SatBlpArtifacts art;
  art.formula = F;
  art.padded = pad_clauses(F);
  art.n = F.nvars;
  art.p = F.clauses.size();
  art.layout = {art.n + 1, 0};
  art.e_col = art.layout.end();
  art.clauses = build_BF(art.padded);
  art.M_paper = sat_paper_M(art.n);
  art.M_threshold = penalty_threshold(sat_weight_general(F));
  art.M = max(art.M_paper, art.M_threshold);

  const std::size_t width = art.e_col + 1;
  art.instance = detail::coordinate_single(art.layout, art.e_col, sat_upper_costs(art.layout, art.n, width),
                                           lift_clause_rows(art.clauses, art.layout, width), art.clauses.b, art.M);
  auto& meta = art.instance.meta;
  meta["provenance"] = io::meta_value("sat");
  meta["codec"] = io::meta_value(tent::codec_name(tent::Codec::Lemma4iii));
  meta["M"] = io::meta_value(art.M.str());
  meta["M_paper"] = io::meta_value(art.M_paper.str());
  meta["M_threshold"] = io::meta_value(art.M_threshold.str());
  meta["n"] = io::meta_value(art.n);
  meta["p"] = io::meta_value(art.p);
  meta["layout"] = io::meta_value(detail::layout_json(art.layout, art.e_col));
  meta["source_fnv1a"] = io::meta_value(detail::fnv1a(io::write_dimacs(F)));
  return art;
}

inline std::size_t meta_count(const BlpSingle& b, const std::string& key) {
  auto it = b.meta.find(key);
  if (it == b.meta.end()) throw ModelError("instance meta lacks '" + key + "'");
  return nlohmann::json::parse(it->second).get<std::size_t>();
}

inline std::string meta_string(const BlpSingle& b, const std::string& key) {
  auto it = b.meta.find(key);
  if (it == b.meta.end()) return {};
  auto j = nlohmann::json::parse(it->second);
  return j.is_string() ? j.get<std::string>() : it->second;
}

struct IlpBlpArtifacts {
  BlpSingle instance;
  ZeroOneIlp scaled;       // rows divided by max(1, |a_j|)
  Rational M;
  tent::CoordinateLayout layout;  // over r coordinates
  std::size_t e_col = 0;
};

inline ZeroOneIlp scale_rows(const ZeroOneIlp& ilp) {
  ilp.validate();
  ZeroOneIlp out = ilp;
  for (std::size_t j = 0; j < out.A.size(); ++j) {
    const Rational d = max(Rational(1), abs(out.a[j]));
    if (d == Rational(1)) continue;
    for (auto& v : out.A[j]) v /= d;
    out.a[j] /= d;
  }
  return out;
}

/// Penalizable rows of the compiler: A z >= a and f_i >= 1/2.
inline void ilp_penalized_rows(const ZeroOneIlp& scaled, const tent::CoordinateLayout& L, std::size_t width,
                               RationalMat& rows, RationalVec& rhs) {
  for (std::size_t j = 0; j < scaled.A.size(); ++j) {
    RationalVec row(width);
    for (std::size_t i = 0; i < scaled.r; ++i) row[L.z(i)] = scaled.A[j][i];
    rows.push_back(std::move(row));
    rhs.push_back(scaled.a[j]);
  }
  for (std::size_t i = 0; i < scaled.r; ++i) {
    RationalVec row(width);
    row[L.f(i)] = 1;
    rows.push_back(std::move(row));
    rhs.push_back(Rational(BigInt(1), BigInt(2)));
  }
}

inline BlpGeneral ilp_mult_general(const ZeroOneIlp& scaled) {
  const tent::CoordinateLayout L{scaled.r, 0};
  RationalVec c21(L.end());
  for (std::size_t i = 0; i < scaled.r; ++i) c21[L.z(i)] = scaled.c[i];
  RationalMat rows;
  RationalVec rhs;
  ilp_penalized_rows(scaled, L, L.end(), rows, rhs);
  return detail::coordinate_general(L, c21, rows, rhs);
}

inline IlpBlpArtifacts ilp_to_blp(const ZeroOneIlp& ilp) {
  ilp.validate();
  if (ilp.r == 0) throw ModelError("ilp_to_blp: at least one variable required");
  IlpBlpArtifacts art;
  art.scaled = scale_rows(ilp);
  art.layout = {ilp.r, 0};
  art.e_col = art.layout.end();
  art.M = penalty_threshold(ilp_mult_general(art.scaled));
  const std::size_t width = art.e_col + 1;
  RationalVec c21(width);
  for (std::size_t i = 0; i < ilp.r; ++i) c21[art.layout.z(i)] = art.scaled.c[i];
  RationalMat rows;
  RationalVec rhs;
  ilp_penalized_rows(art.scaled, art.layout, width, rows, rhs);
  art.instance = detail::coordinate_single(art.layout, art.e_col, c21, rows, rhs, art.M);
  auto& meta = art.instance.meta;
  meta["provenance"] = io::meta_value("ilp");
  meta["codec"] = io::meta_value(tent::codec_name(tent::Codec::Section5));
  meta["M"] = io::meta_value(art.M.str());
  meta["r"] = io::meta_value(ilp.r);
  meta["layout"] = io::meta_value(detail::layout_json(art.layout, art.e_col));
  meta["source_fnv1a"] = io::meta_value(detail::fnv1a(io::serialize_ilp(ilp)));
  return art;
}

}  // namespace blsingle
