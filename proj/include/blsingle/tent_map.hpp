#pragma once

// Closed-form lower level of the reduction: the tent maps f^z and f^u, the
// unique lexicographic optimum (z, f, s, t, u), the theta <-> bit-vector
// codecs and the weighted single-objective coefficients.

#include "blsingle/model.hpp"
#include "blsingle/rational.hpp"

#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace blsingle::tent {

inline void require_unit(const Rational& theta) {
  if (theta.sign() < 0 || theta > Rational(1)) throw std::out_of_range("theta outside [0, 1]: " + theta.str());
}

inline const Rational& third() { static const Rational v(BigInt(1), BigInt(3)); return v; }
inline const Rational& two_thirds() { static const Rational v(BigInt(2), BigInt(3)); return v; }
inline const Rational& half() { static const Rational v(BigInt(1), BigInt(2)); return v; }

/// Bit read-off map: 0 on [0,1/3), 3θ-1 on [1/3,2/3), 1 on [2/3,1].
inline Rational f_z(const Rational& theta) {
  require_unit(theta);
  if (theta < third()) return Rational(0);
  if (theta < two_thirds()) return Rational(3) * theta - Rational(1);
  return Rational(1);
}

/// Tent map: 3θ on [0,1/3), 2-3θ on [1/3,2/3), 3θ-2 on [2/3,1].
/// Equals 3θ - 2 f_z(θ).  (The middle branch is 2-3θ, not 1-3θ: only the
/// former satisfies u_{i-1} = 3u_i - 2z_i and keeps 1/2 a fixed point.)
inline Rational f_u(const Rational& theta) {
  require_unit(theta);
  if (theta < third()) return Rational(3) * theta;
  if (theta < two_thirds()) return Rational(2) - Rational(3) * theta;
  return Rational(3) * theta - Rational(2);
}

inline Rational positive_part(const Rational& a) { return a.sign() > 0 ? a : Rational(0); }

/// The (z, f, s, t, u) block; index k holds coordinate k+1.
struct LowerSolution {
  RationalVec z, f, s, t, u;

  std::size_t length() const { return z.size(); }
  friend bool operator==(const LowerSolution&, const LowerSolution&) = default;
};

/// Unique lexicographic optimum for `len` coordinates with u_len = θ.
/// `len` is n+1 for the SAT reduction and r for the ILP compiler.
inline LowerSolution solve_coordinates(std::size_t len, const Rational& theta) {
  require_unit(theta);
  if (len == 0) throw std::invalid_argument("solve_coordinates: empty block");
  LowerSolution sol;
  sol.z.resize(len); sol.f.resize(len); sol.s.resize(len); sol.t.resize(len); sol.u.resize(len);
  const Rational three_halves(BigInt(3), BigInt(2));
  Rational u = theta;
  for (std::size_t k = len; k-- > 0;) {
    sol.u[k] = u;
    sol.s[k] = positive_part(three_halves * u - half());
    sol.t[k] = positive_part(three_halves * u - Rational(1));
    sol.z[k] = f_z(u);
    sol.f[k] = abs(sol.z[k] - half());
    if (k > 0) u = f_u(u);
  }
  return sol;
}

/// S(P_lex^low(n+1, θ)) for a formula over n variables.
inline LowerSolution solve_lower_analytic(std::size_t n, const Rational& theta) {
  if (n == 0) throw std::invalid_argument("solve_lower_analytic: n must be >= 1");
  return solve_coordinates(n + 1, theta);
}

enum class Codec { Lemma4iii, Section5 };

inline const char* codec_name(Codec c) { return c == Codec::Lemma4iii ? "lemma4iii" : "section5"; }

inline Codec parse_codec(const std::string& s) {
  if (s == "lemma4iii") return Codec::Lemma4iii;
  if (s == "section5") return Codec::Section5;
  throw std::invalid_argument("unknown codec '" + s + "'");
}

/// θ carrying the bit vector μ.
///   Lemma4iii: (2/3)(1 + Σ μ_i / 3^{n+1-i})  -> z = (μ, 1)
///   Section5:  (2/3) Σ μ_i / 3^{r-i}         -> z = μ
inline Rational encode_mu(const std::vector<int>& mu, Codec codec = Codec::Lemma4iii) {
  const std::size_t n = mu.size();
  Rational acc = codec == Codec::Lemma4iii ? Rational(1) : Rational(0);
  for (std::size_t i = 1; i <= n; ++i) {
    const int b = mu[i - 1];
    if (b != 0 && b != 1) throw std::invalid_argument("encode_mu: entries must be binary");
    if (!b) continue;
    const std::size_t power = codec == Codec::Lemma4iii ? n + 1 - i : n - i;
    acc += Rational(BigInt(1), pow_ui(3, power));
  }
  return two_thirds() * acc;
}

struct Decoded {
  bool binary = false;
  std::vector<int> mu;
  int z_top = 0;  // z_{n+1}; Lemma4iii only
};

/// Reads the bits of θ back through the tent maps.
///   Lemma4iii: n bits plus the top coordinate z_{n+1}.
///   Section5:  n (= r) bits, no top coordinate.
inline Decoded decode_theta(const Rational& theta, std::size_t n, Codec codec = Codec::Lemma4iii) {
  require_unit(theta);
  const std::size_t len = codec == Codec::Lemma4iii ? n + 1 : n;
  const LowerSolution sol = solve_coordinates(len, theta);
  Decoded d;
  for (const auto& zi : sol.z)
    if (!zi.is_zero() && zi != Rational(1)) return d;
  d.binary = true;
  for (std::size_t i = 0; i < n; ++i) d.mu.push_back(sol.z[i].is_zero() ? 0 : 1);
  if (codec == Codec::Lemma4iii) d.z_top = sol.z[n].is_zero() ? 0 : 1;
  return d;
}

/// Per-coordinate weights of the single-objective lower level over `len`
/// coordinates: s_i, t_i cost 16^i and f_i costs η / 4^{len-i}.
struct WeightedCosts {
  RationalVec st;  // shared by s_i and t_i
  RationalVec f;
};

inline WeightedCosts weighted_coordinates(std::size_t len, const Rational& eta) {
  if (eta.sign() <= 0 || eta > Rational(1)) throw std::out_of_range("eta outside (0, 1]");
  WeightedCosts w;
  for (std::size_t i = 1; i <= len; ++i) {
    w.st.emplace_back(pow_ui(16, i));
    w.f.push_back(eta * Rational(BigInt(1), pow_ui(4, len - i)));
  }
  return w;
}

/// Coefficients of P_weight^low(n+1, θ, η).
inline WeightedCosts weighted_objective(std::size_t n, const Rational& eta) {
  return weighted_coordinates(n + 1, eta);
}

/// Column positions of one (z, f, s, t, u) block inside a larger model.
/// Coordinates are 0-based: k stands for index k+1.
struct CoordinateLayout {
  std::size_t len = 0;
  std::size_t base = 0;  // first column of z

  std::size_t z(std::size_t k) const { return base + k; }
  std::size_t f(std::size_t k) const { return base + len + k; }
  std::size_t s(std::size_t k) const { return base + 2 * len + k; }
  std::size_t t(std::size_t k) const { return base + 3 * len + k; }
  std::size_t u(std::size_t k) const { return base + 4 * len + k; }
  std::size_t end() const { return base + 5 * len; }
};

/// sum terms (>= or =) rhs
struct LinearRow {
  std::vector<std::pair<std::size_t, Rational>> terms;
  Rational rhs;
  bool equality = false;
};

/// Feasible set of the lexicographic lower level, boxes excluded, with u_len
/// tied to column `theta_col`.
inline std::vector<LinearRow> coordinate_rows(const CoordinateLayout& L, std::size_t theta_col) {
  const Rational three_halves(BigInt(3), BigInt(2));
  std::vector<LinearRow> rows;
  rows.push_back({{{L.u(L.len - 1), 1}, {theta_col, -1}}, 0, true});
  for (std::size_t k = 0; k < L.len; ++k) {
    rows.push_back({{{L.s(k), 1}, {L.u(k), -three_halves}}, -half(), false});
    rows.push_back({{{L.t(k), 1}, {L.u(k), -three_halves}}, -1, false});
    rows.push_back({{{L.z(k), 1}, {L.s(k), -2}, {L.t(k), 2}}, 0, true});
    rows.push_back({{{L.f(k), 1}, {L.z(k), 1}}, half(), false});
    rows.push_back({{{L.f(k), 1}, {L.z(k), -1}}, -half(), false});
    if (k > 0) rows.push_back({{{L.u(k - 1), 1}, {L.u(k), -3}, {L.z(k), 2}}, 0, true});
  }
  return rows;
}

/// Lexicographic lower level over `len` coordinates as a LexLp, all block
/// variables boxed in [0, 1].  Objectives are s_len+t_len, ..., s_1+t_1,
/// sum f; with `eta` set, the single weighted objective instead.  The last
/// structural column before the surpluses is θ, fixed at `theta`.
struct CoordinateLp {
  LexLp lp;
  CoordinateLayout layout;
  std::size_t theta_col = 0;
};

inline CoordinateLp coordinate_lp(std::size_t len, const Rational& theta, std::optional<Rational> eta = std::nullopt) {
  require_unit(theta);
  CoordinateLp out;
  out.layout = {len, 0};
  for (std::size_t j = 0; j < 5 * len; ++j) out.lp.add_var(Rational(0), Rational(1));
  out.theta_col = out.lp.add_var(theta, theta);
  for (const auto& row : coordinate_rows(out.layout, out.theta_col)) {
    if (row.equality) out.lp.add_eq(row.terms, row.rhs);
    else out.lp.add_ge(row.terms, row.rhs);
  }
  const auto& L = out.layout;
  if (eta) {
    const WeightedCosts w = weighted_coordinates(len, *eta);
    RationalVec c(out.lp.num_vars);
    for (std::size_t k = 0; k < len; ++k) {
      c[L.s(k)] = w.st[k];
      c[L.t(k)] = w.st[k];
      c[L.f(k)] = w.f[k];
    }
    out.lp.objectives.emplace_back(std::move(c));
  } else {
    for (std::size_t k = len; k-- > 0;) {
      RationalVec c(out.lp.num_vars);
      c[L.s(k)] = 1;
      c[L.t(k)] = 1;
      out.lp.objectives.emplace_back(std::move(c));
    }
    RationalVec c(out.lp.num_vars);
    for (std::size_t k = 0; k < len; ++k) c[L.f(k)] = 1;
    out.lp.objectives.emplace_back(std::move(c));
  }
  return out;
}

/// Reads the block back out of a full solution vector.
inline LowerSolution read_coordinates(const CoordinateLayout& L, const RationalVec& x) {
  LowerSolution sol;
  for (std::size_t k = 0; k < L.len; ++k) {
    sol.z.push_back(x[L.z(k)]);
    sol.f.push_back(x[L.f(k)]);
    sol.s.push_back(x[L.s(k)]);
    sol.t.push_back(x[L.t(k)]);
    sol.u.push_back(x[L.u(k)]);
  }
  return sol;
}

struct TableRow {
  Rational theta;
  LowerSolution sol;
};

inline std::vector<TableRow> emit_tentmap_table(std::size_t n, std::size_t denominator) {
  if (denominator == 0) throw std::invalid_argument("denominator must be >= 1");
  std::vector<TableRow> rows;
  for (std::size_t k = 0; k <= denominator; ++k) {
    Rational th(BigInt(static_cast<unsigned long>(k)), BigInt(static_cast<unsigned long>(denominator)));
    rows.push_back({th, solve_lower_analytic(n, th)});
  }
  return rows;
}

/// CSV: theta,u1..u{n+1},z1..z{n+1}[,theta_dec,u*_dec,z*_dec]
inline void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows, bool decimal) {
  if (rows.empty()) return;
  const std::size_t len = rows.front().sol.length();
  os << "theta";
  for (std::size_t i = 1; i <= len; ++i) os << ",u" << i;
  for (std::size_t i = 1; i <= len; ++i) os << ",z" << i;
  if (decimal) {
    os << ",theta_dec";
    for (std::size_t i = 1; i <= len; ++i) os << ",u" << i << "_dec";
    for (std::size_t i = 1; i <= len; ++i) os << ",z" << i << "_dec";
  }
  os << "\n";
  for (const auto& r : rows) {
    os << r.theta;
    for (const auto& v : r.sol.u) os << "," << v;
    for (const auto& v : r.sol.z) os << "," << v;
    if (decimal) {
      os << "," << r.theta.decimal();
      for (const auto& v : r.sol.u) os << "," << v.decimal();
      for (const auto& v : r.sol.z) os << "," << v.decimal();
    }
    os << "\n";
  }
}

/// Two stacked panels (u and z against θ), one polyline per coordinate.
inline void write_table_svg(std::ostream& os, const std::vector<TableRow>& rows) {
  if (rows.empty()) return;
  const std::size_t len = rows.front().sol.length();
  const double w = 400, h = 400, pad = 40;
  static const char* colors[] = {"#d62728", "#1f77b4", "#000000", "#2ca02c", "#9467bd", "#8c564b"};
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * w + 3 * pad << "\" height=\"" << h + 2 * pad
     << "\">\n";
  auto to_d = [](const Rational& r) { return std::stod(r.decimal(9)); };
  for (int panel = 0; panel < 2; ++panel) {
    const double x0 = pad + panel * (w + pad);
    os << "  <rect x=\"" << x0 << "\" y=\"" << pad << "\" width=\"" << w << "\" height=\"" << h
       << "\" fill=\"none\" stroke=\"#999\"/>\n";
    os << "  <text x=\"" << x0 + w / 2 << "\" y=\"" << pad - 10 << "\" text-anchor=\"middle\">"
       << (panel == 0 ? "u" : "z") << " vs theta</text>\n";
    for (std::size_t i = 0; i < len; ++i) {
      os << "  <polyline fill=\"none\" stroke=\"" << colors[(len - 1 - i) % 6] << "\" points=\"";
      for (const auto& r : rows) {
        const Rational& v = panel == 0 ? r.sol.u[i] : r.sol.z[i];
        os << x0 + to_d(r.theta) * w << "," << pad + (1.0 - to_d(v)) * h << " ";
      }
      os << "\"/>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace blsingle::tent
