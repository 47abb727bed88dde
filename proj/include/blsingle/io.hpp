#pragma once

// DIMACS CNF reader, the "blp1/v1" instance document and the 0-1 ILP
// document.  Every scalar is written as a canonical "p/q" string.

#include "blsingle/model.hpp"
#include "blsingle/rational.hpp"

#include <json.hpp>

#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace blsingle::io {

using nlohmann::json;

inline constexpr const char* kInstanceFormat = "blp1/v1";

/// "p cnf <vars> <clauses>" followed by 0-terminated clauses; "c" lines are
/// comments.  Clauses may span lines.  A trailing clause without its 0 is
/// rejected rather than silently dropped.
inline Cnf parse_dimacs(std::istream& in) {
  Cnf cnf;
  bool have_header = false;
  std::size_t declared = 0;
  std::vector<int> current;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw ModelError("dimacs line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "c") continue;
    if (tok == "%") break;  // SATLIB trailer
    if (tok == "p") {
      if (have_header) fail("duplicate header");
      std::string fmt;
      long long nv = -1, nc = -1;
      if (!(ls >> fmt >> nv >> nc) || fmt != "cnf" || nv < 0 || nc < 0) fail("malformed header");
      std::string extra;
      if (ls >> extra) fail("malformed header");
      cnf.nvars = static_cast<std::size_t>(nv);
      declared = static_cast<std::size_t>(nc);
      have_header = true;
      continue;
    }
    if (!have_header) fail("clause before header");
    ls.clear();
    ls.str(line);
    while (ls >> tok) {
      long long lit = 0;
      std::size_t used = 0;
      try {
        lit = std::stoll(tok, &used);
      } catch (const std::exception&) {
        fail("bad literal '" + tok + "'");
      }
      if (used != tok.size()) fail("bad literal '" + tok + "'");
      if (lit == 0) {
        if (current.empty()) fail("empty clause");
        cnf.clauses.push_back(std::move(current));
        current.clear();
        continue;
      }
      const long long v = lit < 0 ? -lit : lit;
      if (v > static_cast<long long>(cnf.nvars)) fail("literal out of range: " + tok);
      current.push_back(static_cast<int>(lit));
      if (current.size() > 3) fail("clause length exceeds 3");
    }
  }
  if (!have_header) throw ModelError("dimacs: missing header");
  if (!current.empty()) throw ModelError("dimacs: unterminated final clause");
  if (cnf.clauses.size() != declared)
    throw ModelError("dimacs: header declares " + std::to_string(declared) + " clauses, found " +
                     std::to_string(cnf.clauses.size()));
  return cnf;
}

inline Cnf parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return parse_dimacs(in);
}

inline std::string write_dimacs(const Cnf& cnf) {
  std::ostringstream os;
  os << "p cnf " << cnf.nvars << " " << cnf.clauses.size() << "\n";
  for (const auto& c : cnf.clauses) {
    for (int lit : c) os << lit << " ";
    os << "0\n";
  }
  return os.str();
}

namespace detail {

inline Rational scalar(const json& j, const char* field) {
  if (!j.is_string()) throw ModelError(std::string(field) + ": scalar must be a \"p/q\" string");
  try {
    return Rational::parse(j.get<std::string>(), true);
  } catch (const std::invalid_argument& e) {
    throw ModelError(std::string(field) + ": " + e.what());
  }
}

inline RationalVec vec(const json& j, const char* field) {
  if (!j.is_array()) throw ModelError(std::string(field) + ": expected array");
  RationalVec v;
  for (const auto& e : j) v.push_back(scalar(e, field));
  return v;
}

inline RationalMat mat(const json& j, const char* field) {
  if (!j.is_array()) throw ModelError(std::string(field) + ": expected array of rows");
  RationalMat m;
  for (const auto& r : j) m.push_back(vec(r, field));
  return m;
}

inline std::size_t count(const json& doc, const char* field) {
  if (!doc.contains(field)) throw ModelError(std::string("missing field ") + field);
  const json& j = doc.at(field);
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw ModelError(std::string(field) + ": expected non-negative integer");
  return j.get<std::size_t>();
}

inline const json& field(const json& doc, const char* name) {
  if (!doc.contains(name)) throw ModelError(std::string("missing field ") + name);
  return doc.at(name);
}

inline json to_json(const RationalVec& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x.str());
  return a;
}

inline json to_json(const RationalMat& m) {
  json a = json::array();
  for (const auto& r : m) a.push_back(to_json(r));
  return a;
}

inline json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("malformed document: ") + e.what());
  }
}

}  // namespace detail

/// Meta values are JSON text; this renders a value into that form.
inline std::string meta_value(const json& v) { return v.dump(); }

inline std::string serialize_instance(const BlpSingle& inst) {
  inst.validate();
  json doc;
  doc["format"] = kInstanceFormat;
  doc["n"] = inst.n;
  doc["m"] = inst.m;
  doc["c11"] = detail::to_json(inst.c11);
  doc["c21"] = detail::to_json(inst.c21);
  doc["c22"] = inst.c22.str();
  doc["A11"] = detail::to_json(inst.A11);
  doc["A12"] = detail::to_json(inst.A12);
  doc["b1"] = detail::to_json(inst.b1);
  if (!inst.meta.empty()) {
    json meta = json::object();
    for (const auto& [k, v] : inst.meta) meta[k] = json::parse(v);
    doc["meta"] = std::move(meta);
  }
  return doc.dump(1) + "\n";
}

inline BlpSingle parse_instance(const std::string& text) {
  const json doc = detail::parse_document(text);
  if (!doc.is_object()) throw ModelError("instance document must be an object");
  const json& fmt = detail::field(doc, "format");
  if (!fmt.is_string() || fmt.get<std::string>() != kInstanceFormat)
    throw ModelError(std::string("unsupported format, expected ") + kInstanceFormat);
  BlpSingle inst;
  inst.n = detail::count(doc, "n");
  inst.m = detail::count(doc, "m");
  inst.c11 = detail::vec(detail::field(doc, "c11"), "c11");
  inst.c21 = detail::vec(detail::field(doc, "c21"), "c21");
  inst.c22 = detail::scalar(detail::field(doc, "c22"), "c22");
  inst.A11 = detail::mat(detail::field(doc, "A11"), "A11");
  inst.A12 = detail::vec(detail::field(doc, "A12"), "A12");
  inst.b1 = detail::vec(detail::field(doc, "b1"), "b1");
  if (doc.contains("meta")) {
    const json& meta = doc.at("meta");
    if (!meta.is_object()) throw ModelError("meta must be an object");
    for (auto it = meta.begin(); it != meta.end(); ++it) inst.meta[it.key()] = it.value().dump();
  }
  inst.validate();
  return inst;
}

inline ZeroOneIlp parse_ilp(const std::string& text) {
  const json doc = detail::parse_document(text);
  if (!doc.is_object()) throw ModelError("ILP document must be an object");
  ZeroOneIlp ilp;
  ilp.r = detail::count(doc, "r");
  ilp.c = detail::vec(detail::field(doc, "c"), "c");
  ilp.A = detail::mat(detail::field(doc, "A"), "A");
  ilp.a = detail::vec(detail::field(doc, "a"), "a");
  ilp.validate();
  return ilp;
}

inline std::string serialize_ilp(const ZeroOneIlp& ilp) {
  json doc;
  doc["r"] = ilp.r;
  doc["c"] = detail::to_json(ilp.c);
  doc["A"] = detail::to_json(ilp.A);
  doc["a"] = detail::to_json(ilp.a);
  return doc.dump(1) + "\n";
}

/// A vector given either as a JSON array of "p/q" strings or as
/// whitespace-separated "p/q" tokens.
inline RationalVec parse_vector(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[')
    return detail::vec(detail::parse_document(text), "vector");
  RationalVec v;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    try {
      v.push_back(Rational::parse(tok, true));
    } catch (const std::invalid_argument& e) {
      throw ModelError(e.what());
    }
  }
  return v;
}

}  // namespace blsingle::io
