#include "repwb/io.hpp"

#include <fstream>

namespace repwb::io {

namespace {

std::string at(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }
std::string at(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

const json& array(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw ConfigError(ptr, "expected an array");
  return j;
}

std::vector<std::int64_t> int_list(const json& j, const std::string& ptr) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < array(j, ptr).size(); ++i) out.push_back(get_int(j[i], at(ptr, i)));
  return out;
}

template <class F>
auto wrap(const std::string& ptr, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const PreconditionError& e) {
    throw ConfigError(ptr, e.what());
  } catch (const StructuralError& e) {
    throw ConfigError(ptr, e.what());
  } catch (const UnsupportedError& e) {
    throw ConfigError(ptr, e.what());
  }
}

}  // namespace

const json& field(const json& j, const std::string& key, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(at(ptr, key), "missing field");
  return *it;
}

std::int64_t get_int(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) throw ConfigError(ptr, "expected an integer");
  return j.get<std::int64_t>();
}

double get_number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  return j.get<double>();
}

std::string get_string(const json& j, const std::string& ptr) {
  if (!j.is_string()) throw ConfigError(ptr, "expected a string");
  return j.get<std::string>();
}

Element parse_element(const json& j, const GroupOracle& g, const std::string& ptr) {
  if (j.is_number_integer() && g.kind() == GroupKind::finite_table) {
    return wrap(ptr, [&] {
      Element e(GroupKind::finite_table, {j.get<std::int64_t>()});
      g.validate(e);
      return e;
    });
  }
  const auto text = get_string(j, ptr);
  return wrap(ptr, [&] {
    auto e = g.parse(text);
    g.validate(e);
    return e;
  });
}

std::vector<Element> parse_elements(const json& j, const GroupOracle& g, const std::string& ptr) {
  std::vector<Element> out;
  for (std::size_t i = 0; i < array(j, ptr).size(); ++i) out.push_back(parse_element(j[i], g, at(ptr, i)));
  return out;
}

json elements_to_json(const std::vector<Element>& es, const GroupOracle& g) {
  json out = json::array();
  for (const auto& e : es) out.push_back(g.format(e));
  return out;
}

OraclePtr parse_group(const json& j, const std::string& ptr) {
  const auto kind = get_string(field(j, "kind", ptr), at(ptr, "kind"));
  auto make = [](GroupOracle g) { return std::make_shared<const GroupOracle>(std::move(g)); };
  if (kind == "free") {
    const auto rank = get_int(field(j, "rank", ptr), at(ptr, "rank"));
    if (rank < 0) throw ConfigError(at(ptr, "rank"), "rank must be >= 0");
    return make(GroupOracle::free(static_cast<int>(rank)));
  }
  if (kind == "fg-abelian") {
    auto torsion = int_list(field(j, "torsion", ptr), at(ptr, "torsion"));
    auto base = wrap(at(ptr, "torsion"), [&] { return GroupOracle::fg_abelian(torsion); });
    std::vector<Element> gens;
    if (j.contains("generators")) gens = parse_elements(j["generators"], base, at(ptr, "generators"));
    return wrap(ptr, [&] { return make(GroupOracle::fg_abelian(torsion, gens)); });
  }
  if (kind == "finite-table") {
    const auto& t = array(field(j, "table", ptr), at(ptr, "table"));
    std::vector<std::vector<std::int64_t>> table;
    for (std::size_t i = 0; i < t.size(); ++i) table.push_back(int_list(t[i], at(at(ptr, "table"), i)));
    std::vector<Element> gens;
    if (j.contains("generators")) {
      const auto& gj = array(j["generators"], at(ptr, "generators"));
      for (std::size_t i = 0; i < gj.size(); ++i) {
        const auto p = at(at(ptr, "generators"), i);
        const auto idx = gj[i].is_string() ? wrap(p, [&] { return std::stoll(gj[i].get<std::string>()); }) : get_int(gj[i], p);
        gens.emplace_back(GroupKind::finite_table, std::vector<std::int64_t>{idx});
      }
    }
    return wrap(at(ptr, "table"), [&] { return make(GroupOracle::finite_table(table, gens)); });
  }
  if (kind == "rewriting-presented") {
    const auto rank = get_int(field(j, "rank", ptr), at(ptr, "rank"));
    std::vector<RewriteRule> rules;
    const auto rp = at(ptr, "rules");
    const auto& rj = j.contains("rules") ? array(j["rules"], rp) : json::array();
    for (std::size_t i = 0; i < rj.size(); ++i) {
      const auto p = at(rp, i);
      if (!rj[i].is_array() || rj[i].size() != 2) throw ConfigError(p, "a rule is [lhs, rhs]");
      rules.push_back({int_list(rj[i][0], at(p, 0)), int_list(rj[i][1], at(p, 1))});
    }
    return wrap(ptr, [&] { return make(GroupOracle::rewriting(static_cast<int>(rank), rules)); });
  }
  throw ConfigError(at(ptr, "kind"), "unknown group kind '" + kind + "'");
}

json group_to_json(const GroupOracle& g) {
  json j;
  j["kind"] = to_string(g.kind());
  switch (g.kind()) {
    case GroupKind::free: j["rank"] = g.rank(); break;
    case GroupKind::fg_abelian:
      j["torsion"] = g.torsion();
      if (!g.standard_generators()) j["generators"] = elements_to_json(g.generators(), g);
      break;
    case GroupKind::finite_table: {
      j["table"] = g.table();
      json gens = json::array();
      for (const auto& s : g.generators()) gens.push_back(s.payload()[0]);
      j["generators"] = gens;
      break;
    }
    case GroupKind::rewriting: {
      j["rank"] = g.rank();
      json rules = json::array();
      for (const auto& r : g.rules()) rules.push_back({r.lhs, r.rhs});
      j["rules"] = rules;
      break;
    }
    case GroupKind::coordinate: break;
  }
  return j;
}

cplx parse_complex(const json& j, const std::string& ptr) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {get_number(j[0], at(ptr, 0)), get_number(j[1], at(ptr, 1))};
  throw ConfigError(ptr, "expected a number or [re, im]");
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

Eigen::MatrixXcd parse_matrix(const json& j, const std::string& ptr) {
  const auto& rows = array(j, ptr);
  if (rows.empty()) throw ConfigError(ptr, "matrix has no rows");
  const auto n = array(rows[0], at(ptr, 0)).size();
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto p = at(ptr, i);
    if (array(rows[i], p).size() != n) throw ConfigError(p, "ragged matrix row");
    for (std::size_t k = 0; k < n; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = parse_complex(rows[i][k], at(p, k));
    }
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

Representation parse_representation(const json& j, const OraclePtr& g, const std::string& ptr) {
  const auto kind = get_string(field(j, "kind", ptr), at(ptr, "kind"));
  if (kind == "regular") return Representation::regular(g);
  if (kind == "trivial") {
    const auto d = get_int(field(j, "dim", ptr), at(ptr, "dim"));
    if (d < 1) throw ConfigError(at(ptr, "dim"), "dimension must be >= 1");
    return Representation::trivial(g, static_cast<std::size_t>(d));
  }
  if (kind == "matrix") {
    const auto gp = at(ptr, "generators");
    const auto& gj = array(field(j, "generators", ptr), gp);
    std::vector<Eigen::MatrixXcd> gens;
    for (std::size_t i = 0; i < gj.size(); ++i) {
      gens.push_back(parse_matrix(gj[i], at(gp, i)));
      if (gens.back().rows() != gens.back().cols()) throw ConfigError(at(gp, i), "generator matrix must be square");
      if (gens.back().rows() != gens.front().rows()) throw ConfigError(at(gp, i), "generator sizes differ");
    }
    std::vector<Word> rels;
    if (j.contains("relations")) {
      const auto rp = at(ptr, "relations");
      for (std::size_t i = 0; i < array(j["relations"], rp).size(); ++i) rels.push_back(int_list(j["relations"][i], at(rp, i)));
    }
    return wrap(ptr, [&] { return Representation::matrix(g, gens, rels); });
  }
  if (kind == "direct-sum") {
    const auto sp = at(ptr, "summands");
    const auto& sj = array(field(j, "summands", ptr), sp);
    std::vector<Representation> parts;
    for (std::size_t i = 0; i < sj.size(); ++i) parts.push_back(parse_representation(sj[i], g, at(sp, i)));
    return wrap(ptr, [&] { return Representation::direct_sum(parts); });
  }
  if (kind == "multiple") {
    auto base = parse_representation(field(j, "of", ptr), g, at(ptr, "of"));
    const auto& c = field(j, "count", ptr);
    if (c.is_string()) {
      if (c.get<std::string>() != "inf") throw ConfigError(at(ptr, "count"), "count is an integer or \"inf\"");
      return Representation::multiple(base, std::nullopt);
    }
    const auto n = get_int(c, at(ptr, "count"));
    if (n < 1) throw ConfigError(at(ptr, "count"), "count must be >= 1");
    return Representation::multiple(base, static_cast<std::size_t>(n));
  }
  throw ConfigError(at(ptr, "kind"), "unknown representation kind '" + kind + "'");
}

json representation_to_json(const Representation& rep) {
  json j;
  switch (rep.kind()) {
    case RepKind::regular: j["kind"] = "regular"; break;
    case RepKind::trivial:
      j["kind"] = "trivial";
      j["dim"] = rep.leaf_dim();
      break;
    case RepKind::matrix: {
      j["kind"] = "matrix";
      json gens = json::array();
      for (const auto& m : rep.generator_matrices()) gens.push_back(matrix_to_json(m));
      j["generators"] = gens;
      j["relations"] = rep.relations();
      break;
    }
    case RepKind::direct_sum: {
      j["kind"] = "direct-sum";
      json parts = json::array();
      for (const auto& p : rep.parts()) parts.push_back(representation_to_json(p));
      j["summands"] = parts;
      break;
    }
    case RepKind::multiple:
      j["kind"] = "multiple";
      j["of"] = representation_to_json(rep.base());
      if (rep.copies()) {
        j["count"] = *rep.copies();
      } else {
        j["count"] = "inf";
      }
      break;
  }
  return j;
}

SparseVector parse_vector(const json& j, const GroupOracle& g, const std::string& ptr) {
  SparseVector v;
  for (std::size_t i = 0; i < array(j, ptr).size(); ++i) {
    const auto p = at(ptr, i);
    const auto& e = j[i];
    if (!e.is_array() || e.size() != 4) throw ConfigError(p, "a vector entry is [path, element, re, im]");
    std::vector<std::uint32_t> path;
    if (e[0].is_array()) {
      for (auto x : int_list(e[0], at(p, 0))) {
        if (x < 0) throw ConfigError(at(p, 0), "negative path index");
        path.push_back(static_cast<std::uint32_t>(x));
      }
    } else {
      const auto x = get_int(e[0], at(p, 0));
      if (x < 0) throw ConfigError(at(p, 0), "negative path index");
      path.push_back(static_cast<std::uint32_t>(x));
    }
    Element site = e[1].is_number_integer() ? Element::coordinate(e[1].get<std::int64_t>()) : parse_element(e[1], g, at(p, 1));
    v.add({path, site}, {get_number(e[2], at(p, 2)), get_number(e[3], at(p, 3))});
  }
  return v;
}

json vector_to_json(const SparseVector& v, const GroupOracle& g) {
  json out = json::array();
  for (const auto& [k, a] : v.entries()) {
    json site = k.site.kind() == GroupKind::coordinate ? json(k.site.payload()[0]) : json(g.format(k.site));
    out.push_back(json::array({k.path, site, a.real(), a.imag()}));
  }
  return out;
}

std::vector<SparseVector> parse_vectors(const json& j, const GroupOracle& g, const std::string& ptr) {
  std::vector<SparseVector> out;
  for (std::size_t i = 0; i < array(j, ptr).size(); ++i) out.push_back(parse_vector(j[i], g, at(ptr, i)));
  return out;
}

json vectors_to_json(const std::vector<SparseVector>& vs, const GroupOracle& g) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(vector_to_json(v, g));
  return out;
}

GramFunction parse_gram(const json& j, const GroupOracle& g, const std::string& ptr) {
  GramFunction m;
  m.F = parse_elements(field(j, "F", ptr), g, at(ptr, "F"));
  const auto n = get_int(field(j, "n", ptr), at(ptr, "n"));
  if (n < 0) throw ConfigError(at(ptr, "n"), "n must be >= 0");
  m.n = static_cast<std::size_t>(n);
  const auto mp = at(ptr, "M");
  const auto& mj = array(field(j, "M", ptr), mp);
  if (mj.size() != m.F.size()) throw ConfigError(mp, "one matrix per element of F expected");
  for (std::size_t i = 0; i < mj.size(); ++i) {
    auto x = n == 0 ? Eigen::MatrixXcd(0, 0) : parse_matrix(mj[i], at(mp, i));
    if (x.rows() != n || x.cols() != n) throw ConfigError(at(mp, i), "expected an n x n matrix");
    m.M.push_back(std::move(x));
  }
  return m;
}

json gram_to_json(const GramFunction& m, const GroupOracle& g) {
  json j;
  j["F"] = elements_to_json(m.F, g);
  j["n"] = m.n;
  json ms = json::array();
  for (const auto& x : m.M) ms.push_back(m.n == 0 ? json::array() : matrix_to_json(x));
  j["M"] = ms;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace repwb::io
