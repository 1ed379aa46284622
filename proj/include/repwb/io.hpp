#pragma once

// JSON schemas for groups, representations, vectors and Gram functions.
// Parse errors are ConfigError with a JSON pointer to the offending field.

#include <json.hpp>
#include <string>
#include <vector>

#include "repwb/containment.hpp"
#include "repwb/errors.hpp"
#include "repwb/representation.hpp"

namespace repwb::io {

using json = nlohmann::json;

class ConfigError : public PreconditionError {
 public:
  ConfigError(const std::string& pointer, const std::string& what)
      : PreconditionError((pointer.empty() ? std::string("/") : pointer) + ": " + what) {}
};

// {"kind": "free", "rank": 2}
// {"kind": "fg-abelian", "torsion": [0, 4], "generators": ["1,0", "0,1"]}
// {"kind": "finite-table", "table": [[0,1],[1,0]], "generators": ["1"]}
// {"kind": "rewriting-presented", "rank": 1, "rules": [[[1,1],[-1]], ...]}
OraclePtr parse_group(const json& j, const std::string& ptr = "/group");
json group_to_json(const GroupOracle& g);

// {"kind": "regular"} | {"kind": "trivial", "dim": d}
// {"kind": "matrix", "generators": [M_1, ...], "relations": [[1,-2], ...]}
// {"kind": "direct-sum", "summands": [...]} | {"kind": "multiple", "of": {...}, "count": n | "inf"}
// Matrices are lists of rows; an entry is a number or [re, im].
Representation parse_representation(const json& j, const OraclePtr& g, const std::string& ptr);
json representation_to_json(const Representation& rep);

Eigen::MatrixXcd parse_matrix(const json& j, const std::string& ptr);
json matrix_to_json(const Eigen::MatrixXcd& m);
cplx parse_complex(const json& j, const std::string& ptr);
json complex_to_json(cplx z);

// A vector is a list of entries [path, element, re, im]; path is an integer or
// a list of integers, element a group-element string (regular leaves) or a
// coordinate index (finite-dimensional leaves).
SparseVector parse_vector(const json& j, const GroupOracle& g, const std::string& ptr);
json vector_to_json(const SparseVector& v, const GroupOracle& g);
std::vector<SparseVector> parse_vectors(const json& j, const GroupOracle& g, const std::string& ptr);
json vectors_to_json(const std::vector<SparseVector>& vs, const GroupOracle& g);

Element parse_element(const json& j, const GroupOracle& g, const std::string& ptr);
std::vector<Element> parse_elements(const json& j, const GroupOracle& g, const std::string& ptr);
json elements_to_json(const std::vector<Element>& es, const GroupOracle& g);

// {"F": [...], "n": n, "M": [matrix per element of F]}
GramFunction parse_gram(const json& j, const GroupOracle& g, const std::string& ptr);
json gram_to_json(const GramFunction& m, const GroupOracle& g);

// Typed field access with pointer-carrying errors.
const json& field(const json& j, const std::string& key, const std::string& ptr);
std::int64_t get_int(const json& j, const std::string& ptr);
double get_number(const json& j, const std::string& ptr);
std::string get_string(const json& j, const std::string& ptr);

json read_json_file(const std::string& path);

}  // namespace repwb::io
