#pragma once

// JSON serialization of matrices and triples. Complex entries are stored as
// [re, im] pairs, row-major; doubles are printed with 17 significant digits so
// a dump/parse cycle reproduces every bit.

#include <set>
#include <string>

#include <json.hpp>

#include "edgerep/exact_diag.hpp"
#include "edgerep/fcs_core.hpp"

namespace edgerep::io {

using nlohmann::json;

inline json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

inline Mat matrix_from_json(const json& j) {
  try {
    const Index r = j.at("rows").get<Index>();
    const Index c = j.at("cols").get<Index>();
    const json& data = j.at("data");
    if (r < 0 || c < 0 || data.size() != static_cast<std::size_t>(r)) throw InvalidArgument("matrix: row count");
    Mat m(r, c);
    for (Index i = 0; i < r; ++i) {
      const json& row = data.at(i);
      if (row.size() != static_cast<std::size_t>(c)) throw InvalidArgument("matrix: column count");
      for (Index k = 0; k < c; ++k) {
        const json& e = row.at(k);
        if (e.is_number()) {
          m(i, k) = e.get<double>();
        } else {
          if (e.size() != 2) throw InvalidArgument("matrix: entry must be [re, im]");
          m(i, k) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
        }
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("matrix: ") + e.what());
  }
}

inline json triple_to_json(const Su2Triple& t) {
  return {{"x", matrix_to_json(t.x)}, {"y", matrix_to_json(t.y)}, {"z", matrix_to_json(t.z)}};
}

inline Su2Triple triple_from_json(const json& j) {
  try {
    return {matrix_from_json(j.at("x")), matrix_from_json(j.at("y")), matrix_from_json(j.at("z"))};
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("generators: ") + e.what());
  }
}

inline json fcs_to_json(const FCSTriple& t) {
  return {{"d", t.d},
          {"k", t.k},
          {"V", matrix_to_json(t.V)},
          {"phys_gen", triple_to_json(t.phys_gen)},
          {"aux_gen", triple_to_json(t.aux_gen)},
          {"rho", matrix_to_json(t.rho)},
          {"lambda_e", t.lambda_e}};
}

/// Restores a serialized triple exactly as written. Set `revalidate` to rerun
/// the construction checks (rho and lambda_e are then recomputed).
inline FCSTriple fcs_from_json(const json& j, bool revalidate = false) {
  try {
    const Mat v = matrix_from_json(j.at("V"));
    const Su2Triple phys = triple_from_json(j.at("phys_gen"));
    const Su2Triple aux = triple_from_json(j.at("aux_gen"));
    if (revalidate || !j.contains("rho")) return build_custom_triple(v, phys, aux);
    FCSTriple t;
    t.d = j.at("d").get<Index>();
    t.k = j.at("k").get<Index>();
    t.V = v;
    t.phys_gen = phys;
    t.aux_gen = aux;
    t.rho = matrix_from_json(j.at("rho"));
    t.lambda_e = j.at("lambda_e").get<double>();
    if (t.V.rows() != t.d * t.k || t.V.cols() != t.k || t.rho.rows() != t.k || phys.dim() != t.d ||
        aux.dim() != t.k) {
      throw InvalidArgument("triple: inconsistent dimensions");
    }
    return t;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("triple: ") + e.what());
  }
}

/// Hamiltonian spec. Keys: spin (number), model, length, boundary, J, bond_polynomial, bond_matrix, bond_weights.
inline HamiltonianSpec spec_from_json(const json& j) {
  try {
    if (!j.is_object()) throw InvalidArgument("spec: expected an object");
    static const std::set<std::string> known{"spin", "model", "length", "boundary", "J", "bond_polynomial", "bond_matrix",
                                             "bond_weights"};
    for (const auto& [key, value] : j.items())
      if (!known.count(key)) throw InvalidArgument("spec: unknown key '" + key + "'");
    HamiltonianSpec s;
    s.spin = TwiceSpin::from_double(j.value("spin", 1.0));
    s.model = parse_model(j.value("model", std::string("aklt")));
    s.length = j.value("length", 4);
    s.boundary = parse_boundary(j.value("boundary", std::string("open")));
    if (j.contains("J")) s.J = j.at("J").get<std::vector<double>>();
    if (j.contains("bond_polynomial")) s.bond_polynomial = j.at("bond_polynomial").get<std::vector<double>>();
    if (j.contains("bond_matrix")) s.bond_matrix = matrix_from_json(j.at("bond_matrix"));
    if (j.contains("bond_weights")) s.bond_weights = j.at("bond_weights").get<std::vector<double>>();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("spec: ") + e.what());
  }
}

inline json spec_to_json(const HamiltonianSpec& s) {
  json j{{"spin", s.spin.value()}, {"model", to_string(s.model)}, {"length", s.length}, {"boundary", to_string(s.boundary)}};
  if (!s.J.empty()) j["J"] = s.J;
  if (!s.bond_polynomial.empty()) j["bond_polynomial"] = s.bond_polynomial;
  if (s.bond_matrix) j["bond_matrix"] = matrix_to_json(*s.bond_matrix);
  if (!s.bond_weights.empty()) j["bond_weights"] = s.bond_weights;
  return j;
}

}  // namespace edgerep::io
