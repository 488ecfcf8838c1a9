#include "pclqr/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pclqr/errors.hpp"

namespace pclqr {

namespace {

using nlohmann::json;

/// A matrix may be written as an array of rows or as a flat row-major array
/// (the latter requires the expected shape to be known). A plain number array
/// where a square matrix is expected is interpreted as a diagonal.
Matrix parse_matrix(const json& node, const std::string& field, int rows = -1, int cols = -1,
                    bool diag_ok = false) {
  if (!node.is_array() || node.empty()) {
    throw InputError(field + ": expected a non-empty array");
  }
  if (node.front().is_array()) {
    const int r = static_cast<int>(node.size());
    const int c = static_cast<int>(node.front().size());
    Matrix m(r, c);
    for (int i = 0; i < r; ++i) {
      const json& row = node[i];
      if (!row.is_array() || static_cast<int>(row.size()) != c) {
        throw InputError(field + ": ragged rows");
      }
      for (int j = 0; j < c; ++j) {
        if (!row[j].is_number()) throw InputError(field + ": non-numeric entry");
        m(i, j) = row[j].get<double>();
      }
    }
    if ((rows >= 0 && r != rows) || (cols >= 0 && c != cols)) {
      throw InputError(field + ": shape " + std::to_string(r) + "x" + std::to_string(c) +
                       ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    return m;
  }
  // Flat numeric array.
  std::vector<double> vals;
  vals.reserve(node.size());
  for (const auto& v : node) {
    if (!v.is_number()) throw InputError(field + ": non-numeric entry");
    vals.push_back(v.get<double>());
  }
  if (diag_ok && (rows < 0 || static_cast<int>(vals.size()) == rows) &&
      (rows < 0 || rows == cols)) {
    const int d = static_cast<int>(vals.size());
    Matrix m = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = vals[i];
    return m;
  }
  if (rows < 0 || cols < 0) {
    throw InputError(field + ": flat arrays need a known shape; use an array of rows");
  }
  if (static_cast<int>(vals.size()) != rows * cols) {
    throw InputError(field + ": flat array has " + std::to_string(vals.size()) +
                     " entries, expected " + std::to_string(rows * cols));
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = vals[static_cast<std::size_t>(i) * cols + j];
  }
  return m;
}

int require_int(const json& doc, const std::string& field) {
  if (!doc.contains(field) || !doc[field].is_number_integer()) {
    throw InputError(field + ": required integer field missing or malformed");
  }
  return doc[field].get<int>();
}

}  // namespace

LoadedSystem load_system(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("document: JSON parse failure: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("document: top level must be an object");

  LoadedSystem out;
  const int n = require_int(doc, "n");
  const int m = require_int(doc, "m");
  if (n <= 0) throw InputError("n: must be positive");
  if (m < 0) throw InputError("m: must be non-negative");

  if (!doc.contains("basis") || !doc["basis"].is_object()) {
    throw InputError("basis: required object missing");
  }
  const json& b = doc["basis"];
  BasisSpec basis;
  const std::string family = b.value("family", std::string("legendre"));
  if (family != "legendre") {
    throw InputError("basis.family: unknown family '" + family + "' (supported: legendre)");
  }
  basis.family = BasisFamily::legendre;
  basis.model_order = require_int(b, "nOrd");
  basis.approx_order = b.contains("N") ? require_int(b, "N") : basis.model_order;
  if (basis.model_order < 0) throw InputError("basis.nOrd: must be non-negative");
  if (basis.approx_order < 0) throw InputError("basis.N: must be non-negative");

  if (doc.contains("param_scale")) {
    const json& ps = doc["param_scale"];
    if (!ps.is_object() || !ps.contains("vmin") || !ps.contains("vmax")) {
      throw InputError("param_scale: expected object with vmin and vmax");
    }
    ParamScale scale{ps["vmin"].get<double>(), ps["vmax"].get<double>()};
    if (!(scale.v_min < scale.v_max)) throw InputError("param_scale: vmin must be < vmax");
    out.scale = scale;
  }

  const bool has_coeffs = doc.contains("A") || doc.contains("B");
  const bool has_grid = doc.contains("grid");
  if (has_coeffs == has_grid) {
    throw InputError("document: supply either A/B coefficient arrays or a grid, not both");
  }

  if (has_coeffs) {
    if (!doc.contains("A") || !doc.contains("B")) {
      throw InputError("document: A and B must both be present");
    }
    const json& ja = doc["A"];
    const json& jb = doc["B"];
    const std::size_t want = static_cast<std::size_t>(basis.model_order) + 1;
    if (!ja.is_array() || ja.size() != want) {
      throw InputError("A: expected " + std::to_string(want) + " matrices (nOrd+1)");
    }
    if (!jb.is_array() || jb.size() != want) {
      throw InputError("B: expected " + std::to_string(want) + " matrices (nOrd+1)");
    }
    UncertainLTI sys;
    sys.n = n;
    sys.m = m;
    sys.basis = basis;
    for (std::size_t i = 0; i < want; ++i) {
      sys.A.push_back(parse_matrix(ja[i], "A[" + std::to_string(i) + "]", n, n));
      sys.B.push_back(parse_matrix(jb[i], "B[" + std::to_string(i) + "]", n, m));
    }
    out.system = std::move(sys);
  } else {
    const json& jg = doc["grid"];
    if (!jg.is_array() || jg.empty()) throw InputError("grid: expected a non-empty array");
    std::vector<GridPoint> points;
    points.reserve(jg.size());
    for (std::size_t j = 0; j < jg.size(); ++j) {
      const json& e = jg[j];
      const std::string tag = "grid[" + std::to_string(j) + "]";
      if (!e.is_object()) throw InputError(tag + ": expected an object");
      double delta;
      if (e.contains("delta")) {
        delta = e["delta"].get<double>();
      } else if (e.contains("v")) {
        if (!out.scale) {
          throw InputError(tag + ".v: physical parameter values need param_scale");
        }
        delta = scale_param(e["v"].get<double>(), *out.scale);
      } else {
        throw InputError(tag + ": needs delta or v");
      }
      if (!e.contains("A") || !e.contains("B")) throw InputError(tag + ": needs A and B");
      points.push_back({delta, parse_matrix(e["A"], tag + ".A", n, n),
                        parse_matrix(e["B"], tag + ".B", n, m)});
    }
    UncertainLTI sys = fit_from_grid(points, basis.model_order);
    sys.basis = basis;  // keep the requested approximation order
    out.system = std::move(sys);
  }
  out.system.name = doc.value("name", std::string());
  out.system.validate();

  // Cost weights: either Q directly, or C with output weight Qy.
  CostWeights w;
  if (doc.contains("Q") && doc.contains("C")) {
    throw InputError("document: supply Q or {C, Qy}, not both");
  }
  if (doc.contains("Q")) {
    w.Q = parse_matrix(doc["Q"], "Q", n, n, /*diag_ok=*/true);
  } else if (doc.contains("C")) {
    if (!doc.contains("Qy")) throw InputError("Qy: required when C is given");
    Matrix c = parse_matrix(doc["C"], "C");
    if (c.cols() != n) throw InputError("C: column count must equal n");
    const int p = static_cast<int>(c.rows());
    Matrix qy = parse_matrix(doc["Qy"], "Qy", p, p, /*diag_ok=*/true);
    w.C = c;
    w.Qy = qy;
    w.Q = c.transpose() * qy * c;
  } else {
    throw InputError("Q: required (directly or via C and Qy)");
  }
  if (!doc.contains("R")) throw InputError("R: required");
  w.R = parse_matrix(doc["R"], "R", m, m, /*diag_ok=*/true);
  w.validate(n, m);
  out.weights = std::move(w);

  if (doc.contains("x0")) {
    const json& jx = doc["x0"];
    if (!jx.is_array() || static_cast<int>(jx.size()) != n) {
      throw InputError("x0: expected an array of n entries");
    }
    Vector x0(n);
    for (int i = 0; i < n; ++i) x0[i] = jx[i].get<double>();
    out.x0 = x0;
  }

  return out;
}

LoadedSystem load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_system(ss.str());
}

}  // namespace pclqr
