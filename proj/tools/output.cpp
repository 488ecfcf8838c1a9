#include "output.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "pclqr/errors.hpp"

namespace pclqr::cli {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("output: cannot open '" + path + "' for writing");
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string RunManifest::deterministic_line() const {
  std::string line = "# pclqr " + command;
  for (const auto& [key, value] : options) line += " " + key + "=" + value;
  line += " version=0.1.0";
  return line;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_gain_document(const std::string& path, const GainResult& result,
                         const std::string& system_name, int n, int m,
                         const RunManifest& manifest) {
  json doc;
  doc["name"] = system_name;
  doc["n"] = n;
  doc["m"] = m;
  doc["order"] = result.order;
  doc["K"] = matrix_to_json(result.K);
  doc["P_pc"] = matrix_to_json(result.P_pc);
  doc["riccati_residual"] = result.riccati_residual;
  doc["lmi1_min_eig"] = result.lmi1_min_eig;
  doc["lmi2_gap"] = result.lmi2_gap;
  doc["closed_loop_radius"] = result.closed_loop_radius;
  doc["surrogate_radius_warning"] = result.surrogate_radius_warning;
  if (result.ems_certificate) {
    const auto& cert = *result.ems_certificate;
    doc["certificate"] = {{"feasible", cert.feasible},
                          {"margin", cert.margin},
                          {"pbar_min_eig", cert.pbar_min_eig},
                          {"order", cert.order}};
  } else {
    doc["certificate"] = nullptr;
  }
  json man;
  man["command"] = manifest.command;
  for (const auto& [key, value] : manifest.options) man["options"][key] = value;
  man["version"] = "0.1.0";
  man["duration_ms"] = manifest.duration_ms;
  doc["manifest"] = std::move(man);

  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

Matrix load_gain_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("gain: cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw InputError(std::string("gain: JSON parse failure: ") + e.what());
  }
  if (!doc.contains("K") || !doc["K"].is_array()) {
    throw InputError("gain: document has no K matrix");
  }
  const json& jk = doc["K"];
  const int rows = static_cast<int>(jk.size());
  const int cols = rows > 0 ? static_cast<int>(jk[0].size()) : 0;
  Matrix k(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(jk[i].size()) != cols) throw InputError("gain: K has ragged rows");
    for (int j = 0; j < cols; ++j) k(i, j) = jk[i][j].get<double>();
  }
  return k;
}

void write_trajectory_csv(const std::string& path, const TrajectoryBundle& bundle, int n,
                          int m, int p, const RunManifest& manifest) {
  auto out = open_out(path);
  out << manifest.deterministic_line() << "\n";
  out << "delta,t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= m; ++i) out << ",u" << i;
  for (int i = 1; i <= p; ++i) out << ",y" << i;
  out << "\n";
  for (std::size_t d = 0; d < bundle.deltas.size(); ++d) {
    const Trajectory& run = bundle.runs[d];
    for (std::size_t t = 0; t < run.states.size(); ++t) {
      out << format_double(bundle.deltas[d]) << "," << t;
      for (int i = 0; i < n; ++i) out << "," << format_double(run.states[t][i]);
      for (int i = 0; i < m; ++i) out << "," << format_double(run.inputs[t][i]);
      if (p > 0) {
        const Vector& y = bundle.outputs[d][t];
        for (int i = 0; i < p; ++i) out << "," << format_double(y[i]);
      }
      out << "\n";
    }
  }
}

void write_pole_csv(const std::string& path, const std::vector<double>& grid,
                    const std::vector<SpectralResult>& spectra,
                    const RunManifest& manifest) {
  auto out = open_out(path);
  out << manifest.deterministic_line() << "\n";
  out << "delta,re,im\n";
  for (std::size_t d = 0; d < grid.size(); ++d) {
    for (int i = 0; i < spectra[d].eigenvalues.size(); ++i) {
      const auto ev = spectra[d].eigenvalues[i];
      out << format_double(grid[d]) << "," << format_double(ev.real()) << ","
          << format_double(ev.imag()) << "\n";
    }
  }
}

void write_pole_svg(const std::string& path, const std::vector<SpectralResult>& spectra) {
  // Fixed frame: [-1.6, 1.6]^2 mapped onto a 480-px square.
  const double half = 1.6;
  const double size = 480.0;
  auto px = [&](double v) { return (v + half) / (2.0 * half) * size; };
  auto py = [&](double v) { return size - (v + half) / (2.0 * half) * size; };

  auto out = open_out(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
         "viewBox=\"0 0 480 480\">\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"480\" height=\"480\" fill=\"white\"/>\n";
  out << "  <line x1=\"" << px(-half) << "\" y1=\"" << py(0.0) << "\" x2=\"" << px(half)
      << "\" y2=\"" << py(0.0) << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  out << "  <line x1=\"" << px(0.0) << "\" y1=\"" << py(-half) << "\" x2=\"" << px(0.0)
      << "\" y2=\"" << py(half) << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  out << "  <circle cx=\"" << px(0.0) << "\" cy=\"" << py(0.0) << "\" r=\""
      << (size / (2.0 * half)) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  for (const SpectralResult& sr : spectra) {
    for (int i = 0; i < sr.eigenvalues.size(); ++i) {
      const double x = px(sr.eigenvalues[i].real());
      const double y = py(sr.eigenvalues[i].imag());
      out << "  <path d=\"M " << x - 3 << " " << y - 3 << " L " << x + 3 << " " << y + 3
          << " M " << x - 3 << " " << y + 3 << " L " << x + 3 << " " << y - 3
          << "\" stroke=\"#1f4f9f\" stroke-width=\"1.2\" fill=\"none\"/>\n";
    }
  }
  out << "</svg>\n";
}

void write_mc_csv(const std::string& path, const std::vector<double>& moments,
                  const McCost& cost, const RunManifest& manifest) {
  auto out = open_out(path);
  out << manifest.deterministic_line() << "\n";
  out << "t,second_moment\n";
  for (std::size_t t = 0; t < moments.size(); ++t) {
    out << t << "," << format_double(moments[t]) << "\n";
  }
  out << "# cost_mean=" << format_double(cost.mean_cost)
      << " cost_std_err=" << format_double(cost.std_err)
      << " divergent_samples=" << cost.divergent_samples << "\n";
}

void write_report_csv(const std::string& path, const std::vector<OrderReportRow>& rows,
                      const RunManifest& manifest) {
  auto out = open_out(path);
  out << manifest.deterministic_line() << "\n";
  out << "order,knorm,surrogate_radius,feasible\n";
  for (const OrderReportRow& row : rows) {
    out << row.order << "," << format_double(row.gain_norm) << ","
        << format_double(row.surrogate_radius) << "," << (row.feasible ? "true" : "false")
        << "\n";
  }
}

}  // namespace pclqr::cli
