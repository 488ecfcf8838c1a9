#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pclqr/numerics.hpp"
#include "pclqr/sim.hpp"
#include "pclqr/synthesis.hpp"
#include "pclqr/types.hpp"

namespace pclqr::cli {

/// Resolved run parameters. Every emitted file carries this as a leading
/// comment line (CSV) or embedded object (JSON) so artifacts can be traced to
/// the exact invocation. The deterministic part excludes timing.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> options;  // insertion order
  double duration_ms = 0.0;

  std::string deterministic_line() const;
};

/// Shortest round-trip-exact decimal for CSV cells ("%.17g").
std::string format_double(double v);

void write_gain_document(const std::string& path, const GainResult& result,
                         const std::string& system_name, int n, int m,
                         const RunManifest& manifest);

/// Reads K (and the stated dimensions) back from a gain document.
Matrix load_gain_document(const std::string& path);

void write_trajectory_csv(const std::string& path, const TrajectoryBundle& bundle, int n,
                          int m, int p, const RunManifest& manifest);

void write_pole_csv(const std::string& path, const std::vector<double>& grid,
                    const std::vector<SpectralResult>& spectra, const RunManifest& manifest);

/// Pole map as a standalone SVG: unit circle, axes, one cross per eigenvalue.
void write_pole_svg(const std::string& path, const std::vector<SpectralResult>& spectra);

void write_mc_csv(const std::string& path, const std::vector<double>& moments,
                  const McCost& cost, const RunManifest& manifest);

void write_report_csv(const std::string& path, const std::vector<OrderReportRow>& rows,
                      const RunManifest& manifest);

}  // namespace pclqr::cli
