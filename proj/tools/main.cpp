#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "output.hpp"
#include "pclqr/config.hpp"
#include "pclqr/errors.hpp"
#include "pclqr/galerkin.hpp"
#include "pclqr/stability.hpp"
#include "pclqr/synthesis.hpp"

namespace {

using namespace pclqr;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNoCertificate = 3;

std::vector<double> parse_delta_range(const std::string& text) {
  // "a:b:step", endpoints inclusive.
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw InputError("deltas: expected format a:b:step");
  }
  try {
    const double a = std::stod(text.substr(0, c1));
    const double b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = std::stod(text.substr(c2 + 1));
    if (step <= 0.0 || b < a) throw InputError("deltas: need b >= a and step > 0");
    const int count = static_cast<int>(std::llround((b - a) / step)) + 1;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) grid.push_back(std::min(a + i * step, b));
    return grid;
  } catch (const std::invalid_argument&) {
    throw InputError("deltas: non-numeric bound in '" + text + "'");
  }
}

std::vector<int> parse_orders(const std::string& text) {
  // Either "a..b" or a comma list.
  const auto dots = text.find("..");
  std::vector<int> orders;
  try {
    if (dots != std::string::npos) {
      const int a = std::stoi(text.substr(0, dots));
      const int b = std::stoi(text.substr(dots + 2));
      if (b < a) throw InputError("orders: need a <= b in 'a..b'");
      for (int v = a; v <= b; ++v) orders.push_back(v);
    } else {
      std::size_t pos = 0;
      while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        orders.push_back(std::stoi(text.substr(pos, comma - pos)));
        pos = comma + 1;
      }
    }
  } catch (const std::invalid_argument&) {
    throw InputError("orders: malformed list '" + text + "'");
  }
  if (orders.empty()) throw InputError("orders: empty list");
  return orders;
}

Vector parse_x0(const std::string& text, int n) {
  std::vector<double> vals;
  std::size_t pos = 0;
  try {
    while (pos < text.size()) {
      auto comma = text.find(',', pos);
      if (comma == std::string::npos) comma = text.size();
      vals.push_back(std::stod(text.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  } catch (const std::invalid_argument&) {
    throw InputError("x0: non-numeric entry in '" + text + "'");
  }
  if (static_cast<int>(vals.size()) != n) {
    throw InputError("x0: got " + std::to_string(vals.size()) + " entries, expected n=" +
                     std::to_string(n));
  }
  Vector x0(n);
  for (int i = 0; i < n; ++i) x0[i] = vals[static_cast<std::size_t>(i)];
  return x0;
}

Vector resolve_x0(const std::string& flag, const LoadedSystem& loaded) {
  if (!flag.empty()) return parse_x0(flag, loaded.system.n);
  if (loaded.x0) return *loaded.x0;
  throw InputError("x0: not given on the command line and absent from the configuration");
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

int cmd_synth(const std::string& config_path, int order_flag, const std::string& out_path,
              bool certify) {
  Timer timer;
  LoadedSystem loaded = load_system_file(config_path);
  const int order = order_flag >= 0 ? order_flag : loaded.system.basis.approx_order;
  if (order < loaded.system.basis.model_order) {
    std::cerr << "warning: approximation order " << order << " is below the model order "
              << loaded.system.basis.model_order
              << "; surrogate products alias below the model resolution\n";
  }

  cli::RunManifest manifest;
  manifest.command = "synth";
  manifest.options = {{"config", config_path},
                      {"order", std::to_string(order)},
                      {"certify", certify ? "true" : "false"}};
  try {
    GainResult result = synthesize(loaded.system, loaded.weights, order, certify);
    manifest.duration_ms = timer.elapsed_ms();
    cli::write_gain_document(out_path, result, loaded.system.name, loaded.system.n,
                             loaded.system.m, manifest);
    std::cout << "synth ok: order=" << order
              << " |K|=" << cli::format_double(result.K.operatorNorm())
              << " surrogate_radius=" << cli::format_double(result.closed_loop_radius)
              << (result.surrogate_radius_warning ? " (warning: surrogate not contractive)"
                                                  : "")
              << " -> " << out_path << "\n";
    if (result.ems_certificate) {
      std::cout << "certificate: "
                << (result.ems_certificate->feasible ? "feasible" : "not found")
                << " margin=" << cli::format_double(result.ems_certificate->margin) << "\n";
    }
    return kExitOk;
  } catch (const SynthesisInfeasible& e) {
    std::cerr << "synthesis infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  }
}

int cmd_stability(const std::string& config_path, const std::string& gain_path,
                  bool open_loop, int order_flag, int samples, int steps,
                  std::uint64_t seed) {
  LoadedSystem loaded = load_system_file(config_path);
  const int order = order_flag >= 0 ? order_flag : loaded.system.basis.approx_order;
  std::optional<Matrix> gain;
  if (!open_loop) {
    if (gain_path.empty()) {
      throw InputError("gain: supply --gain or --open-loop");
    }
    Matrix k = cli::load_gain_document(gain_path);
    if (k.rows() != loaded.system.m || k.cols() != loaded.system.n) {
      throw InputError("gain: K shape does not match the configured system");
    }
    gain = std::move(k);
  }

  StabilityCertificate cert = certify_ems(loaded.system, gain, order);
  std::cout << (cert.feasible ? "feasible" : "infeasible") << " order=" << order
            << " margin=" << cli::format_double(cert.margin)
            << " pbar_min_eig=" << cli::format_double(cert.pbar_min_eig) << "\n";

  if (cert.feasible && samples > 0) {
    Vector x0 = loaded.x0 ? *loaded.x0 : Vector(Vector::Ones(loaded.system.n));
    SecondMomentTrace trace =
        mc_second_moment(loaded.system, gain, samples, steps, seed, x0);
    const double initial = trace.moments.front();
    const double last = trace.moments.back();
    std::cout << "mc: samples=" << samples << " steps=" << steps
              << " moment_ratio=" << cli::format_double(initial > 0.0 ? last / initial : 0.0)
              << " divergent=" << trace.divergent_samples << "\n";
  }
  return cert.feasible ? kExitOk : kExitNoCertificate;
}

int cmd_simulate(const std::string& config_path, const std::string& gain_path,
                 const std::string& x0_flag, int steps, const std::string& deltas,
                 const std::string& out_path) {
  LoadedSystem loaded = load_system_file(config_path);
  Matrix k = cli::load_gain_document(gain_path);
  if (k.rows() != loaded.system.m || k.cols() != loaded.system.n) {
    throw InputError("gain: K shape does not match the configured system");
  }
  const Vector x0 = resolve_x0(x0_flag, loaded);
  const std::vector<double> grid = parse_delta_range(deltas);

  cli::RunManifest manifest;
  manifest.command = "simulate";
  manifest.options = {{"config", config_path},
                      {"gain", gain_path},
                      {"steps", std::to_string(steps)},
                      {"deltas", deltas}};

  TrajectoryBundle bundle =
      sweep(loaded.system, k, grid, x0, steps, loaded.weights.C);
  const int p = loaded.weights.C ? static_cast<int>(loaded.weights.C->rows()) : 0;
  cli::write_trajectory_csv(out_path, bundle, loaded.system.n, loaded.system.m, p, manifest);
  int diverged = 0;
  for (const auto& d : bundle.diverged_at) diverged += d.has_value();
  std::cout << "simulate ok: " << grid.size() << " parameter points, " << steps
            << " steps -> " << out_path;
  if (diverged > 0) std::cout << " (" << diverged << " diverged)";
  std::cout << "\n";
  return kExitOk;
}

int cmd_poles(const std::string& config_path, const std::string& gain_path,
              const std::string& deltas, const std::string& svg_path,
              const std::string& csv_path) {
  LoadedSystem loaded = load_system_file(config_path);
  std::optional<Matrix> gain;
  if (!gain_path.empty()) {
    Matrix k = cli::load_gain_document(gain_path);
    if (k.rows() != loaded.system.m || k.cols() != loaded.system.n) {
      throw InputError("gain: K shape does not match the configured system");
    }
    gain = std::move(k);
  }
  const std::vector<double> grid = parse_delta_range(deltas);
  std::vector<SpectralResult> spectra = pole_sweep(loaded.system, gain, grid);

  cli::RunManifest manifest;
  manifest.command = "poles";
  manifest.options = {{"config", config_path},
                      {"gain", gain_path.empty() ? "open-loop" : gain_path},
                      {"deltas", deltas}};
  if (!csv_path.empty()) cli::write_pole_csv(csv_path, grid, spectra, manifest);
  if (!svg_path.empty()) cli::write_pole_svg(svg_path, spectra);

  double max_radius = 0.0;
  for (const auto& sr : spectra) max_radius = std::max(max_radius, sr.spectral_radius);
  std::cout << "poles ok: " << grid.size() << " parameter points, max |lambda|="
            << cli::format_double(max_radius) << "\n";
  return kExitOk;
}

int cmd_mc(const std::string& config_path, const std::string& gain_path,
           const std::string& x0_flag, int samples, int steps, std::uint64_t seed,
           const std::string& out_path) {
  LoadedSystem loaded = load_system_file(config_path);
  Matrix k = cli::load_gain_document(gain_path);
  if (k.rows() != loaded.system.m || k.cols() != loaded.system.n) {
    throw InputError("gain: K shape does not match the configured system");
  }
  const Vector x0 = resolve_x0(x0_flag, loaded);

  SecondMomentTrace trace = mc_second_moment(loaded.system, k, samples, steps, seed, x0);
  McCost cost = mc_cost(loaded.system, loaded.weights, k, x0, samples, steps, seed);

  cli::RunManifest manifest;
  manifest.command = "mc";
  manifest.options = {{"config", config_path},
                      {"gain", gain_path},
                      {"samples", std::to_string(samples)},
                      {"steps", std::to_string(steps)},
                      {"seed", std::to_string(seed)}};
  cli::write_mc_csv(out_path, trace.moments, cost, manifest);
  std::cout << "mc ok: mean_cost=" << cli::format_double(cost.mean_cost)
            << " std_err=" << cli::format_double(cost.std_err)
            << " divergent=" << cost.divergent_samples
            << (cost.unstable_warning ? " (warning: unstable in probability)" : "") << " -> "
            << out_path << "\n";
  return kExitOk;
}

int cmd_report(const std::string& config_path, const std::string& orders_text,
               const std::string& out_path) {
  LoadedSystem loaded = load_system_file(config_path);
  const std::vector<int> orders = parse_orders(orders_text);
  std::vector<OrderReportRow> rows = gain_vs_order(loaded.system, loaded.weights, orders);

  cli::RunManifest manifest;
  manifest.command = "report";
  manifest.options = {{"config", config_path}, {"orders", orders_text}};
  cli::write_report_csv(out_path, rows, manifest);

  int ok = 0;
  for (const auto& row : rows) ok += row.feasible;
  std::cout << "report ok: " << ok << "/" << rows.size() << " orders feasible -> "
            << out_path << "\n";
  return ok > 0 ? kExitOk : kExitInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial-chaos LQR synthesis for uncertain discrete-time linear systems"};
  app.require_subcommand(1);

  std::string config_path, gain_path, out_path, svg_path, csv_path;
  std::string deltas = "-1:1:0.1";
  std::string orders_text = "1..7";
  std::string x0_flag;
  int order = -1;
  int steps = 100;
  int samples = 10000;
  std::uint64_t seed = 1;
  bool certify = false;
  bool open_loop = false;

  auto* synth = app.add_subcommand("synth", "Synthesize a fixed gain and write it to JSON");
  synth->add_option("-c,--config", config_path, "System configuration JSON")->required();
  synth->add_option("-N,--order", order, "Approximation order (default: config basis.N)");
  synth->add_option("-o,--out", out_path, "Gain document path")->required();
  synth->add_flag("--certify", certify, "Also search for a closed-loop EMS certificate");

  auto* stability =
      app.add_subcommand("stability", "Search for an EMS stability certificate");
  stability->add_option("-c,--config", config_path, "System configuration JSON")->required();
  stability->add_option("-g,--gain", gain_path, "Gain document (closed loop)");
  stability->add_flag("--open-loop", open_loop, "Certify the open-loop system");
  stability->add_option("-N,--order", order, "Approximation order");
  stability->add_option("--samples", samples, "Monte Carlo corroboration sample count");
  stability->add_option("--steps", steps, "Monte Carlo corroboration steps");
  stability->add_option("--seed", seed, "Monte Carlo seed");

  auto* simulate = app.add_subcommand("simulate", "Sweep closed-loop trajectories to CSV");
  simulate->add_option("-c,--config", config_path, "System configuration JSON")->required();
  simulate->add_option("-g,--gain", gain_path, "Gain document")->required();
  simulate->add_option("--x0", x0_flag, "Initial state, comma separated");
  simulate->add_option("--steps", steps, "Number of steps");
  simulate->add_option("--deltas", deltas, "Parameter grid a:b:step");
  simulate->add_option("-o,--out", out_path, "CSV path")->required();

  auto* poles = app.add_subcommand("poles", "Pole map across the parameter grid");
  poles->add_option("-c,--config", config_path, "System configuration JSON")->required();
  poles->add_option("-g,--gain", gain_path, "Gain document (omit for open loop)");
  poles->add_option("--deltas", deltas, "Parameter grid a:b:step");
  poles->add_option("--svg", svg_path, "SVG output path");
  poles->add_option("--csv,-o,--out", csv_path, "CSV output path");

  auto* mc = app.add_subcommand("mc", "Monte Carlo second moment and cost to CSV");
  mc->add_option("-c,--config", config_path, "System configuration JSON")->required();
  mc->add_option("-g,--gain", gain_path, "Gain document")->required();
  mc->add_option("--x0", x0_flag, "Initial state, comma separated");
  mc->add_option("--samples", samples, "Sample count");
  mc->add_option("--steps", steps, "Steps per sample");
  mc->add_option("--seed", seed, "Seed");
  mc->add_option("-o,--out", out_path, "CSV path")->required();

  auto* report = app.add_subcommand("report", "Gain norm and radius per order to CSV");
  report->add_option("-c,--config", config_path, "System configuration JSON")->required();
  report->add_option("--orders", orders_text, "Order list: a..b or comma separated");
  report->add_option("-o,--out", out_path, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (synth->parsed()) return cmd_synth(config_path, order, out_path, certify);
    if (stability->parsed()) {
      return cmd_stability(config_path, gain_path, open_loop, order, samples, steps, seed);
    }
    if (simulate->parsed()) {
      return cmd_simulate(config_path, gain_path, x0_flag, steps, deltas, out_path);
    }
    if (poles->parsed()) {
      return cmd_poles(config_path, gain_path, deltas, svg_path, csv_path);
    }
    if (mc->parsed()) {
      return cmd_mc(config_path, gain_path, x0_flag, samples, steps, seed, out_path);
    }
    if (report->parsed()) return cmd_report(config_path, orders_text, out_path);
  } catch (const SynthesisInfeasible& e) {
    std::cerr << "synthesis infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
