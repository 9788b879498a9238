// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
// bench: matrix-free operator benchmark driver.
//   bench run    --config cfg.json [--output out.csv] [--plot out.dat] [--threads N]
//   bench verify [--p P] [--mesh EXxEYxEZ] [--bp bp1|bp3|bp5]
//   bench model  --p-min A --p-max B [--collocated]
//
// Exit codes: 0 success, 1 verification failure, 2 bad config/arguments,
// 3 runtime error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hexbp/bench.hpp"
#include "hexbp/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitBadConfig = 2;
constexpr int kExitRuntime = 3;

std::array<int, 3> parse_mesh_dims(const std::string& s) {
  std::array<int, 3> dims{};
  char extra = 0;
  if (std::sscanf(s.c_str(), "%dx%dx%d%c", &dims[0], &dims[1], &dims[2], &extra) != 3)
    throw hexbp::config_error("mesh must look like EXxEYxEZ, e.g. 2x2x2");
  for (int d : dims)
    if (d < 1) throw hexbp::config_error("mesh dimensions must be >= 1");
  return dims;
}

int run_command(const std::string& config_path, const std::string& output_override,
                const std::string& plot_path, int threads_override) {
  hexbp::BenchConfig config = hexbp::load_config(config_path);
  if (threads_override > 0) config.threads = threads_override;

  const hexbp::RunOutput out = hexbp::run_bench(config);

  std::cerr << "# seed=" << out.seed << " records=" << out.records.size() << "\n";
  for (const auto& err : out.errors) std::cerr << "error: " << err << "\n";

  const std::string csv_path = !output_override.empty() ? output_override : config.output_path;
  if (csv_path.empty())
    hexbp::emit_csv(out.records, std::cout);
  else
    hexbp::emit_csv(out.records, csv_path);
  if (!plot_path.empty()) hexbp::emit_plotdata(out.records, plot_path);

  if (out.records.empty() && !out.errors.empty()) return kExitRuntime;
  return kExitOk;
}

int verify_command(std::optional<int> p, std::optional<std::string> mesh, std::optional<std::string> bp) {
  std::vector<hexbp::EquivalenceCase> cases = hexbp::default_equivalence_cases();

  if (p) {
    std::erase_if(cases, [&](const auto& c) { return c.p != *p; });
    if (*p < 1) throw hexbp::config_error("--p must be >= 1");
    if (cases.empty())  // degree outside the default sweep: test it directly
      for (hexbp::BPKind kind : {hexbp::BPKind::BP1, hexbp::BPKind::BP3, hexbp::BPKind::BP5})
        for (double a : {0.0, 0.1}) cases.push_back({kind, *p, {2, 2, 2}, a});
  }
  if (mesh) {
    const auto dims = parse_mesh_dims(*mesh);
    for (auto& c : cases) c.dims = dims;
  }
  if (bp) {
    const hexbp::BPKind kind = hexbp::parse_bp(*bp);
    std::erase_if(cases, [&](const auto& c) { return c.bp != kind; });
  }

  bool all_pass = true;
  double worst = 0.0;
  for (const auto& c : cases) {
    try {
      const hexbp::EquivalenceResult r = hexbp::check_equivalence(c);
      const double rel = std::max(r.max_rel_fused, r.max_rel_multipass);
      worst = std::max(worst, rel);
      std::printf("%-4s p=%d mesh=%dx%dx%d a=%.2f  rel=%.3e sym=%.3e %s\n", hexbp::to_string(c.bp).c_str(),
                  c.p, c.dims[0], c.dims[1], c.dims[2], c.amplitude, rel, r.max_symmetry,
                  r.pass ? "ok" : "FAIL");
      all_pass = all_pass && r.pass;
    } catch (const hexbp::degenerate_element_error& e) {
      std::printf("%-4s p=%d mesh=%dx%dx%d a=%.2f  DEGENERATE: %s\n", hexbp::to_string(c.bp).c_str(), c.p,
                  c.dims[0], c.dims[1], c.dims[2], c.amplitude, e.what());
      all_pass = false;
    }
  }
  std::printf("%zu cases, worst backend/oracle deviation %.3e, tolerance %.1e: %s\n", cases.size(), worst,
              hexbp::kEquivalenceTol, all_pass ? "PASS" : "FAIL");
  return all_pass ? kExitOk : kExitVerifyFailed;
}

int model_command(int p_min, int p_max, bool collocated) {
  if (p_min < 1 || p_max < p_min) throw hexbp::config_error("need 1 <= --p-min <= --p-max");
  std::printf("p,collocated,flops_per_elem,reads_per_elem,ai\n");
  for (int p = p_min; p <= p_max; ++p) {
    const hexbp::CostModel m = hexbp::cost_model(p, collocated);
    std::printf("%d,%d,%llu,%llu,%.17g\n", p, collocated ? 1 : 0,
                static_cast<unsigned long long>(m.flops_per_elem),
                static_cast<unsigned long long>(m.reads_per_elem), m.arithmetic_intensity);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrix-free tensor-product operator benchmarks"};
  app.require_subcommand(1);

  std::string config_path, output_path, plot_path;
  int threads = 0;
  CLI::App* run = app.add_subcommand("run", "run a benchmark sweep from a JSON config");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--output", output_path, "CSV output path (default: config output_path or stdout)");
  run->add_option("--plot", plot_path, "plot-data output path");
  run->add_option("--threads", threads, "override the configured thread count");

  std::optional<int> verify_p;
  std::optional<std::string> verify_mesh, verify_bp;
  CLI::App* verify = app.add_subcommand("verify", "check backends against the assembled oracle");
  verify->add_option("--p", verify_p, "restrict to one polynomial degree");
  verify->add_option("--mesh", verify_mesh, "mesh dims EXxEYxEZ (default: the standard sweep)");
  verify->add_option("--bp", verify_bp, "restrict to one problem (bp1|bp3|bp5)");

  int p_min = 1, p_max = 8;
  bool collocated = false;
  CLI::App* model = app.add_subcommand("model", "print the per-element cost model as CSV");
  model->add_option("--p-min", p_min, "lowest degree")->required();
  model->add_option("--p-max", p_max, "highest degree")->required();
  model->add_flag("--collocated", collocated, "collocated quadrature variant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadConfig;
  }

  try {
    if (run->parsed()) return run_command(config_path, output_path, plot_path, threads);
    if (verify->parsed()) return verify_command(verify_p, verify_mesh, verify_bp);
    if (model->parsed()) return model_command(p_min, p_max, collocated);
  } catch (const hexbp::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitBadConfig;
}
