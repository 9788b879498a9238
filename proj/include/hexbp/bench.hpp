// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hexbp/cost_model.hpp"
#include "hexbp/operator.hpp"
#include "hexbp/solver.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hexbp {

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// One benchmark campaign: a BP, a set of degrees, a mesh size (explicit
/// dims or a target dof count auto-sized per degree), and the timing
/// protocol. Parsed from a flat JSON object with exactly these snake_case
/// keys; unknown keys are rejected.
struct BenchConfig {
  BPKind bp = BPKind::BP1;
  std::vector<int> degrees;
  std::optional<std::array<int, 3>> dims;
  std::optional<std::int64_t> target_dofs;
  double deform_amplitude = 0.0;
  std::vector<Backend> backends{Backend::Fused};
  int fixed_cg_iters = 20;
  int warmup_repeats = 2;
  int timed_repeats = 5;
  int threads = 0;  // 0 = library default
  std::string output_path;
};

struct BenchRecord {
  std::string bp;
  std::string backend;
  int p = 0;
  int q = 0;
  std::int64_t elements = 0;
  std::int64_t dofs = 0;
  int cg_iters = 0;
  double seconds = 0.0;
  double throughput = 0.0;  // dofs * cg_iters / seconds
  double model_flops_per_elem = 0.0;
  double model_reads_per_elem = 0.0;
  double model_ai = 0.0;
  int threads = 1;
};

struct RunOutput {
  std::vector<BenchRecord> records;
  std::vector<std::vector<double>> histories;  // CG residual history per record
  std::uint64_t seed = 0;
  std::vector<std::string> errors;  // per-run failures; the run continues
};

inline BPKind parse_bp(const std::string& s) {
  if (s == "bp1") return BPKind::BP1;
  if (s == "bp3") return BPKind::BP3;
  if (s == "bp5") return BPKind::BP5;
  throw config_error("unknown bp kind '" + s + "' (expected bp1, bp3 or bp5)");
}

inline Backend parse_backend(const std::string& s) {
  if (s == "multipass") return Backend::Multipass;
  if (s == "fused") return Backend::Fused;
  if (s == "oracle") return Backend::Oracle;
  throw config_error("unknown backend '" + s + "' (expected multipass, fused or oracle)");
}

inline BenchConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw config_error("config must be a JSON object");

  static const char* known[] = {"bp",        "degrees",       "dims",          "target_dofs",
                                "deform_amplitude", "backends", "fixed_cg_iters", "warmup_repeats",
                                "timed_repeats",    "threads",  "output_path"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
      throw config_error("unknown config key '" + key + "'");
  }

  BenchConfig cfg;
  try {
    if (!j.contains("bp")) throw config_error("missing required key 'bp'");
    cfg.bp = parse_bp(j.at("bp").get<std::string>());

    if (!j.contains("degrees")) throw config_error("missing required key 'degrees'");
    cfg.degrees = j.at("degrees").get<std::vector<int>>();
    if (cfg.degrees.empty()) throw config_error("'degrees' must be a non-empty array");
    for (int p : cfg.degrees)
      if (p < 1) throw config_error("degrees must be >= 1");

    if (j.contains("dims")) {
      auto d = j.at("dims").get<std::vector<int>>();
      if (d.size() != 3) throw config_error("'dims' must have exactly three entries");
      cfg.dims = std::array<int, 3>{d[0], d[1], d[2]};
      for (int e : *cfg.dims)
        if (e < 1) throw config_error("dims entries must be >= 1");
    }
    if (j.contains("target_dofs")) {
      cfg.target_dofs = j.at("target_dofs").get<std::int64_t>();
      if (*cfg.target_dofs < 1) throw config_error("target_dofs must be >= 1");
    }
    if (cfg.dims.has_value() == cfg.target_dofs.has_value())
      throw config_error("exactly one of 'dims' and 'target_dofs' is required");

    if (j.contains("deform_amplitude")) cfg.deform_amplitude = j.at("deform_amplitude").get<double>();
    if (!(cfg.deform_amplitude >= 0.0 && cfg.deform_amplitude <= kMaxDeformAmplitude))
      throw config_error("deform_amplitude must lie in [0, 0.15]");

    if (j.contains("backends")) {
      cfg.backends.clear();
      for (const auto& b : j.at("backends")) cfg.backends.push_back(parse_backend(b.get<std::string>()));
      if (cfg.backends.empty()) throw config_error("'backends' must be non-empty");
    }

    if (j.contains("fixed_cg_iters")) cfg.fixed_cg_iters = j.at("fixed_cg_iters").get<int>();
    if (cfg.fixed_cg_iters < 1) throw config_error("fixed_cg_iters must be >= 1");
    if (j.contains("warmup_repeats")) cfg.warmup_repeats = j.at("warmup_repeats").get<int>();
    if (cfg.warmup_repeats < 0) throw config_error("warmup_repeats must be >= 0");
    if (j.contains("timed_repeats")) cfg.timed_repeats = j.at("timed_repeats").get<int>();
    if (cfg.timed_repeats < 1) throw config_error("timed_repeats must be >= 1");
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (cfg.threads < 0) throw config_error("threads must be >= 0");
    if (j.contains("output_path")) cfg.output_path = j.at("output_path").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("malformed config value: ") + e.what());
  }
  return cfg;
}

inline BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// RNG seed: BENCH_SEED (decimal unsigned) when set, else a fixed default.
inline std::uint64_t bench_seed() {
  const char* env = std::getenv("BENCH_SEED");
  if (!env || !*env) return 20240101ull;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') throw config_error("BENCH_SEED must be a decimal unsigned integer");
  return v;
}

/// Largest (e, e, e) box with (e*p+1)^3 <= target (but at least one
/// element), so dof counts stay comparable across degrees.
inline std::array<int, 3> auto_size_dims(int p, std::int64_t target_dofs) {
  int e = 1;
  auto nodes = [&](int m) {
    const std::int64_t n = static_cast<std::int64_t>(m) * p + 1;
    return n * n * n;
  };
  while (nodes(e + 1) <= target_dofs) ++e;
  return {e, e, e};
}

namespace detail {

// Per-run RNG stream: mixes the base seed with the run parameters (not
// the backend, so every backend solves the identical system).
inline std::uint64_t mix_seed(std::uint64_t seed, BPKind bp, int p, const std::array<int, 3>& dims) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
  };
  mix(static_cast<std::uint64_t>(bp));
  mix(static_cast<std::uint64_t>(p));
  for (int d : dims) mix(static_cast<std::uint64_t>(d));
  return h;
}

}  // namespace detail

/// Run the configured sweep: for every (degree, backend) build the
/// problem, run warmup solves, then time `timed_repeats` solves of
/// exactly fixed_cg_iters unpreconditioned CG iterations on a seeded
/// random right-hand side (homogeneous essential boundary conditions for
/// the diffusion BPs) and keep the best time. Per-run failures are
/// recorded and the sweep continues.
inline RunOutput run_bench(const BenchConfig& config) {
  RunOutput out;
  out.seed = bench_seed();

#ifdef _OPENMP
  if (config.threads > 0) omp_set_num_threads(config.threads);
  const int threads_used = omp_get_max_threads();
#else
  const int threads_used = 1;
#endif

  for (int p : config.degrees) {
    const std::array<int, 3> dims = config.dims ? *config.dims : auto_size_dims(p, *config.target_dofs);

    for (Backend backend : config.backends) {
      try {
        const HexMesh mesh = build_box_mesh(dims, p, {1.0, 1.0, 1.0}, config.deform_amplitude);
        auto setup = make_setup(config.bp, mesh);
        const OperatorHandle op(backend, setup);

        std::mt19937_64 rng(detail::mix_seed(out.seed, config.bp, p, dims));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<double> b(setup->l_size());
        for (double& v : b) v = dist(rng);

        std::optional<ConstrainedOperator> constrained;
        if (is_diffusion(config.bp)) {
          constrained.emplace(op, boundary_bcs(mesh));
          for (int dof : constrained->bcs().dofs) b[dof] = 0.0;
        }
        auto apply = [&](std::span<const double> u, std::vector<double>& w) {
          if (constrained)
            constrained->apply(u, w);
          else
            op.apply(u, w);
        };

        std::vector<double> x(b.size(), 0.0);
        CGReport report;
        for (int warm = 0; warm < config.warmup_repeats; ++warm) {
          std::fill(x.begin(), x.end(), 0.0);
          cg(apply, b, x, 0.0, config.fixed_cg_iters);
        }
        double best = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < config.timed_repeats; ++rep) {
          std::fill(x.begin(), x.end(), 0.0);
          const auto t0 = std::chrono::steady_clock::now();
          CGReport r = cg(apply, b, x, 0.0, config.fixed_cg_iters);
          const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          if (dt < best) {
            best = dt;
            report = std::move(r);
          }
        }

        BenchRecord rec;
        rec.bp = to_string(config.bp);
        rec.backend = to_string(backend);
        rec.p = p;
        rec.q = setup->basis.num_quad_1d();
        rec.elements = mesh.num_elements();
        rec.dofs = setup->l_size();
        rec.cg_iters = config.fixed_cg_iters;
        rec.seconds = best;
        rec.throughput = static_cast<double>(rec.dofs) * rec.cg_iters / best;
        const CostModel model = cost_model(p, config.bp == BPKind::BP5);
        rec.model_flops_per_elem = static_cast<double>(model.flops_per_elem);
        rec.model_reads_per_elem = static_cast<double>(model.reads_per_elem);
        rec.model_ai = model.arithmetic_intensity;
        rec.threads = threads_used;

        out.records.push_back(std::move(rec));
        out.histories.push_back(std::move(report.residual_history));
      } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << to_string(config.bp) << " p=" << p << " backend=" << to_string(backend) << ": " << e.what();
        out.errors.push_back(msg.str());
      }
    }
  }
  return out;
}

inline const char* kCsvHeader =
    "bp,backend,p,q,elements,dofs,cg_iters,seconds,throughput,"
    "model_flops_per_elem,model_reads_per_elem,model_ai,threads";

inline void emit_csv(const std::vector<BenchRecord>& records, std::ostream& os) {
  os << kCsvHeader << "\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%d,%lld,%lld,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                  r.bp.c_str(), r.backend.c_str(), r.p, r.q, static_cast<long long>(r.elements),
                  static_cast<long long>(r.dofs), r.cg_iters, r.seconds, r.throughput,
                  r.model_flops_per_elem, r.model_reads_per_elem, r.model_ai, r.threads);
    os << buf;
  }
}

inline void emit_csv(const std::vector<BenchRecord>& records, const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // binary: LF line endings everywhere
  if (!os) throw std::runtime_error("emit_csv: cannot open '" + path + "'");
  emit_csv(records, os);
  if (!os) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

inline std::vector<BenchRecord> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("parse_csv: empty input");
  if (line != kCsvHeader) throw std::runtime_error("parse_csv: unexpected header");
  std::vector<BenchRecord> records;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 13) throw std::runtime_error("parse_csv: expected 13 columns");
    BenchRecord r;
    r.bp = f[0];
    r.backend = f[1];
    r.p = std::stoi(f[2]);
    r.q = std::stoi(f[3]);
    r.elements = std::stoll(f[4]);
    r.dofs = std::stoll(f[5]);
    r.cg_iters = std::stoi(f[6]);
    r.seconds = std::strtod(f[7].c_str(), nullptr);
    r.throughput = std::strtod(f[8].c_str(), nullptr);
    r.model_flops_per_elem = std::strtod(f[9].c_str(), nullptr);
    r.model_reads_per_elem = std::strtod(f[10].c_str(), nullptr);
    r.model_ai = std::strtod(f[11].c_str(), nullptr);
    r.threads = std::stoi(f[12]);
    records.push_back(std::move(r));
  }
  return records;
}

/// Plot-friendly blocks, one per (backend, p) sorted ascending: a
/// `# backend=<b> p=<p>` header then `dofs throughput` lines with dofs
/// strictly increasing, blank line between blocks.
inline void emit_plotdata(const std::vector<BenchRecord>& records, std::ostream& os) {
  std::vector<const BenchRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const BenchRecord* a, const BenchRecord* b) {
    if (a->backend != b->backend) return a->backend < b->backend;
    if (a->p != b->p) return a->p < b->p;
    return a->dofs < b->dofs;
  });

  char buf[128];
  bool first_block = true;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const std::string& backend = sorted[i]->backend;
    const int p = sorted[i]->p;
    if (!first_block) os << "\n";
    first_block = false;
    os << "# backend=" << backend << " p=" << p << "\n";
    std::int64_t last_dofs = -1;
    for (; i < sorted.size() && sorted[i]->backend == backend && sorted[i]->p == p; ++i) {
      if (sorted[i]->dofs == last_dofs) continue;  // keep dofs strictly increasing
      last_dofs = sorted[i]->dofs;
      std::snprintf(buf, sizeof buf, "%lld %.17g\n", static_cast<long long>(sorted[i]->dofs),
                    sorted[i]->throughput);
      os << buf;
    }
  }
}

inline void emit_plotdata(const std::vector<BenchRecord>& records, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("emit_plotdata: cannot open '" + path + "'");
  emit_plotdata(records, os);
  if (!os) throw std::runtime_error("emit_plotdata: write failed for '" + path + "'");
}

}  // namespace hexbp
