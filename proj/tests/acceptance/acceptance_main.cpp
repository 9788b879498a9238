// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: runs every release criterion end to end and prints
// one PASS/FAIL line per criterion. Exit code 0 only if all fatal
// criteria pass (criterion 7's throughput comparison is reported but
// machine-dependent, so it never fails the run).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hexbp/bench.hpp"
#include "hexbp/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace hexbp;

struct Criterion {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Criterion> g_results;

void record(int id, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  g_results.push_back({id, pass, detail});
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Criteria 1 and 2 share the sweep: backend-vs-oracle equivalence plus
// the operator algebra checks on every configuration.
void criteria_equivalence_and_algebra() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_rel = 0.0, worst_sym = 0.0, worst_null = 0.0;
  double min_quadratic = std::numeric_limits<double>::infinity();
  bool equiv_pass = true, algebra_pass = true;
  int cases = 0, degenerate = 0;

  for (const EquivalenceCase& c : default_equivalence_cases()) {
    ++cases;
    try {
      const EquivalenceResult r = check_equivalence(c, 10, kEquivalenceTol);
      worst_rel = std::max({worst_rel, r.max_rel_fused, r.max_rel_multipass});
      worst_sym = std::max(worst_sym, r.max_symmetry);
      equiv_pass = equiv_pass && r.max_rel_fused <= kEquivalenceTol && r.max_rel_multipass <= kEquivalenceTol;
      algebra_pass = algebra_pass && r.max_symmetry <= kEquivalenceTol;
      if (is_diffusion(c.bp)) {
        worst_null = std::max(worst_null, r.nullspace_residual);
        algebra_pass = algebra_pass && r.nullspace_residual <= kEquivalenceTol;
      } else {
        min_quadratic = std::min(min_quadratic, r.min_quadratic_form);
        algebra_pass = algebra_pass && r.min_quadratic_form > 0.0;
      }
    } catch (const degenerate_element_error& e) {
      // The mandated deformation inverts here: the a=0.1 displacement
      // interpolated by a single p=3 element over the full sine period
      // yields detJ < 0 at a collocated quadrature point, so the
      // geometry layer must reject the mesh and the config cannot run.
      ++degenerate;
      equiv_pass = false;
      std::printf("       config %s p=%d mesh=%dx%dx%d a=%.1f cannot be built: %s\n",
                  to_string(c.bp).c_str(), c.p, c.dims[0], c.dims[1], c.dims[2], c.amplitude, e.what());
    }
  }

  const double secs = elapsed_since(t0);
  {
    std::ostringstream os;
    os << "backend equivalence vs assembled oracle: " << cases - degenerate << "/" << cases
       << " configs ran, max rel diff " << worst_rel << " (tol 1e-12), " << secs << " s";
    if (degenerate > 0)
      os << "; " << degenerate << " config(s) unbuildable: the deformation inverts that element geometry";
    record(1, equiv_pass && secs < 30.0, os.str());
  }
  {
    std::ostringstream os;
    os << "operator algebra on all buildable configs: max symmetry defect " << worst_sym << ", max |A*1| "
       << worst_null << " (rel, tol 1e-12), min mass quadratic form " << min_quadratic;
    record(2, algebra_pass, os.str());
  }
}

void criterion_quadrature_basis() {
  bool pass = true;
  std::ostringstream os;

  // Gauss rules integrate monomials exactly to degree 2q-1.
  double worst_gauss = 0.0;
  for (int q = 1; q <= 10; ++q) {
    const QuadRule1D rule = gl_rule(q);
    for (int k = 0; k <= 2 * q - 1; ++k) {
      double sum = 0.0;
      for (int i = 0; i < q; ++i) sum += rule.weights[i] * std::pow(rule.points[i], k);
      const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
      worst_gauss = std::max(worst_gauss, std::abs(sum - exact));
    }
  }
  pass = pass && worst_gauss <= 1e-13;

  // Closed-form GLL rules for n <= 4.
  double worst_gll = 0.0;
  auto check = [&](double got, double expect) { worst_gll = std::max(worst_gll, std::abs(got - expect)); };
  const QuadRule1D g2 = gll_rule(2), g3 = gll_rule(3), g4 = gll_rule(4);
  check(g2.points[0], -1.0);
  check(g2.weights[0], 1.0);
  check(g3.points[1], 0.0);
  check(g3.weights[0], 1.0 / 3.0);
  check(g3.weights[1], 4.0 / 3.0);
  check(g4.points[1], -std::sqrt(1.0 / 5.0));
  check(g4.weights[0], 1.0 / 6.0);
  check(g4.weights[1], 5.0 / 6.0);
  pass = pass && worst_gll <= 1e-14;

  // Partition of unity / zero row sums up to degree 8.
  double worst_b = 0.0, worst_d = 0.0;
  for (int p = 1; p <= 8; ++p) {
    for (const TensorBasis& basis :
         {build_basis(p, p + 2, QuadKind::GL), build_basis(p, p + 1, QuadKind::GLL)}) {
      for (int a = 0; a < basis.num_quad_1d(); ++a) {
        double sb = 0.0, sd = 0.0;
        for (int j = 0; j <= p; ++j) {
          sb += basis.B(a, j);
          sd += basis.D(a, j);
        }
        worst_b = std::max(worst_b, std::abs(sb - 1.0));
        worst_d = std::max(worst_d, std::abs(sd));
      }
    }
  }
  pass = pass && worst_b <= 1e-12 && worst_d <= 1e-12;

  os << "quadrature/basis exactness: gauss monomial defect " << worst_gauss << ", GLL closed-form defect "
     << worst_gll << ", B row-sum defect " << worst_b << ", D row-sum defect " << worst_d;
  record(3, pass, os.str());
}

void criterion_cost_model() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::ostringstream os;

  const CostModel colloc = cost_model(3, true);
  const CostModel gauss = cost_model(3, false);
  pass = pass && colloc.flops_per_elem == 4032 && colloc.reads_per_elem == 448 && gauss.flops_per_elem == 7104;

  double worst_ratio_low = 1.0, worst_ratio_high = 1.0;
  for (int p = 1; p <= 6; ++p) {
    const HexMesh mesh = build_box_mesh({2, 2, 2}, p, {1, 1, 1}, 0.0);
    const OperatorHandle op = make_operator(BPKind::BP5, Backend::Fused, mesh);
    const double measured = static_cast<double>(count_flops(op).total());
    const double model = static_cast<double>(cost_model(p, true).flops_per_elem);
    const double ratio = measured / model;
    worst_ratio_low = std::min(worst_ratio_low, ratio);
    worst_ratio_high = std::max(worst_ratio_high, ratio);
    pass = pass && ratio >= 0.75 && ratio <= 1.25;
  }

  const double secs = elapsed_since(t0);
  pass = pass && secs < 10.0;
  os << "cost model: p=3 collocated 4032 flops / 448 reads, non-collocated 7104 flops; measured/model in ["
     << worst_ratio_low << ", " << worst_ratio_high << "] for p=1..6 (band 0.75..1.25), " << secs << " s";
  record(4, pass, os.str());
}

double poisson_l2_error(int elems, int p) {
  const auto pi = std::numbers::pi;
  auto exact = [pi](double x, double y, double z) { return std::sin(pi * x) * std::sin(pi * y) * std::sin(pi * z); };
  auto rhs = [pi, exact](double x, double y, double z) { return 3.0 * pi * pi * exact(x, y, z); };

  const HexMesh mesh = build_box_mesh({elems, elems, elems}, p, {1, 1, 1}, 0.0);
  auto setup = make_setup(BPKind::BP3, mesh);
  const OperatorHandle op(Backend::Fused, setup);
  const ConstrainedOperator cop(op, boundary_bcs(mesh));

  const GeomFactors mass = mass_factors(mesh, setup->basis);
  std::vector<double> b = assemble_load(mesh, setup->basis, mass, setup->restriction, rhs);
  for (int d : cop.bcs().dofs) b[d] = 0.0;

  auto apply = [&](std::span<const double> u, std::vector<double>& w) { cop.apply(u, w); };
  std::vector<double> x(op.size(), 0.0);
  const std::vector<double> diag = jacobi_diagonal(cop);
  const CGReport report = cg(apply, b, x, 1e-8, 2000, &diag);
  if (!report.converged) throw std::runtime_error("poisson solve did not converge");

  return discrete_l2_error(mesh, setup->basis, mass, setup->restriction, x, exact);
}

void criterion_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::ostringstream os;
  os << "manufactured Poisson convergence:";
  for (int p : {1, 2, 3}) {
    const double e2 = poisson_l2_error(2, p);
    const double e4 = poisson_l2_error(4, p);
    const double e8 = poisson_l2_error(8, p);
    const double r1 = e2 / e4, r2 = e4 / e8;
    const double lo = std::pow(2.0, p + 0.5), hi = std::pow(2.0, p + 1.5);
    pass = pass && r1 >= lo && r1 <= hi && r2 >= lo && r2 <= hi;
    os << " p=" << p << " ratios " << r1 << "/" << r2 << " (band " << lo << ".." << hi << ")";
  }
  const double secs = elapsed_since(t0);
  pass = pass && secs < 120.0;
  os << ", " << secs << " s";
  record(5, pass, os.str());
}

void criterion_determinism() {
  nlohmann::json j{{"bp", "bp3"},         {"degrees", {1, 2}},    {"dims", {2, 2, 2}},
                   {"backends", {"multipass", "fused"}}, {"fixed_cg_iters", 5}, {"warmup_repeats", 1},
                   {"timed_repeats", 2},  {"threads", 2}};
  const BenchConfig cfg = parse_config(j);
  const RunOutput a = run_bench(cfg);
  const RunOutput b = run_bench(cfg);

  bool pass = a.records.size() == b.records.size() && !a.records.empty();
  if (pass) {
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      const BenchRecord &ra = a.records[i], &rb = b.records[i];
      pass = pass && ra.bp == rb.bp && ra.backend == rb.backend && ra.p == rb.p && ra.q == rb.q &&
             ra.elements == rb.elements && ra.dofs == rb.dofs && ra.cg_iters == rb.cg_iters &&
             ra.model_flops_per_elem == rb.model_flops_per_elem &&
             ra.model_reads_per_elem == rb.model_reads_per_elem && ra.model_ai == rb.model_ai &&
             ra.threads == rb.threads;
      pass = pass && a.histories[i] == b.histories[i];  // bitwise residual histories
    }
  }
  std::ostringstream os;
  os << "determinism: two identical runs, " << a.records.size()
     << " records, non-timing columns and residual histories bitwise identical";
  record(6, pass, os.str());
}

void criterion_memory_and_throughput() {
  // Fatal part: allocation accounting. Fused owns no global quadrature
  // fields and performs no per-apply allocation; multipass stages through
  // at least three global quadrature fields.
  bool pass = true;
  std::ostringstream os;
  {
    const HexMesh mesh = build_box_mesh({3, 3, 3}, 3, {1, 1, 1}, 0.1);
    for (BPKind bp : {BPKind::BP3, BPKind::BP5}) {
      auto setup = make_setup(bp, mesh);
      const OperatorHandle fused(Backend::Fused, setup);
      const OperatorHandle multipass(Backend::Multipass, setup);

      pass = pass && fused.workspace().qpoint_fields() == 0;
      pass = pass && multipass.workspace().qpoint_fields() >= 3;
      const std::size_t evec = static_cast<std::size_t>(setup->restriction.e_size()) * sizeof(double);
      pass = pass && fused.workspace().global_bytes() <= evec;

      std::vector<double> u(fused.size(), 1.0), w(fused.size());
      fused.apply(u, w);
      const std::size_t events = AllocStats::alloc_events();
      for (int rep = 0; rep < 5; ++rep) fused.apply(u, w);
      pass = pass && AllocStats::alloc_events() == events;
    }
    os << "memory model: fused apply allocates no global temporaries, multipass stages >= 3 global "
          "quadrature fields (GPU-scale throughput figures are out of scope at desk scale)";
  }
  record(7, pass, os.str());

  // Reported, never fatal: fused vs multipass throughput at p >= 4 and
  // >= 1e5 dofs.
  nlohmann::json j{{"bp", "bp5"},    {"degrees", {4}},          {"target_dofs", 120000},
                   {"backends", {"multipass", "fused"}}, {"fixed_cg_iters", 20},
                   {"warmup_repeats", 1}, {"timed_repeats", 3}};
  const RunOutput out = run_bench(parse_config(j));
  if (out.records.size() == 2) {
    const double mp = out.records[0].throughput, fu = out.records[1].throughput;
    std::printf("[REPORT] criterion 7 (non-fatal): fused/multipass throughput ratio %.2f at p=4, %lld dofs "
                "(soft target >= 0.9)\n",
                fu / mp, static_cast<long long>(out.records[0].dofs));
  } else {
    std::printf("[REPORT] criterion 7 (non-fatal): throughput comparison unavailable\n");
  }
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("acceptance suite (OpenMP, max %d threads)\n", omp_get_max_threads());
#else
  std::printf("acceptance suite (serial build)\n");
#endif

  try {
    criteria_equivalence_and_algebra();
    criterion_quadrature_basis();
    criterion_cost_model();
    criterion_convergence();
    criterion_determinism();
    criterion_memory_and_throughput();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance suite aborted: %s\n", e.what());
    return 1;
  }

  int failed = 0;
  for (const Criterion& c : g_results)
    if (!c.pass) ++failed;
  std::printf("%zu criteria checked, %d failed\n", g_results.size(), failed);
  return failed == 0 ? 0 : 1;
}
