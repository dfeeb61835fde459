// Acceptance run: one pass/fail line per criterion. Criterion 10 reruns 1-8 and compares
// the written result files byte for byte.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rhwz/factor.hpp"
#include "rhwz/moduli.hpp"
#include "rhwz/rhsolve.hpp"
#include "rhwz/wznw.hpp"

using namespace rhwz;
namespace fs = std::filesystem;

namespace {

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// Ordered key/value record written as the criterion's result file.
class Record {
 public:
  void add(const std::string& key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    text_ += key + " " + buf + "\n";
  }
  void add(const std::string& key, const std::string& v) { text_ += key + " " + v + "\n"; }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
  Record record;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

CMatrix random_lower(int r, Rng& rng, bool unipotent) {
  CMatrix m = random_complex(r, r, rng).triangularView<Eigen::Lower>();
  for (int i = 0; i < r; ++i) m(i, i) = unipotent ? cd(1) : m(i, i) + (std::abs(m(i, i)) < 0.5 ? 1.0 : 0.0);
  return m;
}

// ---------------------------------------------------------------- 1

Outcome bruhat(std::uint64_t seed) {
  Rng rng(seed);
  Outcome o;
  double recon = 0, unique = 0;
  int agree = 0, large = 0;
  const int count = 200;
  for (int k = 0; k < count; ++k) {
    int r = k % 2 ? 4 : 3;
    std::vector<int> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    bool big = (k / 2) % 2 == 0;
    if (big) std::sort(perm.rbegin(), perm.rend());  // antidiagonal
    CMatrix B = random_lower(r, rng, false), L = random_lower(r, rng, true);
    CMatrix g = B * permutation_matrix(perm) * L;
    auto f = bruhat_factor(g);
    recon = std::max(recon, frob(f.P * f.Pi * f.L - g) / frob(g));
    auto hits = oracle::bruhat_permutations(g, 1e-9 * frob(g));
    if (hits.size() == 1 && hits[0] == f.perm && f.perm == perm) ++agree;
    if (big) {
      // In the large cell the factors are unique: recover the ones g was built from,
      // and the minor formulas give the same pair.
      ++large;
      auto m = large_cell_factor_minors(g);
      unique = std::max({unique, frob(f.P - B) / frob(B), frob(f.L - L) / frob(L), frob(m.P - B) / frob(B),
                         frob(m.L - L) / frob(L)});
    }
  }
  o.pass = recon <= 1e-10 && agree == count && unique <= 1e-9 && large > 0;
  o.detail = fmt("reconstruction %.2e, oracle agreement %.0f/200, large-cell uniqueness %.2e", recon, agree, unique);
  o.record.add("reconstruction", recon);
  o.record.add("agreement", agree);
  o.record.add("uniqueness", unique);
  return o;
}

// ---------------------------------------------------------------- 2

Outcome cholesky(std::uint64_t seed) {
  Rng rng(seed);
  Outcome o;
  double agree = 0, invariance = 0;
  for (int k = 0; k < 200; ++k) {
    CMatrix h = random_hpd(4, rng);
    // Any M with M* M = h; the Hermitian square root is independent of the triangular factor.
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    CMatrix M = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
    HermitianPD hp(h);
    CMatrix ref = oracle::textbook_cholesky(h);
    auto f = cholesky_minors(hp, M);
    auto g = cholesky_minors(hp, random_unitary(4, rng) * M);
    agree = std::max(agree, frob(f.b - ref) / frob(ref));
    invariance = std::max(invariance, frob(g.b - f.b) / frob(f.b));
  }
  o.pass = agree <= 1e-9 && invariance <= 1e-9;
  o.detail = fmt("textbook agreement %.2e, M -> UM invariance %.2e", agree, invariance);
  o.record.add("agreement", agree);
  o.record.add("invariance", invariance);
  return o;
}

// ---------------------------------------------------------------- 3

Outcome three_form(std::uint64_t seed) {
  Rng rng(seed);
  Outcome o;
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    int r = k % 2 ? 3 : 2;
    HermitianPD h(random_hpd(r, rng));
    auto p = three_form_pair(h, random_hermitian(r, rng), random_hermitian(r, rng), random_hermitian(r, rng));
    worst = std::max(worst, std::abs(p.theta3 - p.dOmega2) / (1e-5 * (1 + std::abs(p.theta3))));
  }
  o.pass = worst <= 1;
  o.detail = fmt("worst |Theta - 3 d omega| / (1e-5 (1 + |Theta|)) = %.3f", worst);
  o.record.add("worst", worst);
  return o;
}

// ---------------------------------------------------------------- 4

Outcome rank1_monodromy(std::uint64_t) {
  Outcome o;
  auto ws = fixture::rank1_n3();
  FuchsianSystem sys{ws, {ws.W(0), ws.W(1)}};
  auto mono = monodromy_rep(sys, std::nullopt, 1e-10);
  double err = 0;
  for (int i = 0; i < ws.n(); ++i) {
    cd expect = std::exp(cd(0, -2 * kPi * ws.weights[i][0]));
    err = std::max(err, std::abs(mono.loop_factors[i](0, 0) - expect));
    o.record.add("T" + std::to_string(i + 1), fmt("%.17g %.17g", mono.loop_factors[i](0, 0).real(),
                                                   mono.loop_factors[i](0, 0).imag()));
  }
  o.pass = err <= 1e-8;
  o.detail = fmt("max |T_i - exp(-2 pi i alpha_i)| = %.2e", err);
  o.record.add("error", err);
  return o;
}

// ---------------------------------------------------------------- 5

SolveResult solve_rank2(std::uint64_t seed, const WeightSystem& ws) {
  SolverOptions so;
  so.seed = seed;
  so.threads = threads();
  return solve(ws, build_admissible_rep(ws, hypergeometric_conjugators(ws)), std::nullopt, so);
}

Outcome round_trip(std::uint64_t seed) {
  Outcome o;
  auto ws = fixture::rank2_n3();
  auto res = solve_rank2(seed, ws);
  // spec(A_3) from the characteristic polynomial, matched to the infinity exponents.
  auto roots = oracle::poly_roots(oracle::charpoly(res.system.residue_at_infinity()));
  double spec = 0;
  for (double l : ws.infinity_exponents) {
    double best = INFINITY;
    for (cd z : roots) best = std::min(best, std::abs(z - l));
    spec = std::max(spec, best);
  }
  const auto& r = res.report;
  o.pass = r.success && r.final_residual <= 1e-6 && spec <= 1e-6 && r.relation_residual <= 1e-7 && r.large_cell_flag;
  o.detail = fmt("final residual %.2e, spectrum at infinity %.2e, relation %.2e", r.final_residual, spec,
                 r.relation_residual) +
             (r.large_cell_flag ? ", large cell" : ", NOT in large cell");
  o.record.add("final_residual", r.final_residual);
  o.record.add("spectrum", spec);
  o.record.add("relation", r.relation_residual);
  o.record.add("flag", r.large_cell_flag ? "1" : "0");
  for (const auto& A : res.system.residues)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) o.record.add("A", fmt("%.17g %.17g", A(i, j).real(), A(i, j).imag()));
  return o;
}

// ---------------------------------------------------------------- 6

Outcome flatness(std::uint64_t seed) {
  Outcome o;
  auto res = solve_rank2(seed, fixture::rank2_n3());
  if (!res.report.success) {
    o.detail = "rank-2 system did not solve";
    return o;
  }
  auto field = MetricField::from_normalization(*res.normalization);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-2, 2);
  double lo = INFINITY, hi = 0;
  for (int k = 0; k < 50; ++k) {
    cd z;
    do z = cd(u(rng), u(rng));
    while (field.distance_to_points(z) < 0.3);
    double ratio = flatness_residual(field, z, 0.02) / flatness_residual(field, z, 0.01);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    o.record.add("ratio", ratio);
  }
  o.pass = lo >= 3.5 && hi <= 4.5;
  o.detail = fmt("Richardson ratios in [%.3f, %.3f]", lo, hi);
  return o;
}

// ---------------------------------------------------------------- 7

// Independent least-squares fit of s = S + C delta^kappa by the 2x2 normal equations.
std::array<double, 2> fit(const std::vector<DeltaRow>& rows, double kappa, double* worst) {
  double n = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (const auto& r : rows) {
    double x = std::pow(r.delta, kappa);
    n += 1;
    sx += x;
    sxx += x * x;
    sy += r.total;
    sxy += x * r.total;
  }
  double C = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double S = (sy - C * sx) / n;
  *worst = 0;
  for (const auto& r : rows) *worst = std::max(*worst, std::abs(S + C * std::pow(r.delta, kappa) - r.total));
  return {S, C};
}

Outcome action(std::uint64_t seed) {
  Outcome o;
  const std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125};
  QuadratureOptions q;
  q.threads = threads();

  auto ws = fixture::rank2_n3_wide();
  auto res = solve_rank2(seed, ws);
  if (!res.report.success) {
    o.detail = "rank-2 system did not solve";
    return o;
  }
  auto a = action_regularized(MetricField::from_normalization(*res.normalization), deltas, q);
  // Decay exponent from the weights: local gaps at the finite points, exponent spread at infinity.
  double kappa = 2 * (1 - (ws.infinity_exponents.back() - ws.infinity_exponents.front()));
  for (int i = 0; i + 1 < ws.n(); ++i) kappa = std::min(kappa, 2 * (ws.weights[i].front() - ws.weights[i].back() + 1));
  double lo = INFINITY, hi = -INFINITY, resid = 0;
  for (const auto& r : a.per_delta) lo = std::min(lo, r.total), hi = std::max(hi, r.total);
  auto [S, C] = fit(a.per_delta, kappa, &resid);
  double spread = hi - lo;
  bool fit_ok = resid <= 0.01 * spread && std::abs(S - a.value) <= 1e-9 * std::abs(S);
  bool imag_ok = std::abs(a.imag_part) <= 1e-8 * std::abs(a.value);

  auto w1 = fixture::rank1_n4();
  FuchsianSystem ab{w1, {w1.W(0), w1.W(1), w1.W(2)}};
  auto a1 = action_regularized(MetricField::from_normalization(normalize_at_infinity(ab)), deltas, q);
  double exact = oracle::abelian_action(w1.points, {0.3, 0.2, 0.25});
  double rel = std::abs(a1.value - exact) / std::abs(exact);

  o.pass = fit_ok && imag_ok && rel <= 1e-3;
  o.detail = fmt("rank 2: S = %.6f, fit residual %.2f%% of spread", a.value, 100 * resid / spread) +
             fmt(", |Im S|/|S| = %.1e; rank 1: relative error %.1e", std::abs(a.imag_part) / std::abs(a.value), rel);
  o.record.add("S", a.value);
  o.record.add("kappa", kappa);
  o.record.add("fit_residual", resid);
  o.record.add("spread", spread);
  o.record.add("imag", a.imag_part);
  for (const auto& r : a.per_delta) o.record.add("total", r.total);
  o.record.add("abelian", a1.value);
  return o;
}

// ---------------------------------------------------------------- 8

Outcome counterterm(std::uint64_t seed) {
  Outcome o;
  auto res = solve_rank2(seed, fixture::rank2_n3());
  if (!res.report.success) {
    o.detail = "rank-2 system did not solve";
    return o;
  }
  auto field = MetricField::from_normalization(*res.normalization);
  const auto& ws = field.system().weights;
  QuadratureOptions q;
  q.threads = threads();
  double worst = 0;
  for (int i = 0; i + 1 < ws.n(); ++i) {
    double expect = 0;
    for (double a : ws.weights[i]) expect += a * a;
    expect *= 2 * kPi * std::log(2.0);
    double got = annulus_kinetic(field, i, 1e-4, q);
    worst = std::max(worst, std::abs(got - expect) / expect);
    o.record.add("annulus", got);
  }
  o.pass = worst <= 1e-3;
  o.detail = fmt("worst relative deviation from 2 pi log 2 sum alpha^2: %.2e", worst);
  return o;
}

// ---------------------------------------------------------------- 9

Outcome levi(std::uint64_t seed) {
  Outcome o;
  auto ws = fixture::rank2_n4();
  Rng rng(seed);
  auto center = random_admissible_rep(ws, rng);
  RepFamily family{center, random_direction(ws, rng), 0.5};
  SurfaceOptions so;
  so.solver.threads = threads();
  so.quadrature.threads = threads();
  ActionSurface surface(family, so);
  auto r = levi_in_flag_coordinate(surface, 0.05);
  double change = std::abs(r.levi_half / r.levi - 1);
  o.pass = r.levi > 0 && r.levi_half > 0 && change <= 0.2;
  o.detail = fmt("Levi form %.4e at spacing 0.05, %.4e at 0.025 (change %.1f%%)", r.levi, r.levi_half, 100 * change);
  o.record.add("levi", r.levi);
  o.record.add("levi_half", r.levi_half);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds
  std::function<Outcome(std::uint64_t)> run;
};

std::string write_result(const fs::path& dir, int id, const Outcome& o) {
  fs::create_directories(dir);
  fs::path p = dir / ("criterion_" + std::to_string(id) + ".txt");
  std::ofstream(p, std::ios::binary) << o.record.text();
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  const std::uint64_t seed = 1;
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
  auto wanted = [&](int id) { return only.empty() || only.count(id); };

  std::vector<Criterion> criteria{
      {1, "Bruhat factorization suite", 10, bruhat},
      {2, "Cholesky minor formula", 10, cholesky},
      {3, "three-form identity", 30, three_form},
      {4, "rank-1 monodromy", 5, rank1_monodromy},
      {5, "rank-2 Riemann-Hilbert round trip", 120, round_trip},
      {6, "flatness Richardson ratio", 120, flatness},
      {7, "regularized action convergence", 600, action},
      {8, "counterterm coefficient", 60, counterterm},
      {9, "Kahler positivity (slow)", 1800, levi},
  };
  const fs::path out = "acceptance_out";
  std::map<int, std::string> first;
  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(seed);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs <= c.budget;
    bool pass = o.pass && in_time;
    if (c.id <= 8) first[c.id] = write_result(out / "run1", c.id, o);
    std::printf("criterion %d %s: %s (%s; %.1f s of %.0f s)\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.budget);
    std::fflush(stdout);
    failed += !pass;
  }

  if (wanted(10)) {
    std::vector<int> differ;
    for (const auto& c : criteria) {
      if (c.id > 8) continue;
      if (!first.count(c.id)) first[c.id] = write_result(out / "run1", c.id, c.run(seed));
      Outcome again;
      try {
        again = c.run(seed);
      } catch (const std::exception& e) {
        again.record.add("error", e.what());
      }
      if (write_result(out / "run2", c.id, again) != first[c.id]) differ.push_back(c.id);
    }
    std::string list;
    for (int id : differ) list += " " + std::to_string(id);
    std::printf("criterion 10 determinism: %s (%s)\n", differ.empty() ? "PASS" : "FAIL",
                differ.empty() ? "criteria 1-8 rerun with seed 1 give byte-identical result files"
                               : ("result files differ for criteria" + list).c_str());
    failed += !differ.empty();
  }
  return failed ? 1 : 0;
}
