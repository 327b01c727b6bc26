// Batch front end: density reports, schedule generation, criterion checks,
// scheduled-vector construction, orbit probes, scalar-set diagnostics, and
// the preset catalog.  One command per process; outputs are CSV / JSON files
// written atomically, deterministic for a fixed (config, seed).

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lindyn/criterion.hpp"
#include "lindyn/families.hpp"
#include "lindyn/gamma.hpp"
#include "lindyn/io.hpp"
#include "lindyn/operators.hpp"
#include "lindyn/orbit.hpp"
#include "lindyn/spaces.hpp"

using namespace lindyn;

namespace {

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Parse: return 2;
    case ErrorKind::Generation: return 3;
    case ErrorKind::Construction: return 5;
    default: return 1;
  }
}

std::string out_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir + "/" + name;
}

json density_report_json(const DensityReport& r) {
  return {{"lower_est", r.lower_est},
          {"upper_est", r.upper_est},
          {"banach_upper_est", r.banach_upper_est},
          {"horizon", r.horizon},
          {"window_s", r.window_s}};
}

// Gamma-sequence source shared by `criterion` and `construct` configs:
// either an explicit geometric alpha sequence or a witness walk over an
// unbounded scalar set.
GammaSequence gamma_sequence_from_config(const json& cfg,
                                         const OperatorHandle& op,
                                         std::int64_t count) {
  if (cfg.contains("alpha_sequence")) {
    const json& a = cfg["alpha_sequence"];
    const std::string kind = a.at("kind").get<std::string>();
    require(kind == "geometric", ErrorKind::Parse,
            "alpha_sequence kind must be 'geometric'");
    const auto& a0 = a.at("alpha0");
    return geometric_gamma_sequence(
        Complex(a0[0].get<double>(), a0[1].get<double>()),
        a.at("ratio").get<double>(), static_cast<std::size_t>(count));
  }
  if (cfg.contains("witnesses")) {
    const GammaSpec gamma = gamma_from_json(cfg["witnesses"]);
    return select_gamma_witnesses(gamma, op, count);
  }
  fail(ErrorKind::Parse,
       "config needs an 'alpha_sequence' or 'witnesses' section");
}

int cmd_densities(const std::string& set_file, std::int64_t horizon,
                  std::int64_t s, const std::string& out) {
  IndexSet E = load_index_set(set_file, horizon);
  if (s == 0) s = default_banach_window(horizon);
  DensityReport r = analyze_density(E, s);
  const std::string hash = fnv1a_hex(read_file(set_file));
  json j = density_report_json(r);
  j["set_size"] = E.size();
  j["config"] = hash;
  atomic_write(out_path(out, "density_report.json"), j.dump(1) + "\n");
  std::printf("densities: n=%zu lower=%.6g upper=%.6g banach=%.6g (s=%lld, horizon=%lld)\n",
              E.size(), r.lower_est, r.upper_est, r.banach_upper_est,
              static_cast<long long>(r.window_s),
              static_cast<long long>(r.horizon));
  return 0;
}

int cmd_schedules(int K, std::int64_t horizon, double base_density,
                  const std::string& out) {
  ScheduleFamily fam = generate_schedules(K, horizon, base_density);
  require(verify_separation(fam), ErrorKind::Generation,
          "generated family fails the separation certificate");
  json j = schedule_to_json(fam);
  json dens = json::array();
  for (const auto& A : fam.sets) dens.push_back(lower_density_est(A));
  j["empirical_lower_densities"] = dens;
  atomic_write(out_path(out, "schedules.json"), j.dump(1) + "\n");
  std::printf("schedules: K=%d horizon=%lld separation=ok\n", K,
              static_cast<long long>(horizon));
  return 0;
}

int cmd_criterion(const std::string& config_path, const std::string& out,
                  bool strict) {
  const std::string raw = read_file(config_path);
  const json cfg = json::parse(raw, nullptr, true, true);
  const std::string hash = fnv1a_hex(raw);

  OperatorHandle op = operator_from_json(cfg.at("operator"));
  const int m_max = cfg.value("m_max", 60);
  const int tail_len = cfg.value("tail_len", 40);
  CriterionTolerances tol;
  if (cfg.contains("tolerances")) {
    const json& t = cfg["tolerances"];
    tol.tol_i = t.value("tol_i", tol.tol_i);
    tol.tol_ii = t.value("tol_ii", tol.tol_ii);
    tol.tol_iii = t.value("tol_iii", tol.tol_iii);
  }
  const int fit_lo = cfg.value("fit_lo", 5);
  const int fit_hi = cfg.value("fit_hi", 40);

  const SpaceSpec space = op.space();
  std::vector<SparseVector> vectors;
  for (const auto& v : cfg.at("vectors")) {
    vectors.push_back(vector_from_json(v, space.index_domain()));
  }
  GammaSequence g =
      gamma_sequence_from_config(cfg, op, 2 * (m_max + tail_len) + 1);

  CriterionReport rep =
      check_criterion(op, g, vectors, m_max, tail_len, tol, fit_lo, fit_hi);

  json jvecs = json::array();
  for (std::size_t i = 0; i < rep.per_vector.size(); ++i) {
    const auto& vr = rep.per_vector[i];
    jvecs.push_back({{"vector", vector_to_json(vr.y)},
                     {"pass_i", vr.pass_i},
                     {"pass_ii", vr.pass_ii},
                     {"pass_iii", vr.pass_iii},
                     {"cond_iii_residual", vr.cond_iii_residual},
                     {"cond_i_tail_last", vr.cond_i_tail.back()},
                     {"cond_ii_last", vr.cond_ii_curve.back()},
                     {"fitted_ratio", vr.curve_fit.ratio},
                     {"fit_r2", vr.curve_fit.r2}});
    CsvWriter csv(hash);
    csv.add_meta("m_max", std::to_string(m_max));
    csv.add_meta("tail_len", std::to_string(tail_len));
    csv.add_meta("tolerances",
                 CsvWriter::num(tol.tol_i) + " " + CsvWriter::num(tol.tol_ii) +
                     " " + CsvWriter::num(tol.tol_iii));
    csv.set_columns({"m", "cond_ii_value", "cond_ii_first", "cond_ii_second",
                     "cond_i_tail"});
    for (int m = 1; m <= m_max; ++m) {
      csv.row({std::to_string(m), CsvWriter::num(vr.cond_ii_curve[m - 1]),
               CsvWriter::num(vr.cond_ii_first[m - 1]),
               CsvWriter::num(vr.cond_ii_second[m - 1]),
               CsvWriter::num(vr.cond_i_tail[m])});
    }
    atomic_write(out_path(out, "cond_ii_curve_" + std::to_string(i) + ".csv"),
                 csv.str());
  }
  json j = {{"config", hash},
            {"m_max", m_max},
            {"tail_len", tail_len},
            {"pass", rep.pass},
            {"vectors", jvecs}};
  atomic_write(out_path(out, "criterion_report.json"), j.dump(1) + "\n");
  std::printf("criterion: %s (%zu vectors)\n", rep.pass ? "pass" : "FAIL",
              rep.per_vector.size());
  if (strict && !rep.pass) return 4;
  return 0;
}

int cmd_construct(const std::string& config_path, const std::string& out,
                  std::uint64_t seed) {
  const std::string raw = read_file(config_path);
  const json cfg = json::parse(raw, nullptr, true, true);
  const std::string hash = fnv1a_hex(raw);

  OperatorHandle op = operator_from_json(cfg.at("operator"));
  const SpaceSpec space = op.space();
  const std::int64_t horizon = cfg.value("horizon", std::int64_t(10000));

  ScheduleFamily fam;
  const json& sc = cfg.at("schedules");
  if (sc.contains("file")) {
    fam = schedule_from_json(
        json::parse(read_file(sc["file"].get<std::string>())));
  } else {
    fam = generate_schedules(sc.at("K").get<int>(),
                             sc.at("horizon").get<std::int64_t>(),
                             sc.at("base_density").get<double>());
  }

  std::vector<SparseVector> dense;
  int L = cfg.value("L", 4);
  const json& dn = cfg.at("dense");
  if (dn.contains("targets")) {
    for (const auto& t : dn["targets"]) {
      dense.push_back(vector_from_json(t, space.index_domain()));
    }
  } else {
    dense = dense_sequence(dn.value("B", 2), dn.value("resolution", 1), L,
                           space.index_domain());
  }

  GammaSequence g = gamma_sequence_from_config(cfg, op, horizon + 1);

  ConstructionOptions opts;
  opts.seed = seed;
  ConstructionPlan plan =
      construct_hypercyclic_vector(op, g, fam, dense, L, horizon, opts);

  json j = plan_to_json(plan);
  j["config"] = hash;
  atomic_write(out_path(out, "construction_plan.json"), j.dump(1) + "\n");

  CsvWriter csv(hash);
  csv.add_meta("horizon", std::to_string(horizon));
  csv.set_columns({"l", "chosen_k", "schedule_count", "residual", "bound",
                   "tail_bound"});
  for (std::size_t l = 0; l < plan.residuals.size(); ++l) {
    csv.row({std::to_string(l + 1), std::to_string(plan.chosen_k[l]),
             std::to_string(plan.schedule_counts[l]),
             CsvWriter::num(plan.residuals[l]),
             CsvWriter::num(plan.residual_bounds[l]),
             CsvWriter::num(plan.residual_tails[l])});
  }
  atomic_write(out_path(out, "residuals.csv"), csv.str());
  std::printf("construct: L=%d horizon=%lld max_residual=%.6g\n", L,
              static_cast<long long>(horizon),
              *std::max_element(plan.residuals.begin(), plan.residuals.end()));
  return 0;
}

int cmd_orbit(const std::string& config_path, const std::string& out,
              bool strict) {
  const std::string raw = read_file(config_path);
  const json cfg = json::parse(raw, nullptr, true, true);
  const std::string hash = fnv1a_hex(raw);

  OrbitProbe probe;
  probe.op = operator_from_json(cfg.at("operator"));
  probe.direct_sum = probe.op.kind == OperatorKind::DirectSumId;
  const SpaceSpec shift_space =
      probe.direct_sum ? probe.op.inner->space() : probe.op.space();

  const json& st = cfg.at("start");
  if (st.contains("vector")) {
    probe.start = LogVector::lift(
        vector_from_json(st["vector"], shift_space.index_domain()));
  } else if (st.contains("plan")) {
    const json plan = json::parse(read_file(st["plan"].get<std::string>()));
    probe.start = log_vector_from_json(
        plan.at("x_log"), plan.value("x_domain", "n") == std::string("z")
                              ? IndexDomain::Integers
                              : IndexDomain::NonNegative);
  } else {
    fail(ErrorKind::Parse, "start needs a 'vector' literal or a 'plan' file");
  }
  if (st.contains("lambda")) {
    probe.start_lambda =
        Complex(st["lambda"][0].get<double>(), st["lambda"][1].get<double>());
  }

  probe.gamma = gamma_from_json(cfg.at("gamma"));
  for (const auto& t : cfg.at("targets")) {
    probe.targets.push_back(vector_from_json(t, shift_space.index_domain()));
  }
  if (cfg.contains("target_lambdas")) {
    for (const auto& l : cfg["target_lambdas"]) {
      probe.target_lambdas.emplace_back(l[0].get<double>(), l[1].get<double>());
    }
  }
  probe.epsilons = cfg.at("epsilons").get<std::vector<double>>();
  probe.horizon = cfg.value("horizon", std::int64_t(1000));
  probe.banach_s = cfg.value("banach_s", std::int64_t(0));

  const auto records = run_probe(probe);

  bool any_truncated = false;
  json summary = json::array();
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    any_truncated = any_truncated || rec.truncated;
    CsvWriter csv(hash);
    csv.add_meta("target", std::to_string(rec.target_index));
    csv.add_meta("epsilon", CsvWriter::num(rec.epsilon));
    csv.add_meta("horizon", std::to_string(probe.horizon));
    csv.set_columns({"n", "hit", "witness_gamma_re", "witness_gamma_im",
                     "distance", "witness_log10_mod", "witness_arg"});
    for (std::int64_t n = 0; n <= probe.horizon; ++n) {
      const bool hit = std::binary_search(rec.visits.elems.begin(),
                                          rec.visits.elems.end(), n);
      std::string re = "", im = "", lg = "", arg = "";
      if (hit) {
        const LogComplex w = rec.witnesses_log.at(n);
        lg = CsvWriter::num(w.lmod / std::log(10.0));
        arg = CsvWriter::num(w.arg);
        if (w.materializable()) {
          const Complex c = w.to_complex();
          re = CsvWriter::num(c.real());
          im = CsvWriter::num(c.imag());
        }
      }
      csv.row({std::to_string(n), hit ? "1" : "0", re, im,
               CsvWriter::num(rec.distances[static_cast<std::size_t>(n)]), lg,
               arg});
    }
    atomic_write(out_path(out, "visits_t" + std::to_string(rec.target_index) +
                                   "_e" + std::to_string(r % probe.epsilons.size()) +
                                   ".csv"),
                 csv.str());
    json js = {{"target", rec.target_index},
               {"epsilon", rec.epsilon},
               {"visit_count", rec.visits.size()},
               {"density", density_report_json(rec.density)},
               {"truncated", rec.truncated}};
    if (rec.death_index) js["death_index"] = *rec.death_index;
    summary.push_back(js);
  }
  json j = {{"config", hash}, {"records", summary}};
  atomic_write(out_path(out, "orbit_summary.json"), j.dump(1) + "\n");
  std::printf("orbit: %zu records written\n", records.size());
  if (strict && any_truncated) return 6;
  return 0;
}

int cmd_gamma(const std::string& config_path, const std::string& out) {
  const std::string raw = read_file(config_path);
  const json cfg = json::parse(raw, nullptr, true, true);
  const std::string hash = fnv1a_hex(raw);
  const GammaSpec gamma = gamma_from_json(cfg.at("gamma"));
  GammaDiagnostics d = gamma_diagnostics(gamma, cfg.value("sample_budget", 200));
  json j = {{"config", hash},
            {"bounded", d.bounded},
            {"bounded_away_from_zero", d.bounded_away_from_zero},
            {"sup_modulus", d.sup_modulus},
            {"inf_modulus", d.inf_modulus},
            {"satisfies_condition_i", d.satisfies_condition_i},
            {"has_c0_sequence", d.has_c0_sequence},
            {"c0_ratio_first", d.c0_ratio_first},
            {"c0_ratio_last", d.c0_ratio_last},
            {"c0_in_ratio_class", d.c0_in_ratio_class},
            {"scalar_set_obstruction", d.scalar_set_obstruction},
            {"extraction_delta", d.extraction_delta},
            {"notes", d.notes}};
  if (cfg.contains("cover_delta") && gamma.is_bounded()) {
    const auto cover = cover_gamma(gamma, cfg["cover_delta"].get<double>());
    j["cover_size"] = cover.size();
  }
  atomic_write(out_path(out, "gamma_report.json"), j.dump(1) + "\n");
  std::printf("gamma: bounded=%d away_from_zero=%d obstruction=%d\n",
              d.bounded ? 1 : 0, d.bounded_away_from_zero ? 1 : 0,
              d.scalar_set_obstruction ? 1 : 0);
  return 0;
}

int cmd_presets() {
  std::printf(
      "preset        operator\n"
      "------        --------\n"
      "cor22c        unilateral backward shift on lp(N), w_k = ((k+1)/k)^(1/p)"
      " [param p >= 1]\n"
      "prop59        bilateral shift on l2(Z), w_k = eta for k > 0 and 1"
      " otherwise [param eta > 1, default 2]\n"
      "eta-bilateral the same bilateral shape with free eta and p\n"
      "geometric     unilateral backward shift with constant weight c"
      " [params c > 0, space]\n"
      "tu            unilateral pseudo-shift with phi(n) = n + 1 and weights"
      " (u_1, u_1, u_2, u_3, ...) for the summable u_n = u0 * uratio^(n-1)\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequence-space operator dynamics: densities, schedules, "
               "criterion checks, scheduled constructions, orbit probes"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool strict = false;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for sampling draws");
  app.add_flag("--strict", strict, "nonzero exit on soft failures");

  auto* dens = app.add_subcommand("densities", "density report for an index set");
  std::string set_file;
  std::int64_t horizon = 100000, banach_s = 0;
  dens->add_option("--set", set_file, "index-set file (one integer per line)")
      ->required();
  dens->add_option("--horizon", horizon, "horizon N");
  dens->add_option("--s", banach_s, "Banach window (0 = default)");

  auto* sched = app.add_subcommand("schedules", "generate a separated family");
  int K = 4;
  std::int64_t sched_horizon = 100000;
  double base_density = 0.125;
  sched->add_option("--K", K, "number of sets");
  sched->add_option("--horizon", sched_horizon, "horizon");
  sched->add_option("--base-density", base_density, "base density d, d_k = d^k");

  std::string config;
  auto* crit = app.add_subcommand("criterion", "three-condition criterion check");
  crit->add_option("--config", config, "JSON config")->required();

  auto* cons = app.add_subcommand("construct", "scheduled-vector construction");
  cons->add_option("--config", config, "JSON config")->required();

  auto* orb = app.add_subcommand("orbit", "orbit probe with visit analytics");
  orb->add_option("--config", config, "JSON config")->required();

  auto* gam = app.add_subcommand("gamma", "scalar-set diagnostics");
  gam->add_option("--config", config, "JSON config")->required();

  app.add_subcommand("presets", "list the operator preset catalog");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("densities")) {
      return cmd_densities(set_file, horizon, banach_s, out_dir);
    }
    if (app.got_subcommand("schedules")) {
      return cmd_schedules(K, sched_horizon, base_density, out_dir);
    }
    if (app.got_subcommand("criterion")) {
      return cmd_criterion(config, out_dir, strict);
    }
    if (app.got_subcommand("construct")) {
      return cmd_construct(config, out_dir, seed);
    }
    if (app.got_subcommand("orbit")) {
      return cmd_orbit(config, out_dir, strict);
    }
    if (app.got_subcommand("gamma")) {
      return cmd_gamma(config, out_dir);
    }
    if (app.got_subcommand("presets")) {
      return cmd_presets();
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const json::exception& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
