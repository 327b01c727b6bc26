// File formats: JSON documents for vectors, spaces, operators, scalar sets,
// schedules and plans; plain-text index sets (one integer per line, `#`
// comments); CSV reports with a `#`-prefixed metadata header.  All writes go
// through a temp file + rename.

#ifndef LINDYN_IO_HPP
#define LINDYN_IO_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lindyn/criterion.hpp"
#include "lindyn/families.hpp"
#include "lindyn/gamma.hpp"
#include "lindyn/operators.hpp"
#include "lindyn/spaces.hpp"

namespace lindyn {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the raw config bytes; lets reports name the exact inputs.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Parse, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void atomic_write(const std::string& path, const std::string& body) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::Parse, "cannot write " + tmp);
    out << body;
  }
  fs::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// Index sets: one integer per line, sorted, '#' comments allowed.
// ---------------------------------------------------------------------------

inline IndexSet load_index_set(const std::string& path, std::int64_t horizon) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Parse, "cannot open " + path);
  IndexSet E;
  E.horizon = horizon;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::int64_t v;
    if (!(ls >> v)) {
      std::string rest;
      ls.clear();
      ls >> rest;
      if (rest.empty()) continue;  // blank / comment-only line
      fail(ErrorKind::Parse,
           path + ":" + std::to_string(lineno) + ": not an integer");
    }
    std::string trailing;
    if (ls >> trailing) {
      fail(ErrorKind::Parse,
           path + ":" + std::to_string(lineno) + ": trailing tokens");
    }
    if (v > horizon) continue;  // beyond the requested horizon
    if (!E.elems.empty() && v <= E.elems.back()) {
      fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                 ": elements must be strictly increasing");
    }
    if (v < 0) {
      fail(ErrorKind::Parse,
           path + ":" + std::to_string(lineno) + ": negative element");
    }
    E.elems.push_back(v);
  }
  E.validate();
  return E;
}

// ---------------------------------------------------------------------------
// JSON codecs.  Vector literals are lists of [index, re, im] triples.
// ---------------------------------------------------------------------------

inline SparseVector vector_from_json(const json& j, IndexDomain domain) {
  require(j.is_array(), ErrorKind::Parse, "vector literal must be an array");
  SparseVector v(domain);
  for (const auto& t : j) {
    require(t.is_array() && t.size() == 3, ErrorKind::Parse,
            "vector entries are [index, re, im] triples");
    v.set(t[0].get<std::int64_t>(),
          Complex(t[1].get<double>(), t[2].get<double>()));
  }
  return v;
}

inline json vector_to_json(const SparseVector& v) {
  json j = json::array();
  for (const auto& [i, z] : v.entries()) {
    j.push_back({i, z.real(), z.imag()});
  }
  return j;
}

inline SpaceSpec space_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "c0_n") return SpaceSpec::c0();
  if (kind == "lp_n") return SpaceSpec::lp(j.at("p").get<double>());
  if (kind == "lp_z") return SpaceSpec::lp_z(j.at("p").get<double>());
  if (kind == "sum_c") return SpaceSpec::sum_with_c(space_from_json(j.at("inner")));
  fail(ErrorKind::Parse, "unknown space kind: " + kind);
}

inline json space_to_json(const SpaceSpec& s) {
  switch (s.kind) {
    case SpaceKind::C0_N: return {{"kind", "c0_n"}};
    case SpaceKind::LP_N: return {{"kind", "lp_n"}, {"p", s.p}};
    case SpaceKind::LP_Z: return {{"kind", "lp_z"}, {"p", s.p}};
    case SpaceKind::DIRECT_SUM_WITH_C:
      return {{"kind", "sum_c"}, {"inner", space_to_json(*s.inner)}};
  }
  return {};
}

inline GammaSpec gamma_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finite") {
    std::vector<Complex> samples;
    for (const auto& s : j.at("samples")) {
      samples.emplace_back(s[0].get<double>(), s[1].get<double>());
    }
    return GammaSpec::finite(samples);
  }
  if (kind == "geometric") {
    const auto& a = j.at("alpha0");
    return GammaSpec::geometric(Complex(a[0].get<double>(), a[1].get<double>()),
                                j.at("ratio").get<double>());
  }
  if (kind == "unbounded_pow") {
    std::optional<std::int64_t> cap;
    if (j.contains("max_exponent")) cap = j["max_exponent"].get<std::int64_t>();
    return GammaSpec::unbounded_pow(j.at("base").get<double>(),
                                    j.value("arg", 0.0), cap);
  }
  if (kind == "annulus") {
    return GammaSpec::annulus(j.at("r_min").get<double>(),
                              j.at("r_max").get<double>());
  }
  if (kind == "full_plane") return GammaSpec::full_plane();
  fail(ErrorKind::Parse, "unknown gamma kind: " + kind);
}

inline json gamma_to_json(const GammaSpec& g) {
  switch (g.kind) {
    case GammaKind::FINITE: {
      json samples = json::array();
      for (const Complex& s : g.samples) samples.push_back({s.real(), s.imag()});
      return {{"kind", "finite"}, {"samples", samples}};
    }
    case GammaKind::GEOMETRIC:
      return {{"kind", "geometric"},
              {"alpha0", {g.alpha0.real(), g.alpha0.imag()}},
              {"ratio", g.ratio}};
    case GammaKind::UNBOUNDED_GEN: {
      json j = {{"kind", "unbounded_pow"}, {"base", g.base}, {"arg", g.gen_arg}};
      if (g.max_exponent) j["max_exponent"] = *g.max_exponent;
      return j;
    }
    case GammaKind::ANNULUS:
      return {{"kind", "annulus"}, {"r_min", g.r_min}, {"r_max", g.r_max}};
    case GammaKind::FULL_PLANE:
      return {{"kind", "full_plane"}};
  }
  return {};
}

inline WeightRule weights_from_json(const json& j) {
  const std::string rule = j.at("rule").get<std::string>();
  if (rule == "const" || rule == "geometric") {
    return WeightRule::constant(j.at("c").get<double>());
  }
  if (rule == "cor22c") return WeightRule::cor22c(j.at("p").get<double>());
  if (rule == "eta" || rule == "prop59") {
    return WeightRule::eta_step(j.at("eta").get<double>());
  }
  if (rule == "table") {
    return WeightRule::table(j.at("values").get<std::vector<double>>(),
                             j.at("tail").get<double>());
  }
  if (rule == "tu") {
    return WeightRule::tu_geometric(j.at("u0").get<double>(),
                                    j.at("uratio").get<double>());
  }
  fail(ErrorKind::Parse, "unknown weight rule: " + rule);
}

inline json weights_to_json(const WeightRule& w) {
  switch (w.kind) {
    case WeightRule::Kind::Const: return {{"rule", "const"}, {"c", w.c}};
    case WeightRule::Kind::Cor22c: return {{"rule", "cor22c"}, {"p", w.p}};
    case WeightRule::Kind::EtaStep: return {{"rule", "eta"}, {"eta", w.eta}};
    case WeightRule::Kind::Table:
      return {{"rule", "table"}, {"values", w.values}, {"tail", w.tail_value}};
    case WeightRule::Kind::TuGeometric:
      return {{"rule", "tu"}, {"u0", w.u0}, {"uratio", w.uratio}};
  }
  return {};
}

inline PhiSpec phi_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "affine") return PhiSpec::affine(j.at("offset").get<std::int64_t>());
  if (kind == "table") {
    return PhiSpec::with_table(j.at("values").get<std::vector<std::int64_t>>(),
                               j.at("tail_offset").get<std::int64_t>());
  }
  fail(ErrorKind::Parse, "unknown phi kind: " + kind);
}

inline json phi_to_json(const PhiSpec& p) {
  if (p.kind == PhiSpec::Kind::Affine) {
    return {{"kind", "affine"}, {"offset", p.offset}};
  }
  return {{"kind", "table"}, {"values", p.table}, {"tail_offset", p.tail_offset}};
}

// Operator spec document: {kind, phi, weights, space, weight_bound},
// {preset, params...}, or {file: path} referencing another spec document.
inline OperatorHandle operator_from_json(const json& j) {
  if (j.contains("file")) {
    return operator_from_json(json::parse(read_file(j["file"].get<std::string>())));
  }
  if (j.contains("preset")) {
    const std::string name = j.at("preset").get<std::string>();
    if (name == "cor22c") return make_cor22c(j.value("p", 2.0));
    if (name == "prop59") return make_prop59(j.value("eta", 2.0));
    if (name == "eta-bilateral") {
      return make_eta_bilateral(j.at("eta").get<double>(), j.value("p", 2.0));
    }
    if (name == "geometric") {
      const SpaceSpec space = j.contains("space")
                                  ? space_from_json(j["space"])
                                  : SpaceSpec::lp(2.0);
      return make_geometric(j.value("c", 2.0), space);
    }
    if (name == "tu") {
      const SpaceSpec space = j.contains("space")
                                  ? space_from_json(j["space"])
                                  : SpaceSpec::lp(2.0);
      return make_tu(j.value("u0", 0.5), j.value("uratio", 0.5), space);
    }
    fail(ErrorKind::Parse, "unknown preset: " + name);
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "pseudo_shift") {
    PseudoShiftSpec s;
    s.phi = phi_from_json(j.at("phi"));
    s.weights = weights_from_json(j.at("weights"));
    s.space = space_from_json(j.at("space"));
    s.weight_bound = j.at("weight_bound").get<double>();
    return OperatorHandle::pseudo_shift(s);
  }
  if (kind == "bilateral") {
    BilateralShiftSpec s;
    s.weights = weights_from_json(j.at("weights"));
    s.p = j.value("p", 2.0);
    s.weight_bound = j.at("weight_bound").get<double>();
    return OperatorHandle::bilateral_shift(s);
  }
  if (kind == "direct_sum_id") {
    return OperatorHandle::direct_sum_id(operator_from_json(j.at("inner")));
  }
  fail(ErrorKind::Parse, "unknown operator kind: " + kind);
}

inline json operator_to_json(const OperatorHandle& op) {
  switch (op.kind) {
    case OperatorKind::PseudoShift:
      return {{"kind", "pseudo_shift"},
              {"phi", phi_to_json(op.pseudo->phi)},
              {"weights", weights_to_json(op.pseudo->weights)},
              {"space", space_to_json(op.pseudo->space)},
              {"weight_bound", op.pseudo->weight_bound}};
    case OperatorKind::Bilateral:
      return {{"kind", "bilateral"},
              {"weights", weights_to_json(op.bilateral->weights)},
              {"p", op.bilateral->p},
              {"weight_bound", op.bilateral->weight_bound}};
    case OperatorKind::DirectSumId:
      return {{"kind", "direct_sum_id"}, {"inner", operator_to_json(*op.inner)}};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Schedule families: {horizon, sets: [[...], ...], target_densities: [...]}
// ---------------------------------------------------------------------------

inline json schedule_to_json(const ScheduleFamily& fam) {
  json sets = json::array();
  for (const auto& A : fam.sets) sets.push_back(A.elems);
  return {{"horizon", fam.horizon},
          {"sets", sets},
          {"target_densities", fam.target_densities}};
}

inline ScheduleFamily schedule_from_json(const json& j) {
  ScheduleFamily fam;
  fam.horizon = j.at("horizon").get<std::int64_t>();
  for (const auto& s : j.at("sets")) {
    IndexSet A;
    A.horizon = fam.horizon;
    A.elems = s.get<std::vector<std::int64_t>>();
    A.validate();
    fam.sets.push_back(std::move(A));
  }
  fam.target_densities = j.at("target_densities").get<std::vector<double>>();
  require(fam.target_densities.size() == fam.sets.size(), ErrorKind::Parse,
          "target_densities must match the number of sets");
  return fam;
}

// ---------------------------------------------------------------------------
// Construction plans.  Coefficients are stored in log-polar form so plans
// round-trip without underflow; a materialized truncation rides along.
// ---------------------------------------------------------------------------

inline json plan_to_json(const ConstructionPlan& plan) {
  json entries = json::array();
  for (const auto& [i, z] : plan.x_log.entries()) {
    entries.push_back({i, z.lmod, z.arg});
  }
  json dense = json::array();
  for (const auto& y : plan.dense_seq) dense.push_back(vector_to_json(y));
  return {{"chosen_k", plan.chosen_k},
          {"horizon", plan.horizon},
          {"schedules", schedule_to_json(plan.schedules)},
          {"dense_seq", dense},
          {"x", vector_to_json(plan.x)},
          {"x_log", entries},
          {"x_domain", plan.x_log.domain() == IndexDomain::Integers ? "z" : "n"},
          {"residuals", plan.residuals},
          {"residual_bounds", plan.residual_bounds},
          {"residual_tails", plan.residual_tails},
          {"schedule_counts", plan.schedule_counts},
          {"certificate_max_norm", plan.certificate_max_norm},
          {"certificate_draws", plan.certificate_draws},
          {"slack_budget", plan.slack_budget}};
}

inline LogVector log_vector_from_json(const json& j, IndexDomain domain) {
  LogVector v(domain);
  for (const auto& t : j) {
    v.set(t[0].get<std::int64_t>(),
          LogComplex(t[1].get<double>(), t[2].get<double>()));
  }
  return v;
}

// ---------------------------------------------------------------------------
// CSV with '#'-prefixed metadata header.
// ---------------------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(std::string config_hash, std::string extra_meta = "")
      : config_hash_(std::move(config_hash)), extra_(std::move(extra_meta)) {}

  void set_columns(const std::vector<std::string>& cols) {
    columns_ = cols;
  }
  void add_meta(const std::string& key, const std::string& value) {
    meta_ += "# " + key + ": " + value + "\n";
  }
  void row(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ",";
      line += cells[i];
    }
    body_ += line + "\n";
  }

  std::string str() const {
    std::string out = "# tool: lindyn " + std::string(kToolVersion) + "\n";
    out += "# config: " + config_hash_ + "\n";
    if (!extra_.empty()) out += extra_;
    out += meta_;
    std::string header;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i) header += ",";
      header += columns_[i];
    }
    out += header + "\n" + body_;
    return out;
  }

  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  }

 private:
  std::string config_hash_;
  std::string extra_;
  std::string meta_;
  std::vector<std::string> columns_;
  std::string body_;
};

}  // namespace lindyn

#endif  // LINDYN_IO_HPP
