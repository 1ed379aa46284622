#include "repwb/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "repwb/amalgam.hpp"
#include "repwb/amenability.hpp"
#include "repwb/containment.hpp"
#include "repwb/stability.hpp"

namespace repwb::cli {

namespace {

using io::ConfigError;

// Resolved view of a config. Defaults are written back into the task block so
// the report echo records every parameter used.
class Context {
 public:
  explicit Context(json config) : config_(std::move(config)) {
    if (!config_.is_object()) throw ConfigError("", "config must be an object");
    group_ = io::parse_group(io::field(config_, "group", ""), "/group");
    if (!config_.contains("task")) config_["task"] = json::object();
    if (!config_["task"].is_object()) throw ConfigError("/task", "expected an object");
    for (const char* key : {"representations", "vectors"}) {
      if (config_.contains(key) && !config_[key].is_object()) throw ConfigError(std::string("/") + key, "expected an object");
    }
  }

  const json& config() const { return config_; }
  const OraclePtr& group() const { return group_; }
  const GroupOracle& g() const { return *group_; }
  json& task() { return config_["task"]; }
  bool has(const std::string& key) const { return config_["task"].contains(key); }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) task()[key] = fallback;
    return io::get_int(task()[key], "/task/" + key);
  }

  std::int64_t nonnegative(const std::string& key, std::int64_t fallback) {
    const auto v = integer(key, fallback);
    if (v < 0) throw ConfigError("/task/" + key, "must be >= 0");
    return v;
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) task()[key] = fallback;
    return io::get_number(task()[key], "/task/" + key);
  }

  std::uint64_t seed() {
    if (!has("seed")) task()["seed"] = 0;
    const auto& s = task()["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError("/task/seed", "expected a non-negative integer");
    }
    return s.get<std::uint64_t>();
  }

  std::size_t cap(const std::string& key, std::size_t fallback) {
    auto& caps = task()["caps"];
    if (caps.is_null()) caps = json::object();
    if (!caps.is_object()) throw ConfigError("/task/caps", "expected an object");
    if (!caps.contains(key)) caps[key] = fallback;
    const auto v = io::get_int(caps[key], "/task/caps/" + key);
    if (v < 1) throw ConfigError("/task/caps/" + key, "must be >= 1");
    return static_cast<std::size_t>(v);
  }

  Representation rep(const std::string& key) { return resolve_rep(io::field(task(), key, "/task"), "/task/" + key); }

  Representation resolve_rep(const json& ref, const std::string& ptr) const {
    if (ref.is_string()) {
      const auto name = ref.get<std::string>();
      const auto p = "/representations/" + name;
      if (!config_.contains("representations") || !config_["representations"].contains(name)) {
        throw ConfigError(ptr, "no representation named '" + name + "'");
      }
      return io::parse_representation(config_["representations"][name], group_, p);
    }
    return io::parse_representation(ref, group_, ptr);
  }

  std::vector<SparseVector> vectors(const std::string& key) {
    return resolve_vectors(io::field(task(), key, "/task"), "/task/" + key);
  }

  std::vector<SparseVector> resolve_vectors(const json& ref, const std::string& ptr) const {
    if (ref.is_string()) {
      const auto name = ref.get<std::string>();
      if (!config_.contains("vectors") || !config_["vectors"].contains(name)) {
        throw ConfigError(ptr, "no vectors named '" + name + "'");
      }
      return io::parse_vectors(config_["vectors"][name], *group_, "/vectors/" + name);
    }
    return io::parse_vectors(ref, *group_, ptr);
  }

  // Members of `rep`, reported with the pointer of the list.
  void check_members(const Representation& rep, const std::vector<SparseVector>& vs, const std::string& ptr) const {
    for (std::size_t i = 0; i < vs.size(); ++i) {
      try {
        rep.check_member(vs[i]);
      } catch (const StructuralError& e) {
        throw ConfigError(ptr + "/" + std::to_string(i), e.what());
      }
    }
  }

  // F defaults to the identity followed by the generators.
  std::vector<Element> elements(const std::string& key) {
    if (!has(key)) {
      std::vector<Element> F{g().identity()};
      for (const auto& s : g().generators()) F.push_back(s);
      task()[key] = io::elements_to_json(F, g());
    }
    return io::parse_elements(task()[key], g(), "/task/" + key);
  }

 private:
  json config_;
  OraclePtr group_;
};

json report_skeleton(const std::string& command, const Context& ctx, const std::string& headline, double value) {
  json r;
  r["command"] = command;
  r["inputs"] = ctx.config();
  r["headline"] = {{"name", headline}, {"value", value}};
  return r;
}

json vec(const SparseVector& v, const GroupOracle& g) { return io::vector_to_json(v, g); }
json vecs(const std::vector<SparseVector>& v, const GroupOracle& g) { return io::vectors_to_json(v, g); }

// ---- probe-amenability ----

json probe_amenability(Context& ctx) {
  const auto& g = ctx.g();
  const int nmax = static_cast<int>(ctx.nonnegative("nmax", 50));
  const int radius = static_cast<int>(ctx.nonnegative("radius", 6));
  ReturnProbabilityOptions rp;
  rp.exact_steps = static_cast<int>(ctx.nonnegative("exact_steps", 40));
  rp.support_cap = ctx.cap("support", kDefaultElementCap);
  EigenOptions eo;
  eo.tol = ctx.number("tol", 1e-9);
  eo.cap = ctx.cap("elements", kDefaultElementCap);
  if (!(eo.tol > 0)) throw ConfigError("/task/tol", "must be positive");

  const auto table = return_probabilities(g, nmax, rp);
  json returns;
  returns["method"] = table.method;
  returns["p"] = table.p;
  returns["exact"] = table.exact;
  returns["ratio"] = table.ratio;
  returns["root"] = table.root;
  returns["max_support"] = table.max_support;

  json defects = json::array();
  std::optional<DefectReport> last;
  for (int r = 1; r <= radius; ++r) {
    auto d = min_defect(g, r, eo);
    defects.push_back({{"radius", r},
                       {"min_avg_sq_defect", d.min_avg_sq_defect},
                       {"residual", d.residual},
                       {"iterations", d.iterations},
                       {"ball_size", d.ball_size},
                       {"certified_lower_bound", d.certified_lower_bound},
                       {"certified_lower_bound_used", d.certified_lower_bound_used}});
    last = std::move(d);
  }

  json out;
  out["return_probabilities"] = returns;
  out["defects"] = defects;
  if (last) out["argmin"] = {{"radius", last->radius}, {"vector", vec(last->argmin, g)}};
  if (radius >= 1) {
    auto b = spectral_radius_bound(g, radius, nmax, eo, rp);
    out["spectral_bound"] = {{"radius", b.radius},
                             {"n_max", b.n_max},
                             {"ball_eigenvalue", b.ball_eigenvalue},
                             {"ratio_lower", b.ratio_lower},
                             {"root_lower", b.root_lower},
                             {"lower", b.lower},
                             {"upper", b.upper},
                             {"upper_certified", b.upper_certified},
                             {"schur_alpha", b.schur_alpha},
                             {"width", b.width()}};
  }
  auto r = report_skeleton("probe-amenability", ctx, "ratio_estimator", table.ratio.back());
  r["outputs"] = out;
  r["tolerances"] = {{"eigen", eo.tol}};
  return r;
}

// ---- contain ----

struct TargetSpec {
  GramFunction gram;
  std::optional<std::vector<SparseVector>> warm;
};

TargetSpec load_target(Context& ctx, const Representation& pi) {
  const auto& t = io::field(ctx.task(), "target", "/task");
  const std::string ptr = "/task/target";
  TargetSpec out;
  if (t.contains("gram")) {
    out.gram = io::parse_gram(t["gram"], ctx.g(), ptr + "/gram");
    return out;
  }
  auto rep = ctx.resolve_rep(io::field(t, "representation", ptr), ptr + "/representation");
  auto vs = ctx.resolve_vectors(io::field(t, "vectors", ptr), ptr + "/vectors");
  ctx.check_members(rep, vs, ptr + "/vectors");
  if (!t.contains("F")) throw ConfigError(ptr + "/F", "missing field");
  auto F = io::parse_elements(t["F"], ctx.g(), ptr + "/F");
  out.gram = gram(rep, vs, F);
  if (io::representation_to_json(rep) == io::representation_to_json(pi)) out.warm = std::move(vs);
  return out;
}

json contain(Context& ctx) {
  const auto& g = ctx.g();
  auto pi = ctx.rep("pi");
  auto target = load_target(ctx, pi);
  if (target.gram.n == 0) throw ConfigError("/task/target", "target has no vectors");
  const int radius = static_cast<int>(ctx.nonnegative("radius", 3));
  const auto copies = ctx.integer("copies", 1);
  if (copies < 1) throw ConfigError("/task/copies", "must be >= 1");
  SearchOptions so;
  so.tol = ctx.number("tol", 1e-6);
  so.budget = static_cast<std::size_t>(ctx.nonnegative("budget", 2000));
  so.restarts = static_cast<std::size_t>(ctx.nonnegative("restarts", 8));
  so.seed = ctx.seed();
  if (target.warm) so.warm_starts.push_back(*target.warm);
  const auto basis = ball_basis(pi, radius, static_cast<std::size_t>(copies), ctx.cap("elements", kDefaultElementCap));
  auto rep = search_witness(target.gram, pi, basis, so);

  json out;
  out["witnesses"] = vecs(rep.witnesses, g);
  out["target_gram"] = io::gram_to_json(target.gram, g);
  out["witness_gram"] = io::gram_to_json(gram(pi, rep.witnesses, target.gram.F), g);
  out["discrepancy"] = rep.discrepancy;
  out["converged"] = rep.converged;
  out["iterations"] = rep.iterations;
  out["restart_discrepancies"] = rep.restart_discrepancies;
  out["best_restart"] = rep.best_restart;
  out["warm_started"] = target.warm.has_value();
  out["basis_size"] = basis.dim();
  auto r = report_skeleton("contain", ctx, "discrepancy", rep.discrepancy);
  r["outputs"] = out;
  r["tolerances"] = {{"search", so.tol}};
  return r;
}

// ---- folner-witness ----

json folner(Context& ctx) {
  const auto& g = ctx.g();
  auto F = ctx.elements("F");
  const double eps = ctx.number("eps", 0.05);
  auto w = folner_witness(g, F, eps, ctx.cap("elements", kDefaultElementCap));
  json out;
  out["vector"] = vec(w.vector, g);
  out["box_side"] = w.box_side;
  out["set_size"] = w.set_size;
  out["defects"] = w.defects;
  out["total_defect"] = w.total_defect;
  auto r = report_skeleton("folner-witness", ctx, "total_defect", w.total_defect);
  r["outputs"] = out;
  r["tolerances"] = {{"eps", eps}};
  return r;
}

// ---- transfer ----

json transfer(Context& ctx) {
  const auto& g = ctx.g();
  TransferInput in{ctx.rep("eta"), ctx.rep("sigma"), ctx.vectors("params"), ctx.vectors("targets"), ctx.elements("F")};
  in.eps = ctx.number("eps", 0.05);
  in.copy_cap = ctx.cap("copies", 4096);
  in.element_cap = ctx.cap("elements", kDefaultElementCap);
  auto t = transfer_witness(in);
  json out;
  out["witnesses"] = vecs(t.report.witnesses, g);
  out["target_gram"] = io::gram_to_json(t.target, g);
  out["witness_gram"] = io::gram_to_json(gram(in.eta, t.report.witnesses, t.target.F), g);
  out["discrepancy"] = t.report.discrepancy;
  out["converged"] = t.report.converged;
  out["supported_copies"] = t.supported_copies;
  out["fresh_copies"] = t.fresh_copies;
  if (t.folner) {
    out["folner"] = {{"box_side", t.folner->box_side}, {"set_size", t.folner->set_size}, {"total_defect", t.folner->total_defect}};
  } else {
    out["folner"] = nullptr;
  }
  auto r = report_skeleton("transfer", ctx, "discrepancy", t.report.discrepancy);
  r["outputs"] = out;
  r["tolerances"] = {{"eps", in.eps}};
  return r;
}

// ---- independence layer ----

json verdict_json(const IndependenceVerdict& v, const GroupOracle& g) {
  return {{"independent", v.independent},
          {"tolerance", v.tolerance},
          {"i", v.i},
          {"b", v.b},
          {"g", g.format(v.g)},
          {"h", g.format(v.h)},
          {"value", io::complex_to_json(v.value)},
          {"abs_value", std::abs(v.value)},
          {"residual_a", vec(v.residual_a, g)},
          {"residual_b", vec(v.residual_b, g)}};
}

json closure_json(const ClosureSpec& c) {
  return {{"dimension", c.realized.dim()}, {"dim_by_radius", c.dim_by_radius}, {"radius", c.radius}};
}

ClosureSpec task_closure(Context& ctx, const Representation& pi, const std::vector<SparseVector>& C, int radius) {
  return closure(pi, C, radius, {}, ctx.cap("dimension", kDefaultDimensionCap), ctx.cap("elements", kDefaultElementCap));
}

json nondividing_cmd(Context& ctx) {
  const auto& g = ctx.g();
  auto pi = ctx.rep("pi");
  auto a = ctx.vectors("a");
  auto B = ctx.vectors("B");
  auto Cv = ctx.vectors("C");
  ctx.check_members(pi, a, "/task/a");
  ctx.check_members(pi, B, "/task/B");
  ctx.check_members(pi, Cv, "/task/C");
  const int radius = static_cast<int>(ctx.nonnegative("radius", 1));
  const double tol = ctx.number("tol", kDefaultOrthogonalityTol);
  auto C = task_closure(ctx, pi, Cv, radius);
  auto v = nondividing(pi, a, B, C, tol);
  json out;
  out["verdict"] = verdict_json(v, g);
  out["closure"] = closure_json(C);
  auto r = report_skeleton("nondividing", ctx, "worst_value", std::abs(v.value));
  r["outputs"] = out;
  r["tolerances"] = {{"orthogonality", tol}};
  return r;
}

// max over i and g in B_r of ||P_C pi(g) a_i - P_base pi(g) a_i||
double base_residual(const Representation& pi, const std::vector<SparseVector>& a, const ClosureSpec& C,
                     const std::vector<SparseVector>& base, std::size_t cap) {
  Subspace span{pi, base};
  const auto o = orbit(pi, a, C.radius, cap);
  double worst = 0.0;
  for (const auto& x : o.vectors) worst = std::max(worst, norm(project(x, C.realized) - project(x, span)));
  return worst;
}

json canonical_base_cmd(Context& ctx) {
  const auto& g = ctx.g();
  auto pi = ctx.rep("pi");
  auto a = ctx.vectors("a");
  auto Cv = ctx.vectors("C");
  ctx.check_members(pi, a, "/task/a");
  ctx.check_members(pi, Cv, "/task/C");
  const int radius = static_cast<int>(ctx.nonnegative("radius", 1));
  auto C = task_closure(ctx, pi, Cv, radius);
  auto base = canonical_base(pi, a, C);
  const double res = base_residual(pi, a, C, base, ctx.cap("elements", kDefaultElementCap));
  json out;
  out["base"] = vecs(base, g);
  out["dimension"] = base.size();
  out["closure"] = closure_json(C);
  auto r = report_skeleton("canonical-base", ctx, "base_residual", res);
  r["outputs"] = out;
  r["tolerances"] = json::object();
  return r;
}

double max_gap(const std::vector<SparseVector>& a, const std::vector<SparseVector>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) worst = std::max(worst, norm(a[i] - b[i]));
  return worst;
}

json superstable_cmd(Context& ctx) {
  const auto& g = ctx.g();
  auto pi = ctx.rep("pi");
  auto a = ctx.vectors("a");
  auto A = ctx.vectors("A");
  ctx.check_members(pi, a, "/task/a");
  ctx.check_members(pi, A, "/task/A");
  const double eps = ctx.number("eps", 1e-3);
  const int radius = static_cast<int>(ctx.nonnegative("radius", 1));
  auto s = superstable_approx(pi, a, A, eps, radius, ctx.cap("dimension", kDefaultDimensionCap),
                              ctx.cap("elements", kDefaultElementCap));
  auto v = nondividing(pi, s.b_vec, s.orbit.vectors, span_closure(s.c0, 0), eps);
  json selected = json::array();
  for (auto k : s.selected) selected.push_back({{"g", g.format(s.orbit.g[k])}, {"a", s.orbit.a[k]}});
  json out;
  out["selected"] = selected;
  out["c0"] = vecs(s.c0.basis, g);
  out["b"] = vecs(s.b_vec, g);
  out["gaps"] = s.gaps;
  out["closure"] = closure_json(s.closure);
  out["orbit_size"] = s.orbit.vectors.size();
  out["independence_over_c0"] = verdict_json(v, g);
  auto r = report_skeleton("superstable", ctx, "max_gap", max_gap(a, s.b_vec));
  r["outputs"] = out;
  r["tolerances"] = {{"eps", eps}};
  return r;
}

// ---- amalgamate ----

double check_max(const AmalgamCheck& c) {
  return std::max({c.rho_isometry_defect, c.eta_isometry_defect, c.rho_gram_error, c.eta_gram_error,
                   c.common_part_error});
}

json check_json(const AmalgamCheck& c) {
  return {{"rho_isometry_defect", c.rho_isometry_defect},
          {"eta_isometry_defect", c.eta_isometry_defect},
          {"rho_gram_error", c.rho_gram_error},
          {"eta_gram_error", c.eta_gram_error},
          {"common_part_error", c.common_part_error}};
}

struct AmalgamInputs {
  Representation pi, rho, eta;
  std::vector<SparseVector> rho_image, eta_image;
  int radius;
};

AmalgamInputs amalgam_inputs(Context& ctx) {
  AmalgamInputs in{ctx.rep("pi"), ctx.rep("rho"), ctx.rep("eta"), ctx.vectors("rho_image"), ctx.vectors("eta_image"),
                   static_cast<int>(ctx.nonnegative("radius", 3))};
  ctx.check_members(in.rho, in.rho_image, "/task/rho_image");
  ctx.check_members(in.eta, in.eta_image, "/task/eta_image");
  return in;
}

json amalgamate_cmd(Context& ctx) {
  auto in = amalgam_inputs(ctx);
  auto am = amalgamate(in.pi, {in.rho, {in.rho, in.rho_image}}, {in.eta, {in.eta, in.eta_image}});
  auto c = check_amalgam(am, in.radius);
  json out;
  out["amalgam"] = io::representation_to_json(am.rep);
  out["dim_pi"] = am.dim_pi;
  out["dim_rho_complement"] = am.dim_rho_complement;
  out["dim_eta_complement"] = am.dim_eta_complement;
  out["embed_rho"] = io::matrix_to_json(am.embed_rho);
  out["embed_eta"] = io::matrix_to_json(am.embed_eta);
  out["check"] = check_json(c);
  auto r = report_skeleton("amalgamate", ctx, "max_error", check_max(c));
  r["outputs"] = out;
  r["tolerances"] = {{"invariance", kInvarianceTol}};
  return r;
}

// ---- verification ----

using Checks = std::vector<Check>;

double avg_sq_defect(const GroupOracle& g, const SparseVector& f) {
  auto reg = Representation::regular(std::make_shared<const GroupOracle>(g));
  double sum = 0.0;
  for (const auto& s : g.symmetric_generators()) {
    const auto d = reg.apply(s, f) - f;
    sum += d.norm2();
  }
  return sum / static_cast<double>(g.symmetric_generators().size());
}

const json& out_field(const json& report, const std::string& key) {
  return io::field(io::field(report, "outputs", ""), key, "/outputs");
}

double reported(const json& report) {
  return io::get_number(io::field(io::field(report, "headline", ""), "value", "/headline"), "/headline/value");
}

Checks verify_probe(Context& ctx, const json& report) {
  const auto& rp = out_field(report, "return_probabilities");
  const auto& p = io::field(rp, "p", "/outputs/return_probabilities");
  Checks checks;
  const auto n = p.size();
  double ratio = 1.0;
  if (n >= 2) {
    const double last = io::get_number(p[n - 1], "/outputs/return_probabilities/p");
    const double prev = io::get_number(p[n - 2], "/outputs/return_probabilities/p");
    ratio = std::sqrt(last / prev);
  }
  checks.push_back({"ratio_estimator", reported(report), ratio});
  if (report["outputs"].contains("argmin")) {
    const auto& am = report["outputs"]["argmin"];
    auto f = io::parse_vector(io::field(am, "vector", "/outputs/argmin"), ctx.g(), "/outputs/argmin/vector");
    const auto& defects = out_field(report, "defects");
    const double value = io::get_number(defects.back()["min_avg_sq_defect"], "/outputs/defects");
    checks.push_back({"argmin_defect", value, avg_sq_defect(ctx.g(), f) / f.norm2()});
  }
  return checks;
}

Checks verify_witnesses(Context& ctx, const json& report, const Representation& rep) {
  auto target = io::parse_gram(out_field(report, "target_gram"), ctx.g(), "/outputs/target_gram");
  auto ws = io::parse_vectors(out_field(report, "witnesses"), ctx.g(), "/outputs/witnesses");
  return {{"discrepancy", reported(report), discrepancy(target, rep, ws)}};
}

Checks verify_folner(Context& ctx, const json& report) {
  auto F = ctx.elements("F");
  auto w = io::parse_vector(out_field(report, "vector"), ctx.g(), "/outputs/vector");
  auto reg = Representation::regular(ctx.group());
  double total = 0.0;
  for (const auto& g : F) total += (reg.apply(g, w) - w).norm2();
  return {{"total_defect", reported(report), total}};
}

Check verdict_check(const std::string& name, Context& ctx, const json& verdict, const std::string& ptr) {
  auto ra = io::parse_vector(io::field(verdict, "residual_a", ptr), ctx.g(), ptr + "/residual_a");
  auto rb = io::parse_vector(io::field(verdict, "residual_b", ptr), ctx.g(), ptr + "/residual_b");
  return {name, io::get_number(io::field(verdict, "abs_value", ptr), ptr + "/abs_value"), std::abs(inner(ra, rb))};
}

Checks verify_nondividing(Context& ctx, const json& report) {
  auto c = verdict_check("worst_value", ctx, out_field(report, "verdict"), "/outputs/verdict");
  c.reported = reported(report);
  return {c};
}

Checks verify_canonical(Context& ctx, const json& report) {
  auto pi = ctx.rep("pi");
  auto a = ctx.vectors("a");
  auto C = task_closure(ctx, pi, ctx.vectors("C"), static_cast<int>(ctx.integer("radius", 1)));
  auto base = io::parse_vectors(out_field(report, "base"), ctx.g(), "/outputs/base");
  double ortho = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t j = 0; j < base.size(); ++j) {
      ortho = std::max(ortho, std::abs(inner(base[i], base[j]) - (i == j ? 1.0 : 0.0)));
    }
  }
  return {{"base_residual", reported(report), base_residual(pi, a, C, base, ctx.cap("elements", kDefaultElementCap))},
          {"orthonormality_defect", 0.0, ortho}};
}

Checks verify_superstable(Context& ctx, const json& report) {
  auto a = ctx.vectors("a");
  auto b = io::parse_vectors(out_field(report, "b"), ctx.g(), "/outputs/b");
  return {{"max_gap", reported(report), max_gap(a, b)},
          verdict_check("independence_over_c0", ctx, out_field(report, "independence_over_c0"),
                        "/outputs/independence_over_c0")};
}

Checks verify_amalgam(Context& ctx, const json& report) {
  auto in = amalgam_inputs(ctx);
  Amalgam am{io::parse_representation(out_field(report, "amalgam"), ctx.group(), "/outputs/amalgam"), 0, 0, 0, {}, {}, {}, {}, {}, {}};
  auto size = [&](const char* key) { return static_cast<std::size_t>(io::get_int(out_field(report, key), "/outputs/" + std::string(key))); };
  am.dim_pi = size("dim_pi");
  am.dim_rho_complement = size("dim_rho_complement");
  am.dim_eta_complement = size("dim_eta_complement");
  am.rho_model = dense_model(in.rho);
  am.eta_model = dense_model(in.eta);
  am.embed_rho = io::parse_matrix(out_field(report, "embed_rho"), "/outputs/embed_rho");
  am.embed_eta = io::parse_matrix(out_field(report, "embed_eta"), "/outputs/embed_eta");
  auto columns = [](const DenseModel& m, const std::vector<SparseVector>& image) {
    Eigen::MatrixXcd x(static_cast<Eigen::Index>(m.dim()), static_cast<Eigen::Index>(image.size()));
    for (std::size_t k = 0; k < image.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = m.to_dense(image[k]);
    return x;
  };
  am.rho_inclusion = columns(am.rho_model, in.rho_image);
  am.eta_inclusion = columns(am.eta_model, in.eta_image);
  if (am.embed_rho.cols() != am.rho_inclusion.rows() || am.embed_eta.cols() != am.eta_inclusion.rows()) {
    throw ConfigError("/outputs", "embedding shapes do not match the inputs");
  }
  return {{"max_error", reported(report), check_max(check_amalgam(am, in.radius))}};
}

using Command = json (*)(Context&);

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"probe-amenability", probe_amenability}, {"contain", contain},
      {"folner-witness", folner},              {"transfer", transfer},
      {"nondividing", nondividing_cmd},         {"canonical-base", canonical_base_cmd},
      {"superstable", superstable_cmd},         {"amalgamate", amalgamate_cmd}};
  return table;
}

struct Flags {
  std::string config;
  std::string target;
  std::string out;
  std::string csv;
  std::optional<std::int64_t> radius, nmax, budget, restarts, copies;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol, eps;
  std::optional<std::int64_t> cap_elements, cap_dim, cap_support, cap_copies;
};

void add_flags(CLI::App* sub, Flags& f, bool needs_target, bool csv) {
  sub->add_option("--config", f.config, "Config file (JSON)")->required();
  if (needs_target) sub->add_option("--target", f.target, "Target file: {\"gram\": ...} or {\"representation\", \"vectors\", \"F\"}");
  sub->add_option("--out", f.out, "Report file (default: stdout)");
  sub->add_option("--radius", f.radius, "Ball radius");
  sub->add_option("--tol", f.tol, "Tolerance");
  sub->add_option("--eps", f.eps, "Accuracy parameter");
  sub->add_option("--nmax", f.nmax, "Largest walk half-length n (steps 2n)");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--budget", f.budget, "Gradient steps per restart");
  sub->add_option("--restarts", f.restarts, "Random restarts");
  sub->add_option("--copies", f.copies, "Copies of an infinite multiple used by the basis");
  sub->add_option("--cap-elements", f.cap_elements, "Ball / Folner set size cap");
  sub->add_option("--cap-dim", f.cap_dim, "Closure dimension cap");
  sub->add_option("--cap-support", f.cap_support, "Convolution support cap");
  sub->add_option("--cap-copies", f.cap_copies, "Lazy copy cap");
  if (csv) sub->add_option("--csv", f.csv, "Write PREFIX_returns.csv and PREFIX_defects.csv");
}

void apply_flags(json& config, const Flags& f) {
  if (!config.is_object()) throw ConfigError("", "config must be an object");
  auto& task = config["task"];
  if (task.is_null()) task = json::object();
  if (!task.is_object()) throw ConfigError("/task", "expected an object");
  auto put = [&](const char* key, const auto& v) {
    if (v) task[key] = *v;
  };
  put("radius", f.radius);
  put("nmax", f.nmax);
  put("budget", f.budget);
  put("restarts", f.restarts);
  put("copies", f.copies);
  put("seed", f.seed);
  put("tol", f.tol);
  put("eps", f.eps);
  auto cap = [&](const char* key, const auto& v) {
    if (!v) return;
    if (!task.contains("caps") || !task["caps"].is_object()) task["caps"] = json::object();
    task["caps"][key] = *v;
  };
  cap("elements", f.cap_elements);
  cap("dimension", f.cap_dim);
  cap("support", f.cap_support);
  cap("copies", f.cap_copies);
  if (!f.target.empty()) task["target"] = io::read_json_file(f.target);
}

void write_csv(const std::string& prefix, const json& report) {
  const auto& out = report["outputs"];
  std::ofstream r(prefix + "_returns.csv");
  if (!r) throw ConfigError("", "cannot write '" + prefix + "_returns.csv'");
  const auto& rp = out["return_probabilities"];
  r << "n,p,ratio,root,exact\n";
  r.precision(17);
  for (std::size_t n = 0; n < rp["p"].size(); ++n) {
    r << n << ',' << rp["p"][n].get<double>() << ',' << rp["ratio"][n].get<double>() << ','
      << rp["root"][n].get<double>() << ',' << (n < rp["exact"].size() ? rp["exact"][n].get<std::string>() : "") << '\n';
  }
  std::ofstream d(prefix + "_defects.csv");
  if (!d) throw ConfigError("", "cannot write '" + prefix + "_defects.csv'");
  d.precision(17);
  d << "radius,min_avg_sq_defect,ball_size,certified_lower_bound\n";
  for (const auto& row : out["defects"]) {
    d << row["radius"].get<int>() << ',' << row["min_avg_sq_defect"].get<double>() << ','
      << row["ball_size"].get<std::size_t>() << ',' << row["certified_lower_bound"].get<double>() << '\n';
  }
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", "cannot write '" + path + "'");
  f << text;
}

}  // namespace

double Check::difference() const { return std::abs(reported - recomputed); }

json Verification::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks) {
    checks_json.push_back({{"name", c.name}, {"reported", c.reported}, {"recomputed", c.recomputed}, {"difference", c.difference()}});
  }
  return {{"ok", ok}, {"checks", checks_json}};
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : commands()) v.push_back(name);
    return v;
  }();
  return names;
}

json execute(const std::string& command, json config) {
  auto it = commands().find(command);
  if (it == commands().end()) throw PreconditionError("unknown subcommand '" + command + "'");
  Context ctx(std::move(config));
  return it->second(ctx);
}

Verification verify(const json& report, double tol) {
  const auto command = io::get_string(io::field(report, "command", ""), "/command");
  if (!commands().contains(command)) throw ConfigError("/command", "unknown subcommand '" + command + "'");
  Context ctx(io::field(report, "inputs", ""));
  Checks checks;
  if (command == "probe-amenability") checks = verify_probe(ctx, report);
  if (command == "contain") checks = verify_witnesses(ctx, report, ctx.rep("pi"));
  if (command == "transfer") checks = verify_witnesses(ctx, report, ctx.rep("eta"));
  if (command == "folner-witness") checks = verify_folner(ctx, report);
  if (command == "nondividing") checks = verify_nondividing(ctx, report);
  if (command == "canonical-base") checks = verify_canonical(ctx, report);
  if (command == "superstable") checks = verify_superstable(ctx, report);
  if (command == "amalgamate") checks = verify_amalgam(ctx, report);
  Verification v;
  v.checks = std::move(checks);
  for (const auto& c : v.checks) v.ok = v.ok && c.difference() <= tol;
  return v;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Representation workbench: amenability probes, weak containment, independence and amalgamation"};
  app.name("repwb");
  app.require_subcommand(1);
  Flags flags;
  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> help{
      {"probe-amenability", "Return probabilities, Folner defects and spectral radius bounds"},
      {"contain", "Search witnesses approximating a target Gram function"},
      {"folner-witness", "Almost invariant unit vector from a Folner box"},
      {"transfer", "Transfer witnesses through fresh copies of the regular representation"},
      {"nondividing", "Independence verdict over a truncated closure"},
      {"canonical-base", "Orthonormal base of the projected orbit"},
      {"superstable", "Finite approximate base over a closure"},
      {"amalgamate", "Amalgam of two finite-dimensional extensions"}};
  for (const auto& name : subcommands()) {
    subs[name] = app.add_subcommand(name, help.at(name));
    add_flags(subs[name], flags, name == "contain", name == "probe-amenability");
  }
  std::string report_path;
  double verify_tol = kVerifyTol;
  auto* verify_cmd = app.add_subcommand("verify", "Recompute the headline of a report");
  verify_cmd->add_option("report", report_path, "Report file")->required();
  verify_cmd->add_option("--tol", verify_tol, "Allowed difference");
  verify_cmd->add_option("--out", flags.out, "Verification output (default: stdout)");

  if (!args.empty() && !args[0].starts_with("-") && args[0] != "verify" && !commands().contains(args[0])) {
    err << "error: unknown subcommand '" << args[0] << "'\n\n" << app.help();
    return kUsage;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (verify_cmd->parsed()) {
      auto v = verify(io::read_json_file(report_path), verify_tol);
      emit(v.to_json().dump(2) + "\n", flags.out, out);
      if (!v.ok) err << "verify: mismatch above " << verify_tol << "\n";
      return v.ok ? kOk : kFailure;
    }
    std::string command;
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) command = name;
    }
    auto config = io::read_json_file(flags.config);
    apply_flags(config, flags);
    auto report = execute(command, std::move(config));
    if (!flags.csv.empty()) write_csv(flags.csv, report);
    emit(report.dump(2) + "\n", flags.out, out);
    return kOk;
  } catch (const ResourceError& e) {
    err << "resource error: " << e.what() << "\n";
    return kResource;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "precondition error: " << e.what() << "\n";
    return kUsage;
  } catch (const StructuralError& e) {
    err << "structural error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace repwb::cli
