// mddlab: command-line front end. JSON on stdout, diagnostics on stderr.
// Exit codes: 0 success, 2 usage or input error, 3 numeric failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "class_spec.hpp"
#include "mddlab/complexity.hpp"
#include "mddlab/data.hpp"
#include "mddlab/discrepancy.hpp"
#include "mddlab/error.hpp"
#include "mddlab/experiment_config.hpp"
#include "mddlab/rng.hpp"
#include "mddlab/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mddlab;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

std::optional<std::uint64_t> resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("MDD_LAB_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw InvalidArgument("MDD_LAB_SEED must be an unsigned integer");
    return v;
  }
  return std::nullopt;
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& flag, const char* command) {
  const auto s = resolve_seed(flag);
  if (!s) throw InvalidArgument(fmt::format("{} needs --seed (or MDD_LAB_SEED)", command));
  return *s;
}

void emit(const json& j) { std::cout << j.dump() << '\n'; }

json sample_summary(const LabeledSample& s) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(s.num_classes()), 0);
  std::size_t unlabeled = 0;
  for (const auto& y : s.labels()) y ? ++counts[static_cast<std::size_t>(*y)] : ++unlabeled;
  return {{"rows", s.size()},          {"dim", s.dim()},   {"classes", s.num_classes()},
          {"domain", to_string(s.domain())}, {"class_counts", counts}, {"unlabeled", unlabeled}};
}

json bound_json(const BoundReport& r) {
  json terms = json::array();
  for (const auto& t : r.terms) terms.push_back({{"name", t.name}, {"value", t.value}});
  return {{"form", r.form}, {"terms", terms}, {"total", r.total}, {"delta", r.delta},
          {"rho", r.rho},   {"n", r.n},       {"m", r.m},         {"k", r.k}};
}

json record_json(const MetricsRecord& r) { return json::parse(metrics_to_json(r)); }

// ---------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  std::string kind;
  std::size_t n = 200;
  double noise = 0.1;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string target_out;
  double rotation_deg = 0.0;
  std::vector<double> translate;
  double scale = 1.0;
  bool as_target = false;
  bool unlabeled = false;
  std::string means;
  double stddev = 1.0;
};

std::vector<Vector> parse_means(const std::string& text) {
  std::vector<Vector> out;
  std::stringstream rows(text);
  std::string row;
  while (std::getline(rows, row, ';')) {
    std::vector<double> v;
    std::stringstream cells(row);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty()) throw InvalidArgument("bad --means entry '" + cell + "'");
      v.push_back(x);
    }
    out.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return out;
}

int run_gen_data(const GenDataArgs& a) {
  if (a.out.empty()) throw InvalidArgument("--out is required");
  if (a.kind == "dirac-pair") {
    if (a.target_out.empty()) throw InvalidArgument("dirac-pair needs --target-out");
    Matrix p(1, 2), q(1, 2);
    p << -1.0, 1.0;
    q << 1.0, -1.0;
    const LabeledSample P(p, {0}, Domain::Source, 2);
    const LabeledSample Q(q, {kUnlabeled}, Domain::Target, 2);
    save_csv(P, a.out);
    save_csv(Q, a.target_out);
    emit({{"kind", a.kind}, {"source", sample_summary(P)}, {"target", sample_summary(Q)},
          {"out", a.out}, {"target_out", a.target_out}});
    return 0;
  }

  const auto seed = require_seed(a.seed, "gen-data");
  LabeledSample s = [&] {
    if (a.kind == "moons") return make_moons(a.n, a.noise, seed);
    if (a.kind == "blobs") {
      if (a.means.empty()) throw InvalidArgument("blobs need --means 'x,y;x,y;...'");
      return make_gaussian_blobs(parse_means(a.means), a.stddev, a.n, seed);
    }
    throw InvalidArgument("unknown data kind '" + a.kind + "' (moons, blobs, dirac-pair)");
  }();

  const bool shifted = a.rotation_deg != 0.0 || !a.translate.empty() || a.scale != 1.0;
  if (shifted || a.as_target) {
    ShiftTransform t;
    t.rotation = a.rotation_deg * std::numbers::pi / 180.0;
    t.scale = a.scale;
    if (!a.translate.empty())
      t.translation = Eigen::Map<const Vector>(a.translate.data(),
                                               static_cast<Eigen::Index>(a.translate.size()));
    s = apply_shift(s, t);
  }
  if (a.unlabeled) s = s.without_labels();
  save_csv(s, a.out);
  emit({{"kind", a.kind}, {"seed", seed}, {"sample", sample_summary(s)}, {"out", a.out}});
  return 0;
}

// ---------------------------------------------------------------------------
// measure

struct MeasureArgs {
  std::string kind;
  std::string class_spec;
  std::string source;
  std::string target;
  std::string anchor = "0";
  double rho = 1.0;
  std::optional<std::uint64_t> seed;
};

int run_measure(const MeasureArgs& a) {
  const auto P = load_csv(a.source);
  const auto Q = load_csv(a.target, P.num_classes());
  if (P.dim() != Q.dim()) throw InvalidArgument("source and target dimensions differ");
  const auto seed = cli::class_needs_seed(a.class_spec)
                        ? std::optional<std::uint64_t>(require_seed(a.seed, "measure"))
                        : resolve_seed(a.seed);
  const auto F = cli::build_class(a.class_spec, P, Q, seed);
  json out = {{"measure", a.kind}, {"class", a.class_spec}, {"class_size", F.size()},
              {"n", P.size()},      {"m", Q.size()},          {"rho", nullptr},
              {"seed", seed ? json(*seed) : json(nullptr)}};

  if (a.kind == "hdh") {
    const auto r = hdh_divergence(F, P, Q);
    out["value"] = r.value;
    out["witness_index"] = r.argmax_index;
    out["witness"] = {{"h", r.argmax_index / F.size()}, {"h_prime", r.argmax_index % F.size()}};
    emit(out);
    return 0;
  }
  if (a.kind == "lambda") {
    if (!(a.rho > 0.0)) throw InvalidArgument("--rho must be positive");
    const auto r = ideal_lambda(F, P, Q, a.rho);
    out["rho"] = a.rho;
    out["value"] = r.value;
    out["witness_index"] = r.witness_index;
    emit(out);
    return 0;
  }
  if (a.kind != "dd" && a.kind != "mdd")
    throw InvalidArgument("--kind must be dd, mdd, hdh or lambda");
  if (a.kind == "mdd" && !(a.rho > 0.0)) throw InvalidArgument("--rho must be positive");

  std::vector<std::size_t> anchors;
  if (a.anchor == "all") {
    for (std::size_t j = 0; j < F.size(); ++j) anchors.push_back(j);
  } else {
    std::size_t used = 0;
    unsigned long idx = 0;
    try {
      idx = std::stoul(a.anchor, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != a.anchor.size() || idx >= F.size())
      throw InvalidArgument(fmt::format("--anchor must be 'all' or an index below {}", F.size()));
    anchors.push_back(idx);
  }

  json per_anchor = json::array();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_anchor = 0;
  for (auto j : anchors) {
    const auto r = a.kind == "dd" ? dd(LabelingFunction(F.member(j)), F, P, Q)
                                  : mdd(F[j], F, P, Q, a.rho);
    per_anchor.push_back({{"anchor", j},
                          {"value", r.value},
                          {"witness_index", r.argmax_index},
                          {"anchor_in_class", r.anchor_in_class}});
    if (r.value > best) {
      best = r.value;
      best_anchor = j;
    }
  }
  if (a.kind == "mdd") out["rho"] = a.rho;
  if (anchors.size() == 1) {
    out.update(per_anchor.front());
  } else {
    out["value"] = best;
    out["anchor"] = best_anchor;
    for (const auto& e : per_anchor)
      if (e["anchor"] == best_anchor) out["witness_index"] = e["witness_index"];
    out["per_anchor"] = per_anchor;
  }
  emit(out);
  return 0;
}

// ---------------------------------------------------------------------------
// train / probe

namespace {

void write_series(const fs::path& path, const std::vector<MetricsRecord>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << "step,lr,eta,source_ce,transfer,sigma_source,sigma_target,source_accuracy,"
         "target_accuracy,eval_sigma_source,eval_sigma_target,mdd_witness,mdd_probe\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? fmt::format("{:.17g}", *v) : std::string();
  };
  for (const auto& r : log)
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{},{},{}\n", r.step,
                       r.lr, r.eta, r.source_ce, r.transfer, r.sigma_source, r.sigma_target,
                       opt(r.source_accuracy), opt(r.target_accuracy), opt(r.eval_sigma_source),
                       opt(r.eval_sigma_target), opt(r.mdd_witness), opt(r.mdd_probe));
}

double tail_mean(const std::vector<MetricsRecord>& history, std::size_t window, bool target) {
  if (history.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t start = history.size() > window ? history.size() - window : 0;
  double s = 0.0;
  for (std::size_t i = start; i < history.size(); ++i)
    s += target ? history[i].sigma_target : history[i].sigma_source;
  return s / static_cast<double>(history.size() - start);
}

}  // namespace

struct TrainArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_train(const TrainArgs& a) {
  auto cfg = load_experiment_config(a.config);
  if (!a.out.empty()) cfg.output.dir = a.out;
  if (a.seed) cfg.train.seed = *a.seed;
  cfg.validate();
  const fs::path dir = cfg.output.dir;
  fs::create_directories(dir);

  const auto data = build_experiment_data(cfg.data);
  const fs::path metrics_path = dir / cfg.output.metrics;
  std::ofstream metrics(metrics_path, std::ios::binary);
  if (!metrics) throw InvalidArgument("cannot write " + metrics_path.string());
  metrics << metrics_log_header(cfg.train) << '\n';
  std::ofstream(dir / "config.ini", std::ios::binary) << dump_experiment_config(cfg);

  std::optional<MetricsRecord> last_good;
  TrainResult result;
  try {
    result = train(cfg.train, data.source, data.target, data.target_eval, [&](const MetricsRecord& r) {
      metrics << metrics_to_json(r) << '\n' << std::flush;
      last_good = r;
    });
  } catch (const TrainingDiverged& e) {
    const fs::path last_path = dir / "last_good.json";
    std::ofstream(last_path, std::ios::binary)
        << (last_good ? metrics_to_json(*last_good) : std::string("null")) << '\n';
    std::cerr << "mddlab train: " << e.what() << '\n';
    emit({{"error", "numeric"},
          {"message", e.what()},
          {"failed_record", record_json(e.record())},
          {"last_good", last_path.string()},
          {"metrics", metrics_path.string()}});
    return kExitNumeric;
  }

  const fs::path ckpt = dir / cfg.output.checkpoint;
  save_checkpoint(result.models, cfg.train, ckpt);
  write_series(dir / cfg.output.series, result.log);

  json summary = {{"steps", cfg.train.steps},
                  {"method", to_string(cfg.train.method)},
                  {"gamma", cfg.train.gamma},
                  {"eta", cfg.train.eta},
                  {"seed", cfg.train.seed},
                  {"equilibrium_value", cfg.train.gamma / (1.0 + cfg.train.gamma)},
                  {"sigma_source_tail_mean", tail_mean(result.history, 500, false)},
                  {"sigma_target_tail_mean", tail_mean(result.history, 500, true)},
                  {"metrics", metrics_path.string()},
                  {"checkpoint", ckpt.string()},
                  {"series", (dir / cfg.output.series).string()}};
  summary["source_accuracy"] = accuracy(result.models, data.source);
  summary["target_accuracy"] =
      data.target_eval ? json(accuracy(result.models, *data.target_eval)) : json(nullptr);
  const auto eq = equilibrium_probe(result.models, data.source.features(), data.target.features());
  summary["sigma_source"] = eq.sigma_source;
  summary["sigma_target"] = eq.sigma_target;
  summary["mdd_witness"] = mdd_witness(result.models, data.source.features(),
                                       data.target.features(), cfg.train.diagnostic_rho());
  summary["mdd_probe"] =
      result.log.empty() || !result.log.back().mdd_probe ? json(nullptr) : json(*result.log.back().mdd_probe);
  summary["rho"] = cfg.train.diagnostic_rho();
  std::ofstream(dir / cfg.output.summary, std::ios::binary) << summary.dump(2) << '\n';
  emit(summary);
  return 0;
}

struct ProbeArgs {
  std::string checkpoint;
  std::string kind;
  std::string source;
  std::string target;
  double mu = 0.8;
  std::optional<double> rho;
  std::optional<std::size_t> probe_size;
  std::optional<std::uint64_t> seed;
};

int run_probe(const ProbeArgs& a) {
  const auto [models, cfg] = load_checkpoint(a.checkpoint);
  if (a.source.empty()) throw InvalidArgument("--source is required");
  const auto P = load_csv(a.source, static_cast<int>(models.classifier.output_dim()));
  std::optional<LabeledSample> Q;
  if (!a.target.empty()) Q = load_csv(a.target, P.num_classes());
  json out = {{"kind", a.kind}, {"checkpoint", a.checkpoint}};

  if (a.kind == "margin") {
    Matrix x = P.features();
    if (Q) {
      Matrix both(x.rows() + Q->features().rows(), x.cols());
      both << x, Q->features();
      x = std::move(both);
    }
    const auto r = margin_probe(models.auxiliary.predict(models.feature.predict(x)), a.mu);
    out.update({{"mu", r.mu},
                {"threshold", r.threshold},
                {"rows", r.rows},
                {"checked", r.checked},
                {"violations", r.violations},
                {"min_slack", r.min_slack ? json(*r.min_slack) : json(nullptr)},
                {"holds", r.violations == 0}});
    emit(out);
    return 0;
  }
  if (!Q) throw InvalidArgument("--target is required for this probe");
  if (a.kind == "equilibrium") {
    const auto r = equilibrium_probe(models, P.features(), Q->features());
    out.update({{"sigma_source", r.sigma_source},
                {"sigma_target", r.sigma_target},
                {"gamma", cfg.gamma},
                {"equilibrium_value", cfg.gamma / (1.0 + cfg.gamma)}});
    emit(out);
    return 0;
  }
  if (a.kind == "mdd") {
    const double rho = a.rho ? *a.rho : cfg.diagnostic_rho();
    const std::size_t size = a.probe_size ? *a.probe_size : (cfg.probe_size ? cfg.probe_size : 512);
    const auto seed = a.seed ? *a.seed : derive_seed(cfg.seed, 2);
    const auto probe = linear_probe_class(models.feature.output_dim(),
                                          static_cast<int>(models.classifier.output_dim()), size,
                                          cfg.probe_scale, seed);
    const auto d = mdd_diagnostic(models, probe, P.features(), Q->features(), rho);
    out.update({{"rho", rho},
                {"witness", d.witness},
                {"probe", d.probe},
                {"probe_argmax", d.probe_argmax},
                {"probe_size", size}});
    emit(out);
    return 0;
  }
  throw InvalidArgument("--kind must be equilibrium, margin or mdd");
}

// ---------------------------------------------------------------------------
// bound / rademacher

struct BoundArgs {
  std::string form;
  double err = 0.0;
  double disc = 0.0;
  double lambda = 0.0;
  double rp1 = 0.0;
  double rph = 0.0;
  double rqh = 0.0;
  double rp_hdh = 0.0;
  double rp_h = 0.0;
  double rq_hdh = 0.0;
  std::optional<std::size_t> vc_dim;
  std::size_t n = 0;
  std::size_t m = 0;
  int k = 2;
  double rho = 1.0;
  double delta = 0.05;
  std::string pi1_f;
  std::string pi1_h;
  std::optional<double> sup_norm;
};

int run_bound(const BoundArgs& a) {
  if (a.form == "mdd") {
    MddBoundInputs in;
    in.source_margin_error = a.err;
    in.empirical_mdd = a.disc;
    in.lambda = a.lambda;
    in.rademacher_pi1_source = a.rp1;
    in.rademacher_pihf_source = a.rph;
    in.rademacher_pihf_target = a.rqh;
    in.n = a.n;
    in.m = a.m;
    in.k = a.k;
    in.rho = a.rho;
    in.delta = a.delta;
    emit(bound_json(bound_mdd(in)));
    return 0;
  }
  if (a.form == "dd-binary") {
    DdBinaryInputs in;
    in.source_error = a.err;
    in.empirical_dd = a.disc;
    in.lambda = a.lambda;
    in.n = a.n;
    in.m = a.m;
    in.delta = a.delta;
    in.rademacher_hdh_source = a.rp_hdh;
    in.rademacher_h_source = a.rp_h;
    in.rademacher_hdh_target = a.rq_hdh;
    if (a.vc_dim) {
      in.vc_dim = *a.vc_dim;
      emit(bound_json(bound_dd_binary_vc(in)));
    } else {
      emit(bound_json(bound_dd_binary_rademacher(in)));
    }
    return 0;
  }
  if (a.form == "covering") {
    if (a.pi1_f.empty() || a.pi1_h.empty())
      throw InvalidArgument("covering form needs --pi1-f and --pi1-h value matrices");
    CoveringBoundInputs in;
    in.source_margin_error = a.err;
    in.empirical_mdd = a.disc;
    in.lambda = a.lambda;
    in.n = a.n;
    in.m = a.m;
    in.k = a.k;
    in.rho = a.rho;
    in.delta = a.delta;
    in.pi1_f = load_value_matrix(a.pi1_f);
    in.pi1_h = load_value_matrix(a.pi1_h);
    in.sup_norm = a.sup_norm;
    auto out = bound_json(bound_covering(in));
    const double L = a.sup_norm ? *a.sup_norm : sup_l2_norm(in.pi1_f);
    const GreedyCover cf(in.pi1_f);
    const GreedyCover ch(in.pi1_h);
    json covers = json::array();
    for (double eps : default_eps_grid(L > 0.0 ? L : 1.0))
      covers.push_back({{"eps", eps}, {"n_pi1_f", cf.count(eps)}, {"n_pi1_h", ch.count(eps)}});
    out["covering_numbers"] = covers;
    emit(out);
    return 0;
  }
  throw InvalidArgument("--form must be mdd, dd-binary or covering");
}

struct RademacherArgs {
  std::string matrix;
  std::size_t trials = 1000;
  std::optional<std::uint64_t> seed;
};

int run_rademacher(const RademacherArgs& a) {
  const auto M = load_value_matrix(a.matrix);
  const std::uint64_t seed = a.trials == kExhaustive ? resolve_seed(a.seed).value_or(0)
                                                      : require_seed(a.seed, "rademacher");
  const auto r = empirical_rademacher(M, a.trials, seed);
  json out = {{"estimate", r.estimate},   {"std_error", r.std_error},
              {"trials", r.trials},       {"exhaustive", r.exhaustive},
              {"functions", M.num_functions()}, {"points", M.num_points()}};
  if (!r.exhaustive) out["seed"] = seed;
  emit(out);
  return 0;
}

int run_config_dump(const std::string& path) {
  const auto cfg = path.empty() ? ExperimentConfig{} : load_experiment_config(path);
  std::cout << dump_experiment_config(cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mddlab: margin disparity discrepancy laboratory"};
  app.require_subcommand(1);

  GenDataArgs g;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic sample as CSV");
  gen->add_option("kind", g.kind, "moons | blobs | dirac-pair")->required();
  gen->add_option("--n", g.n, "Points (moons) or points per class (blobs)");
  gen->add_option("--noise", g.noise, "Gaussian noise std (moons)");
  gen->add_option("--seed", g.seed, "PRNG seed");
  gen->add_option("--out", g.out, "Output CSV");
  gen->add_option("--target-out", g.target_out, "Second output (dirac-pair target)");
  gen->add_option("--rotate-deg", g.rotation_deg, "Rotation about the origin, degrees");
  gen->add_option("--translate", g.translate, "Translation vector")->expected(1, 64);
  gen->add_option("--scale", g.scale, "Scale factor");
  gen->add_flag("--as-target", g.as_target, "Tag rows as target domain");
  gen->add_flag("--unlabeled", g.unlabeled, "Write every label as -1");
  gen->add_option("--means", g.means, "Blob centres 'x,y;x,y;...'");
  gen->add_option("--std", g.stddev, "Blob std");

  MeasureArgs ms;
  auto* measure = app.add_subcommand("measure", "Brute-force discrepancy over a finite class");
  measure->add_option("--kind", ms.kind, "dd | mdd | hdh | lambda")->required();
  measure->add_option("--class", ms.class_spec, "Class spec")->required();
  measure->add_option("--source", ms.source, "Source CSV")->required();
  measure->add_option("--target", ms.target, "Target CSV")->required();
  measure->add_option("--anchor", ms.anchor, "Anchor member index, or 'all'");
  measure->add_option("--rho", ms.rho, "Margin (mdd, lambda)");
  measure->add_option("--seed", ms.seed, "Seed for random class specs");

  TrainArgs ta;
  auto* trn = app.add_subcommand("train", "Run adversarial training from a config file");
  trn->add_option("--config", ta.config, "INI experiment config")->required();
  trn->add_option("--out", ta.out, "Output directory (overrides output.dir)");
  trn->add_option("--seed", ta.seed, "Overrides train.seed");

  ProbeArgs pa;
  auto* prb = app.add_subcommand("probe", "Diagnostics on a trained checkpoint");
  prb->add_option("--checkpoint", pa.checkpoint, "Checkpoint JSON")->required();
  prb->add_option("--kind", pa.kind, "equilibrium | margin | mdd")->required();
  prb->add_option("--source", pa.source, "Source CSV");
  prb->add_option("--target", pa.target, "Target CSV");
  prb->add_option("--mu", pa.mu, "Margin probe threshold in (1/2, 1)");
  prb->add_option("--rho", pa.rho, "Margin for the mdd probe");
  prb->add_option("--probe-size", pa.probe_size, "Linear probe heads");
  prb->add_option("--seed", pa.seed, "Probe class seed");

  BoundArgs ba;
  auto* bnd = app.add_subcommand("bound", "Evaluate a generalisation bound");
  bnd->add_option("--form", ba.form, "mdd | dd-binary | covering")->required();
  bnd->add_option("--err", ba.err, "Source (margin) error");
  bnd->add_option("--disc", ba.disc, "Empirical MDD or DD");
  bnd->add_option("--lambda", ba.lambda, "Ideal joint error");
  bnd->add_option("--rp-pi1", ba.rp1, "R_P(Pi_1 F)");
  bnd->add_option("--rp-pih", ba.rph, "R_P(Pi_H F)");
  bnd->add_option("--rq-pih", ba.rqh, "R_Q(Pi_H F)");
  bnd->add_option("--rp-hdh", ba.rp_hdh, "R_P(H delta H)");
  bnd->add_option("--rp-h", ba.rp_h, "R_P(H)");
  bnd->add_option("--rq-hdh", ba.rq_hdh, "R_Q(H delta H)");
  bnd->add_option("--vc-dim", ba.vc_dim, "Use the VC form with this dimension");
  bnd->add_option("--n", ba.n, "Source sample size")->required();
  bnd->add_option("--m", ba.m, "Target sample size")->required();
  bnd->add_option("--k", ba.k, "Class count");
  bnd->add_option("--rho", ba.rho, "Margin");
  bnd->add_option("--delta", ba.delta, "Confidence parameter");
  bnd->add_option("--pi1-f", ba.pi1_f, "Value matrix of Pi_1 F (covering)");
  bnd->add_option("--pi1-h", ba.pi1_h, "Value matrix of Pi_1 H (covering)");
  bnd->add_option("--sup-norm", ba.sup_norm, "Upper integration limit L (covering)");

  RademacherArgs ra;
  auto* rad = app.add_subcommand("rademacher", "Empirical Rademacher complexity of a value matrix");
  rad->add_option("--matrix", ra.matrix, "Headerless CSV, one function per row")->required();
  rad->add_option("--trials", ra.trials, "Monte-Carlo draws; 0 enumerates all sign vectors");
  rad->add_option("--seed", ra.seed, "PRNG seed");

  std::string dump_path;
  auto* cfg = app.add_subcommand("config", "Configuration utilities");
  auto* dump = cfg->add_subcommand("dump", "Print the full configuration with defaults");
  dump->add_option("--config", dump_path, "INI file to load first");
  cfg->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cerr << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "mddlab: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*gen) return run_gen_data(g);
    if (*measure) return run_measure(ms);
    if (*trn) return run_train(ta);
    if (*prb) return run_probe(pa);
    if (*bnd) return run_bound(ba);
    if (*rad) return run_rademacher(ra);
    if (*dump) return run_config_dump(dump_path);
  } catch (const NumericError& e) {
    std::cerr << "mddlab: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "mddlab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "mddlab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "mddlab: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
