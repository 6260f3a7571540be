#include "mddlab/experiment_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "mddlab/error.hpp"
#include "mddlab/rng.hpp"

namespace mddlab {

namespace {

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw InvalidArgument(fmt::format("{}: '{}' is not a finite number", key, v));
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw InvalidArgument(fmt::format("{}: '{}' is not a nonnegative integer", key, v));
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument(fmt::format("{}: '{}' is not a boolean", key, v));
}

std::vector<std::size_t> to_widths(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(to_size(key, tok));
  return out;
}

std::string widths_str(const std::vector<std::size_t>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? " " : "") + std::to_string(w[i]);
  return s;
}

std::string num(double v) { return fmt::format("{}", v); }

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define MDDLAB_DOUBLE(sec, name, member)                                            \
  Field {                                                                           \
    sec, name, [](const ExperimentConfig& c) { return num(c.member); },             \
        [](ExperimentConfig& c, const std::string& v) { c.member = to_double(name, v); } \
  }
#define MDDLAB_SIZE(sec, name, member)                                                  \
  Field {                                                                               \
    sec, name, [](const ExperimentConfig& c) { return std::to_string(c.member); },      \
        [](ExperimentConfig& c, const std::string& v) { c.member = to_size(name, v); }  \
  }
#define MDDLAB_STRING(sec, name, member)                                  \
  Field {                                                                 \
    sec, name, [](const ExperimentConfig& c) { return c.member; },        \
        [](ExperimentConfig& c, const std::string& v) { c.member = v; }   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      MDDLAB_STRING("data", "kind", data.kind),
      MDDLAB_SIZE("data", "n_source", data.n_source),
      MDDLAB_SIZE("data", "n_target", data.n_target),
      MDDLAB_DOUBLE("data", "noise", data.noise),
      MDDLAB_DOUBLE("data", "rotation_deg", data.rotation_deg),
      MDDLAB_DOUBLE("data", "translate_x", data.translate_x),
      MDDLAB_DOUBLE("data", "translate_y", data.translate_y),
      MDDLAB_DOUBLE("data", "scale", data.scale),
      Field{"data", "seed", [](const ExperimentConfig& c) { return std::to_string(c.data.seed); },
            [](ExperimentConfig& c, const std::string& v) { c.data.seed = to_u64("seed", v); }},
      MDDLAB_STRING("data", "source_csv", data.source_csv),
      MDDLAB_STRING("data", "target_csv", data.target_csv),

      Field{"train", "method", [](const ExperimentConfig& c) { return to_string(c.train.method); },
            [](ExperimentConfig& c, const std::string& v) { c.train.method = method_from_string(v); }},
      MDDLAB_DOUBLE("train", "gamma", train.gamma),
      MDDLAB_DOUBLE("train", "eta", train.eta),
      Field{"train", "eta_ramp",
            [](const ExperimentConfig& c) { return std::string(c.train.eta_ramp ? "true" : "false"); },
            [](ExperimentConfig& c, const std::string& v) { c.train.eta_ramp = to_bool("eta_ramp", v); }},
      MDDLAB_DOUBLE("train", "eta_ramp_rate", train.eta_ramp_rate),
      MDDLAB_SIZE("train", "steps", train.steps),
      MDDLAB_SIZE("train", "batch_size", train.batch_size),
      Field{"train", "seed", [](const ExperimentConfig& c) { return std::to_string(c.train.seed); },
            [](ExperimentConfig& c, const std::string& v) { c.train.seed = to_u64("seed", v); }},
      MDDLAB_DOUBLE("train", "lr0", train.lr0),
      MDDLAB_DOUBLE("train", "lr_alpha", train.lr_alpha),
      MDDLAB_DOUBLE("train", "lr_beta", train.lr_beta),
      MDDLAB_DOUBLE("train", "momentum", train.momentum),
      MDDLAB_DOUBLE("train", "classifier_lr_multiplier", train.classifier_lr_multiplier),
      Field{"train", "feature_widths",
            [](const ExperimentConfig& c) { return widths_str(c.train.feature_widths); },
            [](ExperimentConfig& c, const std::string& v) {
              c.train.feature_widths = to_widths("feature_widths", v);
            }},
      Field{"train", "head_widths",
            [](const ExperimentConfig& c) { return widths_str(c.train.head_widths); },
            [](ExperimentConfig& c, const std::string& v) {
              c.train.head_widths = to_widths("head_widths", v);
            }},
      Field{"train", "loss_mode",
            [](const ExperimentConfig& c) { return to_string(c.train.loss_mode); },
            [](ExperimentConfig& c, const std::string& v) {
              c.train.loss_mode = loss_mode_from_string(v);
            }},
      MDDLAB_SIZE("train", "margin_after", train.margin_after),
      MDDLAB_SIZE("train", "eval_every", train.eval_every),

      MDDLAB_DOUBLE("probe", "mu", probe.mu),
      MDDLAB_SIZE("probe", "probe_size", train.probe_size),
      MDDLAB_DOUBLE("probe", "probe_scale", train.probe_scale),
      Field{"probe", "eval_rho",
            [](const ExperimentConfig& c) {
              return c.train.eval_rho ? num(*c.train.eval_rho) : std::string("auto");
            },
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "auto")
                c.train.eval_rho.reset();
              else
                c.train.eval_rho = to_double("eval_rho", v);
            }},

      MDDLAB_STRING("output", "dir", output.dir),
      MDDLAB_STRING("output", "metrics", output.metrics),
      MDDLAB_STRING("output", "checkpoint", output.checkpoint),
      MDDLAB_STRING("output", "summary", output.summary),
      MDDLAB_STRING("output", "series", output.series),
  };
  return table;
}

#undef MDDLAB_DOUBLE
#undef MDDLAB_SIZE
#undef MDDLAB_STRING

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (section == f.section && key == f.key) return &f;
  return nullptr;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (data.kind != "moons" && data.kind != "csv")
    throw InvalidArgument("data.kind must be moons or csv");
  if (data.kind == "moons") {
    if (data.n_source < 2 || data.n_target < 2)
      throw InvalidArgument("moons need at least 2 points per domain");
    if (!(data.noise >= 0.0)) throw InvalidArgument("data.noise must be nonnegative");
    if (!(data.scale > 0.0)) throw InvalidArgument("data.scale must be positive");
  } else if (data.source_csv.empty() || data.target_csv.empty()) {
    throw InvalidArgument("data.kind = csv needs source_csv and target_csv");
  }
  if (!(probe.mu > 0.5 && probe.mu < 1.0)) throw InvalidArgument("probe.mu must lie in (1/2, 1)");
  if (output.dir.empty()) throw InvalidArgument("output.dir must not be empty");
  train.validate();
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw InvalidArgument(fmt::format("key '{}' outside any section", section));
    for (const auto& [key, value] : body) {
      const auto* f = find_field(section, key);
      if (!f) throw InvalidArgument(fmt::format("unknown key '{}.{}'", section, key));
      f->set(c, value.get_value<std::string>());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string dump_experiment_config(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += fmt::format("[{}]\n", section);
    }
    out += fmt::format("{} = {}\n", f.key, f.get(config));
  }
  return out;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  for (const auto& f : fields())
    if (f.get(a) != f.get(b)) return false;
  return true;
}

ExperimentData build_experiment_data(const DataConfig& config) {
  if (config.kind == "csv") {
    auto source = load_csv(config.source_csv);
    auto target_full = load_csv(config.target_csv, source.num_classes());
    if (!source.fully_labeled()) throw InvalidArgument("source file must be fully labeled");
    std::optional<LabeledSample> eval;
    if (target_full.fully_labeled()) eval = target_full.with_domain(Domain::Target);
    auto target = target_full.without_labels().with_domain(Domain::Target);
    return {std::move(source), std::move(target), std::move(eval)};
  }
  if (config.kind != "moons") throw InvalidArgument("data.kind must be moons or csv");

  auto source = make_moons(config.n_source, config.noise, config.seed);
  const double angle = config.rotation_deg * std::numbers::pi / 180.0;
  const double cx = 0.5;
  const double cy = 0.25;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  ShiftTransform t;
  t.rotation = angle;
  t.scale = config.scale;
  t.translation = Vector(2);
  t.translation << cx - config.scale * (c * cx - s * cy) + config.translate_x,
      cy - config.scale * (s * cx + c * cy) + config.translate_y;
  auto eval = apply_shift(make_moons(config.n_target, config.noise, derive_seed(config.seed, 1)), t);
  auto target = eval.without_labels();
  return {std::move(source), std::move(target), std::move(eval)};
}

}  // namespace mddlab
