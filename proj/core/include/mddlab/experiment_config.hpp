#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mddlab/data.hpp"
#include "mddlab/trainer.hpp"

namespace mddlab {

/// Where the source/target samples come from.
struct DataConfig {
  std::string kind = "moons";  // moons | csv
  std::size_t n_source = 400;
  std::size_t n_target = 400;
  double noise = 0.1;
  double rotation_deg = 30.0;  // about the moons centre (0.5, 0.25)
  double translate_x = 0.0;
  double translate_y = 0.0;
  double scale = 1.0;
  std::uint64_t seed = 1;
  std::string source_csv;       // kind = csv
  std::string target_csv;       // kind = csv; labels used only for evaluation
};

struct ProbeConfig {
  double mu = 0.8;  // margin probe threshold
};

struct OutputConfig {
  std::string dir = "run";
  std::string metrics = "metrics.jsonl";
  std::string checkpoint = "checkpoint.json";
  std::string summary = "summary.json";
  std::string series = "series.csv";
};

/// INI document with sections [data], [train], [probe], [output]. Every key
/// has a default; unknown sections or keys are rejected.
///
/// [train] holds every TrainConfig field under its own name; width lists are
/// space separated and eval_rho = auto selects the default margin. [probe]
/// holds mu plus the probe class keys probe_size, probe_scale and eval_rho,
/// which also map onto TrainConfig.
struct ExperimentConfig {
  DataConfig data;
  TrainConfig train;
  ProbeConfig probe;
  OutputConfig output;

  void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Full document with every key, in a fixed order; parses back to an equal
/// configuration.
std::string dump_experiment_config(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

struct ExperimentData {
  LabeledSample source;
  LabeledSample target;       // labels stripped
  std::optional<LabeledSample> target_eval;  // same rows as target, labeled
};

/// moons: source = make_moons(n_source, noise, seed); target rows are
/// make_moons(n_target, noise, derive_seed(seed, 1)) rotated about (0.5, 0.25),
/// scaled about the same centre, then translated. csv: target_eval is set
/// only when the target file is fully labeled.
ExperimentData build_experiment_data(const DataConfig& config);

}  // namespace mddlab
