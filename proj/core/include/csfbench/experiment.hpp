#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csfbench/bench.hpp"
#include "csfbench/generators.hpp"
#include "csfbench/io.hpp"
#include "csfbench/learners.hpp"
#include "csfbench/smcsf.hpp"

namespace csfbench {

inline constexpr std::string_view kRunConfigSchema = "csfbench-run-v1";

struct FamilySpec {
    Family family = Family::csf;
    GenConfig generation;
    /// Derived from the experiment seed and family position when absent.
    std::optional<std::uint64_t> seed;
    std::size_t k_effective = 10;
    double calibration_quantile = 0.8;
    std::size_t calibration_n = 10000;
    double p_signal = 0.75;
    double base_rate = 0.52;
    double ratio_threshold = 0.7;
    CsvSpec csv; // real family only
};

struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::vector<FamilySpec> families;
    std::vector<std::string> models{"smcsf", "nb", "svm", "mlp"};
    SmCsfConfig smcsf;
    SvmConfig svm;
    MlpConfig mlp;
    bool zscore = true;
    double nb_variance_floor = 1e-9;
    double test_fraction = 0.3;
    std::uint64_t split_seed = 7;
    /// 1 keeps the single train/test split; k > 1 runs k-fold cross-validation
    /// and pools every fold's selections into one report.
    std::size_t folds = 1;
    double selection_rate = 0.2;
    std::size_t baseline_trials = 1000;

    void validate() const;
};

/// Default grid: csf, ncsf and random families with every native model.
ExperimentConfig default_experiment_config();

/// Parses a run config. Unknown keys and schema mismatches are rejected.
/// Relative CSV paths resolve against `base_dir`.
ExperimentConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
std::string run_config_to_json(const ExperimentConfig& config);

struct TrainedModelArtifact {
    std::string name;
    std::string json;
    std::vector<std::string> flags;
};

/// Trains model `name` ("smcsf", "nb", "svm" or "mlp") with the settings in
/// `config` and returns its serialized form.
TrainedModelArtifact train_model(const std::string& name, std::span<const LabeledWindow> train,
                                 const ExperimentConfig& config);

/// Scores windows with any serialized model, dispatching on its schema.
/// Higher means more likely positive.
std::vector<double> score_windows(std::string_view model_json,
                                  std::span<const LabeledWindow> windows);

/// Name used in predictions and reports, e.g. "sm-csf" for "smcsf".
std::string model_display_name(const std::string& name);

struct FamilyResult {
    FamilySpec spec;
    Dataset dataset;
    std::optional<CsfRule> csf_rule;
    std::optional<NcsfRule> ncsf_rule;
    std::vector<Split> splits; // one per fold
    std::vector<TrainedModelArtifact> models;
    std::vector<PredictionSet> predictions;
    std::vector<ModelReport> reports; // sorted by precision
};

struct ExperimentResult {
    std::vector<FamilyResult> families;

    std::vector<ModelReport> all_reports() const;
};

/// Generates or ingests each family, splits it, trains every configured
/// model, scores the test split and reports precision among selected samples
/// next to the random baseline and, where a generating rule exists, the oracle.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes datasets, rules, splits, models, predictions and reports under
/// out_dir/<family>/ plus combined reports at the top level.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& out_dir);

/// Builds the family's dataset (and rule) exactly as run_experiment does.
FamilyResult prepare_family(const FamilySpec& spec, std::uint64_t seed);

/// Seed used for family `position` when the family sets none.
std::uint64_t family_seed(const FamilySpec& spec, std::uint64_t experiment_seed,
                          std::size_t position);

} // namespace csfbench
