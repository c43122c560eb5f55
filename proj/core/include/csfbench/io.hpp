#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "csfbench/bench.hpp"
#include "csfbench/dataset.hpp"
#include "csfbench/generators.hpp"
#include "csfbench/learners.hpp"
#include "csfbench/series.hpp"
#include "csfbench/smcsf.hpp"

namespace csfbench {

inline constexpr std::string_view kDatasetSchema = "csfbench-v1";
inline constexpr std::string_view kPredictionSchema = "pred-v1";
inline constexpr std::string_view kSmCsfSchema = "smcsf-v1";
inline constexpr std::string_view kNaiveBayesSchema = "nb-v1";
inline constexpr std::string_view kSvmSchema = "svm-v1";
inline constexpr std::string_view kMlpSchema = "mlp-v1";
inline constexpr std::string_view kCsfRuleSchema = "csfrule-v1";
inline constexpr std::string_view kNcsfRuleSchema = "ncsfrule-v1";
inline constexpr std::string_view kReportSchema = "report-v1";
inline constexpr std::string_view kSplitSchema = "split-v1";

// Real-series CSV ingestion ------------------------------------------------------

struct CsvSpec {
    std::filesystem::path path;
    std::string date_column = "date";
    std::string close_column = "close";
    /// Used instead of close_column when present and prefer_adjusted is set.
    std::string adjusted_column = "adj_close";
    bool prefer_adjusted = true;
    char delimiter = ',';
};

struct IngestResult {
    PriceSeries series;
    /// One entry per rejected row, naming the 1-based file line.
    std::vector<std::string> warnings;
    bool reversed = false;
    std::string price_column;
};

/// Reads a chronological close-price series. Rows with unparseable or
/// non-positive prices are dropped with a warning. Files whose first date
/// sorts after their last date are reversed.
IngestResult ingest_csv(const CsvSpec& spec);
IngestResult ingest_csv(std::istream& in, const CsvSpec& spec, std::string series_id);

inline constexpr std::size_t kMinIngestRows = 21;

/// Sliding windows of `width` prices labeled by the following day's return.
Dataset real_to_dataset(const PriceSeries& series, std::size_t width = 20);

// Datasets (JSON Lines) --------------------------------------------------------

void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);

// Predictions (JSON Lines) -----------------------------------------------------

void write_predictions(std::ostream& out, const PredictionSet& predictions);
PredictionSet read_predictions(std::istream& in);
void write_predictions(const std::filesystem::path& path, const PredictionSet& predictions);
PredictionSet read_predictions(const std::filesystem::path& path);

// Models and rules (JSON) ------------------------------------------------------

std::string to_json(const TrainedSmCsf& model);
std::string to_json(const NaiveBayesModel& model);
std::string to_json(const LinearModel& model);
std::string to_json(const MlpModel& model);
std::string to_json(const CsfRule& rule);
std::string to_json(const NcsfRule& rule);

TrainedSmCsf smcsf_from_json(std::string_view text);
NaiveBayesModel naive_bayes_from_json(std::string_view text);
LinearModel svm_from_json(std::string_view text);
MlpModel mlp_from_json(std::string_view text);
CsfRule csf_rule_from_json(std::string_view text);
NcsfRule ncsf_rule_from_json(std::string_view text);

/// Value of the "schema" key of a JSON document.
std::string schema_of(std::string_view text);

// Reports ----------------------------------------------------------------------

std::string reports_to_json(const std::vector<ModelReport>& reports);
std::vector<ModelReport> reports_from_json(std::string_view text);
/// One row per model x family.
void write_reports_csv(std::ostream& out, const std::vector<ModelReport>& reports);
/// model,family,precision,ci_lo,ci_hi,n_selected for bar charts.
void write_plot_csv(std::ostream& out, const std::vector<ModelReport>& reports);

// Splits -----------------------------------------------------------------------

struct SplitIds {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

std::string split_to_json(const SplitIds& split);
SplitIds split_from_json(std::string_view text);
SplitIds split_ids(const Dataset& dataset, const Split& split);
/// Resolves ids back to dataset positions; unknown ids throw invalid_input.
Split split_positions(const Dataset& dataset, const SplitIds& ids);

// Files --------------------------------------------------------------------------

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

} // namespace csfbench
