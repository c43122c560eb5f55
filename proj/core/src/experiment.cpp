#include "csfbench/experiment.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csfbench/error.hpp"
#include "csfbench/oracles.hpp"
#include "csfbench/parallel.hpp"
#include "csfbench/rng.hpp"

namespace csfbench {

using Json = nlohmann::ordered_json;

namespace {

const std::set<std::string> kModelNames{"smcsf", "nb", "svm", "mlp"};

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) fail(ErrorKind::invalid_config, where + " must be an object");
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&item](const char* key) { return item.key() == key; });
        if (!known) fail(ErrorKind::invalid_config, where + ": unknown key '" + item.key() + "'");
    }
}

template <typename T>
void read_into(const Json& obj, const char* key, T& target, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        target = obj.at(key).get<T>();
    } catch (const Json::exception& e) {
        fail(ErrorKind::invalid_config, where + ": bad value for '" + key + "': " + e.what());
    }
}

FamilySpec parse_family(const Json& j, const std::filesystem::path& base_dir, std::size_t position) {
    const std::string where = "families[" + std::to_string(position) + "]";
    check_keys(j,
               {"family", "n_windows", "seed", "window_size", "long_path", "step_mu", "step_sigma",
                "start_price", "k_effective", "calibration_quantile", "calibration_n", "p_signal",
                "base_rate", "ratio_threshold", "csv"},
               where);
    FamilySpec spec;
    std::string family;
    read_into(j, "family", family, where);
    if (family.empty()) fail(ErrorKind::invalid_config, where + ": 'family' is required");
    spec.family = family_from_string(family);
    read_into(j, "n_windows", spec.generation.n_windows, where);
    if (j.contains("seed")) {
        std::uint64_t seed = 0;
        read_into(j, "seed", seed, where);
        spec.seed = seed;
    }
    read_into(j, "window_size", spec.generation.window_size, where);
    read_into(j, "long_path", spec.generation.long_path, where);
    read_into(j, "step_mu", spec.generation.steps.mu, where);
    read_into(j, "step_sigma", spec.generation.steps.sigma, where);
    read_into(j, "start_price", spec.generation.start_price, where);
    read_into(j, "k_effective", spec.k_effective, where);
    read_into(j, "calibration_quantile", spec.calibration_quantile, where);
    read_into(j, "calibration_n", spec.calibration_n, where);
    read_into(j, "p_signal", spec.p_signal, where);
    read_into(j, "base_rate", spec.base_rate, where);
    read_into(j, "ratio_threshold", spec.ratio_threshold, where);
    if (j.contains("csv")) {
        const Json& csv = j.at("csv");
        const std::string cwhere = where + ".csv";
        check_keys(csv, {"path", "date_column", "close_column", "adjusted_column", "prefer_adjusted", "delimiter"},
                   cwhere);
        std::string path;
        read_into(csv, "path", path, cwhere);
        spec.csv.path = path;
        if (spec.csv.path.is_relative() && !base_dir.empty()) spec.csv.path = base_dir / spec.csv.path;
        read_into(csv, "date_column", spec.csv.date_column, cwhere);
        read_into(csv, "close_column", spec.csv.close_column, cwhere);
        read_into(csv, "adjusted_column", spec.csv.adjusted_column, cwhere);
        read_into(csv, "prefer_adjusted", spec.csv.prefer_adjusted, cwhere);
        std::string delimiter(1, spec.csv.delimiter);
        read_into(csv, "delimiter", delimiter, cwhere);
        if (delimiter.size() != 1) fail(ErrorKind::invalid_config, cwhere + ": delimiter must be one character");
        spec.csv.delimiter = delimiter[0];
    }
    if (spec.family == Family::real && spec.csv.path.empty()) {
        fail(ErrorKind::invalid_config, where + ": real family needs csv.path");
    }
    return spec;
}

template <typename Model>
std::vector<double> score_rows(const Model& model, std::span<const LabeledWindow> windows) {
    const FeatureMatrix fm = build_features(windows, model.zscore);
    std::vector<double> scores(fm.rows());
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        scores[i] = model.score(fm.x.row(static_cast<Eigen::Index>(i)).transpose());
    }
    return scores;
}

std::string family_dir_name(const FamilyResult& fr, std::size_t position,
                            const std::vector<FamilyResult>& all) {
    const auto same = std::count_if(all.begin(), all.end(), [&fr](const FamilyResult& other) {
        return other.spec.family == fr.spec.family;
    });
    std::string name(to_string(fr.spec.family));
    if (same > 1) name += "-" + std::to_string(position);
    return name;
}

} // namespace

std::string model_display_name(const std::string& name) {
    if (name == "smcsf") return "sm-csf";
    if (name == "nb") return "naive-bayes";
    if (name == "svm") return "linear-svm";
    return name;
}

TrainedModelArtifact train_model(const std::string& name, std::span<const LabeledWindow> train,
                                 const ExperimentConfig& config) {
    TrainedModelArtifact out{name, {}, {}};
    if (name == "smcsf") {
        const TrainedSmCsf model = train_smcsf(train, config.smcsf);
        if (model.fallback_used) out.flags.emplace_back("fallback-top-k");
        out.json = to_json(model);
    } else if (name == "nb") {
        NaiveBayesModel model = train_naive_bayes(build_features(train, config.zscore), config.nb_variance_floor);
        model.zscore = config.zscore;
        out.json = to_json(model);
    } else if (name == "svm") {
        LinearModel model = train_linear_svm(build_features(train, config.zscore), config.svm);
        model.zscore = config.zscore;
        out.json = to_json(model);
    } else if (name == "mlp") {
        MlpModel model = train_mlp(build_features(train, config.zscore), config.mlp);
        model.zscore = config.zscore;
        out.json = to_json(model);
    } else {
        fail(ErrorKind::invalid_config, "unknown model '" + name + "'");
    }
    return out;
}

std::vector<double> score_windows(std::string_view model_json, std::span<const LabeledWindow> windows) {
    const std::string schema = schema_of(model_json);
    if (schema == kSmCsfSchema) {
        const TrainedSmCsf model = smcsf_from_json(model_json);
        std::vector<double> scores(windows.size());
        parallel_for(windows.size(), [&](std::size_t i) { scores[i] = score(windows[i].prices, model); });
        return scores;
    }
    if (schema == kNaiveBayesSchema) return score_rows(naive_bayes_from_json(model_json), windows);
    if (schema == kSvmSchema) return score_rows(svm_from_json(model_json), windows);
    if (schema == kMlpSchema) {
        const MlpModel model = mlp_from_json(model_json);
        const Eigen::MatrixXd probs = model.probabilities(build_features(windows, model.zscore).x);
        return {probs.row(1).begin(), probs.row(1).end()};
    }
    fail(ErrorKind::schema_error, "no scorer for model schema '" + schema + "'");
}

void ExperimentConfig::validate() const {
    if (families.empty()) fail(ErrorKind::invalid_config, "experiment lists no families");
    for (const auto& m : models) {
        if (!kModelNames.count(m)) fail(ErrorKind::invalid_config, "unknown model '" + m + "'");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        fail(ErrorKind::invalid_config, "test fraction must lie in (0, 1)");
    }
    if (!(selection_rate > 0.0 && selection_rate <= 1.0)) {
        fail(ErrorKind::invalid_config, "selection rate must lie in (0, 1]");
    }
    if (baseline_trials == 0) fail(ErrorKind::invalid_config, "baseline needs at least one trial");
    if (folds == 0) fail(ErrorKind::invalid_config, "folds must be at least 1");
    smcsf.validate();
}

ExperimentConfig default_experiment_config() {
    ExperimentConfig config;
    FamilySpec csf;
    csf.family = Family::csf;
    FamilySpec ncsf;
    ncsf.family = Family::ncsf;
    ncsf.generation.n_windows = 50000;
    FamilySpec random;
    random.family = Family::random;
    config.families = {csf, ncsf, random};
    return config;
}

ExperimentConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::parse_error, std::string("run config: ") + e.what());
    }
    const std::string where = "run config";
    check_keys(j,
               {"schema", "seed", "families", "models", "smcsf", "svm", "mlp", "nb", "features",
                "split", "selection_rate", "baseline_trials"},
               where);
    std::string schema;
    read_into(j, "schema", schema, where);
    if (schema != kRunConfigSchema) {
        fail(ErrorKind::schema_error, "run config: unsupported schema '" + schema + "', expected '" +
                                          std::string(kRunConfigSchema) + "'");
    }
    ExperimentConfig config;
    read_into(j, "seed", config.seed, where);
    if (j.contains("families")) {
        config.families.clear();
        std::size_t position = 0;
        for (const auto& f : j.at("families")) config.families.push_back(parse_family(f, base_dir, position++));
    } else {
        config.families = default_experiment_config().families;
    }
    read_into(j, "models", config.models, where);
    if (j.contains("smcsf")) {
        const Json& s = j.at("smcsf");
        check_keys(s,
                   {"window_sizes", "smoothing", "effectiveness_threshold", "ridge_lambda",
                    "selection_rate", "validation_fraction", "split_seed", "fallback_top", "target",
                    "encoding"},
                   "smcsf");
        read_into(s, "window_sizes", config.smcsf.window_sizes, "smcsf");
        read_into(s, "smoothing", config.smcsf.smoothing, "smcsf");
        read_into(s, "effectiveness_threshold", config.smcsf.effectiveness_threshold, "smcsf");
        read_into(s, "ridge_lambda", config.smcsf.ridge_lambda, "smcsf");
        read_into(s, "selection_rate", config.smcsf.selection_rate, "smcsf");
        read_into(s, "validation_fraction", config.smcsf.validation_fraction, "smcsf");
        read_into(s, "split_seed", config.smcsf.split_seed, "smcsf");
        read_into(s, "fallback_top", config.smcsf.fallback_top, "smcsf");
        std::string target = "label";
        read_into(s, "target", target, "smcsf");
        if (target != "label" && target != "return") fail(ErrorKind::invalid_config, "smcsf.target must be label or return");
        config.smcsf.target = target == "label" ? SmCsfConfig::Target::label : SmCsfConfig::Target::realized_return;
        std::string encoding = "counts";
        read_into(s, "encoding", encoding, "smcsf");
        if (encoding != "counts" && encoding != "presence") {
            fail(ErrorKind::invalid_config, "smcsf.encoding must be counts or presence");
        }
        config.smcsf.encoding =
            encoding == "counts" ? SmCsfConfig::Encoding::counts : SmCsfConfig::Encoding::presence;
    }
    if (j.contains("svm")) {
        const Json& s = j.at("svm");
        check_keys(s, {"epochs", "learning_rate", "c", "seed"}, "svm");
        read_into(s, "epochs", config.svm.epochs, "svm");
        read_into(s, "learning_rate", config.svm.learning_rate, "svm");
        read_into(s, "c", config.svm.c, "svm");
        read_into(s, "seed", config.svm.seed, "svm");
    }
    if (j.contains("mlp")) {
        const Json& s = j.at("mlp");
        check_keys(s, {"hidden", "learning_rate", "epochs", "batch_size", "seed"}, "mlp");
        read_into(s, "hidden", config.mlp.hidden, "mlp");
        read_into(s, "learning_rate", config.mlp.learning_rate, "mlp");
        read_into(s, "epochs", config.mlp.epochs, "mlp");
        read_into(s, "batch_size", config.mlp.batch_size, "mlp");
        read_into(s, "seed", config.mlp.seed, "mlp");
    }
    if (j.contains("nb")) {
        check_keys(j.at("nb"), {"variance_floor"}, "nb");
        read_into(j.at("nb"), "variance_floor", config.nb_variance_floor, "nb");
    }
    if (j.contains("features")) {
        check_keys(j.at("features"), {"zscore"}, "features");
        read_into(j.at("features"), "zscore", config.zscore, "features");
    }
    if (j.contains("split")) {
        check_keys(j.at("split"), {"test_fraction", "seed", "folds"}, "split");
        read_into(j.at("split"), "test_fraction", config.test_fraction, "split");
        read_into(j.at("split"), "seed", config.split_seed, "split");
        read_into(j.at("split"), "folds", config.folds, "split");
    }
    read_into(j, "selection_rate", config.selection_rate, where);
    read_into(j, "baseline_trials", config.baseline_trials, where);
    config.validate();
    return config;
}

std::string run_config_to_json(const ExperimentConfig& config) {
    Json j;
    j["schema"] = kRunConfigSchema;
    j["seed"] = config.seed;
    Json families = Json::array();
    for (const auto& f : config.families) {
        Json fj;
        fj["family"] = to_string(f.family);
        fj["n_windows"] = f.generation.n_windows;
        if (f.seed) fj["seed"] = *f.seed;
        fj["window_size"] = f.generation.window_size;
        fj["long_path"] = f.generation.long_path;
        fj["step_mu"] = f.generation.steps.mu;
        fj["step_sigma"] = f.generation.steps.sigma;
        fj["start_price"] = f.generation.start_price;
        fj["k_effective"] = f.k_effective;
        fj["calibration_quantile"] = f.calibration_quantile;
        fj["calibration_n"] = f.calibration_n;
        fj["p_signal"] = f.p_signal;
        fj["base_rate"] = f.base_rate;
        fj["ratio_threshold"] = f.ratio_threshold;
        if (f.family == Family::real) {
            fj["csv"] = {{"path", f.csv.path.generic_string()},
                         {"date_column", f.csv.date_column},
                         {"close_column", f.csv.close_column},
                         {"adjusted_column", f.csv.adjusted_column},
                         {"prefer_adjusted", f.csv.prefer_adjusted},
                         {"delimiter", std::string(1, f.csv.delimiter)}};
        }
        families.push_back(std::move(fj));
    }
    j["families"] = std::move(families);
    j["models"] = config.models;
    j["smcsf"] = {{"window_sizes", config.smcsf.window_sizes},
                  {"smoothing", config.smcsf.smoothing},
                  {"effectiveness_threshold", config.smcsf.effectiveness_threshold},
                  {"ridge_lambda", config.smcsf.ridge_lambda},
                  {"selection_rate", config.smcsf.selection_rate},
                  {"validation_fraction", config.smcsf.validation_fraction},
                  {"split_seed", config.smcsf.split_seed},
                  {"fallback_top", config.smcsf.fallback_top},
                  {"target", config.smcsf.target == SmCsfConfig::Target::label ? "label" : "return"},
                  {"encoding", config.smcsf.encoding == SmCsfConfig::Encoding::counts ? "counts" : "presence"}};
    j["svm"] = {{"epochs", config.svm.epochs},
                {"learning_rate", config.svm.learning_rate},
                {"c", config.svm.c},
                {"seed", config.svm.seed}};
    j["mlp"] = {{"hidden", config.mlp.hidden},
                {"learning_rate", config.mlp.learning_rate},
                {"epochs", config.mlp.epochs},
                {"batch_size", config.mlp.batch_size},
                {"seed", config.mlp.seed}};
    j["nb"] = {{"variance_floor", config.nb_variance_floor}};
    j["features"] = {{"zscore", config.zscore}};
    j["split"] = {{"test_fraction", config.test_fraction}, {"seed", config.split_seed},
                  {"folds", config.folds}};
    j["selection_rate"] = config.selection_rate;
    j["baseline_trials"] = config.baseline_trials;
    return j.dump(2) + "\n";
}

std::uint64_t family_seed(const FamilySpec& spec, std::uint64_t experiment_seed,
                          std::size_t position) {
    return spec.seed ? *spec.seed : substream_seed(experiment_seed, position, 0xfa);
}

FamilyResult prepare_family(const FamilySpec& spec, std::uint64_t seed) {
    FamilyResult fr;
    fr.spec = spec;
    GenConfig gen = spec.generation;
    gen.seed = seed;
    switch (spec.family) {
    case Family::csf: {
        CsfRule rule = sample_csf_rule(PatternVocabulary(), spec.k_effective, substream_seed(seed, 0, 0xc1));
        rule.p_signal = spec.p_signal;
        rule.base_rate = spec.base_rate;
        calibrate_threshold(rule, spec.calibration_quantile, spec.calibration_n,
                            substream_seed(seed, 1, 0xc1), gen.window_size, gen.steps);
        fr.dataset = generate_csf(rule, gen);
        fr.csf_rule = std::move(rule);
        break;
    }
    case Family::ncsf: {
        NcsfRule rule{gen.window_size, spec.ratio_threshold, spec.p_signal, spec.base_rate};
        fr.dataset = generate_ncsf(rule, gen);
        fr.ncsf_rule = rule;
        break;
    }
    case Family::random:
        fr.dataset = generate_random(gen, spec.base_rate);
        break;
    case Family::real: {
        const IngestResult ingested = ingest_csv(spec.csv);
        fr.dataset = real_to_dataset(ingested.series, gen.window_size);
        break;
    }
    }
    return fr;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult result;
    for (std::size_t position = 0; position < config.families.size(); ++position) {
        const FamilySpec& spec = config.families[position];
        const std::string family(to_string(spec.family));
        const std::uint64_t seed = family_seed(spec, config.seed, position);
        FamilyResult fr;
        try {
            fr = prepare_family(spec, seed);
        } catch (const Error& e) {
            throw Error(e.kind(), "family " + family + ": " + e.message());
        }

        if (config.folds > 1) {
            fr.splits = kfold_indices(fr.dataset.size(), config.folds, config.split_seed);
        } else {
            fr.splits = {split_indices(fr.dataset.size(), config.test_fraction, config.split_seed)};
        }
        std::vector<std::vector<LabeledWindow>> trains;
        std::vector<std::vector<LabeledWindow>> tests;
        std::vector<LabeledWindow> test;
        for (const auto& split : fr.splits) {
            trains.push_back(take(fr.dataset.windows, split.train));
            tests.push_back(take(fr.dataset.windows, split.test));
            check_disjoint(trains.back(), tests.back());
            test.insert(test.end(), tests.back().begin(), tests.back().end());
        }

        std::vector<ModelReport> reports;
        for (const auto& name : config.models) {
            try {
                PredictionSet pooled{model_display_name(name), {}};
                std::vector<std::string> flags;
                for (std::size_t f = 0; f < fr.splits.size(); ++f) {
                    TrainedModelArtifact model = train_model(name, trains[f], config);
                    const auto scores = score_windows(model.json, tests[f]);
                    std::vector<std::string> ids;
                    for (const auto& w : tests[f]) ids.push_back(w.id);
                    PredictionSet preds =
                        select_top_fraction(pooled.model, ids, scores, config.selection_rate);
                    pooled.entries.insert(pooled.entries.end(), preds.entries.begin(),
                                          preds.entries.end());
                    for (const auto& flag : model.flags) {
                        if (std::find(flags.begin(), flags.end(), flag) == flags.end()) {
                            flags.push_back(flag);
                        }
                    }
                    if (fr.splits.size() > 1) model.name += "-fold" + std::to_string(f);
                    fr.models.push_back(std::move(model));
                }
                ModelReport report = precision_of_selected(pooled, test, family);
                report.flags.insert(report.flags.end(), flags.begin(), flags.end());
                if (fr.splits.size() > 1) report.flags.push_back(std::to_string(fr.splits.size()) + "-fold");
                reports.push_back(std::move(report));
                fr.predictions.push_back(std::move(pooled));
            } catch (const Error& e) {
                throw Error(e.kind(), "family " + family + ", model " + name + ": " + e.message());
            }
        }

        std::optional<double> oracle;
        if (fr.csf_rule || fr.ncsf_rule) {
            PredictionSet preds = fr.csf_rule ? gt_csf_predictions(test, *fr.csf_rule)
                                              : gt_ncsf_predictions(test, *fr.ncsf_rule);
            ModelReport report = precision_of_selected(preds, test, family);
            report.flags.emplace_back("native-threshold");
            oracle = report.precision_pos;
            reports.push_back(std::move(report));
            fr.predictions.push_back(std::move(preds));
        }
        reports.push_back(random_baseline(test, config.selection_rate,
                                          substream_seed(seed, 2, 0xba), config.baseline_trials,
                                          family));
        if (fr.dataset.provenance.overlapping) {
            for (auto& r : reports) r.flags.emplace_back("overlapping-windows");
        }
        for (auto& r : reports) r.oracle_precision = oracle;
        sort_reports(reports);
        fr.reports = std::move(reports);
        result.families.push_back(std::move(fr));
    }
    return result;
}

std::vector<ModelReport> ExperimentResult::all_reports() const {
    std::vector<ModelReport> out;
    for (const auto& f : families) out.insert(out.end(), f.reports.begin(), f.reports.end());
    return out;
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (std::size_t i = 0; i < result.families.size(); ++i) {
        const FamilyResult& fr = result.families[i];
        const auto dir = out_dir / family_dir_name(fr, i, result.families);
        write_dataset(dir / "dataset.jsonl", fr.dataset);
        if (fr.csf_rule) write_text(dir / "rule.json", to_json(*fr.csf_rule));
        if (fr.ncsf_rule) write_text(dir / "rule.json", to_json(*fr.ncsf_rule));
        for (std::size_t f = 0; f < fr.splits.size(); ++f) {
            const std::string name =
                fr.splits.size() > 1 ? "split-fold" + std::to_string(f) + ".json" : "split.json";
            write_text(dir / name, split_to_json(split_ids(fr.dataset, fr.splits[f])));
        }
        for (const auto& m : fr.models) write_text(dir / ("model-" + m.name + ".json"), m.json);
        for (const auto& p : fr.predictions) write_predictions(dir / ("pred-" + p.model + ".jsonl"), p);
        write_text(dir / "report.json", reports_to_json(fr.reports));
    }
    const auto reports = result.all_reports();
    write_text(out_dir / "reports.json", reports_to_json(reports));
    std::ostringstream csv;
    write_reports_csv(csv, reports);
    write_text(out_dir / "reports.csv", csv.str());
    std::ostringstream plot;
    write_plot_csv(plot, reports);
    write_text(out_dir / "plot.csv", plot.str());
}

} // namespace csfbench
