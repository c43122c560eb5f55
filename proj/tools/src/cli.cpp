#include "csfbench/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "csfbench/error.hpp"
#include "csfbench/experiment.hpp"
#include "csfbench/io.hpp"
#include "csfbench/oracles.hpp"
#include "csfbench/series.hpp"

namespace csfbench::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out_dir = ".";
    bool quiet = false;
};

struct Log {
    std::ostream& err;
    bool quiet;

    void operator()(const std::string& line) const {
        if (!quiet) err << line << '\n';
    }
};

ExperimentConfig load_config(const Globals& g) {
    ExperimentConfig config = default_experiment_config();
    if (!g.config.empty()) {
        const fs::path path(g.config);
        config = parse_run_config(read_text(path), path.parent_path());
    }
    if (g.seed) config.seed = *g.seed;
    return config;
}

std::string number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
    return std::string(buf, res.ptr);
}

std::string describe(const ModelReport& r) {
    std::string line = r.family + " " + r.model + ": n_selected=" + std::to_string(r.n_selected);
    line += " precision=" + (r.precision_pos ? number(*r.precision_pos) : std::string("n/a"));
    line += " base=" + number(r.base_rate);
    if (r.oracle_precision) line += " oracle=" + number(*r.oracle_precision);
    for (const auto& f : r.flags) line += " [" + f + "]";
    return line;
}

void write_reports(const fs::path& dir, const std::vector<ModelReport>& reports) {
    write_text(dir / "report.json", reports_to_json(reports));
    std::ostringstream csv;
    write_reports_csv(csv, reports);
    write_text(dir / "report.csv", csv.str());
}

// generate ----------------------------------------------------------------------

struct GenerateArgs {
    std::string family;
    std::size_t n = 20000;
    std::size_t window = 20;
    std::size_t k = 10;
    bool long_path = false;
    double p_signal = 0.75;
    double base_rate = 0.52;
    double ratio = 0.7;
    std::size_t calibration_n = 10000;
    double calibration_q = 0.8;
};

void run_generate(const Globals& g, const GenerateArgs& a, const Log& log) {
    FamilySpec spec;
    spec.family = family_from_string(a.family);
    if (spec.family == Family::real) {
        fail(ErrorKind::invalid_config, "real series come from 'ingest', not 'generate'");
    }
    spec.generation.n_windows = a.n;
    spec.generation.window_size = a.window;
    spec.generation.long_path = a.long_path;
    spec.k_effective = a.k;
    spec.p_signal = a.p_signal;
    spec.base_rate = a.base_rate;
    spec.ratio_threshold = a.ratio;
    spec.calibration_n = a.calibration_n;
    spec.calibration_quantile = a.calibration_q;
    const std::uint64_t seed = g.seed.value_or(load_config(g).seed);
    const FamilyResult fr = prepare_family(spec, seed);
    const fs::path dir(g.out_dir);
    write_dataset(dir / "dataset.jsonl", fr.dataset);
    if (fr.csf_rule) write_text(dir / "rule.json", to_json(*fr.csf_rule));
    if (fr.ncsf_rule) write_text(dir / "rule.json", to_json(*fr.ncsf_rule));
    log("generated " + std::to_string(fr.dataset.size()) + " " + a.family +
        " windows, base rate " + number(fr.dataset.base_rate()));
}

// ingest ------------------------------------------------------------------------

struct IngestArgs {
    std::string csv;
    CsvSpec spec;
    std::string delimiter = ",";
    bool no_adjusted = false;
    std::size_t window = 20;
};

void run_ingest(const Globals& g, IngestArgs a, const Log& log) {
    if (a.delimiter.size() != 1) fail(ErrorKind::invalid_config, "delimiter must be one character");
    a.spec.path = a.csv;
    a.spec.delimiter = a.delimiter[0];
    a.spec.prefer_adjusted = !a.no_adjusted;
    const IngestResult ingested = ingest_csv(a.spec);
    for (const auto& w : ingested.warnings) log("warning: " + w);
    const Dataset dataset = real_to_dataset(ingested.series, a.window);
    write_dataset(fs::path(g.out_dir) / "dataset.jsonl", dataset);
    log("ingested " + std::to_string(ingested.series.size()) + " prices from column '" +
        ingested.price_column + "'" + (ingested.reversed ? " (reversed to chronological order)" : "") +
        ", " + std::to_string(dataset.size()) + " windows");
}

// train -------------------------------------------------------------------------

struct TrainArgs {
    std::string model;
    std::string dataset;
    std::string split;
};

Split load_or_make_split(const Dataset& dataset, const std::string& split_path,
                         const ExperimentConfig& config) {
    if (!split_path.empty()) return split_positions(dataset, split_from_json(read_text(split_path)));
    return split_indices(dataset.size(), config.test_fraction, config.split_seed);
}

void run_train(const Globals& g, const TrainArgs& a, const Log& log) {
    ExperimentConfig config = load_config(g);
    if (g.seed) {
        config.svm.seed = *g.seed;
        config.mlp.seed = *g.seed;
        config.smcsf.split_seed = *g.seed;
    }
    const Dataset dataset = read_dataset(fs::path(a.dataset));
    const Split split = load_or_make_split(dataset, a.split, config);
    const auto train = take(dataset.windows, split.train);
    check_disjoint(train, take(dataset.windows, split.test));
    const TrainedModelArtifact model = train_model(a.model, train, config);
    const fs::path dir(g.out_dir);
    write_text(dir / ("model-" + a.model + ".json"), model.json);
    write_text(dir / "split.json", split_to_json(split_ids(dataset, split)));
    std::string line = "trained " + a.model + " on " + std::to_string(train.size()) + " windows";
    for (const auto& f : model.flags) line += " [" + f + "]";
    log(line);
}

// evaluate ----------------------------------------------------------------------

struct EvaluateArgs {
    std::string dataset;
    std::string split;
    std::string model;
    std::string predictions;
    std::string oracle;
    bool keep_selection = false;
    std::optional<double> selection_rate;
    std::optional<std::size_t> baseline_trials;
};

std::string model_name_for_schema(const std::string& schema) {
    if (schema == kSmCsfSchema) return "sm-csf";
    if (schema == kNaiveBayesSchema) return "naive-bayes";
    if (schema == kSvmSchema) return "linear-svm";
    if (schema == kMlpSchema) return "mlp";
    fail(ErrorKind::schema_error, "not a model file (schema '" + schema + "')");
}

void run_evaluate(const Globals& g, const EvaluateArgs& a, const Log& log) {
    ExperimentConfig config = load_config(g);
    if (a.selection_rate) config.selection_rate = *a.selection_rate;
    if (a.baseline_trials) config.baseline_trials = *a.baseline_trials;
    config.validate();

    const Dataset dataset = read_dataset(fs::path(a.dataset));
    std::vector<LabeledWindow> windows = dataset.windows;
    if (!a.split.empty()) {
        windows = take(dataset.windows, split_positions(dataset, split_from_json(read_text(a.split))).test);
    }
    const std::string family(to_string(dataset.family));
    std::vector<std::string> ids;
    ids.reserve(windows.size());
    for (const auto& w : windows) ids.push_back(w.id);

    const fs::path dir(g.out_dir);
    std::vector<ModelReport> reports;
    std::optional<double> oracle;
    if (!a.oracle.empty()) {
        const std::string text = read_text(a.oracle);
        const std::string schema = schema_of(text);
        PredictionSet preds;
        if (schema == kCsfRuleSchema) {
            preds = gt_csf_predictions(windows, csf_rule_from_json(text));
        } else if (schema == kNcsfRuleSchema) {
            preds = gt_ncsf_predictions(windows, ncsf_rule_from_json(text));
        } else {
            fail(ErrorKind::schema_error, "not a rule file (schema '" + schema + "')");
        }
        ModelReport report = precision_of_selected(preds, windows, family);
        report.flags.emplace_back("native-threshold");
        oracle = report.precision_pos;
        write_predictions(dir / ("pred-" + preds.model + ".jsonl"), preds);
        reports.push_back(std::move(report));
    }
    if (!a.model.empty()) {
        const std::string text = read_text(a.model);
        const std::string name = model_name_for_schema(schema_of(text));
        const PredictionSet preds = select_top_fraction(name, ids, score_windows(text, windows),
                                                        config.selection_rate);
        write_predictions(dir / ("pred-" + name + ".jsonl"), preds);
        reports.push_back(precision_of_selected(preds, windows, family));
    }
    if (!a.predictions.empty()) {
        PredictionSet preds = read_predictions(fs::path(a.predictions));
        if (!a.keep_selection) {
            std::vector<std::string> pred_ids;
            std::vector<double> scores;
            for (const auto& p : preds.entries) {
                pred_ids.push_back(p.window_id);
                scores.push_back(p.score);
            }
            preds = select_top_fraction(preds.model, pred_ids, scores, config.selection_rate);
        }
        reports.push_back(precision_of_selected(preds, windows, family));
    }
    reports.push_back(random_baseline(windows, config.selection_rate, config.seed,
                                      config.baseline_trials, family));
    for (auto& r : reports) {
        r.oracle_precision = oracle;
        if (dataset.provenance.overlapping) r.flags.emplace_back("overlapping-windows");
    }
    sort_reports(reports);
    write_reports(dir, reports);
    for (const auto& r : reports) log(describe(r));
}

// run ---------------------------------------------------------------------------

void run_run(const Globals& g, std::optional<std::size_t> folds, const Log& log) {
    ExperimentConfig config = load_config(g);
    if (folds) config.folds = *folds;
    const ExperimentResult result = run_experiment(config);
    const fs::path dir(g.out_dir);
    write_experiment(result, dir);
    write_text(dir / "config.json", run_config_to_json(config));
    for (const auto& r : result.all_reports()) log(describe(r));
}

// acf ---------------------------------------------------------------------------

struct AcfArgs {
    std::string csv;
    std::size_t max_lag = 20;
    bool prices = false;
};

void run_acf(const Globals& g, const AcfArgs& a, const Log& log) {
    CsvSpec spec;
    spec.path = a.csv;
    const IngestResult ingested = ingest_csv(spec);
    for (const auto& w : ingested.warnings) log("warning: " + w);
    const auto& prices = ingested.series.prices();
    const std::vector<double> values =
        a.prices ? std::vector<double>(prices.begin(), prices.end()) : simple_returns(prices);
    const AcfResult acf = autocorrelation(values, a.max_lag);
    std::ostringstream csv;
    csv << "lag,acf\n";
    for (std::size_t k = 0; k < acf.values.size(); ++k) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, acf.values[k]);
        csv << k << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
    }
    write_text(fs::path(g.out_dir) / "acf.csv", csv.str());
    log("acf over " + std::to_string(values.size()) + (a.prices ? " prices" : " returns") +
        ", lag 1 = " + number(acf.values.size() > 1 ? acf.values[1] : 0.0));
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic curve-shape-feature benchmark", "csfbench"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Master seed; overrides the config seed");
    app.add_option("--config", g.config, "Run config JSON");
    app.add_option("--out-dir", g.out_dir, "Directory receiving every output file");
    app.add_flag("--quiet", g.quiet, "Suppress progress lines on stderr");

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset and its rule");
    generate->add_option("--family", gen.family, "csf, ncsf or random")
        ->required()
        ->check(CLI::IsMember({"csf", "ncsf", "random"}));
    generate->add_option("--n", gen.n, "Number of windows");
    generate->add_option("--window", gen.window, "Prices per window");
    generate->add_option("--k", gen.k, "Effective patterns in the CSF rule");
    generate->add_flag("--long-path", gen.long_path, "Draw one long path and slide windows over it");
    generate->add_option("--p-signal", gen.p_signal, "P(up | signal)");
    generate->add_option("--base-rate", gen.base_rate, "Overall P(up)");
    generate->add_option("--ratio", gen.ratio, "NCSF up-ratio threshold");
    generate->add_option("--calibration-n", gen.calibration_n, "Windows used to calibrate the CSF threshold");
    generate->add_option("--calibration-q", gen.calibration_q, "Score quantile used as CSF threshold");

    IngestArgs ing;
    auto* ingest = app.add_subcommand("ingest", "Turn a daily price CSV into a labeled dataset");
    ingest->add_option("--csv", ing.csv, "Input CSV")->required();
    ingest->add_option("--date-column", ing.spec.date_column);
    ingest->add_option("--close-column", ing.spec.close_column);
    ingest->add_option("--adjusted-column", ing.spec.adjusted_column);
    ingest->add_flag("--no-adjusted", ing.no_adjusted, "Use the close column even if an adjusted one exists");
    ingest->add_option("--delimiter", ing.delimiter);
    ingest->add_option("--window", ing.window, "Prices per window");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train one model on the train split of a dataset");
    train->add_option("--model", tr.model, "smcsf, nb, svm or mlp")
        ->required()
        ->check(CLI::IsMember({"smcsf", "nb", "svm", "mlp"}));
    train->add_option("--dataset", tr.dataset, "Dataset JSONL")->required();
    train->add_option("--split", tr.split, "Split JSON; drawn from the config when omitted");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Score predictions by precision among selected samples");
    evaluate->add_option("--dataset", ev.dataset, "Dataset JSONL")->required();
    evaluate->add_option("--split", ev.split, "Split JSON; only its test ids are evaluated");
    auto* model_opt = evaluate->add_option("--model", ev.model, "Trained model JSON");
    auto* pred_opt = evaluate->add_option("--predictions", ev.predictions, "Prediction JSONL");
    evaluate->add_option("--oracle", ev.oracle, "Generating rule JSON");
    model_opt->excludes(pred_opt);
    evaluate->add_flag("--keep-selection", ev.keep_selection,
                       "Use the selected flags in --predictions instead of the top-fraction rule");
    evaluate->add_option("--selection-rate", ev.selection_rate, "Fraction of windows selected per model");
    evaluate->add_option("--baseline-trials", ev.baseline_trials, "Random baseline trials");

    auto* run = app.add_subcommand("run", "Run the full experiment described by --config");
    std::optional<std::size_t> folds;
    run->add_option("--folds", folds, "k-fold cross-validation instead of the single split")
        ->check(CLI::PositiveNumber);

    AcfArgs ac;
    auto* acf = app.add_subcommand("acf", "Autocorrelation of a price series' returns");
    acf->add_option("--csv", ac.csv, "Input CSV")->required();
    acf->add_option("--max-lag", ac.max_lag, "Largest lag");
    acf->add_flag("--prices", ac.prices, "Use prices instead of simple returns");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        if (evaluate->parsed() && ev.model.empty() && ev.predictions.empty() && ev.oracle.empty()) {
            throw CLI::RequiredError("evaluate needs --model, --predictions or --oracle");
        }
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return 1;
    }

    const Log log{err, g.quiet};
    try {
        fs::create_directories(g.out_dir);
        if (generate->parsed()) run_generate(g, gen, log);
        else if (ingest->parsed()) run_ingest(g, ing, log);
        else if (train->parsed()) run_train(g, tr, log);
        else if (evaluate->parsed()) run_evaluate(g, ev, log);
        else if (run->parsed()) run_run(g, folds, log);
        else if (acf->parsed()) run_acf(g, ac, log);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace csfbench::cli
