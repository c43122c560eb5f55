#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "csfbench/error.hpp"
#include "csfbench/io.hpp"

namespace csfbench {

using Json = nlohmann::ordered_json;

namespace {

Json parse_json(std::string_view text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::parse_error, what + ": " + e.what());
    }
}

template <typename T>
T get(const Json& obj, const char* key, const std::string& what) {
    if (!obj.is_object() || !obj.contains(key)) {
        fail(ErrorKind::parse_error, what + ": missing key '" + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const Json::exception& e) {
        fail(ErrorKind::parse_error, what + ": bad value for '" + key + "': " + e.what());
    }
}

void expect_schema(const Json& obj, std::string_view schema, const std::string& what) {
    const auto found = get<std::string>(obj, "schema", what);
    if (found != schema) {
        fail(ErrorKind::schema_error, what + ": unsupported schema '" + found + "', expected '" +
                                          std::string(schema) + "'");
    }
}

Json optional_number(const std::optional<double>& value) {
    return value ? Json(*value) : Json(nullptr);
}

std::optional<double> read_optional_number(const Json& obj, const char* key, const std::string& what) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return get<double>(obj, key, what);
}

Json matrix_rows(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd read_matrix(const Json& obj, const char* key, const std::string& what) {
    const auto rows = get<std::vector<std::vector<double>>>(obj, key, what);
    if (rows.empty()) return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) fail(ErrorKind::parse_error, what + ": ragged matrix '" + key + "'");
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

Json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd read_vector(const Json& obj, const char* key, const std::string& what) {
    const auto values = get<std::vector<double>>(obj, key, what);
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string number_text(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return ec == std::errc() ? std::string(buffer, ptr) : std::string("nan");
}

std::string optional_text(const std::optional<double>& value) {
    return value ? number_text(*value) : std::string();
}

} // namespace

// Datasets ------------------------------------------------------------------------

void write_dataset(std::ostream& out, const Dataset& dataset) {
    Json header;
    header["schema"] = kDatasetSchema;
    header["config_hash"] = dataset.provenance.config_hash;
    header["seed"] = dataset.provenance.seed;
    header["family"] = to_string(dataset.family);
    header["generator_version"] = dataset.provenance.generator_version;
    header["overlapping"] = dataset.provenance.overlapping;
    out << header.dump() << '\n';
    const std::string family(to_string(dataset.family));
    for (const auto& w : dataset.windows) {
        Json line;
        line["id"] = w.id;
        line["family"] = family;
        line["prices"] = w.prices;
        line["label"] = w.positive() ? 1 : 0;
        line["ret"] = w.realized_return;
        out << line.dump() << '\n';
    }
}

Dataset read_dataset(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) fail(ErrorKind::parse_error, "dataset: empty file");
    ++line_no;
    const Json header = parse_json(line, "dataset line 1");
    expect_schema(header, kDatasetSchema, "dataset header");

    Dataset dataset;
    dataset.provenance.config_hash = get<std::string>(header, "config_hash", "dataset header");
    dataset.provenance.seed = get<std::uint64_t>(header, "seed", "dataset header");
    if (header.contains("family")) {
        dataset.family = family_from_string(get<std::string>(header, "family", "dataset header"));
    }
    if (header.contains("generator_version")) {
        dataset.provenance.generator_version =
            get<std::string>(header, "generator_version", "dataset header");
    }
    if (header.contains("overlapping")) {
        dataset.provenance.overlapping = get<bool>(header, "overlapping", "dataset header");
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "dataset line " + std::to_string(line_no);
        const Json obj = parse_json(line, where);
        LabeledWindow w;
        w.id = get<std::string>(obj, "id", where);
        w.prices = get<std::vector<double>>(obj, "prices", where);
        const int label = get<int>(obj, "label", where);
        if (label != 0 && label != 1) fail(ErrorKind::parse_error, where + ": label must be 0 or 1");
        w.label = label == 1 ? Label::positive : Label::negative;
        w.realized_return = get<double>(obj, "ret", where);
        if (obj.contains("family") &&
            family_from_string(get<std::string>(obj, "family", where)) != dataset.family) {
            fail(ErrorKind::parse_error, where + ": family differs from the header");
        }
        dataset.windows.push_back(std::move(w));
    }
    dataset.validate();
    return dataset;
}

// Predictions ---------------------------------------------------------------------

void write_predictions(std::ostream& out, const PredictionSet& predictions) {
    Json header;
    header["schema"] = kPredictionSchema;
    header["model"] = predictions.model;
    out << header.dump() << '\n';
    for (const auto& p : predictions.entries) {
        Json line;
        line["id"] = p.window_id;
        line["score"] = p.score;
        line["selected"] = p.selected ? 1 : 0;
        out << line.dump() << '\n';
    }
}

PredictionSet read_predictions(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) fail(ErrorKind::parse_error, "predictions: empty file");
    ++line_no;
    const Json header = parse_json(line, "predictions line 1");
    expect_schema(header, kPredictionSchema, "predictions header");
    PredictionSet out;
    out.model = get<std::string>(header, "model", "predictions header");
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "predictions line " + std::to_string(line_no);
        const Json obj = parse_json(line, where);
        Prediction p;
        p.window_id = get<std::string>(obj, "id", where);
        p.score = get<double>(obj, "score", where);
        const Json& selected = obj.contains("selected") ? obj.at("selected") : Json();
        if (selected.is_boolean()) {
            p.selected = selected.get<bool>();
        } else if (selected.is_number_integer() && (selected == 0 || selected == 1)) {
            p.selected = selected.get<int>() == 1;
        } else {
            fail(ErrorKind::parse_error, where + ": 'selected' must be 0 or 1");
        }
        out.entries.push_back(std::move(p));
    }
    return out;
}

// Models ---------------------------------------------------------------------------

namespace {

Json smcsf_config_json(const SmCsfConfig& c) {
    Json j;
    j["window_sizes"] = c.window_sizes;
    j["smoothing"] = c.smoothing;
    j["effectiveness_threshold"] = c.effectiveness_threshold;
    j["ridge_lambda"] = c.ridge_lambda;
    j["selection_rate"] = c.selection_rate;
    j["validation_fraction"] = c.validation_fraction;
    j["split_seed"] = c.split_seed;
    j["fallback_top"] = c.fallback_top;
    j["target"] = c.target == SmCsfConfig::Target::label ? "label" : "return";
    j["encoding"] = c.encoding == SmCsfConfig::Encoding::counts ? "counts" : "presence";
    return j;
}

SmCsfConfig smcsf_config_from(const Json& j, const std::string& what) {
    SmCsfConfig c;
    c.window_sizes = get<std::vector<int>>(j, "window_sizes", what);
    c.smoothing = get<double>(j, "smoothing", what);
    c.effectiveness_threshold = get<double>(j, "effectiveness_threshold", what);
    c.ridge_lambda = get<double>(j, "ridge_lambda", what);
    c.selection_rate = get<double>(j, "selection_rate", what);
    c.validation_fraction = get<double>(j, "validation_fraction", what);
    c.split_seed = get<std::uint64_t>(j, "split_seed", what);
    c.fallback_top = get<std::size_t>(j, "fallback_top", what);
    c.target = get<std::string>(j, "target", what) == "return" ? SmCsfConfig::Target::realized_return
                                                               : SmCsfConfig::Target::label;
    c.encoding = get<std::string>(j, "encoding", what) == "presence"
                     ? SmCsfConfig::Encoding::presence
                     : SmCsfConfig::Encoding::counts;
    return c;
}

} // namespace

std::string to_json(const TrainedSmCsf& model) {
    Json j;
    j["schema"] = kSmCsfSchema;
    j["config"] = smcsf_config_json(model.config);
    Json patterns = Json::array();
    for (const auto& p : model.effective_patterns) {
        patterns.push_back({{"length", p.length}, {"bits", p.bits}, {"binary", p.to_binary_string()}});
    }
    j["effective_patterns"] = std::move(patterns);
    j["weights"] = model.weights;
    j["intercept"] = model.intercept;
    j["threshold"] = model.score_threshold;
    j["fallback_used"] = model.fallback_used;
    j["provenance"] = {{"config_hash", model.config_hash}, {"dataset_hash", model.dataset_hash}};
    return j.dump(2) + "\n";
}

TrainedSmCsf smcsf_from_json(std::string_view text) {
    const std::string what = "smcsf model";
    const Json j = parse_json(text, what);
    expect_schema(j, kSmCsfSchema, what);
    const SmCsfConfig config = smcsf_config_from(j.at("config"), what);
    TrainedSmCsf model;
    model.vocab = PatternVocabulary(config.window_sizes);
    model.config = config;
    for (const auto& p : get<Json>(j, "effective_patterns", what)) {
        SignPattern pattern{get<int>(p, "length", what), get<std::uint32_t>(p, "bits", what)};
        model.vocab.index_of(pattern);
        model.effective_patterns.push_back(pattern);
    }
    model.weights = get<std::vector<double>>(j, "weights", what);
    if (model.weights.size() != model.effective_patterns.size()) {
        fail(ErrorKind::parse_error, what + ": weights and patterns differ in length");
    }
    model.intercept = get<double>(j, "intercept", what);
    model.score_threshold = get<double>(j, "threshold", what);
    model.fallback_used = get<bool>(j, "fallback_used", what);
    const Json provenance = get<Json>(j, "provenance", what);
    model.config_hash = get<std::string>(provenance, "config_hash", what);
    model.dataset_hash = get<std::string>(provenance, "dataset_hash", what);
    return model;
}

std::string to_json(const NaiveBayesModel& model) {
    Json j;
    j["schema"] = kNaiveBayesSchema;
    j["means"] = matrix_rows(model.means);
    j["variances"] = matrix_rows(model.variances);
    j["log_prior"] = {model.log_prior[0], model.log_prior[1]};
    j["variance_floor"] = model.variance_floor;
    j["zscore"] = model.zscore;
    return j.dump(2) + "\n";
}

NaiveBayesModel naive_bayes_from_json(std::string_view text) {
    const std::string what = "nb model";
    const Json j = parse_json(text, what);
    expect_schema(j, kNaiveBayesSchema, what);
    NaiveBayesModel model;
    model.means = read_matrix(j, "means", what);
    model.variances = read_matrix(j, "variances", what);
    const auto prior = get<std::vector<double>>(j, "log_prior", what);
    if (prior.size() != 2 || model.means.rows() != 2 || model.variances.rows() != 2) {
        fail(ErrorKind::parse_error, what + ": expected two classes");
    }
    model.log_prior[0] = prior[0];
    model.log_prior[1] = prior[1];
    model.variance_floor = get<double>(j, "variance_floor", what);
    model.zscore = get<bool>(j, "zscore", what);
    return model;
}

std::string to_json(const LinearModel& model) {
    Json j;
    j["schema"] = kSvmSchema;
    j["kind"] = model.kind == LinearModel::Kind::svm ? "svm" : "nb-derived";
    j["weights"] = vector_json(model.weights);
    j["bias"] = model.bias;
    j["zscore"] = model.zscore;
    return j.dump(2) + "\n";
}

LinearModel svm_from_json(std::string_view text) {
    const std::string what = "svm model";
    const Json j = parse_json(text, what);
    expect_schema(j, kSvmSchema, what);
    LinearModel model;
    model.kind = get<std::string>(j, "kind", what) == "svm" ? LinearModel::Kind::svm
                                                            : LinearModel::Kind::nb_derived;
    model.weights = read_vector(j, "weights", what);
    model.bias = get<double>(j, "bias", what);
    model.zscore = get<bool>(j, "zscore", what);
    return model;
}

std::string to_json(const MlpModel& model) {
    Json j;
    j["schema"] = kMlpSchema;
    j["config"] = {{"hidden", model.config.hidden},
                   {"learning_rate", model.config.learning_rate},
                   {"epochs", model.config.epochs},
                   {"batch_size", model.config.batch_size},
                   {"seed", model.config.seed}};
    j["zscore"] = model.zscore;
    if (model.has_hidden()) {
        j["w1"] = matrix_rows(model.w1);
        j["b1"] = vector_json(model.b1);
    }
    j["w2"] = matrix_rows(model.w2);
    j["b2"] = vector_json(model.b2);
    return j.dump(2) + "\n";
}

MlpModel mlp_from_json(std::string_view text) {
    const std::string what = "mlp model";
    const Json j = parse_json(text, what);
    expect_schema(j, kMlpSchema, what);
    MlpModel model;
    const Json config = get<Json>(j, "config", what);
    model.config.hidden = get<std::size_t>(config, "hidden", what);
    model.config.learning_rate = get<double>(config, "learning_rate", what);
    model.config.epochs = get<std::size_t>(config, "epochs", what);
    model.config.batch_size = get<std::size_t>(config, "batch_size", what);
    model.config.seed = get<std::uint64_t>(config, "seed", what);
    model.zscore = get<bool>(j, "zscore", what);
    if (model.has_hidden()) {
        model.w1 = read_matrix(j, "w1", what);
        model.b1 = read_vector(j, "b1", what);
    }
    model.w2 = read_matrix(j, "w2", what);
    model.b2 = read_vector(j, "b2", what);
    if (model.w2.rows() != 2 || model.b2.size() != 2) fail(ErrorKind::parse_error, what + ": bad output layer");
    return model;
}

std::string to_json(const CsfRule& rule) {
    Json j;
    j["schema"] = kCsfRuleSchema;
    j["window_sizes"] = rule.vocab.window_sizes();
    Json weights = Json::array();
    for (std::size_t p = 0; p < rule.weights.size(); ++p) {
        if (rule.weights[p] == 0.0) continue;
        weights.push_back({{"length", rule.vocab[p].length},
                           {"bits", rule.vocab[p].bits},
                           {"binary", rule.vocab[p].to_binary_string()},
                           {"weight", rule.weights[p]}});
    }
    j["weights"] = std::move(weights);
    j["threshold"] = optional_number(rule.threshold);
    j["p_signal"] = rule.p_signal;
    j["base_rate"] = rule.base_rate;
    j["calibration_quantile"] = rule.calibration_quantile;
    return j.dump(2) + "\n";
}

CsfRule csf_rule_from_json(std::string_view text) {
    const std::string what = "csf rule";
    const Json j = parse_json(text, what);
    expect_schema(j, kCsfRuleSchema, what);
    CsfRule rule{PatternVocabulary(get<std::vector<int>>(j, "window_sizes", what)), {}, std::nullopt};
    rule.weights.assign(rule.vocab.size(), 0.0);
    for (const auto& w : get<Json>(j, "weights", what)) {
        const SignPattern p{get<int>(w, "length", what), get<std::uint32_t>(w, "bits", what)};
        rule.weights[rule.vocab.index_of(p)] = get<double>(w, "weight", what);
    }
    rule.threshold = read_optional_number(j, "threshold", what);
    rule.p_signal = get<double>(j, "p_signal", what);
    rule.base_rate = get<double>(j, "base_rate", what);
    rule.calibration_quantile = get<double>(j, "calibration_quantile", what);
    return rule;
}

std::string to_json(const NcsfRule& rule) {
    Json j;
    j["schema"] = kNcsfRuleSchema;
    j["window"] = rule.window;
    j["ratio_threshold"] = rule.ratio_threshold;
    j["p_signal"] = rule.p_signal;
    j["base_rate"] = rule.base_rate;
    return j.dump(2) + "\n";
}

NcsfRule ncsf_rule_from_json(std::string_view text) {
    const std::string what = "ncsf rule";
    const Json j = parse_json(text, what);
    expect_schema(j, kNcsfRuleSchema, what);
    NcsfRule rule;
    rule.window = get<std::size_t>(j, "window", what);
    rule.ratio_threshold = get<double>(j, "ratio_threshold", what);
    rule.p_signal = get<double>(j, "p_signal", what);
    rule.base_rate = get<double>(j, "base_rate", what);
    return rule;
}

std::string schema_of(std::string_view text) {
    return get<std::string>(parse_json(text, "document"), "schema", "document");
}

// Reports ----------------------------------------------------------------------------

std::string reports_to_json(const std::vector<ModelReport>& reports) {
    Json list = Json::array();
    for (const auto& r : reports) {
        Json j;
        j["model"] = r.model;
        j["family"] = r.family;
        j["n_test"] = r.n_test;
        j["n_selected"] = r.n_selected;
        j["precision_pos"] = optional_number(r.precision_pos);
        j["base_rate"] = r.base_rate;
        j["wilson_ci_95"] = r.wilson_ci_95 ? Json::array({r.wilson_ci_95->first, r.wilson_ci_95->second})
                                           : Json(nullptr);
        j["oracle_precision"] = optional_number(r.oracle_precision);
        j["selection_rate"] = r.selection_rate;
        j["precision_sd"] = optional_number(r.precision_sd);
        j["flags"] = r.flags;
        list.push_back(std::move(j));
    }
    Json doc;
    doc["schema"] = kReportSchema;
    doc["reports"] = std::move(list);
    return doc.dump(2) + "\n";
}

std::vector<ModelReport> reports_from_json(std::string_view text) {
    const std::string what = "report";
    const Json doc = parse_json(text, what);
    expect_schema(doc, kReportSchema, what);
    std::vector<ModelReport> out;
    for (const auto& j : get<Json>(doc, "reports", what)) {
        ModelReport r;
        r.model = get<std::string>(j, "model", what);
        r.family = get<std::string>(j, "family", what);
        r.n_test = get<std::size_t>(j, "n_test", what);
        r.n_selected = get<std::size_t>(j, "n_selected", what);
        r.precision_pos = read_optional_number(j, "precision_pos", what);
        r.base_rate = get<double>(j, "base_rate", what);
        if (j.contains("wilson_ci_95") && !j.at("wilson_ci_95").is_null()) {
            const auto ci = get<std::vector<double>>(j, "wilson_ci_95", what);
            if (ci.size() != 2) fail(ErrorKind::parse_error, what + ": CI needs two bounds");
            r.wilson_ci_95 = std::make_pair(ci[0], ci[1]);
        }
        r.oracle_precision = read_optional_number(j, "oracle_precision", what);
        r.selection_rate = get<double>(j, "selection_rate", what);
        r.precision_sd = read_optional_number(j, "precision_sd", what);
        r.flags = get<std::vector<std::string>>(j, "flags", what);
        out.push_back(std::move(r));
    }
    return out;
}

void write_reports_csv(std::ostream& out, const std::vector<ModelReport>& reports) {
    out << "model,family,n_test,n_selected,precision_pos,base_rate,ci_lo,ci_hi,oracle_precision,"
           "selection_rate,flags\n";
    for (const auto& r : reports) {
        std::string flags;
        for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
        out << r.model << ',' << r.family << ',' << r.n_test << ',' << r.n_selected << ','
            << optional_text(r.precision_pos) << ',' << number_text(r.base_rate) << ','
            << (r.wilson_ci_95 ? number_text(r.wilson_ci_95->first) : "") << ','
            << (r.wilson_ci_95 ? number_text(r.wilson_ci_95->second) : "") << ','
            << optional_text(r.oracle_precision) << ',' << number_text(r.selection_rate) << ','
            << flags << '\n';
    }
}

void write_plot_csv(std::ostream& out, const std::vector<ModelReport>& reports) {
    out << "model,family,precision,ci_lo,ci_hi,n_selected\n";
    for (const auto& r : reports) {
        out << r.model << ',' << r.family << ',' << optional_text(r.precision_pos) << ','
            << (r.wilson_ci_95 ? number_text(r.wilson_ci_95->first) : "") << ','
            << (r.wilson_ci_95 ? number_text(r.wilson_ci_95->second) : "") << ','
            << r.n_selected << '\n';
    }
}

// Splits -------------------------------------------------------------------------------

std::string split_to_json(const SplitIds& split) {
    Json j;
    j["schema"] = kSplitSchema;
    j["train"] = split.train;
    j["test"] = split.test;
    return j.dump() + "\n";
}

SplitIds split_from_json(std::string_view text) {
    const std::string what = "split";
    const Json j = parse_json(text, what);
    expect_schema(j, kSplitSchema, what);
    return {get<std::vector<std::string>>(j, "train", what), get<std::vector<std::string>>(j, "test", what)};
}

SplitIds split_ids(const Dataset& dataset, const Split& split) {
    SplitIds ids;
    for (std::size_t p : split.train) ids.train.push_back(dataset.windows.at(p).id);
    for (std::size_t p : split.test) ids.test.push_back(dataset.windows.at(p).id);
    return ids;
}

Split split_positions(const Dataset& dataset, const SplitIds& ids) {
    std::unordered_map<std::string_view, std::size_t> positions;
    for (std::size_t i = 0; i < dataset.windows.size(); ++i) positions.emplace(dataset.windows[i].id, i);
    auto resolve = [&positions](const std::vector<std::string>& list) {
        std::vector<std::size_t> out;
        out.reserve(list.size());
        for (const auto& id : list) {
            const auto it = positions.find(id);
            if (it == positions.end()) fail(ErrorKind::invalid_input, "split names unknown window '" + id + "'");
            out.push_back(it->second);
        }
        return out;
    };
    Split split{resolve(ids.train), resolve(ids.test)};
    check_disjoint(take(dataset.windows, split.train), take(dataset.windows, split.test));
    return split;
}

} // namespace csfbench
