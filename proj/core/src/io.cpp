#include "csfbench/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <tuple>

#include "csfbench/error.hpp"
#include "csfbench/rng.hpp"

namespace csfbench {

namespace {

std::string normalize_column(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    std::string out(text.substr(begin, end - begin));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            current.push_back(c);
        } else if (c == delimiter && !quoted) {
            fields.push_back(trim(current));
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(trim(current));
    return fields;
}

std::optional<double> parse_price(const std::string& text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
    return value;
}

/// Sortable (year, month, day) for common date spellings.
std::optional<std::tuple<int, int, int>> parse_date(const std::string& text) {
    static constexpr const char* formats[] = {"%Y-%m-%d", "%Y/%m/%d", "%d-%b-%y", "%d-%b-%Y",
                                              "%m/%d/%Y", "%Y%m%d"};
    for (const char* format : formats) {
        std::tm tm{};
        std::istringstream in(text);
        in >> std::get_time(&tm, format);
        if (!in.fail()) return std::make_tuple(tm.tm_year, tm.tm_mon, tm.tm_mday);
    }
    return std::nullopt;
}

bool dates_descending(const std::string& first, const std::string& last) {
    const auto a = parse_date(first);
    const auto b = parse_date(last);
    if (a && b) return *a > *b;
    return first > last;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) fail(ErrorKind::io_error, "file not found: '" + path.string() + "'");
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io_error, "cannot read '" + path.string() + "'");
    return in;
}

} // namespace

IngestResult ingest_csv(std::istream& in, const CsvSpec& spec, std::string series_id) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_fields(line, spec.delimiter);
            break;
        }
    }
    if (header.empty()) fail(ErrorKind::parse_error, "CSV has no header line");

    auto find_column = [&header](const std::string& name) -> std::optional<std::size_t> {
        const std::string wanted = normalize_column(name);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (normalize_column(header[i]) == wanted) return i;
        }
        return std::nullopt;
    };
    const auto date_col = find_column(spec.date_column);
    if (!date_col) fail(ErrorKind::invalid_input, "CSV lacks date column '" + spec.date_column + "'");
    std::optional<std::size_t> price_col;
    if (spec.prefer_adjusted && !spec.adjusted_column.empty()) price_col = find_column(spec.adjusted_column);
    if (!price_col) price_col = find_column(spec.close_column);
    if (!price_col) fail(ErrorKind::invalid_input, "CSV lacks price column '" + spec.close_column + "'");
    const std::string price_name = trim(header[*price_col]);

    std::vector<double> prices;
    std::vector<std::string> dates;
    std::vector<std::string> warnings;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line, spec.delimiter);
        const std::size_t needed = std::max(*date_col, *price_col);
        if (fields.size() <= needed) {
            warnings.push_back("line " + std::to_string(line_no) + ": missing fields, row rejected");
            continue;
        }
        const auto price = parse_price(fields[*price_col]);
        if (!price || !(*price > 0.0) || !std::isfinite(*price)) {
            warnings.push_back("line " + std::to_string(line_no) + ": invalid price '" +
                               fields[*price_col] + "', row rejected");
            continue;
        }
        prices.push_back(*price);
        dates.push_back(fields[*date_col]);
    }
    if (prices.size() < kMinIngestRows) {
        fail(ErrorKind::invalid_input, "CSV has " + std::to_string(prices.size()) +
                                           " valid rows; at least " +
                                           std::to_string(kMinIngestRows) + " are required");
    }
    const bool reversed = dates_descending(dates.front(), dates.back());
    if (reversed) std::reverse(prices.begin(), prices.end());

    std::map<std::string, std::string> meta{{"price_column", price_name},
                                            {"reversed", reversed ? "true" : "false"}};
    return {PriceSeries(std::move(series_id), std::move(prices), Family::real, std::move(meta)),
            std::move(warnings), reversed, price_name};
}

IngestResult ingest_csv(const CsvSpec& spec) {
    std::ifstream in = open_input(spec.path);
    return ingest_csv(in, spec, spec.path.stem().string());
}

Dataset real_to_dataset(const PriceSeries& series, std::size_t width) {
    if (series.size() < width + 1) {
        fail(ErrorKind::invalid_input, "series '" + series.id() + "' has " +
                                           std::to_string(series.size()) +
                                           " prices; need at least " + std::to_string(width + 1));
    }
    Dataset dataset;
    dataset.family = Family::real;
    dataset.windows = sliding_labeled_windows(series.prices(), width, series.id());
    dataset.provenance.overlapping = true;
    dataset.provenance.generator_version = "ingest";
    std::ostringstream fingerprint;
    fingerprint << std::hexfloat << series.id() << ';' << width << ';';
    for (double p : series.prices()) fingerprint << p << ';';
    dataset.provenance.config_hash = to_hex(fnv1a64(fingerprint.str()));
    return dataset;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io_error, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) fail(ErrorKind::io_error, "failed writing '" + path.string() + "'");
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ostringstream out;
    write_dataset(out, dataset);
    write_text(path, out.str());
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    return read_dataset(in);
}

void write_predictions(const std::filesystem::path& path, const PredictionSet& predictions) {
    std::ostringstream out;
    write_predictions(out, predictions);
    write_text(path, out.str());
}

PredictionSet read_predictions(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    return read_predictions(in);
}

} // namespace csfbench
