#include "aohmm/csv_io.hpp"

#include <charconv>
#include <climits>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aohmm/errors.hpp"

namespace aohmm {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string where(const std::string& path, long line_no) { return path + ":" + std::to_string(line_no) + ": "; }

double to_double(const std::string& s, const std::string& path, long line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InputError(where(path, line_no) + "not a number: '" + s + "'");
    }
    return v;
}

long to_long(const std::string& s, const std::string& path, long line_no) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InputError(where(path, line_no) + "not an integer: '" + s + "'");
    }
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out.precision(17);
    return out;
}

}  // namespace

int feature_header_dim(const std::string& header, const std::string& path) {
    const auto fields = split_fields(header);
    if (fields.size() < 2 || fields[0] != "t") throw InputError(path + ": expected header 't,f0,...'");
    for (std::size_t i = 1; i < fields.size(); ++i) {
        if (fields[i] != "f" + std::to_string(i - 1)) {
            throw InputError(path + ": unexpected header column '" + fields[i] + "'");
        }
    }
    return static_cast<int>(fields.size()) - 1;
}

std::vector<double> parse_feature_row(const std::string& line, int dim, const std::string& path, long line_no) {
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != dim + 1) {
        throw InputError(where(path, line_no) + "expected " + std::to_string(dim) + " features, got " +
                         std::to_string(static_cast<int>(fields.size()) - 1));
    }
    std::vector<double> row(dim);
    for (int c = 0; c < dim; ++c) row[c] = to_double(fields[c + 1], path, line_no);
    return row;
}

void write_features(const std::string& path, const Matrix& features) {
    auto out = open_out(path);
    out << 't';
    for (Eigen::Index c = 0; c < features.cols(); ++c) out << ",f" << c;
    out << '\n';
    for (Eigen::Index t = 0; t < features.rows(); ++t) {
        out << t;
        for (Eigen::Index c = 0; c < features.cols(); ++c) out << ',' << features(t, c);
        out << '\n';
    }
    if (!out) throw InputError("failed writing " + path);
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
    auto out = open_out(path);
    out << "t,label\n";
    for (std::size_t t = 0; t < labels.size(); ++t) out << t << ',' << labels[t] << '\n';
    if (!out) throw InputError("failed writing " + path);
}

Matrix read_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": missing header");
    const int dim = feature_header_dim(line, path);
    std::vector<std::vector<double>> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        rows.push_back(parse_feature_row(line, dim, path, line_no));
    }
    Matrix out(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (int c = 0; c < dim; ++c) out(static_cast<Eigen::Index>(t), c) = rows[t][c];
    }
    return out;
}

std::vector<int> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": missing header");
    const auto header = split_fields(line);
    if (header.size() != 2 || header[0] != "t" || header[1] != "label") {
        throw InputError(path + ": expected header 't,label'");
    }
    std::vector<int> labels;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_fields(line);
        if (fields.size() != 2) throw InputError(where(path, line_no) + "expected 2 columns");
        const long label = to_long(fields[1], path, line_no);
        if (label < 1 || label > INT_MAX) throw InputError(where(path, line_no) + "labels are 1-based integers");
        labels.push_back(static_cast<int>(label));
    }
    return labels;
}

LabeledSequence read_sequence(const std::string& features_path, const std::optional<std::string>& labels_path) {
    LabeledSequence seq;
    seq.features = read_features(features_path);
    if (labels_path) {
        seq.labels = read_labels(*labels_path);
        if (static_cast<int>(seq.labels->size()) != seq.length()) {
            throw InputError(*labels_path + ": " + std::to_string(seq.labels->size()) + " labels for " +
                             std::to_string(seq.length()) + " frames");
        }
    }
    return seq;
}

}  // namespace aohmm
