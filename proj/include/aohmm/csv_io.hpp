#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aohmm/model_state.hpp"

namespace aohmm {

// Feature files: header `t,f0,...,f{d-1}`, one frame per row.
// Label files:   header `t,label`, 1-based labels.
void write_features(const std::string& path, const Matrix& features);
void write_labels(const std::string& path, const std::vector<int>& labels);
Matrix read_features(const std::string& path);
std::vector<int> read_labels(const std::string& path);
LabeledSequence read_sequence(const std::string& features_path, const std::optional<std::string>& labels_path);

// Helpers shared with the streaming reader.
int feature_header_dim(const std::string& header, const std::string& path);
std::vector<double> parse_feature_row(const std::string& line, int dim, const std::string& path, long line_no);

}  // namespace aohmm
