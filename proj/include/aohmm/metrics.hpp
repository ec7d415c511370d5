#pragma once

#include <map>
#include <string>
#include <vector>

namespace aohmm {

struct Matching {
    std::map<int, int> decoded_to_truth;
    double accuracy = 0.0;
};

struct BoundaryScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int window = 0;  // +-frames used
};

struct EvalReport {
    double frame_accuracy = 0.0;
    double boundary_precision = 0.0;
    double boundary_recall = 0.0;
    double f1 = 0.0;
    int cardinality_error = 0;
    std::map<int, int> matching;

    std::string to_key_value() const;
    static std::string csv_header();
    std::string csv_row() const;
};

// Decoded labels in descending frequency (ties: ascending label) each take the
// unmatched truth class with the most agreeing frames (ties: ascending class).
// Labels that agree with no remaining class stay unmatched.
Matching greedy_match(const std::vector<int>& decoded, const std::vector<int>& truth);

// Frames t with label(t) != label(t - 1).
std::vector<int> boundaries(const std::vector<int>& labels);

// One-to-one nearest-first matching of boundaries within +-round(frac * mean
// true segment length) frames.
BoundaryScores boundary_prf(const std::vector<int>& decoded, const std::vector<int>& truth,
                            double window_frac = 0.10);

// (# distinct decoded labels) - (# distinct truth labels).
int cardinality_error(const std::vector<int>& decoded, const std::vector<int>& truth);

EvalReport evaluate(const std::vector<int>& decoded, const std::vector<int>& truth, double window_frac = 0.10);

// Two-row SVG strip, predictions on top, truth below. Colours follow the
// truth class; decoded labels borrow the colour of their matched class.
std::string render_strip(const std::vector<int>& decoded, const std::vector<int>& truth,
                         const std::map<int, int>& matching);

}  // namespace aohmm
