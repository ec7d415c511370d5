#include "aohmm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "aohmm/errors.hpp"

namespace aohmm {

namespace {

void check_lengths(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) {
        throw InputError("decoded and truth lengths differ (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

Matching greedy_match(const std::vector<int>& decoded, const std::vector<int>& truth) {
    check_lengths(decoded, truth);
    std::map<int, int> freq;
    std::map<std::pair<int, int>, int> agree;
    std::set<int> classes;
    for (std::size_t t = 0; t < decoded.size(); ++t) {
        ++freq[decoded[t]];
        ++agree[{decoded[t], truth[t]}];
        classes.insert(truth[t]);
    }
    std::vector<std::pair<int, int>> order(freq.begin(), freq.end());
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    Matching m;
    std::set<int> taken;
    long correct = 0;
    for (const auto& [label, count] : order) {
        int best = 0;
        int best_class = 0;
        for (int c : classes) {
            if (taken.count(c)) continue;
            const auto it = agree.find({label, c});
            const int a = it == agree.end() ? 0 : it->second;
            if (a > best) {
                best = a;
                best_class = c;
            }
        }
        if (best == 0) continue;
        m.decoded_to_truth[label] = best_class;
        taken.insert(best_class);
        correct += best;
    }
    m.accuracy = decoded.empty() ? 1.0 : static_cast<double>(correct) / static_cast<double>(decoded.size());
    return m;
}

std::vector<int> boundaries(const std::vector<int>& labels) {
    std::vector<int> out;
    for (std::size_t t = 1; t < labels.size(); ++t) {
        if (labels[t] != labels[t - 1]) out.push_back(static_cast<int>(t));
    }
    return out;
}

BoundaryScores boundary_prf(const std::vector<int>& decoded, const std::vector<int>& truth, double window_frac) {
    check_lengths(decoded, truth);
    if (!(window_frac >= 0.0)) throw ParameterError("window fraction must be >= 0");
    const std::vector<int> tb = boundaries(truth);
    const std::vector<int> db = boundaries(decoded);
    BoundaryScores s;
    const double mean_segment = truth.empty() ? 0.0 : static_cast<double>(truth.size()) / (tb.size() + 1.0);
    s.window = static_cast<int>(std::lround(window_frac * mean_segment));

    std::vector<std::tuple<int, int, int>> pairs;  // distance, true index, decoded index
    for (int i = 0; i < static_cast<int>(tb.size()); ++i) {
        for (int j = 0; j < static_cast<int>(db.size()); ++j) {
            const int dist = std::abs(tb[i] - db[j]);
            if (dist <= s.window) pairs.emplace_back(dist, i, j);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> used_t(tb.size(), false);
    std::vector<bool> used_d(db.size(), false);
    int matched = 0;
    for (const auto& [dist, i, j] : pairs) {
        if (used_t[i] || used_d[j]) continue;
        used_t[i] = used_d[j] = true;
        ++matched;
    }
    s.recall = tb.empty() ? 1.0 : static_cast<double>(matched) / tb.size();
    if (db.empty()) {
        s.precision = tb.empty() ? 1.0 : 0.0;
    } else {
        s.precision = static_cast<double>(matched) / db.size();
    }
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

int cardinality_error(const std::vector<int>& decoded, const std::vector<int>& truth) {
    const std::set<int> a(decoded.begin(), decoded.end());
    const std::set<int> b(truth.begin(), truth.end());
    return static_cast<int>(a.size()) - static_cast<int>(b.size());
}

EvalReport evaluate(const std::vector<int>& decoded, const std::vector<int>& truth, double window_frac) {
    EvalReport r;
    const Matching m = greedy_match(decoded, truth);
    const BoundaryScores b = boundary_prf(decoded, truth, window_frac);
    r.frame_accuracy = m.accuracy;
    r.matching = m.decoded_to_truth;
    r.boundary_precision = b.precision;
    r.boundary_recall = b.recall;
    r.f1 = b.f1;
    r.cardinality_error = cardinality_error(decoded, truth);
    return r;
}

std::string EvalReport::to_key_value() const {
    std::ostringstream out;
    out << "frame_accuracy = " << fmt(frame_accuracy) << '\n'
        << "boundary_precision = " << fmt(boundary_precision) << '\n'
        << "boundary_recall = " << fmt(boundary_recall) << '\n'
        << "f1 = " << fmt(f1) << '\n'
        << "cardinality_error = " << cardinality_error << '\n'
        << "matching =";
    for (const auto& [d, t] : matching) out << ' ' << d << "->" << t;
    out << '\n';
    return out.str();
}

std::string EvalReport::csv_header() {
    return "frame_accuracy,boundary_precision,boundary_recall,f1,cardinality_error";
}

std::string EvalReport::csv_row() const {
    return fmt(frame_accuracy) + ',' + fmt(boundary_precision) + ',' + fmt(boundary_recall) + ',' + fmt(f1) + ',' +
           std::to_string(cardinality_error);
}

namespace {

// Golden-angle hue walk keyed by class id.
std::string colour(int id) {
    const double h = std::fmod(std::abs(id) * 137.508, 360.0);
    const double s = 0.65;
    const double v = 0.85;
    const double c = v * s;
    const double x = c * (1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h / 60.0) % 6) {
        case 0: r = c, g = x; break;
        case 1: r = x, g = c; break;
        case 2: g = c, b = x; break;
        case 3: g = x, b = c; break;
        case 4: r = x, b = c; break;
        default: r = c, b = x; break;
    }
    const double m = v - c;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround((r + m) * 255)),
                  static_cast<int>(std::lround((g + m) * 255)), static_cast<int>(std::lround((b + m) * 255)));
    return buf;
}

void strip_row(std::ostringstream& out, const std::vector<std::string>& colours, double y, double w, double h) {
    std::size_t start = 0;
    for (std::size_t t = 1; t <= colours.size(); ++t) {
        if (t < colours.size() && colours[t] == colours[start]) continue;
        out << "<rect x=\"" << start * w << "\" y=\"" << y << "\" width=\"" << (t - start) * w << "\" height=\"" << h
            << "\" fill=\"" << colours[start] << "\"/>\n";
        start = t;
    }
}

}  // namespace

std::string render_strip(const std::vector<int>& decoded, const std::vector<int>& truth,
                         const std::map<int, int>& matching) {
    check_lengths(decoded, truth);
    if (truth.empty()) throw InputError("cannot render an empty strip");
    const int max_truth = *std::max_element(truth.begin(), truth.end());
    std::vector<std::string> top(decoded.size());
    std::vector<std::string> bottom(truth.size());
    for (std::size_t t = 0; t < truth.size(); ++t) {
        bottom[t] = colour(truth[t]);
        const auto it = matching.find(decoded[t]);
        // Unmatched decoded labels get ids past every truth class.
        top[t] = colour(it != matching.end() ? it->second : max_truth + 1 + decoded[t]);
    }
    const double w = 4.0;
    const double h = 24.0;
    const double width = w * truth.size();
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << 2 * h + 6
        << "\" shape-rendering=\"crispEdges\">\n";
    out << "<g id=\"decoded\">\n";
    strip_row(out, top, 0.0, w, h);
    out << "</g>\n<g id=\"truth\">\n";
    strip_row(out, bottom, h + 6.0, w, h);
    out << "</g>\n</svg>\n";
    return out.str();
}

}  // namespace aohmm
