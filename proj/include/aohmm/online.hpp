#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aohmm/gibbs.hpp"
#include "aohmm/model_state.hpp"

namespace aohmm {

struct BatchPlan {
    int batch_size = 16;  // frames per batch
    int sweeps = 1000;
    int burn_in = 500;
    int bootstrap_iters = 200;
    bool offline = false;  // one batch holding the whole stream

    void validate() const;
};

struct RunOptions {
    BatchPlan plan;
    SamplerOptions sampler;
    BasePrior base_prior = BasePrior::Pooled;
    std::ostream* trace = nullptr;  // per-sweep CSV, header written by the runner
};

struct BatchDiagnostics {
    long batch = 0;
    int frames = 0;
    double mean_log_likelihood = 0.0;  // over post-burn-in sweeps
    RateValues applied;                // rates that scaled this batch's priors
    RateValues next;                   // post-burn-in means, installed for the next batch
    double accept_beta = 0.0;          // MH acceptance fractions within the batch
    double accept_pi = 0.0;
    std::set<int> active;              // 1-based, under the decoded labels
};

struct RunResult {
    std::vector<int> labels;  // 1-based decoded label per streamed frame
    std::vector<BatchDiagnostics> batches;
    std::string snapshot;     // final model state
};

// Source of frames; yields at most `max_rows` rows per call and an empty matrix
// once exhausted.
class StreamSource {
public:
    virtual ~StreamSource() = default;
    virtual Matrix next(int max_rows) = 0;
};

class MatrixStream : public StreamSource {
public:
    explicit MatrixStream(Matrix features) : features_(std::move(features)) {}
    Matrix next(int max_rows) override;

private:
    Matrix features_;
    Eigen::Index pos_ = 0;
};

// Reads `t,f0,...` rows lazily from a feature CSV.
class CsvStream : public StreamSource {
public:
    explicit CsvStream(const std::string& path);
    Matrix next(int max_rows) override;

private:
    std::ifstream in_;
    std::string path_;
    int dim_ = -1;
    long line_ = 1;
};

// Fits the posteriors and auxiliary counts of `state` to a fixed assignment.
void condition_on_assignment(ModelState& state, const Matrix& features, const std::vector<int>& z, Rng& rng);

// Turns the current batch posterior into the next batch's prior: observed
// slots take their NIW posterior, absorbed transition and table counts move
// into the pseudo-count baselines, counts reset and `next` is installed as
// the applied rates.
void propagate_posterior(ModelState& state, const RateValues& next);

// Per-frame vote over sweeps; ties go to the lower slot.
std::vector<int> majority_vote(const Eigen::MatrixXi& votes);

class OnlineRunner {
public:
    OnlineRunner(ModelState state, RunOptions options, Rng& rng);

    // One batch: sweeps, decode, propagate. Returns 1-based labels.
    std::vector<int> step(const Matrix& batch, BatchDiagnostics* diag = nullptr);

    const ModelState& state() const { return state_; }

private:
    ModelState state_;
    RunOptions options_;
    Rng& rng_;
};

// Writes the trace CSV header.
void write_trace_header(std::ostream& out);

// Bootstrap, then the stream batch by batch.
RunResult run_online(const std::vector<LabeledSequence>& bootstrap, StreamSource& stream, const RunOptions& options,
                     const HdpHyperparams& hyper, Rng& rng, const LearningRates& rate_priors = {});

}  // namespace aohmm
