#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "beamalign/acquisition.hpp"
#include "beamalign/gaussian_process.hpp"
#include "beamalign/tree_ensembles.hpp"

namespace beamalign {

struct SurrogateSettings {
    GpConfig gp;
    GbrtConfig gbrt;
    RfConfig rf;
};

std::unique_ptr<Surrogate> make_surrogate(SurrogateKind kind, const SurrogateSettings& settings);

struct BoConfig {
    std::size_t m_init = 16;
    std::size_t n_iters = 144;
    SurrogateKind surrogate = SurrogateKind::BoostedTrees;
    SurrogateSettings settings;
    /// Uniform random EI candidates per round.
    std::size_t n_candidates = 5000;
    /// Also score every codebook cross-grid pair each round.
    bool grid_candidates = true;
    /// Restrict queries to the codebook cross grid (no continuous candidates).
    bool grid_only = false;

    void validate() const;
    std::size_t total_measurements() const noexcept { return m_init + n_iters; }
};

struct TraceRecord {
    std::size_t iteration = 0;  // 1-based measurement index
    BeamPair pair;
    double rss = 0.0;
    double best_rss = 0.0;
    BeamPair best_pair;
};

/// Measurement history of one alignment episode with its running maximum.
class RunTrace {
public:
    void record(const BeamPair& pair, double rss);

    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const std::vector<TraceRecord>& records() const noexcept { return records_; }
    const TraceRecord& operator[](std::size_t i) const { return records_.at(i); }
    const TraceRecord& back() const { return records_.back(); }

    /// The first n records.
    RunTrace prefix(std::size_t n) const;
    Dataset to_dataset() const;

private:
    std::vector<TraceRecord> records_;
};

/// Called before each surrogate fit with the 1-based round and the data it sees.
using FitObserver = std::function<void(std::size_t round, const Dataset& data)>;

/// Random codebook initialisation followed by n_iters rounds of
/// fit -> maximise EI -> measure -> augment.
RunTrace run_bo(const ChannelRealization& channel, const ChannelParams& params, const BeamCodebooks& codebooks,
                const BoConfig& config, Rng& rng, const FitObserver& observer = {});

/// Pair with the largest observed RSS; ties go to the earliest.
BeamPair final_alignment(const RunTrace& trace);

/// Argmax of the surrogate mean after fitting on the trace, over the codebook grid
/// plus n_candidates random points. Alternative to final_alignment.
BeamPair surrogate_recommendation(const RunTrace& trace, const BoConfig& config, const BeamCodebooks& codebooks,
                                  Rng& rng);

}  // namespace beamalign
