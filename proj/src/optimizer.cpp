#include "beamalign/optimizer.hpp"

#include <stdexcept>

namespace beamalign {

std::unique_ptr<Surrogate> make_surrogate(SurrogateKind kind, const SurrogateSettings& settings) {
    switch (kind) {
        case SurrogateKind::GaussianProcess: return std::make_unique<GpSurrogate>(settings.gp);
        case SurrogateKind::BoostedTrees: return std::make_unique<GbrtSurrogate>(settings.gbrt);
        case SurrogateKind::RandomForest: return std::make_unique<RfSurrogate>(settings.rf);
    }
    throw std::invalid_argument("make_surrogate: unknown kind");
}

void BoConfig::validate() const {
    if (m_init < 1) throw std::invalid_argument("BoConfig: m_init must be >= 1");
    if (!grid_only && n_candidates < 1) throw std::invalid_argument("BoConfig: n_candidates must be >= 1");
}

void RunTrace::record(const BeamPair& pair, double rss) {
    TraceRecord r;
    r.iteration = records_.size() + 1;
    r.pair = pair;
    r.rss = rss;
    if (records_.empty() || rss > records_.back().best_rss) {
        r.best_rss = rss;
        r.best_pair = pair;
    } else {
        r.best_rss = records_.back().best_rss;
        r.best_pair = records_.back().best_pair;
    }
    records_.push_back(r);
}

RunTrace RunTrace::prefix(std::size_t n) const {
    if (n > size()) throw std::out_of_range("RunTrace::prefix");
    RunTrace out;
    out.records_.assign(records_.begin(), records_.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

Dataset RunTrace::to_dataset() const {
    Dataset d;
    for (const auto& r : records_) d.add(r.pair, r.rss);
    return d;
}

RunTrace run_bo(const ChannelRealization& channel, const ChannelParams& params, const BeamCodebooks& codebooks,
                const BoConfig& config, Rng& rng, const FitObserver& observer) {
    config.validate();
    if (config.m_init > codebooks.pair_count())
        throw std::invalid_argument("run_bo: m_init exceeds the number of codebook pairs");

    RssProbe probe(channel, params, rng);
    RunTrace trace;
    Dataset data;
    for (const auto idx : rng.sample_without_replacement(codebooks.pair_count(), config.m_init)) {
        const BeamPair z = codebooks.pair(idx);
        const double y = probe.rss(z);
        data.add(z, y);
        trace.record(z, y);
    }

    const auto grid = codebooks.cross_grid();
    auto surrogate = make_surrogate(config.surrogate, config.settings);
    for (std::size_t round = 1; round <= config.n_iters; ++round) {
        if (observer) observer(round, data);
        surrogate->fit(data, rng);
        const auto state = AcquisitionState::from(data);
        const AcquisitionChoice choice =
            config.grid_only ? argmax_expected_improvement(*surrogate, state.f_best, grid)
                             : maximize_acquisition(*surrogate, state, rng, config.n_candidates,
                                                    config.grid_candidates ? std::span<const BeamPair>(grid)
                                                                           : std::span<const BeamPair>());
        const double y = probe.rss(choice.pair);
        data.add(choice.pair, y);
        trace.record(choice.pair, y);
    }
    return trace;
}

BeamPair final_alignment(const RunTrace& trace) {
    if (trace.empty()) throw std::invalid_argument("final_alignment: empty trace");
    std::size_t best = 0;
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i].rss > trace[best].rss) best = i;
    return trace[best].pair;
}

BeamPair surrogate_recommendation(const RunTrace& trace, const BoConfig& config, const BeamCodebooks& codebooks,
                                  Rng& rng) {
    const Dataset data = trace.to_dataset();
    auto surrogate = make_surrogate(config.surrogate, config.settings);
    surrogate->fit(data, rng);
    const auto grid = codebooks.cross_grid();
    const auto candidates =
        draw_candidates(rng, config.grid_only ? 0 : config.n_candidates, SearchDomain{}, grid);
    const auto pred = surrogate->predict_batch(candidates);
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (pred[i].mu > pred[best].mu) best = i;
    return candidates[best];
}

}  // namespace beamalign
