#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace beamalign::checks {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Problem sizes for the criterion checks. `full()` is the acceptance scale;
/// `quick()` keeps every check but shrinks trial counts for interactive use.
struct CheckScale {
    std::size_t gp_instances = 100;
    std::size_t ei_triples = 50;
    std::size_t ei_samples = 1'000'000;
    std::size_t recovery_trials = 100;
    std::size_t exhaustive_channels = 100;
    std::size_t monotone_episodes = 1000;
    std::size_t monotone_datasets = 100;
    std::size_t curve_trials = 200;
    std::size_t identity_pairs = 1000;
    std::size_t threads = 0;

    static CheckScale full() { return {}; }
    static CheckScale quick();
};

inline constexpr int kCriterionCount = 9;

/// Runs one criterion (1-based id).
CheckResult run_criterion(int id, const CheckScale& scale, std::ostream& log);

/// Runs the listed criteria (all when empty), printing one PASS/FAIL line each.
std::vector<CheckResult> run_criteria(const std::vector<int>& ids, const CheckScale& scale, std::ostream& out);

}  // namespace beamalign::checks
