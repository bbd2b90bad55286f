// Acceptance suite at full scale. With no arguments every criterion runs; pass
// criterion ids to run a subset. Exit status is nonzero if any check fails.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "beamalign/checks/criteria.hpp"

int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) {
        try {
            ids.push_back(std::stoi(argv[i]));
        } catch (const std::exception&) {
            std::cerr << "usage: acceptance [criterion id ...]\n";
            return 2;
        }
    }
    const auto results = beamalign::checks::run_criteria(ids, beamalign::checks::CheckScale::full(), std::cout);
    for (const auto& r : results)
        if (!r.passed) return EXIT_FAILURE;
    return EXIT_SUCCESS;
}
