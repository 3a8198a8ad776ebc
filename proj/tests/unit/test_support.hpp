#pragma once

#include "reserving/triangle.hpp"

#include <filesystem>
#include <string>

#ifndef RESERVING_FIXTURE_DIR
#error "RESERVING_FIXTURE_DIR must be defined"
#endif

namespace reserving::testing {

inline std::filesystem::path fixture_path() {
    return std::filesystem::path(RESERVING_FIXTURE_DIR) / "fixture_a2.csv";
}

inline RunOffTriangle fixture() { return load_triangle(fixture_path()); }

inline LossRatioTriangle fixture_ratios(std::size_t years) {
    return to_loss_ratios(most_recent(fixture(), years));
}

// Published MLE of a for the 10- and 18-year fits.
inline const double kA10[] = {1293.81, 1006.78, 644.73, 497.13, 338.73,
                              249.80,  186.01,  138.62, 93.51,  63.16};
inline const double kA18[] = {347.61, 269.54, 166.12, 126.00, 82.46, 56.37, 38.40, 27.52, 17.63, 12.06};

}  // namespace reserving::testing
