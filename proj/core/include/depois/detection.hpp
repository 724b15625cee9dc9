/**
 * @file detection.hpp
 * @brief z-score detection boundary fitted on augmented-data critic scores.
 *
 * y_thr = z_s * sigma + mu, with (mu, sigma) the sample moments of the
 * critic-score distribution over S_aug. A sample is flagged poisoned when its
 * score falls strictly below y_thr.
 */
#pragma once

#include "depois/dataset.hpp"
#include "depois/mimic.hpp"

namespace depois {

struct DetectionBoundary {
    double mu = 0.0;
    double sigma = 0.0;  // sample standard deviation (n-1)
    double z_s = -1.96;
    double y_thr = 0.0;
};

/// y_thr from the boundary formula; shared by fit_boundary and the CLI.
DetectionBoundary boundary_from_moments(double mu, double sigma, double z_s);

struct DetectionVerdict {
    double y_pre = 0.0;
    double z = 0.0;
    bool flagged = false;
};

/// Fits (mu, sigma) on the critic scores of s_aug. Requires at least 30 rows
/// (the normal approximation the threshold rests on); rejects zero variance.
DetectionBoundary fit_boundary(const MimicModel& mimic, const LabeledDataset& s_aug, double z_s = -1.96);

/// flagged iff y_pre < y_thr (strict).
DetectionVerdict classify_sample(double y_pre, const DetectionBoundary& boundary);

struct FilterResult {
    LabeledDataset kept;
    LabeledDataset flagged;
    std::vector<DetectionVerdict> verdicts;  // aligned with suspect rows
};

/// Scores and partitions a suspect set (which must not contain trusted rows).
FilterResult filter_dataset(const MimicModel& mimic, const DetectionBoundary& boundary,
                            const LabeledDataset& suspect);

// Boundary JSON {mu, sigma, z_s, y_thr}.
void save_boundary(const DetectionBoundary& boundary, const std::string& path);
DetectionBoundary load_boundary(const std::string& path);

}  // namespace depois
