/**
 * @file experiment.hpp
 * @brief Config-driven experiment orchestration: end-to-end pipeline runs
 *        (attack -> trusted split -> augment -> mimic -> detect -> evaluate),
 *        parameter sweeps, the ablation compositions, and report persistence.
 *
 * Every stage draws from an RNG stream derived from (seed, stage tag), so a
 * run is reproducible from its echoed config alone. Reports carry a content
 * hash over all deterministic result fields; wall-clock timings are reported
 * but excluded from the hash.
 */
#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "depois/attacks.hpp"
#include "depois/augmenter.hpp"
#include "depois/dataset.hpp"
#include "depois/detection.hpp"
#include "depois/metrics.hpp"
#include "depois/mimic.hpp"

namespace depois {

struct DatasetSpec {
    std::string kind = "synthetic-2d";  // synthetic-2d | synthetic-regression | csv
    Eigen::Index n = 800;
    std::string layout = "ring-vs-core";  // synthetic-2d: ring-vs-core | two-moons
    double noise = 0.05;
    Eigen::Index n_features = 10;  // synthetic-regression
    double noise_std = 0.05;
    std::string path;  // csv
    CsvSchema schema;  // csv
};

struct AttackSpec {
    std::string name = "label-flip";  // label-flip | regression-stat | feature-collision | external | none
    double rate = 0.2;                // 0 is the no-attack convention
    std::string poison_file;          // external
    int target_class = 1;             // feature-collision
    int base_class = 0;               // feature-collision
    double beta = 0.1;                // feature-collision
};

struct DetectionConfig {
    double z_s = -1.96;
};

inline constexpr const char* kCompositionFull = "cgan_auth+cwgangp";

struct ExperimentConfig {
    DatasetSpec dataset;
    AttackSpec attack;
    double trusted_ratio = 0.2;
    double trusted_contamination = 0.0;
    AugmentTrainConfig augment;
    MimicTrainConfig mimic;
    DetectionConfig detection;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string output_dir;  // empty: keep everything in memory
    std::string composition = kCompositionFull;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
    void save(const std::string& path) const;

    /// Schema validation; throws with a field-path message on any violation.
    void validate() const;
};

struct StageTimings {
    double augment_seconds = 0.0;
    double mimic_seconds = 0.0;
    double detect_seconds = 0.0;
};

struct SeedResult {
    std::uint64_t seed = 0;
    DetectionBoundary boundary;
    ConfusionReport confusion;
    GenQualityReport gen_quality;
    StageTimings timings;
};

struct AggregateStats {
    double mean = 0.0;
    double stddev = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;  // echo
    std::vector<SeedResult> per_seed;
    AggregateStats accuracy, precision, recall, f1;
    StageTimings mean_timings;
    std::string content_hash;  // hex; covers all deterministic result fields
    bool failed = false;
    std::string failure;

    nlohmann::json results_json() const;  // deterministic fields only
    nlohmann::json to_json() const;       // results + config echo + timings
};

/// Full pipeline over every configured seed. Persists artifacts under
/// config.output_dir when set. A stage failure yields a partial report with
/// the failure marker set instead of throwing.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// One report per poisoning rate (each within (0, 0.3]). Points are
/// independent jobs on a bounded worker pool; curve CSV and SVG plots are
/// written under base.output_dir when set.
std::vector<ExperimentReport> sweep_poisoning_rate(const ExperimentConfig& base,
                                                   const std::vector<double>& rates, int workers = 0);

/// One report per trusted ratio (each within (0, 1)).
std::vector<ExperimentReport> sweep_trusted_ratio(const ExperimentConfig& base,
                                                  const std::vector<double>& ratios, int workers = 0);

/// Derived config whose trusted split deliberately includes the given
/// fraction of poisoned rows.
ExperimentConfig contaminate_trusted(const ExperimentConfig& config, double contamination_rate);

/// Runs one of the four compositions: cgan+gan, cgan+cwgangp, cgan_auth+gan,
/// cgan_auth+cwgangp (the default pipeline).
ExperimentReport ablation(const ExperimentConfig& config, const std::string& composition);

/// Synthetic-data-generation quality check: the detection pipeline trained on
/// S_aug versus the same pipeline trained on an equal-size all-clean set,
/// both filtering the same suspect mix.
struct AugQualityResult {
    ConfusionReport augmented;
    ConfusionReport baseline;
};
AugQualityResult augmentation_quality_experiment(const ExperimentConfig& config, std::uint64_t seed);

/// report.json (everything), results.json (deterministic fields only) and
/// per-seed artifacts.
void write_report_files(const ExperimentReport& report, const std::string& dir);

}  // namespace depois
