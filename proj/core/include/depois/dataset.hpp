/**
 * @file dataset.hpp
 * @brief Dataset representation, CSV loading, normalization and trusted splits.
 *
 * A LabeledDataset is a value type: every operation returns a new dataset and
 * never mutates its input or the file it came from. Rows carry provenance
 * tags (trusted / poisoned) used by the defense pipeline.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace depois {

enum class Task { Classification, Regression };

// Row provenance bitmask.
enum RowTag : std::uint8_t {
    kTagNone = 0,
    kTagTrusted = 1u << 0,
    kTagPoisoned = 1u << 1,
};

/// Feature column metadata. A column loaded as categorical keeps its category
/// list (the stored feature value is the category index) until one-hot encoded.
struct ColumnInfo {
    std::string name;
    std::vector<std::string> categories;  // empty => numeric column

    bool is_categorical() const { return !categories.empty(); }
};

struct LabeledDataset {
    Eigen::MatrixXd features;  // n_samples x n_features, row per sample
    Eigen::VectorXd targets;   // class id (stored as double) or regression value
    Task task = Task::Classification;
    int n_classes = 0;  // classification only
    std::vector<std::uint8_t> row_tags;
    std::vector<ColumnInfo> columns;
    std::string target_name = "target";
    std::map<std::string, double> metadata;  // e.g. synthetic generator coefficients

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index n_features() const { return features.cols(); }

    int label(Eigen::Index i) const { return static_cast<int>(targets(i)); }
    bool is_trusted(Eigen::Index i) const { return row_tags[static_cast<std::size_t>(i)] & kTagTrusted; }
    bool is_poisoned(Eigen::Index i) const { return row_tags[static_cast<std::size_t>(i)] & kTagPoisoned; }

    std::vector<Eigen::Index> indices_with_tag(std::uint8_t tag) const;
    std::vector<Eigen::Index> indices_without_tag(std::uint8_t tag) const;

    /// New dataset holding the given rows (tags and metadata carried over).
    LabeledDataset select_rows(const std::vector<Eigen::Index>& rows) const;

    /// New dataset with `other`'s rows appended. Column schemas must agree.
    LabeledDataset append_rows(const LabeledDataset& other) const;

    /// Checks structural invariants: finite features, targets in range, tag
    /// exclusivity. Contaminated trusted rows (trusted AND poisoned) are only
    /// legal when `allow_contaminated_trusted` is set.
    void validate(bool allow_contaminated_trusted = false) const;
};

/// Column specification for CSV loading.
struct CsvSchema {
    std::string target;  // name of the target column
    Task task = Task::Classification;
    std::vector<std::string> categorical;  // columns to category-encode at load
};

struct SplitSpec {
    double trusted_ratio = 0.2;  // in (0, 1]
    std::uint64_t seed = 0;
};

/// Per-column min/max record; allows exact inverse transforms.
struct ScalingRecord {
    Eigen::VectorXd col_min;
    Eigen::VectorXd col_max;
    bool scales_target = false;
    double target_min = 0.0;
    double target_max = 0.0;
};

// --- CSV / sidecar I/O -----------------------------------------------------

/// Raw CSV table: header plus string cells. Blank lines are skipped; every
/// row must have the header's field count.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_table(const std::string& path);

/// Loads a CSV file with a header row. Columns named in `schema.categorical`
/// are category-encoded; all other feature cells must parse as numbers.
LabeledDataset load_dataset(const std::string& path, const CsvSchema& schema);

struct SaveOptions {
    bool with_poisoned_column = false;
    bool with_trusted_column = false;
};

void save_dataset(const LabeledDataset& ds, const std::string& path, const SaveOptions& opts = {});

/// JSON sidecar: {task, n_classes, scaling record, seed}.
void save_metadata(const LabeledDataset& ds, const std::optional<ScalingRecord>& scaling,
                   std::uint64_t seed, const std::string& path);

// --- Operations --------------------------------------------------------------

/// Replaces each named categorical column by its indicator columns.
/// Numeric columns may also be encoded; their distinct values become the
/// category set. Throws on unknown column names.
LabeledDataset one_hot_encode(const LabeledDataset& ds, const std::vector<std::string>& categorical_columns);

/// Min-max scales every feature column into [0,1]; constant columns map to 0.
std::pair<LabeledDataset, ScalingRecord> normalize_features(const LabeledDataset& ds);

/// Min-max scales regression targets into [0,1], extending `record`.
std::pair<LabeledDataset, ScalingRecord> normalize_targets(const LabeledDataset& ds, ScalingRecord record);

/// Inverts normalize_features (and normalize_targets if recorded).
LabeledDataset inverse_transform(const LabeledDataset& ds, const ScalingRecord& record);

/// Tags round(trusted_ratio * n) rows as trusted, drawn without replacement.
/// Poisoned rows are never selected unless `contamination_rate > 0`, in which
/// case exactly round(contamination_rate * k) of the k trusted rows are drawn
/// from the poisoned rows (the limitation-study option; such rows keep both
/// tags).
LabeledDataset split_trusted(const LabeledDataset& ds, const SplitSpec& spec, double contamination_rate = 0.0);

}  // namespace depois
