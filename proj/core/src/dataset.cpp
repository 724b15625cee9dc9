#include "depois/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "depois/rng.hpp"

namespace depois {

namespace {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

std::vector<Eigen::Index> LabeledDataset::indices_with_tag(std::uint8_t tag) const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < size(); ++i)
        if (row_tags[static_cast<std::size_t>(i)] & tag) out.push_back(i);
    return out;
}

std::vector<Eigen::Index> LabeledDataset::indices_without_tag(std::uint8_t tag) const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < size(); ++i)
        if (!(row_tags[static_cast<std::size_t>(i)] & tag)) out.push_back(i);
    return out;
}

LabeledDataset LabeledDataset::select_rows(const std::vector<Eigen::Index>& rows) const {
    LabeledDataset out = *this;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.targets.resize(static_cast<Eigen::Index>(rows.size()));
    out.row_tags.resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.features.row(static_cast<Eigen::Index>(k)) = features.row(rows[k]);
        out.targets(static_cast<Eigen::Index>(k)) = targets(rows[k]);
        out.row_tags[k] = row_tags[static_cast<std::size_t>(rows[k])];
    }
    return out;
}

LabeledDataset LabeledDataset::append_rows(const LabeledDataset& other) const {
    if (other.n_features() != n_features())
        throw std::invalid_argument("append_rows: feature count mismatch");
    if (other.task != task) throw std::invalid_argument("append_rows: task mismatch");
    LabeledDataset out = *this;
    const Eigen::Index n0 = size();
    out.features.conservativeResize(n0 + other.size(), Eigen::NoChange);
    out.targets.conservativeResize(n0 + other.size());
    out.features.bottomRows(other.size()) = other.features;
    out.targets.tail(other.size()) = other.targets;
    out.row_tags.insert(out.row_tags.end(), other.row_tags.begin(), other.row_tags.end());
    return out;
}

void LabeledDataset::validate(bool allow_contaminated_trusted) const {
    if (!features.allFinite()) throw std::runtime_error("dataset: non-finite feature value");
    if (targets.size() != size()) throw std::runtime_error("dataset: target/feature row mismatch");
    if (row_tags.size() != static_cast<std::size_t>(size()))
        throw std::runtime_error("dataset: row_tags size mismatch");
    if (task == Task::Classification) {
        if (n_classes < 2) throw std::runtime_error("dataset: classification requires n_classes >= 2");
        for (Eigen::Index i = 0; i < size(); ++i) {
            const double t = targets(i);
            if (t != std::floor(t) || t < 0 || t >= n_classes)
                throw std::runtime_error("dataset: class id out of [0, n_classes)");
        }
    }
    if (!allow_contaminated_trusted) {
        for (std::size_t i = 0; i < row_tags.size(); ++i)
            if ((row_tags[i] & kTagTrusted) && (row_tags[i] & kTagPoisoned))
                throw std::runtime_error("dataset: row tagged both trusted and poisoned");
    }
}

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv_table: cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_csv_table: empty file " + path);
    table.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != table.header.size())
            throw std::runtime_error("read_csv_table: row with " + std::to_string(fields.size()) +
                                     " fields, expected " + std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
    }
    return table;
}

LabeledDataset load_dataset(const std::string& path, const CsvSchema& schema) {
    CsvTable table = read_csv_table(path);
    const std::vector<std::string>& header = table.header;
    std::vector<std::vector<std::string>>& rows = table.rows;

    int target_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == schema.target) target_col = static_cast<int>(j);
    if (target_col < 0)
        throw std::runtime_error("load_dataset: target column '" + schema.target + "' not found");

    std::vector<bool> is_cat(header.size(), false);
    for (const auto& name : schema.categorical) {
        bool found = false;
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) { is_cat[j] = true; found = true; }
        if (!found) throw std::runtime_error("load_dataset: categorical column '" + name + "' not found");
    }
    if (rows.empty()) throw std::runtime_error("load_dataset: no data rows in " + path);

    // Category maps for categorical columns: sorted unique values -> index.
    std::vector<std::vector<std::string>> cats(header.size());
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (!is_cat[j] || static_cast<int>(j) == target_col) continue;
        std::set<std::string> uniq;
        for (const auto& r : rows) uniq.insert(r[j]);
        cats[j].assign(uniq.begin(), uniq.end());
    }

    LabeledDataset ds;
    ds.task = schema.task;
    ds.target_name = schema.target;
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index d = static_cast<Eigen::Index>(header.size()) - 1;
    ds.features.resize(n, d);
    ds.targets.resize(n);
    ds.row_tags.assign(static_cast<std::size_t>(n), kTagNone);
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (static_cast<int>(j) == target_col) continue;
        ds.columns.push_back(ColumnInfo{header[j], cats[j]});
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index out_j = 0;
        for (std::size_t j = 0; j < header.size(); ++j) {
            const std::string& cell = rows[static_cast<std::size_t>(i)][j];
            if (static_cast<int>(j) == target_col) {
                double v;
                if (!parse_double(cell, v))
                    throw std::runtime_error("load_dataset: non-numeric target '" + cell + "'");
                ds.targets(i) = v;
                continue;
            }
            if (is_cat[j]) {
                auto it = std::lower_bound(cats[j].begin(), cats[j].end(), cell);
                ds.features(i, out_j++) = static_cast<double>(it - cats[j].begin());
            } else {
                double v;
                if (!parse_double(cell, v))
                    throw std::runtime_error("load_dataset: non-numeric cell '" + cell + "' in column " +
                                             header[j]);
                ds.features(i, out_j++) = v;
            }
        }
    }

    if (ds.task == Task::Classification) {
        // Class labels are normalized to contiguous ids 0..k-1 in sorted order.
        std::set<double> uniq(ds.targets.data(), ds.targets.data() + ds.targets.size());
        std::vector<double> vals(uniq.begin(), uniq.end());
        for (Eigen::Index i = 0; i < n; ++i) {
            auto it = std::lower_bound(vals.begin(), vals.end(), ds.targets(i));
            ds.targets(i) = static_cast<double>(it - vals.begin());
        }
        ds.n_classes = static_cast<int>(vals.size());
    }
    ds.validate();
    return ds;
}

void save_dataset(const LabeledDataset& ds, const std::string& path, const SaveOptions& opts) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_dataset: cannot write " + path);
    for (Eigen::Index j = 0; j < ds.n_features(); ++j) {
        const std::string name = j < static_cast<Eigen::Index>(ds.columns.size())
                                     ? ds.columns[static_cast<std::size_t>(j)].name
                                     : "f" + std::to_string(j);
        out << name << ',';
    }
    out << ds.target_name;
    if (opts.with_poisoned_column) out << ",poisoned";
    if (opts.with_trusted_column) out << ",trusted";
    out << '\n';
    for (Eigen::Index i = 0; i < ds.size(); ++i) {
        for (Eigen::Index j = 0; j < ds.n_features(); ++j) out << format_double(ds.features(i, j)) << ',';
        out << format_double(ds.targets(i));
        if (opts.with_poisoned_column) out << ',' << (ds.is_poisoned(i) ? 1 : 0);
        if (opts.with_trusted_column) out << ',' << (ds.is_trusted(i) ? 1 : 0);
        out << '\n';
    }
}

void save_metadata(const LabeledDataset& ds, const std::optional<ScalingRecord>& scaling,
                   std::uint64_t seed, const std::string& path) {
    nlohmann::json j;
    j["task"] = ds.task == Task::Classification ? "classification" : "regression";
    j["n_classes"] = ds.n_classes;
    j["seed"] = seed;
    if (scaling) {
        nlohmann::json s;
        s["col_min"] = std::vector<double>(scaling->col_min.data(), scaling->col_min.data() + scaling->col_min.size());
        s["col_max"] = std::vector<double>(scaling->col_max.data(), scaling->col_max.data() + scaling->col_max.size());
        if (scaling->scales_target) {
            s["target_min"] = scaling->target_min;
            s["target_max"] = scaling->target_max;
        }
        j["scaling"] = s;
    }
    if (!ds.metadata.empty()) j["metadata"] = ds.metadata;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_metadata: cannot write " + path);
    out << j.dump(2) << '\n';
}

LabeledDataset one_hot_encode(const LabeledDataset& ds, const std::vector<std::string>& categorical_columns) {
    std::vector<bool> encode(ds.columns.size(), false);
    for (const auto& name : categorical_columns) {
        bool found = false;
        for (std::size_t j = 0; j < ds.columns.size(); ++j)
            if (ds.columns[j].name == name) { encode[j] = true; found = true; }
        if (!found) throw std::invalid_argument("one_hot_encode: unknown column '" + name + "'");
    }

    // Per-column category value lists. A numeric column uses its distinct values.
    std::vector<std::vector<double>> values(ds.columns.size());
    std::vector<std::vector<std::string>> names(ds.columns.size());
    Eigen::Index out_dim = 0;
    for (std::size_t j = 0; j < ds.columns.size(); ++j) {
        if (!encode[j]) { ++out_dim; continue; }
        const auto& col = ds.columns[j];
        if (col.is_categorical()) {
            for (std::size_t c = 0; c < col.categories.size(); ++c) {
                values[j].push_back(static_cast<double>(c));
                names[j].push_back(col.name + "=" + col.categories[c]);
            }
        } else {
            std::set<double> uniq;
            for (Eigen::Index i = 0; i < ds.size(); ++i) uniq.insert(ds.features(i, static_cast<Eigen::Index>(j)));
            for (double v : uniq) {
                values[j].push_back(v);
                names[j].push_back(col.name + "=" + format_double(v));
            }
        }
        out_dim += static_cast<Eigen::Index>(values[j].size());
    }

    LabeledDataset out = ds;
    out.columns.clear();
    out.features.resize(ds.size(), out_dim);
    Eigen::Index oj = 0;
    for (std::size_t j = 0; j < ds.columns.size(); ++j) {
        if (!encode[j]) {
            out.columns.push_back(ds.columns[j]);
            out.features.col(oj++) = ds.features.col(static_cast<Eigen::Index>(j));
            continue;
        }
        for (std::size_t c = 0; c < values[j].size(); ++c) {
            out.columns.push_back(ColumnInfo{names[j][c], {}});
            for (Eigen::Index i = 0; i < ds.size(); ++i)
                out.features(i, oj) = ds.features(i, static_cast<Eigen::Index>(j)) == values[j][c] ? 1.0 : 0.0;
            ++oj;
        }
    }
    return out;
}

std::pair<LabeledDataset, ScalingRecord> normalize_features(const LabeledDataset& ds) {
    ScalingRecord rec;
    rec.col_min = ds.features.colwise().minCoeff();
    rec.col_max = ds.features.colwise().maxCoeff();
    LabeledDataset out = ds;
    for (Eigen::Index j = 0; j < ds.n_features(); ++j) {
        const double lo = rec.col_min(j), hi = rec.col_max(j);
        if (hi > lo)
            out.features.col(j) = (ds.features.col(j).array() - lo) / (hi - lo);
        else
            out.features.col(j).setZero();  // constant column rule
    }
    return {out, rec};
}

std::pair<LabeledDataset, ScalingRecord> normalize_targets(const LabeledDataset& ds, ScalingRecord record) {
    if (ds.task != Task::Regression)
        throw std::invalid_argument("normalize_targets: regression datasets only");
    record.scales_target = true;
    record.target_min = ds.targets.minCoeff();
    record.target_max = ds.targets.maxCoeff();
    LabeledDataset out = ds;
    if (record.target_max > record.target_min)
        out.targets = (ds.targets.array() - record.target_min) / (record.target_max - record.target_min);
    else
        out.targets.setZero();
    return {out, record};
}

LabeledDataset inverse_transform(const LabeledDataset& ds, const ScalingRecord& record) {
    LabeledDataset out = ds;
    for (Eigen::Index j = 0; j < ds.n_features(); ++j) {
        const double lo = record.col_min(j), hi = record.col_max(j);
        if (hi > lo)
            out.features.col(j) = ds.features.col(j).array() * (hi - lo) + lo;
        else
            out.features.col(j).setConstant(lo);
    }
    if (record.scales_target && record.target_max > record.target_min)
        out.targets = ds.targets.array() * (record.target_max - record.target_min) + record.target_min;
    else if (record.scales_target)
        out.targets.setConstant(record.target_min);
    return out;
}

LabeledDataset split_trusted(const LabeledDataset& ds, const SplitSpec& spec, double contamination_rate) {
    if (!(spec.trusted_ratio > 0.0) || spec.trusted_ratio > 1.0)
        throw std::invalid_argument("split_trusted: trusted_ratio must be in (0,1]");
    if (contamination_rate < 0.0 || contamination_rate > 0.3)
        throw std::invalid_argument("split_trusted: contamination_rate must be in [0,0.3]");

    const auto k = static_cast<std::size_t>(std::llround(spec.trusted_ratio * static_cast<double>(ds.size())));
    const auto k_poisoned = static_cast<std::size_t>(std::llround(contamination_rate * static_cast<double>(k)));

    auto clean = ds.indices_without_tag(kTagPoisoned);
    auto poisoned = ds.indices_with_tag(kTagPoisoned);
    if (k - k_poisoned > clean.size())
        throw std::invalid_argument("split_trusted: not enough clean rows for requested ratio");
    if (k_poisoned > poisoned.size())
        throw std::invalid_argument("split_trusted: not enough poisoned rows for requested contamination");

    auto rng = make_rng(spec.seed);
    std::shuffle(clean.begin(), clean.end(), rng);
    std::shuffle(poisoned.begin(), poisoned.end(), rng);

    LabeledDataset out = ds;
    for (auto& t : out.row_tags) t = static_cast<std::uint8_t>(t & ~kTagTrusted);
    for (std::size_t i = 0; i < k - k_poisoned; ++i)
        out.row_tags[static_cast<std::size_t>(clean[i])] |= kTagTrusted;
    for (std::size_t i = 0; i < k_poisoned; ++i)
        out.row_tags[static_cast<std::size_t>(poisoned[i])] |= kTagTrusted;
    return out;
}

}  // namespace depois
