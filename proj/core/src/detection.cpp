#include "depois/detection.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

namespace depois {

DetectionBoundary boundary_from_moments(double mu, double sigma, double z_s) {
    if (!(sigma > 0.0)) throw std::invalid_argument("boundary_from_moments: sigma must be positive");
    DetectionBoundary b;
    b.mu = mu;
    b.sigma = sigma;
    b.z_s = z_s;
    b.y_thr = z_s * sigma + mu;
    return b;
}

DetectionBoundary fit_boundary(const MimicModel& mimic, const LabeledDataset& s_aug, double z_s) {
    if (s_aug.size() < 30)
        throw std::invalid_argument("fit_boundary: need at least 30 samples to fit the boundary");
    const Eigen::VectorXd scores = mimic_predict_batch(mimic, s_aug.features, s_aug.targets);
    const double mu = scores.mean();
    const double var = (scores.array() - mu).matrix().squaredNorm() / static_cast<double>(scores.size() - 1);
    if (!(var > 0.0)) throw std::runtime_error("fit_boundary: zero variance in critic scores");
    return boundary_from_moments(mu, std::sqrt(var), z_s);
}

DetectionVerdict classify_sample(double y_pre, const DetectionBoundary& boundary) {
    DetectionVerdict v;
    v.y_pre = y_pre;
    v.z = (y_pre - boundary.mu) / boundary.sigma;
    v.flagged = y_pre < boundary.y_thr;
    return v;
}

FilterResult filter_dataset(const MimicModel& mimic, const DetectionBoundary& boundary,
                            const LabeledDataset& suspect) {
    for (Eigen::Index i = 0; i < suspect.size(); ++i)
        if (suspect.is_trusted(i))
            throw std::invalid_argument("filter_dataset: suspect set contains trusted rows");

    FilterResult res;
    res.verdicts.reserve(static_cast<std::size_t>(suspect.size()));
    std::vector<Eigen::Index> kept_idx, flagged_idx;
    if (suspect.size() > 0) {
        const Eigen::VectorXd scores = mimic_predict_batch(mimic, suspect.features, suspect.targets);
        for (Eigen::Index i = 0; i < suspect.size(); ++i) {
            const DetectionVerdict v = classify_sample(scores(i), boundary);
            res.verdicts.push_back(v);
            (v.flagged ? flagged_idx : kept_idx).push_back(i);
        }
    }
    res.kept = suspect.select_rows(kept_idx);
    res.flagged = suspect.select_rows(flagged_idx);
    return res;
}

void save_boundary(const DetectionBoundary& boundary, const std::string& path) {
    nlohmann::json j;
    j["mu"] = boundary.mu;
    j["sigma"] = boundary.sigma;
    j["z_s"] = boundary.z_s;
    j["y_thr"] = boundary.y_thr;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_boundary: cannot write " + path);
    out << j.dump(2) << '\n';
}

DetectionBoundary load_boundary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_boundary: cannot open " + path);
    nlohmann::json j;
    in >> j;
    DetectionBoundary b;
    b.mu = j.at("mu").get<double>();
    b.sigma = j.at("sigma").get<double>();
    b.z_s = j.at("z_s").get<double>();
    b.y_thr = j.at("y_thr").get<double>();
    return b;
}

}  // namespace depois
