#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "depois/detection.hpp"
#include "depois/rng.hpp"

using namespace depois;

namespace {

// A mimic whose critic is the fixed map D(x|y) = x0 (first feature), which
// makes score distributions fully controllable from the data.
MimicModel passthrough_mimic(Eigen::Index n_features) {
    MlpSpec spec;
    spec.input_dim = n_features + 1;
    spec.widths = {1};
    spec.acts = {Activation::Linear};
    Mlp net = Mlp::init(spec, 0);
    net.layers()[0].w.setZero();
    net.layers()[0].w(0, 0) = 1.0;
    net.layers()[0].b.setZero();

    MimicModel m;
    m.critic = net.to_params(0);
    m.generator = net.to_params(0);
    m.conditioning.mode = Task::Regression;
    m.conditioning.n_classes = 0;
    return m;
}

LabeledDataset dataset_with_scores(const Eigen::VectorXd& scores) {
    LabeledDataset ds;
    ds.features.resize(scores.size(), 1);
    ds.features.col(0) = scores;
    ds.targets = Eigen::VectorXd::Zero(scores.size());
    ds.task = Task::Regression;
    ds.row_tags.assign(static_cast<std::size_t>(scores.size()), kTagNone);
    return ds;
}

}  // namespace

TEST_CASE("boundary formula reproduces the reported arithmetic") {
    const DetectionBoundary b = boundary_from_moments(-0.5726, 0.2109, -1.96);
    CHECK(std::abs(b.y_thr - (-0.9859)) < 1e-4);
    CHECK(b.y_thr == b.z_s * b.sigma + b.mu);  // exact arithmetic identity

    SUBCASE("z_s = 0 collapses to the mean") {
        CHECK(boundary_from_moments(0.42, 1.5, 0.0).y_thr == 0.42);
    }
    SUBCASE("sigma must be positive") { CHECK_THROWS(boundary_from_moments(0.0, 0.0, -1.96)); }
}

TEST_CASE("fit_boundary estimates moments of the score distribution") {
    SUBCASE("standard-normal scores put the boundary near -1.96") {
        auto rng = make_rng(12);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd scores(100000);
        for (Eigen::Index i = 0; i < scores.size(); ++i) scores(i) = gauss(rng);
        const MimicModel mimic = passthrough_mimic(1);
        const DetectionBoundary b = fit_boundary(mimic, dataset_with_scores(scores), -1.96);
        CHECK(std::abs(b.y_thr - (-1.96)) < 0.02);
    }
    SUBCASE("small or degenerate inputs are rejected") {
        const MimicModel mimic = passthrough_mimic(1);
        CHECK_THROWS(fit_boundary(mimic, dataset_with_scores(Eigen::VectorXd::Zero(10)), -1.96));
        CHECK_THROWS(fit_boundary(mimic, dataset_with_scores(Eigen::VectorXd::Zero(50)), -1.96));
    }
    SUBCASE("z standardization of the fit set has mean 0 and sd 1") {
        auto rng = make_rng(13);
        std::normal_distribution<double> gauss(3.0, 2.0);
        Eigen::VectorXd scores(500);
        for (Eigen::Index i = 0; i < scores.size(); ++i) scores(i) = gauss(rng);
        const MimicModel mimic = passthrough_mimic(1);
        const DetectionBoundary b = fit_boundary(mimic, dataset_with_scores(scores), -1.96);
        double zsum = 0.0, zsq = 0.0;
        for (Eigen::Index i = 0; i < scores.size(); ++i) {
            const double z = classify_sample(scores(i), b).z;
            zsum += z;
            zsq += z * z;
        }
        const double zmean = zsum / static_cast<double>(scores.size());
        const double zsd = std::sqrt((zsq - zsum * zmean) / static_cast<double>(scores.size() - 1));
        CHECK(std::abs(zmean) < 1e-9);
        CHECK(std::abs(zsd - 1.0) < 1e-9);
    }
}

TEST_CASE("classify_sample uses a strict boundary") {
    const DetectionBoundary b = boundary_from_moments(0.0, 1.0, -1.96);
    CHECK_FALSE(classify_sample(b.y_thr, b).flagged);
    CHECK(classify_sample(b.y_thr - 1e-9, b).flagged);

    const DetectionVerdict v = classify_sample(-2.0, b);
    CHECK(v.flagged);
    CHECK(v.z == doctest::Approx(-2.0));

    SUBCASE("monotonicity: anything below a flagged score is flagged") {
        const double y1 = b.y_thr - 0.5;
        REQUIRE(classify_sample(y1, b).flagged);
        for (double delta : {0.0, 0.1, 1.0, 10.0}) CHECK(classify_sample(y1 - delta, b).flagged);
    }
}

TEST_CASE("filter_dataset partitions the suspect set") {
    const MimicModel mimic = passthrough_mimic(1);
    auto rng = make_rng(14);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd fit_scores(200);
    for (Eigen::Index i = 0; i < 200; ++i) fit_scores(i) = gauss(rng);
    const DetectionBoundary b = fit_boundary(mimic, dataset_with_scores(fit_scores), -1.0);

    SUBCASE("empty suspect set yields empty partitions") {
        LabeledDataset empty = dataset_with_scores(Eigen::VectorXd(0));
        const FilterResult r = filter_dataset(mimic, b, empty);
        CHECK(r.kept.size() == 0);
        CHECK(r.flagged.size() == 0);
        CHECK(r.verdicts.empty());
    }
    SUBCASE("kept + flagged always equals the suspect count") {
        Eigen::VectorXd scores(60);
        for (Eigen::Index i = 0; i < 60; ++i) scores(i) = gauss(rng);
        const LabeledDataset suspect = dataset_with_scores(scores);
        const FilterResult r = filter_dataset(mimic, b, suspect);
        CHECK(r.kept.size() + r.flagged.size() == 60);
        CHECK(r.verdicts.size() == 60);
        for (Eigen::Index i = 0; i < r.flagged.size(); ++i)
            CHECK(r.flagged.features(i, 0) < b.y_thr);
    }
    SUBCASE("trusted rows in the suspect set are rejected") {
        LabeledDataset suspect = dataset_with_scores(Eigen::VectorXd::Ones(5));
        suspect.row_tags[2] |= kTagTrusted;
        CHECK_THROWS(filter_dataset(mimic, b, suspect));
    }
}

TEST_CASE("boundary JSON round-trips") {
    const DetectionBoundary b = boundary_from_moments(-0.5726, 0.2109, -1.96);
    const auto dir = std::filesystem::path("test_tmp") / "detection";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "boundary.json").string();
    save_boundary(b, path);
    const DetectionBoundary q = load_boundary(path);
    CHECK(q.mu == b.mu);
    CHECK(q.sigma == b.sigma);
    CHECK(q.z_s == b.z_s);
    CHECK(q.y_thr == b.y_thr);
}
