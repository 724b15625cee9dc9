#include "depois/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "depois/linear_models.hpp"
#include "depois/plot.hpp"
#include "depois/rng.hpp"
#include "depois/synthetic.hpp"

namespace depois {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

nlohmann::json augment_to_json(const AugmentTrainConfig& c) {
    return {{"batch_size", c.batch_size},
            {"mc_samples", c.mc_samples},
            {"max_iters", c.max_iters},
            {"param_delta_tol", c.param_delta_tol},
            {"step_size", c.step_size},
            {"hidden", c.hidden},
            {"auth_hidden", c.auth_hidden},
            {"auth_l1", c.auth_l1},
            {"dropout_rate", c.dropout_rate},
            {"regression_noise_std", c.regression_noise_std},
            {"noise_dim", c.noise.dim}};
}

AugmentTrainConfig augment_from_json(const nlohmann::json& j) {
    AugmentTrainConfig c;
    c.batch_size = j.value("batch_size", c.batch_size);
    c.mc_samples = j.value("mc_samples", c.mc_samples);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.param_delta_tol = j.value("param_delta_tol", c.param_delta_tol);
    c.step_size = j.value("step_size", c.step_size);
    c.hidden = j.value("hidden", c.hidden);
    c.auth_hidden = j.value("auth_hidden", c.auth_hidden);
    c.auth_l1 = j.value("auth_l1", c.auth_l1);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    c.regression_noise_std = j.value("regression_noise_std", c.regression_noise_std);
    c.noise.dim = j.value("noise_dim", c.noise.dim);
    return c;
}

nlohmann::json mimic_to_json(const MimicTrainConfig& c) {
    return {{"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"critic_iters", c.critic_iters},
            {"gp_weight", c.gp_weight},
            {"epochs", c.epochs},
            {"hidden", c.hidden},
            {"gen_hidden", c.gen_hidden},
            {"regression_noise_std", c.regression_noise_std},
            {"dropout_rate", c.dropout_rate},
            {"noise_dim", c.noise.dim}};
}

MimicTrainConfig mimic_from_json(const nlohmann::json& j) {
    MimicTrainConfig c;
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.critic_iters = j.value("critic_iters", c.critic_iters);
    c.gp_weight = j.value("gp_weight", c.gp_weight);
    c.epochs = j.value("epochs", c.epochs);
    c.hidden = j.value("hidden", c.hidden);
    c.gen_hidden = j.value("gen_hidden", c.gen_hidden);
    c.regression_noise_std = j.value("regression_noise_std", c.regression_noise_std);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    c.noise.dim = j.value("noise_dim", c.noise.dim);
    return c;
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["dataset"] = {{"kind", dataset.kind},          {"n", dataset.n},
                    {"layout", dataset.layout},      {"noise", dataset.noise},
                    {"n_features", dataset.n_features}, {"noise_std", dataset.noise_std},
                    {"path", dataset.path}};
    j["dataset"]["schema"] = {{"target", dataset.schema.target},
                              {"task", dataset.schema.task == Task::Classification ? "classification"
                                                                                   : "regression"},
                              {"categorical", dataset.schema.categorical}};
    j["attack"] = {{"name", attack.name},
                   {"rate", attack.rate},
                   {"poison_file", attack.poison_file},
                   {"target_class", attack.target_class},
                   {"base_class", attack.base_class},
                   {"beta", attack.beta}};
    j["trusted_ratio"] = trusted_ratio;
    j["trusted_contamination"] = trusted_contamination;
    j["augment"] = augment_to_json(augment);
    j["mimic"] = mimic_to_json(mimic);
    j["detection"] = {{"z_s", detection.z_s}};
    j["seeds"] = seeds;
    j["output_dir"] = output_dir;
    j["composition"] = composition;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        c.dataset.kind = d.value("kind", c.dataset.kind);
        c.dataset.n = d.value("n", c.dataset.n);
        c.dataset.layout = d.value("layout", c.dataset.layout);
        c.dataset.noise = d.value("noise", c.dataset.noise);
        c.dataset.n_features = d.value("n_features", c.dataset.n_features);
        c.dataset.noise_std = d.value("noise_std", c.dataset.noise_std);
        c.dataset.path = d.value("path", c.dataset.path);
        if (d.contains("schema")) {
            const auto& s = d["schema"];
            c.dataset.schema.target = s.value("target", std::string{});
            c.dataset.schema.task =
                s.value("task", std::string("classification")) == "regression" ? Task::Regression
                                                                               : Task::Classification;
            c.dataset.schema.categorical = s.value("categorical", std::vector<std::string>{});
        }
    }
    if (j.contains("attack")) {
        const auto& a = j["attack"];
        c.attack.name = a.value("name", c.attack.name);
        c.attack.rate = a.value("rate", c.attack.rate);
        c.attack.poison_file = a.value("poison_file", c.attack.poison_file);
        c.attack.target_class = a.value("target_class", c.attack.target_class);
        c.attack.base_class = a.value("base_class", c.attack.base_class);
        c.attack.beta = a.value("beta", c.attack.beta);
    }
    c.trusted_ratio = j.value("trusted_ratio", c.trusted_ratio);
    c.trusted_contamination = j.value("trusted_contamination", c.trusted_contamination);
    if (j.contains("augment")) c.augment = augment_from_json(j["augment"]);
    if (j.contains("mimic")) c.mimic = mimic_from_json(j["mimic"]);
    if (j.contains("detection")) c.detection.z_s = j["detection"].value("z_s", c.detection.z_s);
    c.seeds = j.value("seeds", c.seeds);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.composition = j.value("composition", c.composition);
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ExperimentConfig::load: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

void ExperimentConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("ExperimentConfig::save: cannot write " + path);
    out << to_json().dump(2) << '\n';
}

namespace {

bool valid_composition(const std::string& c) {
    return c == "cgan+gan" || c == "cgan+cwgangp" || c == "cgan_auth+gan" || c == kCompositionFull;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (dataset.kind != "synthetic-2d" && dataset.kind != "synthetic-regression" && dataset.kind != "csv")
        throw std::invalid_argument("config: dataset.kind must be synthetic-2d|synthetic-regression|csv");
    if (dataset.kind == "csv") {
        if (dataset.path.empty() || dataset.schema.target.empty())
            throw std::invalid_argument("config: csv dataset requires path and schema.target");
        if (!fs::exists(dataset.path))
            throw std::invalid_argument("config: dataset file does not exist: " + dataset.path);
    } else if (dataset.n < 10) {
        throw std::invalid_argument("config: dataset.n must be >= 10");
    }
    if (dataset.kind == "synthetic-2d" && dataset.layout != "ring-vs-core" && dataset.layout != "two-moons")
        throw std::invalid_argument("config: dataset.layout must be ring-vs-core|two-moons");

    const bool known_attack = attack.name == "label-flip" || attack.name == "regression-stat" ||
                              attack.name == "feature-collision" || attack.name == "external" ||
                              attack.name == "none";
    if (!known_attack) throw std::invalid_argument("config: unknown attack.name '" + attack.name + "'");
    if (attack.rate != 0.0 && (!(attack.rate > 0.0) || attack.rate > 0.3))
        throw std::invalid_argument("config: attack.rate must be 0 or in (0, 0.3]");
    if (attack.name == "external") {
        if (attack.poison_file.empty())
            throw std::invalid_argument("config: external attack requires poison_file");
        if (!fs::exists(attack.poison_file))
            throw std::invalid_argument("config: poison file does not exist: " + attack.poison_file);
    }

    if (!(trusted_ratio > 0.0) || trusted_ratio > 1.0)
        throw std::invalid_argument("config: trusted_ratio must be in (0, 1]");
    if (trusted_contamination < 0.0 || trusted_contamination > 0.3)
        throw std::invalid_argument("config: trusted_contamination must be in [0, 0.3]");
    if (augment.batch_size <= 0 || augment.mc_samples <= 0 || augment.max_iters < 0 ||
        !(augment.param_delta_tol > 0.0) || !(augment.step_size > 0.0))
        throw std::invalid_argument("config: augment fields must be positive");
    if (mimic.batch_size <= 0 || !(mimic.learning_rate > 0.0) || mimic.critic_iters < 1 ||
        !(mimic.gp_weight > 0.0) || mimic.epochs < 0)
        throw std::invalid_argument("config: mimic fields must be positive (critic_iters >= 1)");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    if (!valid_composition(composition))
        throw std::invalid_argument("config: unknown composition '" + composition + "'");
}

namespace {

LabeledDataset build_clean_dataset(const DatasetSpec& spec, std::uint64_t seed) {
    if (spec.kind == "synthetic-2d") {
        const Layout2d layout =
            spec.layout == "two-moons" ? Layout2d::TwoMoonsLike : Layout2d::RingVsCore;
        return make_synthetic_2d(spec.n, layout, spec.noise, seed);
    }
    if (spec.kind == "synthetic-regression")
        return make_synthetic_regression(spec.n, spec.n_features, spec.noise_std, seed);
    LabeledDataset ds = load_dataset(spec.path, spec.schema);
    if (!spec.schema.categorical.empty()) ds = one_hot_encode(ds, spec.schema.categorical);
    auto [scaled, rec] = normalize_features(ds);
    if (scaled.task == Task::Regression) {
        auto [full, rec2] = normalize_targets(scaled, rec);
        return full;
    }
    return scaled;
}

AttackResult apply_attack(const LabeledDataset& clean, const AttackSpec& spec, std::uint64_t seed) {
    if (spec.name == "none" || spec.rate == 0.0) {
        AttackResult res;
        res.dataset = clean;
        res.poison_mask.assign(static_cast<std::size_t>(clean.size()), 0);
        res.attack_name = "none";
        res.realized_rate = 0.0;
        return res;
    }
    const PoisonBudget budget(spec.rate, seed);
    if (spec.name == "label-flip") return label_flip_attack(clean, make_logistic_victim(clean), budget);
    if (spec.name == "regression-stat") return regression_attack_statistical(clean, budget);
    if (spec.name == "feature-collision") {
        Eigen::Index target_row = -1;
        for (Eigen::Index i = 0; i < clean.size(); ++i)
            if (clean.label(i) == spec.target_class) {
                target_row = i;
                break;
            }
        if (target_row < 0) throw std::runtime_error("apply_attack: no sample of the target class");
        const LinearExtractor extractor(
            Eigen::MatrixXd::Identity(clean.n_features(), clean.n_features()));
        CollisionOptions opt;
        opt.beta = spec.beta;
        return feature_collision_attack(clean, clean.features.row(target_row).transpose(),
                                        spec.target_class, spec.base_class, extractor, budget, opt);
    }
    if (spec.name == "external") return load_external_poison(clean, spec.poison_file);
    throw std::invalid_argument("apply_attack: unknown attack '" + spec.name + "'");
}

GenQualityReport compute_gen_quality(const LabeledDataset& clean, const LabeledDataset& trusted,
                                     const LabeledDataset& synthetic, std::uint64_t seed) {
    GenQualityReport q;
    if (synthetic.size() < 2 || clean.size() < 2) return q;
    q.fid = proxy_fid(clean.features, synthetic.features);
    q.wd = multidim_wd(clean.features, synthetic.features, 64, seed);
    q.aed = aed(clean.features, synthetic.features);

    // Proxy inception score: a small classifier trained on trusted data stands
    // in for the Inception network. Regression targets are quantile-binned.
    try {
        Eigen::VectorXd labels;
        int n_classes = 0;
        if (trusted.task == Task::Classification) {
            labels = trusted.targets;
            n_classes = trusted.n_classes;
        } else {
            const int bins = 4;
            std::vector<double> sorted(trusted.targets.data(),
                                       trusted.targets.data() + trusted.targets.size());
            std::sort(sorted.begin(), sorted.end());
            Eigen::VectorXd cuts(bins - 1);
            for (int b = 1; b < bins; ++b)
                cuts(b - 1) = sorted[static_cast<std::size_t>(sorted.size() * b / bins)];
            labels.resize(trusted.size());
            for (Eigen::Index i = 0; i < trusted.size(); ++i) {
                int c = 0;
                while (c < bins - 1 && trusted.targets(i) >= cuts(c)) ++c;
                labels(i) = c;
            }
            n_classes = bins;
        }
        if (trusted.size() >= 2 * n_classes) {
            const LogisticClassifier clf =
                LogisticClassifier::fit(trusted.features, labels, n_classes);
            q.is_score = proxy_inception_score(clf.predict_proba(synthetic.features));
        }
    } catch (const std::exception&) {
        q.is_score = 1.0;  // degenerate trusted set: report the neutral score
    }
    return q;
}

struct PipelineArtifacts {
    LabeledDataset s_o;  // post attack, trusted rows tagged
    LabeledDataset trusted;
    LabeledDataset s_aug;
    AugmenterModel augmenter;
    MimicModel mimic;
    DetectionBoundary boundary;
    LabeledDataset suspect;
    std::vector<std::uint8_t> suspect_truth;
    FilterResult filtered;
};

SeedResult run_single_seed(const ExperimentConfig& config, std::uint64_t seed, PipelineArtifacts* keep) {
    SeedResult result;
    result.seed = seed;

    const bool use_auth = config.composition.rfind("cgan_auth", 0) == 0;
    const MimicKind mimic_kind = config.composition.ends_with("cwgangp") ? MimicKind::ConditionalWganGp
                                                                         : MimicKind::PlainCgan;

    const LabeledDataset clean = build_clean_dataset(config.dataset, derive_seed(seed, "dataset"));
    const AttackResult attacked = apply_attack(clean, config.attack, derive_seed(seed, "attack"));

    LabeledDataset s_o = attacked.dataset;
    s_o = split_trusted(s_o, SplitSpec{config.trusted_ratio, derive_seed(seed, "split")},
                        config.trusted_contamination);
    const LabeledDataset trusted = s_o.select_rows(s_o.indices_with_tag(kTagTrusted));

    // Augment.
    auto t0 = std::chrono::steady_clock::now();
    AugmentTrainConfig aug_cfg = config.augment;
    aug_cfg.seed = derive_seed(seed, "augment");
    aug_cfg.use_authenticator = use_auth;
    const AugmenterModel augmenter = train_augmenter(trusted, aug_cfg);
    const ConditionSampler sampler = ConditionSampler::empirical(trusted);
    const Eigen::Index target_size = s_o.size();
    const LabeledDataset synthetic =
        generate_synthetic(augmenter, target_size, sampler, derive_seed(seed, "generate"));
    std::uint64_t topup_calls = 0;
    const LabeledDataset s_aug = assemble_augmented(
        trusted, synthetic, target_size, derive_seed(seed, "assemble"),
        [&](Eigen::Index n) {
            return generate_synthetic(augmenter, n, sampler, derive_seed(seed, "generate-extra", ++topup_calls));
        });
    result.timings.augment_seconds = elapsed_seconds(t0);

    // Mimic.
    t0 = std::chrono::steady_clock::now();
    MimicTrainConfig mim_cfg = config.mimic;
    mim_cfg.seed = derive_seed(seed, "mimic");
    mim_cfg.kind = mimic_kind;
    const MimicModel mimic = train_mimic(s_aug, mim_cfg);
    result.timings.mimic_seconds = elapsed_seconds(t0);

    // Detect and evaluate on S_o minus the trusted rows.
    t0 = std::chrono::steady_clock::now();
    result.boundary = fit_boundary(mimic, s_aug, config.detection.z_s);
    const auto suspect_idx = s_o.indices_without_tag(kTagTrusted);
    const LabeledDataset suspect = s_o.select_rows(suspect_idx);
    const FilterResult filtered = filter_dataset(mimic, result.boundary, suspect);
    result.timings.detect_seconds = elapsed_seconds(t0);

    std::vector<std::uint8_t> flags, truth;
    flags.reserve(filtered.verdicts.size());
    truth.reserve(filtered.verdicts.size());
    for (std::size_t i = 0; i < filtered.verdicts.size(); ++i) {
        flags.push_back(filtered.verdicts[i].flagged ? 1 : 0);
        truth.push_back(suspect.is_poisoned(static_cast<Eigen::Index>(i)) ? 1 : 0);
    }
    result.confusion = confusion_metrics(flags, truth);

    const LabeledDataset clean_rows = s_o.select_rows(s_o.indices_without_tag(kTagPoisoned));
    const LabeledDataset synth_rows = [&] {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = trusted.size(); i < s_aug.size(); ++i) idx.push_back(i);
        return s_aug.select_rows(idx);
    }();
    result.gen_quality = compute_gen_quality(clean_rows, trusted, synth_rows, derive_seed(seed, "genq"));

    if (keep) {
        keep->s_o = s_o;
        keep->trusted = trusted;
        keep->s_aug = s_aug;
        keep->augmenter = augmenter;
        keep->mimic = mimic;
        keep->boundary = result.boundary;
        keep->suspect = suspect;
        keep->suspect_truth = truth;
        keep->filtered = filtered;
    }
    return result;
}

AggregateStats aggregate(const std::vector<double>& v) {
    AggregateStats s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double acc = 0.0;
        for (double x : v) acc += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(acc / static_cast<double>(v.size() - 1));
    }
    return s;
}

nlohmann::json confusion_to_json(const ConfusionReport& c) {
    return {{"tp", c.tp},           {"fp", c.fp},
            {"tn", c.tn},           {"fn", c.fn},
            {"accuracy", c.accuracy}, {"precision", c.precision},
            {"recall", c.recall},   {"f1", c.f1}};
}

void write_seed_artifacts(const ExperimentConfig& config, const PipelineArtifacts& arts,
                          std::uint64_t seed) {
    const fs::path dir = fs::path(config.output_dir) / ("seed-" + std::to_string(seed));
    fs::create_directories(dir);

    save_dataset(arts.s_aug, (dir / "s_aug.csv").string(), {});
    save_dataset(arts.s_o, (dir / "s_o.csv").string(), {true, true});
    save_model(arts.augmenter.generator, (dir / "augmenter_generator.bin").string());
    save_model(arts.augmenter.discriminator, (dir / "augmenter_discriminator.bin").string());
    save_model(arts.augmenter.authenticator, (dir / "augmenter_authenticator.bin").string());
    save_model(arts.mimic.critic, (dir / "mimic_critic.bin").string());
    save_model(arts.mimic.generator, (dir / "mimic_generator.bin").string());
    save_boundary(arts.boundary, (dir / "boundary.json").string());

    {
        std::ofstream out(dir / "verdicts.csv");
        out << "row_id,y_pre,z,flagged\n";
        for (std::size_t i = 0; i < arts.filtered.verdicts.size(); ++i) {
            const auto& v = arts.filtered.verdicts[i];
            out << i << ',' << format_double(v.y_pre) << ',' << format_double(v.z) << ','
                << (v.flagged ? 1 : 0) << '\n';
        }
    }
    {
        std::ofstream out(dir / "poison_mask.csv");
        out << "row_id,poisoned\n";
        for (std::size_t i = 0; i < arts.suspect_truth.size(); ++i)
            out << i << ',' << static_cast<int>(arts.suspect_truth[i]) << '\n';
    }
    {
        std::ofstream out(dir / "augment_log.csv");
        out << "iter,d_objective,g_objective,auth_loss,param_delta\n";
        for (const auto& l : arts.augmenter.training_log)
            out << l.iter << ',' << format_double(l.d_objective) << ',' << format_double(l.g_objective)
                << ',' << format_double(l.auth_loss) << ',' << format_double(l.param_delta) << '\n';
    }
    {
        std::ofstream out(dir / "mimic_log.csv");
        out << "epoch,step,wasserstein_estimate,critic_objective,generator_objective\n";
        for (const auto& l : arts.mimic.training_log)
            out << l.epoch << ',' << l.step << ',' << format_double(l.wasserstein_estimate) << ','
                << format_double(l.critic_objective) << ',' << format_double(l.generator_objective)
                << '\n';
    }
}

}  // namespace

nlohmann::json ExperimentReport::results_json() const {
    nlohmann::json j;
    j["composition"] = config.composition;
    j["failed"] = failed;
    if (failed) j["failure"] = failure;
    j["per_seed"] = nlohmann::json::array();
    for (const auto& s : per_seed) {
        nlohmann::json e;
        e["seed"] = s.seed;
        e["boundary"] = {{"mu", s.boundary.mu},
                         {"sigma", s.boundary.sigma},
                         {"z_s", s.boundary.z_s},
                         {"y_thr", s.boundary.y_thr}};
        e["confusion"] = confusion_to_json(s.confusion);
        e["gen_quality"] = {{"is_score", s.gen_quality.is_score},
                            {"fid", s.gen_quality.fid},
                            {"wd", s.gen_quality.wd},
                            {"aed", s.gen_quality.aed}};
        j["per_seed"].push_back(e);
    }
    j["accuracy"] = {{"mean", accuracy.mean}, {"stddev", accuracy.stddev}};
    j["precision"] = {{"mean", precision.mean}, {"stddev", precision.stddev}};
    j["recall"] = {{"mean", recall.mean}, {"stddev", recall.stddev}};
    j["f1"] = {{"mean", f1.mean}, {"stddev", f1.stddev}};
    return j;
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json j = results_json();
    j["config"] = config.to_json();
    j["content_hash"] = content_hash;
    nlohmann::json t = nlohmann::json::array();
    for (const auto& s : per_seed)
        t.push_back({{"seed", s.seed},
                     {"augment_seconds", s.timings.augment_seconds},
                     {"mimic_seconds", s.timings.mimic_seconds},
                     {"detect_seconds", s.timings.detect_seconds}});
    j["timings"] = t;
    j["mean_timings"] = {{"augment_seconds", mean_timings.augment_seconds},
                         {"mimic_seconds", mean_timings.mimic_seconds},
                         {"detect_seconds", mean_timings.detect_seconds}};
    return j;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report;
    report.config = config;

    std::vector<double> acc, prec, rec, f1v;
    for (std::uint64_t seed : config.seeds) {
        try {
            PipelineArtifacts arts;
            const bool persist = !config.output_dir.empty();
            SeedResult r = run_single_seed(config, seed, persist ? &arts : nullptr);
            if (persist) write_seed_artifacts(config, arts, seed);
            acc.push_back(r.confusion.accuracy);
            prec.push_back(r.confusion.precision);
            rec.push_back(r.confusion.recall);
            f1v.push_back(r.confusion.f1);
            report.mean_timings.augment_seconds += r.timings.augment_seconds;
            report.mean_timings.mimic_seconds += r.timings.mimic_seconds;
            report.mean_timings.detect_seconds += r.timings.detect_seconds;
            report.per_seed.push_back(std::move(r));
        } catch (const std::exception& e) {
            report.failed = true;
            report.failure = "seed " + std::to_string(seed) + ": " + e.what();
            break;
        }
    }
    if (!report.per_seed.empty()) {
        const double n = static_cast<double>(report.per_seed.size());
        report.mean_timings.augment_seconds /= n;
        report.mean_timings.mimic_seconds /= n;
        report.mean_timings.detect_seconds /= n;
    }
    report.accuracy = aggregate(acc);
    report.precision = aggregate(prec);
    report.recall = aggregate(rec);
    report.f1 = aggregate(f1v);

    char hash_hex[17];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a(report.results_json().dump())));
    report.content_hash = hash_hex;

    if (!config.output_dir.empty()) write_report_files(report, config.output_dir);
    return report;
}

void write_report_files(const ExperimentReport& report, const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "results.json");
        nlohmann::json j = report.results_json();
        j["content_hash"] = report.content_hash;
        out << j.dump(2) << '\n';
    }
    {
        std::ofstream out(fs::path(dir) / "report.json");
        out << report.to_json().dump(2) << '\n';
    }
}

namespace {

std::vector<ExperimentReport> run_points(const std::vector<ExperimentConfig>& points, int workers) {
    std::vector<ExperimentReport> reports(points.size());
    if (workers <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = static_cast<int>(std::max(1u, hw));
    }
    workers = std::min<int>(workers, static_cast<int>(points.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            reports[i] = run_experiment(points[i]);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return reports;
}

void write_sweep_outputs(const ExperimentConfig& base, const std::string& param,
                         const std::vector<double>& values,
                         const std::vector<ExperimentReport>& reports) {
    if (base.output_dir.empty()) return;
    fs::create_directories(base.output_dir);
    const fs::path curve_path = fs::path(base.output_dir) / ("sweep_" + param + "_curve.csv");
    std::ofstream out(curve_path);
    out << param << ",accuracy,precision,recall,f1\n";
    PlotSeries acc{"accuracy", {}, {}}, prec{"precision", {}, {}}, rec{"recall", {}, {}}, f1{"f1", {}, {}};
    for (std::size_t i = 0; i < reports.size(); ++i) {
        out << format_double(values[i]) << ',' << format_double(reports[i].accuracy.mean) << ','
            << format_double(reports[i].precision.mean) << ',' << format_double(reports[i].recall.mean)
            << ',' << format_double(reports[i].f1.mean) << '\n';
        acc.x.push_back(values[i]);
        acc.y.push_back(reports[i].accuracy.mean);
        prec.x.push_back(values[i]);
        prec.y.push_back(reports[i].precision.mean);
        rec.x.push_back(values[i]);
        rec.y.push_back(reports[i].recall.mean);
        f1.x.push_back(values[i]);
        f1.y.push_back(reports[i].f1.mean);
    }
    write_svg_line_chart((fs::path(base.output_dir) / ("sweep_" + param + ".svg")).string(),
                         "metric vs " + param, param, "metric", {acc, prec, rec, f1});
}

}  // namespace

std::vector<ExperimentReport> sweep_poisoning_rate(const ExperimentConfig& base,
                                                   const std::vector<double>& rates, int workers) {
    std::vector<ExperimentConfig> points;
    for (double r : rates) {
        if (!(r > 0.0) || r > 0.3)
            throw std::invalid_argument("sweep_poisoning_rate: rates must lie in (0, 0.3]");
        ExperimentConfig c = base;
        c.attack.rate = r;
        if (!base.output_dir.empty())
            c.output_dir = (fs::path(base.output_dir) / ("rate-" + format_double(r))).string();
        points.push_back(std::move(c));
    }
    auto reports = run_points(points, workers);
    write_sweep_outputs(base, "rate", rates, reports);
    return reports;
}

std::vector<ExperimentReport> sweep_trusted_ratio(const ExperimentConfig& base,
                                                  const std::vector<double>& ratios, int workers) {
    std::vector<ExperimentConfig> points;
    for (double r : ratios) {
        if (!(r > 0.0) || r >= 1.0)
            throw std::invalid_argument("sweep_trusted_ratio: ratios must lie in (0, 1)");
        ExperimentConfig c = base;
        c.trusted_ratio = r;
        if (!base.output_dir.empty())
            c.output_dir = (fs::path(base.output_dir) / ("trusted-" + format_double(r))).string();
        points.push_back(std::move(c));
    }
    auto reports = run_points(points, workers);
    write_sweep_outputs(base, "trusted_ratio", ratios, reports);
    return reports;
}

ExperimentConfig contaminate_trusted(const ExperimentConfig& config, double contamination_rate) {
    if (contamination_rate < 0.0 || contamination_rate > 0.3)
        throw std::invalid_argument("contaminate_trusted: rate must be in [0, 0.3]");
    ExperimentConfig out = config;
    out.trusted_contamination = contamination_rate;
    return out;
}

ExperimentReport ablation(const ExperimentConfig& config, const std::string& composition) {
    if (!valid_composition(composition))
        throw std::invalid_argument("ablation: unknown composition '" + composition + "'");
    ExperimentConfig c = config;
    c.composition = composition;
    if (!config.output_dir.empty()) {
        std::string dir_name = "ablation-" + composition;
        std::replace(dir_name.begin(), dir_name.end(), '+', '_');
        c.output_dir = (fs::path(config.output_dir) / dir_name).string();
    }
    return run_experiment(c);
}

AugQualityResult augmentation_quality_experiment(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    PipelineArtifacts arts;
    run_single_seed(config, seed, &arts);

    AugQualityResult result;
    std::vector<std::uint8_t> flags;
    for (const auto& v : arts.filtered.verdicts) flags.push_back(v.flagged ? 1 : 0);
    result.augmented = confusion_metrics(flags, arts.suspect_truth);

    // Baseline: the same mimic + detection stages trained on an equal-size
    // all-clean set drawn from the same source distribution.
    LabeledDataset baseline;
    if (config.dataset.kind == "csv") {
        auto rng = make_rng(derive_seed(seed, "baseline-data"));
        const LabeledDataset clean_rows = arts.s_o.select_rows(arts.s_o.indices_without_tag(kTagPoisoned));
        std::uniform_int_distribution<Eigen::Index> pick(0, clean_rows.size() - 1);
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(arts.s_aug.size()));
        for (auto& v : idx) v = pick(rng);
        baseline = clean_rows.select_rows(idx);
    } else {
        DatasetSpec spec = config.dataset;
        spec.n = arts.s_aug.size();
        baseline = build_clean_dataset(spec, derive_seed(seed, "baseline-data"));
    }

    MimicTrainConfig mim_cfg = config.mimic;
    mim_cfg.seed = derive_seed(seed, "baseline-mimic");
    const MimicModel baseline_mimic = train_mimic(baseline, mim_cfg);
    const DetectionBoundary baseline_boundary =
        fit_boundary(baseline_mimic, baseline, config.detection.z_s);
    const FilterResult baseline_filtered =
        filter_dataset(baseline_mimic, baseline_boundary, arts.suspect);

    flags.clear();
    for (const auto& v : baseline_filtered.verdicts) flags.push_back(v.flagged ? 1 : 0);
    result.baseline = confusion_metrics(flags, arts.suspect_truth);
    return result;
}

}  // namespace depois
