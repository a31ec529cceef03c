#include "qcutlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "qcutlab/parallel.hpp"
#include "qcutlab/rng.hpp"

namespace qcutlab {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

nlohmann::json schedule_to_json(const TrainSchedule& s) {
    nlohmann::json j;
    j["optimizer"] = s.optimizer == Optimizer::ADAM ? "adam" : "sgd";
    j["batch_size"] = s.batch_size;
    j["seed"] = s.seed;
    j["stages"] = nlohmann::json::array();
    for (const LrStage& st : s.stages) j["stages"].push_back({{"epochs", st.epochs}, {"lr", st.learning_rate}});
    return j;
}

TrainSchedule schedule_from_json(const nlohmann::json& j) {
    TrainSchedule s;
    s.optimizer = j.at("optimizer").get<std::string>() == "sgd" ? Optimizer::SGD : Optimizer::ADAM;
    s.batch_size = j.at("batch_size").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& st : j.at("stages"))
        s.stages.push_back({st.at("epochs").get<int>(), st.at("lr").get<double>()});
    return s;
}

bool schedule_eq(const TrainSchedule& a, const TrainSchedule& b) {
    if (a.optimizer != b.optimizer || a.batch_size != b.batch_size || a.seed != b.seed ||
        a.stages.size() != b.stages.size())
        return false;
    for (std::size_t i = 0; i < a.stages.size(); ++i)
        if (a.stages[i].epochs != b.stages[i].epochs || a.stages[i].learning_rate != b.stages[i].learning_rate)
            return false;
    return true;
}

std::string placement_desc(const std::vector<AttackConfig::Placement>& placements) {
    std::string desc;
    for (const auto& p : placements) {
        if (!desc.empty()) desc += '+';
        desc += "b" + std::to_string(p.boundary) + "x" + std::to_string(p.depth);
    }
    return desc.empty() ? "none" : desc;
}

} // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
    if (!(dataset == other.dataset && data_dir == other.data_dir && classes == other.classes &&
          image_size == other.image_size && layers == other.layers && synth_features == other.synth_features &&
          synth_train == other.synth_train && synth_test == other.synth_test && seed == other.seed &&
          output_dir == other.output_dir && emit_plots == other.emit_plots &&
          parallel_scenarios == other.parallel_scenarios))
        return false;
    if (!schedule_eq(train_schedule, other.train_schedule)) return false;
    if (scenarios.size() != other.scenarios.size()) return false;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const AttackScenario& a = scenarios[i];
        const AttackScenario& b = other.scenarios[i];
        if (a.name != b.name || a.gamma != b.gamma || a.target_qubits != b.target_qubits ||
            a.placements.size() != b.placements.size() || !schedule_eq(a.schedule, b.schedule))
            return false;
        for (std::size_t p = 0; p < a.placements.size(); ++p)
            if (a.placements[p].boundary != b.placements[p].boundary || a.placements[p].depth != b.placements[p].depth)
                return false;
    }
    return true;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["dataset"] = cfg.dataset;
    j["data_dir"] = cfg.data_dir;
    j["classes"] = cfg.classes;
    j["image_size"] = cfg.image_size;
    j["layers"] = cfg.layers;
    j["synth"] = {{"features", cfg.synth_features}, {"train", cfg.synth_train}, {"test", cfg.synth_test}};
    j["train_schedule"] = schedule_to_json(cfg.train_schedule);
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["emit_plots"] = cfg.emit_plots;
    j["parallel_scenarios"] = cfg.parallel_scenarios;
    j["scenarios"] = nlohmann::json::array();
    for (const AttackScenario& sc : cfg.scenarios) {
        nlohmann::json s;
        s["name"] = sc.name;
        s["gamma"] = sc.gamma;
        // Config files number qubits from 1 (topmost wire = 1).
        std::vector<int> one_based;
        for (int q : sc.target_qubits) one_based.push_back(q + 1);
        s["target_qubits"] = one_based;
        s["schedule"] = schedule_to_json(sc.schedule);
        s["placements"] = nlohmann::json::array();
        for (const auto& p : sc.placements) s["placements"].push_back({{"boundary", p.boundary}, {"depth", p.depth}});
        j["scenarios"].push_back(std::move(s));
    }
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    cfg.dataset = j.at("dataset").get<std::string>();
    cfg.data_dir = j.value("data_dir", std::string{});
    cfg.classes = j.at("classes").get<std::vector<int>>();
    cfg.image_size = j.at("image_size").get<int>();
    cfg.layers = j.at("layers").get<int>();
    if (j.contains("synth")) {
        cfg.synth_features = j["synth"].value("features", 64);
        cfg.synth_train = j["synth"].value("train", 200);
        cfg.synth_test = j["synth"].value("test", 100);
    }
    cfg.train_schedule = schedule_from_json(j.at("train_schedule"));
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.output_dir = j.at("output_dir").get<std::string>();
    cfg.emit_plots = j.value("emit_plots", false);
    cfg.parallel_scenarios = j.value("parallel_scenarios", false);
    for (const auto& s : j.value("scenarios", nlohmann::json::array())) {
        AttackScenario sc;
        sc.name = s.at("name").get<std::string>();
        sc.gamma = s.at("gamma").get<double>();
        for (int q : s.value("target_qubits", std::vector<int>{})) {
            if (q < 1) throw std::invalid_argument("config: target_qubits are numbered from 1");
            sc.target_qubits.push_back(q - 1);
        }
        sc.schedule = schedule_from_json(s.at("schedule"));
        for (const auto& p : s.at("placements"))
            sc.placements.push_back({p.at("boundary").get<int>(), p.at("depth").get<int>()});
        cfg.scenarios.push_back(std::move(sc));
    }
    return cfg;
}

std::string attack_curve_csv(const std::vector<AttackEpochMetrics>& curve, double gamma,
                             const std::string& placement_desc_str, std::uint64_t seed) {
    std::string out = "epoch,strength,misclassification_rate,loss,gamma,placement,seed\n";
    for (const AttackEpochMetrics& em : curve) {
        out += std::to_string(em.epoch) + "," + fmt(em.strength) + "," + fmt(em.misclassification_rate) + "," +
               fmt(em.loss) + "," + fmt(gamma) + "," + placement_desc_str + "," + std::to_string(seed) + "\n";
    }
    return out;
}

std::string svg_line_plot(const std::vector<AttackEpochMetrics>& curve, const std::string& title) {
    constexpr int w = 640, h = 420, margin = 56;
    double max_strength = 1e-9;
    for (const AttackEpochMetrics& em : curve) max_strength = std::max(max_strength, em.strength);
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
                      std::to_string(h) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(w / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" + title +
           "</text>\n";
    auto px = [&](double strength) { return margin + (w - 2 * margin) * strength / max_strength; };
    auto py = [&](double rate) { return h - margin - (h - 2 * margin) * rate; };
    svg += "<line x1=\"" + fmt(margin) + "\" y1=\"" + fmt(h - margin) + "\" x2=\"" + fmt(w - margin) + "\" y2=\"" +
           fmt(h - margin) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(margin) + "\" y1=\"" + fmt(margin) + "\" x2=\"" + fmt(margin) + "\" y2=\"" +
           fmt(h - margin) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + std::to_string(w / 2) + "\" y=\"" + std::to_string(h - 16) +
           "\" text-anchor=\"middle\" font-size=\"12\">attack strength</text>\n";
    svg += "<text x=\"16\" y=\"" + std::to_string(h / 2) +
           "\" font-size=\"12\" transform=\"rotate(-90 16 " + std::to_string(h / 2) +
           ")\">misclassification rate</text>\n";
    std::string points;
    for (const AttackEpochMetrics& em : curve)
        points += fmt(px(em.strength)) + "," + fmt(py(em.misclassification_rate)) + " ";
    svg += "<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    for (const AttackEpochMetrics& em : curve)
        svg += "<circle cx=\"" + fmt(px(em.strength)) + "\" cy=\"" + fmt(py(em.misclassification_rate)) +
               "\" r=\"2.5\" fill=\"crimson\"/>\n";
    svg += "</svg>\n";
    return svg;
}

namespace {

LabeledDataset assemble_dataset(const ExperimentConfig& cfg, int& data_qubits) {
    if (cfg.dataset == "SYNTH") {
        int d = 0;
        while ((1 << d) < cfg.synth_features) ++d;
        data_qubits = d;
        return synth_dataset(cfg.synth_features, cfg.synth_train, cfg.synth_test, cfg.seed);
    }
    if (cfg.dataset != "MNIST" && cfg.dataset != "FMNIST")
        throw std::invalid_argument("run_experiment: dataset must be SYNTH, MNIST or FMNIST");
    if (cfg.data_dir.empty()) throw std::invalid_argument("run_experiment: data_dir required for IDX datasets");
    const std::string base = cfg.data_dir + "/";
    auto load_split = [&](const std::string& images, const std::string& labels) {
        std::vector<Sample> raw = ingest_idx(base + images, base + labels);
        raw = filter_classes(raw, cfg.classes);
        const int native = static_cast<int>(std::lround(std::sqrt(double(raw.front().features.size()))));
        for (Sample& s : raw) s.features = downsample(s.features, native, cfg.image_size);
        return raw;
    };
    LabeledDataset data;
    data.train = load_split("train-images-idx3-ubyte", "train-labels-idx1-ubyte");
    data.test = load_split("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte");
    int d = 0;
    while ((1 << d) < cfg.image_size * cfg.image_size) ++d;
    data_qubits = d;
    return data;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const auto wall_start = std::chrono::steady_clock::now();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    int data_qubits = 0;
    const LabeledDataset data = assemble_dataset(cfg, data_qubits);
    const int num_classes = static_cast<int>(cfg.classes.size());

    ClassifierModel model = ClassifierModel::create(data_qubits, num_classes, cfg.layers);
    auto [trained, metrics] = train(model, data, cfg.train_schedule);

    ExperimentResult result;
    result.clean_test_accuracy = data.test.empty() ? 0.0 : accuracy(trained, data.test);
    result.checkpoint_path = cfg.output_dir + "/model.json";
    {
        std::ofstream out(result.checkpoint_path);
        out << model_to_json(trained, cfg.train_schedule);
    }

    result.scenarios.resize(cfg.scenarios.size());
    auto run_scenario = [&](std::size_t i) {
        const AttackScenario& sc = cfg.scenarios[i];
        AttackConfig acfg;
        acfg.placements = sc.placements;
        acfg.target_qubits = sc.target_qubits;
        acfg.gamma = sc.gamma;
        acfg.schedule = sc.schedule;
        acfg.schedule.seed = derive_seed(sc.schedule.seed, i); // isolated stream per scenario
        AttackedModel am = insert_blocks(trained, acfg);
        ScenarioResult sr;
        sr.name = sc.name;
        sr.curve = train_attack(am, data);
        sr.csv_path = cfg.output_dir + "/" + sc.name + ".csv";
        {
            std::ofstream out(sr.csv_path);
            out << attack_curve_csv(sr.curve, sc.gamma, placement_desc(sc.placements), acfg.schedule.seed);
        }
        if (cfg.emit_plots) {
            std::ofstream out(cfg.output_dir + "/" + sc.name + ".svg");
            out << svg_line_plot(sr.curve, sc.name);
        }
        result.scenarios[i] = std::move(sr);
    };
    if (cfg.parallel_scenarios) {
        parallel_for(cfg.scenarios.size(), run_scenario);
    } else {
        for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) run_scenario(i);
    }

    const auto wall_end = std::chrono::steady_clock::now();
    const std::string cfg_json = config_to_json(cfg);
    nlohmann::json manifest;
    manifest["config_hash"] = fnv1a(cfg_json.data(), cfg_json.size());
    manifest["seed"] = cfg.seed;
    manifest["dataset_checksum"] = dataset_checksum(data);
    manifest["downsample_method"] = "bilinear, pixel-center aligned";
    manifest["image_size"] = cfg.image_size;
    manifest["clean_test_accuracy"] = result.clean_test_accuracy;
    manifest["clean_final_train_loss"] = metrics.empty() ? 0.0 : metrics.back().train_loss;
    manifest["wall_seconds"] = std::chrono::duration<double>(wall_end - wall_start).count();
    manifest["scenarios"] = nlohmann::json::array();
    for (const ScenarioResult& sr : result.scenarios) manifest["scenarios"].push_back(sr.name);
    result.manifest_path = cfg.output_dir + "/manifest.json";
    {
        std::ofstream out(result.manifest_path);
        out << manifest.dump(2);
    }
    return result;
}

} // namespace qcutlab
