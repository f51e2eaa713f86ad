#include "byzsgd/config.hpp"

#include <fstream>
#include <sstream>

namespace byzsgd {

using nlohmann::json;

namespace {

// typed field access with error messages that name the field

template <typename T>
T get_field(const json& j, const std::string& field, T fallback) {
    if (!j.contains(field)) return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: field \"" + field + "\" has the wrong type");
    }
}

std::string get_kind(const json& j, const std::string& section) {
    if (!j.contains("kind"))
        throw ConfigError("config: section \"" + section + "\" is missing field \"kind\"");
    try {
        return j.at("kind").get<std::string>();
    } catch (const json::exception&) {
        throw ConfigError("config: field \"" + section + ".kind\" must be a string");
    }
}

}  // namespace

json aggregator_to_json(const AggregatorSpec& spec) {
    return json{{"kind", to_string(spec.kind)},
                {"q", spec.q},
                {"geomed_tolerance", spec.geomed_tolerance},
                {"geomed_max_iters", spec.geomed_max_iters},
                {"multikrum_m", spec.multikrum_m}};
}

AggregatorSpec aggregator_from_json(const json& j) {
    AggregatorSpec spec;
    try {
        spec.kind = aggregator_kind_from_string(get_kind(j, "aggregator"));
    } catch (const ParameterError& err) {
        throw ConfigError(std::string("config: field \"aggregator.kind\": ") + err.what());
    }
    spec.q = get_field(j, "q", spec.q);
    spec.geomed_tolerance = get_field(j, "geomed_tolerance", spec.geomed_tolerance);
    spec.geomed_max_iters = get_field(j, "geomed_max_iters", spec.geomed_max_iters);
    spec.multikrum_m = get_field(j, "multikrum_m", spec.multikrum_m);
    if (spec.q < 0) throw ConfigError("config: field \"aggregator.q\" must be nonnegative");
    return spec;
}

json attack_to_json(const AttackSpec& spec) {
    return json{{"kind", to_string(spec.kind)},
                {"selection",
                 spec.selection == ByzantineSelection::FixedSet ? "fixed" : "resampled"},
                {"q", spec.q},
                {"sigma", spec.sigma},
                {"scale", spec.scale},
                {"num_dims", spec.num_dims},
                {"bit_positions", spec.bit_positions},
                {"bitflip_same_worker", spec.bitflip_same_worker},
                {"num_servers", spec.num_servers},
                {"target_server", spec.target_server},
                {"prob", spec.prob},
                {"factor", spec.factor}};
}

AttackSpec attack_from_json(const json& j) {
    AttackSpec spec;
    try {
        spec.kind = attack_kind_from_string(get_kind(j, "attack"));
    } catch (const ParameterError& err) {
        throw ConfigError(std::string("config: field \"attack.kind\": ") + err.what());
    }
    const std::string sel = get_field<std::string>(j, "selection", "fixed");
    if (sel == "fixed") {
        spec.selection = ByzantineSelection::FixedSet;
    } else if (sel == "resampled") {
        spec.selection = ByzantineSelection::ResampledPerRound;
    } else {
        throw ConfigError("config: field \"attack.selection\" must be \"fixed\" or \"resampled\"");
    }
    spec.q = get_field(j, "q", spec.q);
    spec.sigma = get_field(j, "sigma", spec.sigma);
    spec.scale = get_field(j, "scale", spec.scale);
    spec.num_dims = get_field(j, "num_dims", spec.num_dims);
    spec.bit_positions = get_field(j, "bit_positions", spec.bit_positions);
    spec.bitflip_same_worker = get_field(j, "bitflip_same_worker", spec.bitflip_same_worker);
    spec.num_servers = get_field(j, "num_servers", spec.num_servers);
    spec.target_server = get_field(j, "target_server", spec.target_server);
    spec.prob = get_field(j, "prob", spec.prob);
    spec.factor = get_field(j, "factor", spec.factor);
    return spec;
}

json problem_to_json(const ProblemConfig& p) {
    json j{{"d", p.d}, {"data_seed", p.data_seed}, {"l2", p.l2}};
    switch (p.kind) {
        case ProblemKind::Quadratic:
            j["kind"] = "quadratic";
            j["noise_sigma"] = p.noise_sigma;
            break;
        case ProblemKind::Logistic:
            j["kind"] = "logistic";
            j["n_samples"] = p.n_samples;
            j["planted_norm"] = p.planted_norm;
            break;
        case ProblemKind::MnistSubset:
            j["kind"] = "mnist";
            j["images_path"] = p.images_path;
            j["labels_path"] = p.labels_path;
            j["max_per_class"] = p.max_per_class;
            break;
    }
    return j;
}

ProblemConfig problem_from_json(const json& j) {
    ProblemConfig p;
    const std::string kind = get_kind(j, "problem");
    if (kind == "quadratic") {
        p.kind = ProblemKind::Quadratic;
    } else if (kind == "logistic") {
        p.kind = ProblemKind::Logistic;
    } else if (kind == "mnist") {
        p.kind = ProblemKind::MnistSubset;
    } else {
        throw ConfigError("config: field \"problem.kind\" must be one of quadratic, logistic, "
                          "mnist (got \"" + kind + "\")");
    }
    p.d = get_field(j, "d", p.d);
    p.data_seed = get_field(j, "data_seed", p.data_seed);
    p.l2 = get_field(j, "l2", p.l2);
    p.noise_sigma = get_field(j, "noise_sigma", p.noise_sigma);
    p.n_samples = get_field(j, "n_samples", p.n_samples);
    p.planted_norm = get_field(j, "planted_norm", p.planted_norm);
    p.images_path = get_field(j, "images_path", p.images_path);
    p.labels_path = get_field(j, "labels_path", p.labels_path);
    p.max_per_class = get_field(j, "max_per_class", p.max_per_class);
    if (p.kind == ProblemKind::MnistSubset && (p.images_path.empty() || p.labels_path.empty()))
        throw ConfigError("config: mnist problem requires \"images_path\" and \"labels_path\"");
    return p;
}

json config_to_json(const ExperimentConfig& config) {
    return json{{"seed", config.seed},
                {"n_workers", config.n_workers},
                {"rounds", config.rounds},
                {"batch_size", config.batch_size},
                {"eval_every", config.eval_every},
                {"lr",
                 json{{"schedule",
                       config.lr.schedule == LrSchedule::Constant ? "constant" : "inverse_t"},
                      {"gamma", config.lr.gamma}}},
                {"problem", problem_to_json(config.problem)},
                {"aggregator", aggregator_to_json(config.aggregator)},
                {"attack", attack_to_json(config.attack)}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig config;
    config.seed = get_field(j, "seed", config.seed);
    config.n_workers = get_field(j, "n_workers", config.n_workers);
    config.rounds = get_field(j, "rounds", config.rounds);
    config.batch_size = get_field(j, "batch_size", config.batch_size);
    config.eval_every = get_field(j, "eval_every", config.eval_every);
    if (j.contains("lr")) {
        const json& lr = j.at("lr");
        const std::string schedule = get_field<std::string>(lr, "schedule", "constant");
        if (schedule == "constant") {
            config.lr.schedule = LrSchedule::Constant;
        } else if (schedule == "inverse_t") {
            config.lr.schedule = LrSchedule::InverseT;
        } else {
            throw ConfigError(
                "config: field \"lr.schedule\" must be \"constant\" or \"inverse_t\"");
        }
        config.lr.gamma = get_field(lr, "gamma", config.lr.gamma);
    }
    if (j.contains("problem")) config.problem = problem_from_json(j.at("problem"));
    if (j.contains("aggregator")) config.aggregator = aggregator_from_json(j.at("aggregator"));
    if (j.contains("attack")) config.attack = attack_from_json(j.at("attack"));
    try {
        config.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    return config;
}

ConfigDocument parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& err) {
        throw ConfigError(std::string("config: invalid JSON: ") + err.what());
    }
    ConfigDocument doc;
    doc.base = config_from_json(j);
    if (j.contains("grid")) {
        const json& grid = j.at("grid");
        if (grid.contains("aggregators"))
            for (const json& a : grid.at("aggregators"))
                doc.grid.aggregators.push_back(aggregator_from_json(a));
        if (grid.contains("attacks"))
            for (const json& a : grid.at("attacks"))
                doc.grid.attacks.push_back(attack_from_json(a));
    }
    return doc;
}

ConfigDocument load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_document_to_text(const ConfigDocument& doc) {
    json j = config_to_json(doc.base);
    if (!doc.grid.aggregators.empty() || !doc.grid.attacks.empty()) {
        json grid = json::object();
        if (!doc.grid.aggregators.empty()) {
            grid["aggregators"] = json::array();
            for (const auto& a : doc.grid.aggregators) grid["aggregators"].push_back(aggregator_to_json(a));
        }
        if (!doc.grid.attacks.empty()) {
            grid["attacks"] = json::array();
            for (const auto& a : doc.grid.attacks) grid["attacks"].push_back(attack_to_json(a));
        }
        j["grid"] = grid;
    }
    return j.dump(2) + "\n";
}

}  // namespace byzsgd
