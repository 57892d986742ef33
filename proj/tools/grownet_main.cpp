// Command-line front end: configure, run, and inspect growth experiments.
// stdout carries data, stderr carries diagnostics.
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "grownet/error.hpp"
#include "grownet/grow.hpp"
#include "grownet/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Thrown for problems with configs, dataset specs, or file schemas; mapped
/// to exit code 1 (everything else becomes exit code 2).
struct ConfigError : grownet::Error {
    using grownet::Error::Error;
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- dataset specs ---------------------------------------------------------
//
// Compact form used by every subcommand:
//   two_moons:n=1000,noise=0.1,seed=7
//   spirals:n=800,noise=0.05,seed=3
//   blobs:n=200,noise=0.2,seed=1
//   csv:path=data.csv,label=0,header=1
//   idx:images=train-images,labels=train-labels

std::map<std::string, std::string> parse_kv(const std::string& body) {
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    while (pos < body.size()) {
        const std::size_t comma = body.find(',', pos);
        const std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos
                                                                             : comma - pos);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("dataset spec: expected key=value, got '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return kv;
}

template <typename T>
T parse_num(const std::map<std::string, std::string>& kv, const std::string& key, T fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        if constexpr (std::is_floating_point_v<T>)
            return T(std::stod(it->second));
        else
            return T(std::stoll(it->second));
    } catch (const std::exception&) {
        throw ConfigError("dataset spec: bad value for '" + key + "': '" + it->second + "'");
    }
}

grownet::Dataset dataset_from_spec(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const auto kv = colon == std::string::npos ? std::map<std::string, std::string>{}
                                               : parse_kv(spec.substr(colon + 1));

    auto known = [&](std::initializer_list<const char*> keys) {
        for (const auto& [k, v] : kv) {
            bool ok = false;
            for (const char* key : keys) ok = ok || k == key;
            if (!ok) throw ConfigError("dataset spec: unknown key '" + k + "' for " + kind);
        }
    };

    try {
        if (kind == "two_moons" || kind == "spirals" || kind == "blobs") {
            known({"n", "noise", "seed"});
            const auto synth_kind = kind == "two_moons" ? grownet::SynthKind::two_moons
                                    : kind == "spirals" ? grownet::SynthKind::spirals
                                                        : grownet::SynthKind::blobs;
            return grownet::synth(synth_kind, parse_num<std::size_t>(kv, "n", 1000),
                                  parse_num<double>(kv, "noise", 0.1),
                                  parse_num<std::uint64_t>(kv, "seed", 0));
        }
        if (kind == "csv") {
            known({"path", "label", "header"});
            if (!kv.count("path")) throw ConfigError("dataset spec: csv needs path=...");
            return grownet::load_csv(kv.at("path"), parse_num<int>(kv, "label", -1),
                                     parse_num<int>(kv, "header", 1) != 0);
        }
        if (kind == "idx") {
            known({"images", "labels"});
            if (!kv.count("images") || !kv.count("labels"))
                throw ConfigError("dataset spec: idx needs images=... and labels=...");
            return grownet::load_idx(kv.at("images"), kv.at("labels"));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const grownet::Error& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("dataset spec: unknown kind '" + kind + "'");
}

grownet::Network checkpoint_or_config_error(const std::string& path) {
    try {
        return grownet::load_checkpoint(path);
    } catch (const grownet::Error& e) {
        throw ConfigError(e.what());
    }
}

std::string spec_from_config(const json& ds) {
    const std::string kind = ds.at("kind").get<std::string>();
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (auto it = ds.begin(); it != ds.end(); ++it) {
            bool ok = it.key() == "kind";
            for (const char* key : keys) ok = ok || it.key() == key;
            if (!ok)
                throw ConfigError("config: unknown key '" + it.key() + "' for dataset kind " +
                                  kind);
        }
    };
    if (kind == "two_moons" || kind == "spirals" || kind == "blobs")
        allow({"n", "noise", "seed"});
    else if (kind == "csv")
        allow({"path", "label", "header"});
    else if (kind == "idx")
        allow({"images", "labels"});

    std::string spec = kind + ":";
    if (kind == "csv") {
        spec += "path=" + ds.at("path").get<std::string>();
        if (ds.contains("label")) spec += ",label=" + std::to_string(ds["label"].get<int>());
        if (ds.contains("header"))
            spec += ",header=" + std::string(ds["header"].get<bool>() ? "1" : "0");
        return spec;
    }
    if (kind == "idx") {
        return spec + "images=" + ds.at("images").get<std::string>() +
               ",labels=" + ds.at("labels").get<std::string>();
    }
    spec += "n=" + std::to_string(ds.value("n", 1000));
    spec += ",noise=" + format_double(ds.value("noise", 0.1));
    spec += ",seed=" + std::to_string(ds.value("seed", std::uint64_t{0}));
    return spec;
}

// --- experiment config ------------------------------------------------------

struct ExperimentConfig {
    std::string dataset_spec;
    std::vector<std::size_t> hidden_sizes;
    grownet::ActivationKind activation = grownet::ActivationKind::tanh;
    grownet::LossHead loss_head = grownet::LossHead::cross_entropy;
    grownet::GrowthConfig growth;
    std::string out_dir = "out";
};

void reject_unknown(const json& obj, std::initializer_list<const char*> keys,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* key : keys) ok = ok || it.key() == key;
        if (!ok) throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
    }

    reject_unknown(doc, {"dataset", "network", "growth", "train", "rayleigh", "seed", "out_dir"},
                   "top level");
    if (!doc.contains("dataset")) throw ConfigError("config: missing 'dataset'");

    ExperimentConfig cfg;
    const json& ds = doc["dataset"];
    reject_unknown(ds, {"kind", "n", "noise", "seed", "path", "label", "header", "images",
                        "labels"},
                   "dataset");
    if (!ds.contains("kind")) throw ConfigError("config: dataset needs 'kind'");
    cfg.dataset_spec = spec_from_config(ds);

    if (doc.contains("network")) {
        const json& net = doc["network"];
        reject_unknown(net, {"hidden", "activation", "loss"}, "network");
        if (net.contains("hidden")) {
            if (!net["hidden"].is_array()) throw ConfigError("config: network.hidden must be an array");
            for (const auto& v : net["hidden"]) {
                const long long m = v.get<long long>();
                if (m < 1) throw ConfigError("config: hidden layer sizes must be >= 1");
                cfg.hidden_sizes.push_back(std::size_t(m));
            }
        }
        if (net.contains("activation"))
            cfg.activation = grownet::activation_from_name(net["activation"].get<std::string>());
        if (net.contains("loss"))
            cfg.loss_head = grownet::loss_head_from_name(net["loss"].get<std::string>());
    }
    if (cfg.hidden_sizes.empty()) cfg.hidden_sizes = {2};

    grownet::GrowthConfig& g = cfg.growth;
    if (doc.contains("growth")) {
        const json& gr = doc["growth"];
        reject_unknown(gr,
                       {"epsilon", "alpha", "max_stages", "flops_target", "index_method",
                        "lambda_stop", "vanilla", "vanilla_cap"},
                       "growth");
        g.epsilon = gr.value("epsilon", g.epsilon);
        g.alpha = gr.value("alpha", g.alpha);
        g.max_stages = gr.value("max_stages", g.max_stages);
        g.flops_target = gr.value("flops_target", g.flops_target);
        g.lambda_stop = gr.value("lambda_stop", g.lambda_stop);
        g.vanilla = gr.value("vanilla", g.vanilla);
        g.vanilla_cap = gr.value("vanilla_cap", g.vanilla_cap);
        if (gr.contains("index_method")) {
            const std::string m = gr["index_method"].get<std::string>();
            if (m == "exact")
                g.index_method = grownet::IndexMethod::exact;
            else if (m == "rayleigh")
                g.index_method = grownet::IndexMethod::rayleigh;
            else
                throw ConfigError("config: index_method must be 'exact' or 'rayleigh'");
        }
        if (g.alpha <= 0.0 || g.alpha > 1.0)
            throw ConfigError("config: alpha must be in (0, 1]");
        if (g.max_stages < 1) throw ConfigError("config: max_stages must be >= 1");
    }
    if (doc.contains("train")) {
        const json& tr = doc["train"];
        reject_unknown(tr,
                       {"learning_rate", "momentum", "batch_size", "max_epochs", "patience",
                        "rel_improve_tol", "seed"},
                       "train");
        grownet::TrainHyper& h = g.train;
        h.learning_rate = tr.value("learning_rate", h.learning_rate);
        h.momentum = tr.value("momentum", h.momentum);
        h.batch_size = tr.value("batch_size", h.batch_size);
        h.max_epochs = tr.value("max_epochs", h.max_epochs);
        h.patience = tr.value("patience", h.patience);
        h.rel_improve_tol = tr.value("rel_improve_tol", h.rel_improve_tol);
        h.seed = tr.value("seed", h.seed);
        if (h.learning_rate <= 0.0) throw ConfigError("config: learning_rate must be > 0");
        if (h.batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
        if (h.patience < 1) throw ConfigError("config: patience must be >= 1");
    }
    if (doc.contains("rayleigh")) {
        const json& rl = doc["rayleigh"];
        reject_unknown(rl,
                       {"batch_size", "learning_rate", "epochs", "adaptive_decay",
                        "epsilon_guard", "seed"},
                       "rayleigh");
        grownet::RayleighConfig& r = g.rayleigh;
        r.batch_size = rl.value("batch_size", r.batch_size);
        r.learning_rate = rl.value("learning_rate", r.learning_rate);
        r.epochs = rl.value("epochs", r.epochs);
        r.adaptive_decay = rl.value("adaptive_decay", r.adaptive_decay);
        r.epsilon_guard = rl.value("epsilon_guard", r.epsilon_guard);
        r.seed = rl.value("seed", r.seed);
        if (r.batch_size < 1 || r.epochs < 1 || r.learning_rate <= 0.0)
            throw ConfigError("config: rayleigh needs batch_size >= 1, epochs >= 1, lr > 0");
    }
    g.seed = doc.value("seed", std::uint64_t{0});
    cfg.out_dir = doc.value("out_dir", cfg.out_dir);
    return cfg;
}

// --- subcommands ------------------------------------------------------------

int cmd_grow(const std::string& config_path, const std::optional<std::string>& out_override,
             const std::optional<std::uint64_t>& seed_override,
             const std::optional<std::string>& method_override, bool vanilla_flag) {
    ExperimentConfig cfg = load_config(config_path);
    if (out_override) cfg.out_dir = *out_override;
    if (seed_override) cfg.growth.seed = *seed_override;
    if (method_override) {
        if (*method_override == "exact")
            cfg.growth.index_method = grownet::IndexMethod::exact;
        else if (*method_override == "rayleigh")
            cfg.growth.index_method = grownet::IndexMethod::rayleigh;
        else
            throw ConfigError("--index-method must be 'exact' or 'rayleigh'");
    }
    if (vanilla_flag) cfg.growth.vanilla = true;

    grownet::Dataset data = dataset_from_spec(cfg.dataset_spec);
    grownet::Network seed_net = grownet::make_network(
        data.input_dim, cfg.hidden_sizes, data.n_classes, cfg.activation, cfg.loss_head,
        grownet::mix_seed(cfg.growth.seed, 0x5eedULL));

    fs::create_directories(cfg.out_dir);
    std::ofstream stages(fs::path(cfg.out_dir) / "stages.jsonl");
    if (!stages) throw ConfigError("cannot open '" + cfg.out_dir + "/stages.jsonl' for writing");

    grownet::RunResult result = grownet::run_growth(
        seed_net, data, cfg.growth, [&](const grownet::StageRecord& rec) {
            stages << grownet::to_json_line(rec) << '\n';
            stages.flush();
        });

    grownet::save_checkpoint(result.net, (fs::path(cfg.out_dir) / "checkpoint.json").string());

    std::ofstream tradeoff(fs::path(cfg.out_dir) / "tradeoff.csv");
    tradeoff << "stage,flops,params,train_loss,test_accuracy\n";
    for (std::size_t k = 0; k < result.stages.size(); ++k) {
        const grownet::StageRecord& rec = result.stages[k];
        tradeoff << k << ',' << rec.flops_before << ',' << rec.flops_before << ','
                 << format_double(rec.loss_before) << ','
                 << format_double(rec.accuracy_before) << '\n';
    }
    tradeoff << result.stages.size() << ',' << result.final_flops << ',' << result.final_flops
             << ',' << format_double(result.final_train_loss) << ','
             << format_double(result.final_test_accuracy) << '\n';

    std::cerr << "grow: " << result.stages.size() << " stage(s), termination: "
              << result.termination << ", final flops " << result.final_flops
              << ", test accuracy " << result.final_test_accuracy << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& dataset_spec) {
    grownet::Network net = checkpoint_or_config_error(checkpoint_path);
    grownet::Dataset data = dataset_from_spec(dataset_spec);
    if (data.input_dim != net.input_dim)
        throw ConfigError("eval: dataset input dim " + std::to_string(data.input_dim) +
                          " does not match network input dim " + std::to_string(net.input_dim));

    json doc{
        {"loss", grownet::mean_loss(net, data.train)},
        {"accuracy", grownet::accuracy(net, data.test)},
        {"flops", grownet::flops(net)},
        {"params", grownet::param_count(net)},
    };
    std::cout << doc.dump() << '\n';
    return 0;
}

int cmd_inspect(const std::string& checkpoint_path, const std::string& dataset_spec,
                bool use_rayleigh, std::uint64_t seed) {
    grownet::Network net = checkpoint_or_config_error(checkpoint_path);
    grownet::Dataset data = dataset_from_spec(dataset_spec);
    if (data.input_dim != net.input_dim)
        throw ConfigError("inspect: dataset input dim " + std::to_string(data.input_dim) +
                          " does not match network input dim " + std::to_string(net.input_dim));

    struct Row {
        grownet::NeuronRef ref;
        double lambda;
        std::int64_t cost;
        double ratio;
    };
    std::vector<Row> rows;
    if (use_rayleigh) {
        grownet::RayleighConfig rcfg;
        rcfg.seed = seed;
        for (const auto& [ref, idx] : grownet::rayleigh_descent(net, data, rcfg).indexes) {
            const std::int64_t cost = grownet::split_cost(net, ref);
            rows.push_back({ref, idx.lambda_min, cost, idx.lambda_min / double(cost)});
        }
    } else {
        for (const grownet::SplitIndex& idx : grownet::splitting_indexes_exact(net, data.train)) {
            const std::int64_t cost = grownet::split_cost(net, idx.neuron);
            rows.push_back({idx.neuron, idx.lambda_min, cost, idx.lambda_min / double(cost)});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.ratio != b.ratio) return a.ratio < b.ratio;
        return a.ref < b.ref;
    });

    std::cout << "layer,index,lambda_min,cost,ratio\n";
    for (const Row& r : rows)
        std::cout << r.ref.layer << ',' << r.ref.index << ',' << format_double(r.lambda) << ','
                  << r.cost << ',' << format_double(r.ratio) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grow small dense networks by energy-aware neuron splitting"};
    app.require_subcommand(1);

    std::string config_path, out_dir, checkpoint, dataset_spec, index_method;
    std::uint64_t seed = 0;
    bool seed_set = false, out_set = false, method_set = false, vanilla = false;
    bool use_exact = false, use_rayleigh = false;

    CLI::App* grow = app.add_subcommand("grow", "run a growth experiment from a config file");
    grow->add_option("--config", config_path, "experiment config (JSON)")->required();
    grow->add_option("--out", out_dir, "output directory (overrides config)")
        ->each([&](const std::string&) { out_set = true; });
    grow->add_option("--seed", seed, "seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    grow->add_option("--index-method", index_method, "exact|rayleigh (overrides config)")
        ->each([&](const std::string&) { method_set = true; });
    grow->add_flag("--vanilla", vanilla, "energy-unaware selection (most-negative lambda)");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--checkpoint", checkpoint, "checkpoint.json path")->required();
    eval->add_option("--dataset", dataset_spec, "dataset spec, e.g. two_moons:n=1000,noise=0.1,seed=7")
        ->required();

    CLI::App* inspect = app.add_subcommand("inspect", "per-neuron splitting indexes and costs");
    inspect->add_option("--checkpoint", checkpoint, "checkpoint.json path")->required();
    inspect->add_option("--dataset", dataset_spec, "dataset spec")->required();
    inspect->add_flag("--exact", use_exact, "exact eigen-decomposition (default)");
    inspect->add_flag("--rayleigh", use_rayleigh, "stochastic Rayleigh-quotient estimate");
    inspect->add_option("--seed", seed, "seed for --rayleigh");

    CLI11_PARSE(app, argc, argv);

    try {
        if (grow->parsed())
            return cmd_grow(config_path,
                            out_set ? std::optional(out_dir) : std::nullopt,
                            seed_set ? std::optional(seed) : std::nullopt,
                            method_set ? std::optional(index_method) : std::nullopt, vanilla);
        if (eval->parsed()) return cmd_eval(checkpoint, dataset_spec);
        if (inspect->parsed()) {
            if (use_exact && use_rayleigh) {
                std::cerr << "inspect: pass only one of --exact / --rayleigh\n";
                return 1;
            }
            return cmd_inspect(checkpoint, dataset_spec, use_rayleigh, seed);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const grownet::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
