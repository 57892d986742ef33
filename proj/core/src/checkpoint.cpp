#include <fstream>

#include <json.hpp>

#include "grownet/error.hpp"
#include "grownet/net.hpp"

namespace grownet {

namespace {

nlohmann::json layer_to_json(const Layer& layer) {
    nlohmann::json rows = nlohmann::json::array();
    for (const Vec& u : layer.units) rows.push_back(u);
    return rows;
}

std::vector<Vec> layer_from_json(const nlohmann::json& rows) {
    if (!rows.is_array() || rows.empty()) throw Error("checkpoint: layer must be a non-empty array");
    std::vector<Vec> units;
    for (const auto& row : rows) {
        if (!row.is_array() || row.empty())
            throw Error("checkpoint: unit weights must be a non-empty array");
        units.push_back(row.get<Vec>());
    }
    return units;
}

} // namespace

std::string checkpoint_json(const Network& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& layer : net.hidden) layers.push_back(layer_to_json(layer));
    layers.push_back(layer_to_json(net.output));

    nlohmann::json doc{
        {"layers", layers},
        {"activation", activation_name(net.activation)},
        {"loss_head", loss_head_name(net.loss_head)},
        {"flops", flops(net)},
    };
    return doc.dump();
}

Network network_from_checkpoint_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    for (const char* key : {"layers", "activation", "loss_head", "flops"})
        if (!doc.contains(key)) throw Error(std::string("checkpoint: missing key '") + key + "'");

    const auto& layers = doc["layers"];
    if (!layers.is_array() || layers.empty())
        throw Error("checkpoint: 'layers' must be a non-empty array");

    Network net;
    net.activation = activation_from_name(doc["activation"].get<std::string>());
    net.loss_head = loss_head_from_name(doc["loss_head"].get<std::string>());

    std::vector<std::vector<Vec>> all;
    for (const auto& l : layers) all.push_back(layer_from_json(l));
    net.input_dim = all.front().front().size() - 1;

    std::size_t fan_in = net.input_dim;
    for (std::size_t k = 0; k < all.size(); ++k) {
        for (const Vec& u : all[k])
            if (u.size() != fan_in + 1)
                throw Error("checkpoint: layer " + std::to_string(k) + " expects units of length " +
                            std::to_string(fan_in + 1) + ", got " + std::to_string(u.size()));
        fan_in = all[k].size();
        Layer layer{std::move(all[k])};
        if (k + 1 < all.size())
            net.hidden.push_back(std::move(layer));
        else
            net.output = std::move(layer);
    }

    const std::int64_t stored = doc["flops"].get<std::int64_t>();
    if (stored != flops(net))
        throw Error("checkpoint: stored flops " + std::to_string(stored) +
                    " do not match architecture flops " + std::to_string(flops(net)));
    return net;
}

void save_checkpoint(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("save_checkpoint: cannot open '" + path + "'");
    out << checkpoint_json(net) << '\n';
    if (!out) throw Error("save_checkpoint: write failed for '" + path + "'");
}

Network load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_checkpoint: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return network_from_checkpoint_json(text);
}

} // namespace grownet
