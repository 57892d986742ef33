#include "grownet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "grownet/error.hpp"
#include "grownet/rng.hpp"

namespace grownet {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec one_hot(int label, std::size_t n_classes) {
    Vec t(n_classes, 0.0);
    t[static_cast<std::size_t>(label)] = 1.0;
    return t;
}

/// Standardize features with train statistics, fill one-hot targets, and
/// assemble the Dataset. Constant features keep std 1 so they map to zero.
Dataset assemble(std::vector<Sample> train, std::vector<Sample> test, std::size_t input_dim,
                 std::size_t n_classes) {
    Dataset ds;
    ds.input_dim = input_dim;
    ds.n_classes = n_classes;
    ds.feature_mean.assign(input_dim, 0.0);
    ds.feature_std.assign(input_dim, 0.0);

    if (train.empty()) throw Error("dataset: empty train split");
    for (const Sample& s : train)
        for (std::size_t f = 0; f < input_dim; ++f) ds.feature_mean[f] += s.x[f];
    for (std::size_t f = 0; f < input_dim; ++f) ds.feature_mean[f] /= double(train.size());
    for (const Sample& s : train)
        for (std::size_t f = 0; f < input_dim; ++f) {
            const double d = s.x[f] - ds.feature_mean[f];
            ds.feature_std[f] += d * d;
        }
    for (std::size_t f = 0; f < input_dim; ++f) {
        ds.feature_std[f] = std::sqrt(ds.feature_std[f] / double(train.size()));
        if (ds.feature_std[f] < 1e-12) ds.feature_std[f] = 1.0;
    }

    auto apply = [&](std::vector<Sample>& split) {
        for (Sample& s : split) {
            for (std::size_t f = 0; f < input_dim; ++f)
                s.x[f] = (s.x[f] - ds.feature_mean[f]) / ds.feature_std[f];
            s.target = one_hot(s.label, n_classes);
        }
    };
    apply(train);
    apply(test);
    ds.train = std::move(train);
    ds.test = std::move(test);
    return ds;
}

/// Stratified 80/20 split with a seeded shuffle of each class, then of the
/// assembled splits.
Dataset split_and_assemble(std::vector<Sample> all, std::size_t input_dim, std::size_t n_classes,
                           Rng& rng) {
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < all.size(); ++i)
        by_class[static_cast<std::size_t>(all[i].label)].push_back(i);

    std::vector<Sample> train, test;
    for (auto& idx : by_class) {
        rng.shuffle(idx);
        const std::size_t n_train = idx.size() * 8 / 10;
        for (std::size_t k = 0; k < idx.size(); ++k)
            (k < n_train ? train : test).push_back(all[idx[k]]);
    }
    rng.shuffle(train);
    rng.shuffle(test);
    return assemble(std::move(train), std::move(test), input_dim, n_classes);
}

std::vector<Sample> make_two_moons(std::size_t n, double noise, Rng& rng) {
    std::vector<Sample> all;
    const std::size_t n0 = n / 2;
    const std::size_t n1 = n - n0;
    for (std::size_t i = 0; i < n0; ++i) {
        const double t = n0 > 1 ? kPi * double(i) / double(n0 - 1) : 0.0;
        Sample s;
        s.x = {std::cos(t) + noise * rng.normal(), std::sin(t) + noise * rng.normal()};
        s.label = 0;
        all.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < n1; ++i) {
        const double t = n1 > 1 ? kPi * double(i) / double(n1 - 1) : 0.0;
        Sample s;
        s.x = {1.0 - std::cos(t) + noise * rng.normal(),
               0.5 - std::sin(t) + noise * rng.normal()};
        s.label = 1;
        all.push_back(std::move(s));
    }
    return all;
}

std::vector<Sample> make_spirals(std::size_t n, double noise, Rng& rng) {
    // Two interleaved arms, 1.25 turns each.
    std::vector<Sample> all;
    for (int c = 0; c < 2; ++c) {
        const std::size_t nc = c == 0 ? n / 2 : n - n / 2;
        for (std::size_t i = 0; i < nc; ++i) {
            const double t = nc > 1 ? double(i) / double(nc - 1) : 0.0;
            const double r = 0.25 + 1.75 * t;
            const double a = double(c) * kPi + t * 2.5 * kPi;
            Sample s;
            s.x = {r * std::cos(a) + noise * rng.normal(), r * std::sin(a) + noise * rng.normal()};
            s.label = c;
            all.push_back(std::move(s));
        }
    }
    return all;
}

std::vector<Sample> make_blobs(std::size_t n, double noise, Rng& rng) {
    const double cx[2] = {-2.0, 2.0};
    std::vector<Sample> all;
    for (int c = 0; c < 2; ++c) {
        const std::size_t nc = c == 0 ? n / 2 : n - n / 2;
        for (std::size_t i = 0; i < nc; ++i) {
            Sample s;
            s.x = {cx[c] + noise * rng.normal(), noise * rng.normal()};
            s.label = c;
            all.push_back(std::move(s));
        }
    }
    return all;
}

} // namespace

Dataset synth(SynthKind kind, std::size_t n, double noise, std::uint64_t seed) {
    if (n < 10) throw Error("synth: need n >= 10");
    Rng rng(mix_seed(seed, 0xda7aULL));
    std::vector<Sample> all;
    switch (kind) {
    case SynthKind::two_moons: all = make_two_moons(n, noise, rng); break;
    case SynthKind::spirals: all = make_spirals(n, noise, rng); break;
    case SynthKind::blobs: all = make_blobs(n, noise, rng); break;
    }
    return split_and_assemble(std::move(all), 2, 2, rng);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(cell, &consumed);
    } catch (const std::exception&) {
        consumed = 0;
    }
    if (consumed != cell.size() || cell.empty()) {
        throw Error("load_csv: row " + std::to_string(row) + ", column " + std::to_string(col) +
                    ": '" + cell + "' is not numeric");
    }
    return value;
}

} // namespace

Dataset load_csv(const std::string& path, int label_column, bool has_header) {
    std::ifstream in(path);
    if (!in) throw Error("load_csv: cannot open '" + path + "'");

    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        if (first && has_header) {
            first = false;
            continue;
        }
        first = false;
        rows.push_back(split_fields(line));
    }
    if (rows.empty()) throw Error("load_csv: '" + path + "' has no data rows");

    const std::size_t n_cols = rows[0].size();
    if (n_cols < 2) throw Error("load_csv: need at least one feature column and a label column");
    std::size_t label_idx;
    if (label_column < 0) {
        if (static_cast<std::size_t>(-label_column) > n_cols)
            throw Error("load_csv: label column out of range");
        label_idx = n_cols - static_cast<std::size_t>(-label_column);
    } else {
        label_idx = static_cast<std::size_t>(label_column);
        if (label_idx >= n_cols) throw Error("load_csv: label column out of range");
    }

    std::vector<std::string> label_names;
    std::vector<Sample> all;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != n_cols) {
            throw Error("load_csv: row " + std::to_string(r + 1) + " has " +
                        std::to_string(rows[r].size()) + " fields, expected " +
                        std::to_string(n_cols));
        }
        Sample s;
        for (std::size_t cidx = 0; cidx < n_cols; ++cidx) {
            if (cidx == label_idx) continue;
            s.x.push_back(parse_number(rows[r][cidx], r + 1, cidx));
        }
        const std::string& label_cell = rows[r][label_idx];
        auto it = std::find(label_names.begin(), label_names.end(), label_cell);
        if (it == label_names.end()) {
            label_names.push_back(label_cell);
            s.label = int(label_names.size()) - 1;
        } else {
            s.label = int(it - label_names.begin());
        }
        all.push_back(std::move(s));
    }

    const std::size_t n_train = std::max<std::size_t>(1, all.size() * 8 / 10);
    std::vector<Sample> train(all.begin(), all.begin() + long(n_train));
    std::vector<Sample> test(all.begin() + long(n_train), all.end());
    return assemble(std::move(train), std::move(test), n_cols - 1, label_names.size());
}

namespace {

std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw Error("load_idx: '" + path + "' truncated");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw Error("load_idx: cannot open '" + images_path + "'");
    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs) throw Error("load_idx: cannot open '" + labels_path + "'");

    if (read_be_u32(imgs, images_path) != 0x00000803u)
        throw Error("load_idx: '" + images_path + "' has wrong magic (want 0x00000803)");
    const std::uint32_t n = read_be_u32(imgs, images_path);
    const std::uint32_t rows = read_be_u32(imgs, images_path);
    const std::uint32_t cols = read_be_u32(imgs, images_path);

    if (read_be_u32(labs, labels_path) != 0x00000801u)
        throw Error("load_idx: '" + labels_path + "' has wrong magic (want 0x00000801)");
    const std::uint32_t n_labels = read_be_u32(labs, labels_path);
    if (n != n_labels) throw Error("load_idx: image/label counts differ");
    if (n == 0) throw Error("load_idx: empty file");

    const std::size_t dim = std::size_t(rows) * std::size_t(cols);
    std::vector<Sample> all(n);
    std::vector<unsigned char> buf(dim);
    int max_label = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!imgs.read(reinterpret_cast<char*>(buf.data()), long(dim)))
            throw Error("load_idx: '" + images_path + "' truncated");
        all[i].x.resize(dim);
        for (std::size_t p = 0; p < dim; ++p) all[i].x[p] = double(buf[p]) / 255.0;
        unsigned char lab;
        if (!labs.read(reinterpret_cast<char*>(&lab), 1))
            throw Error("load_idx: '" + labels_path + "' truncated");
        all[i].label = int(lab);
        max_label = std::max(max_label, int(lab));
    }

    const std::size_t n_train = std::max<std::size_t>(1, all.size() * 8 / 10);
    std::vector<Sample> train(all.begin(), all.begin() + long(n_train));
    std::vector<Sample> test(all.begin() + long(n_train), all.end());
    return assemble(std::move(train), std::move(test), dim, std::size_t(max_label) + 1);
}

} // namespace grownet
