#include "row/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace row {

namespace {

// Random orthonormal directions via Gram-Schmidt on Gaussian vectors.
std::vector<std::vector<double>> class_means(int num_classes, int dim, Rng& rng) {
    std::vector<std::vector<double>> means;
    means.reserve(static_cast<std::size_t>(num_classes));
    const bool orthogonalize = num_classes <= dim;
    while (static_cast<int>(means.size()) < num_classes) {
        std::vector<double> v(static_cast<std::size_t>(dim));
        for (double& x : v) x = rng.normal();
        if (orthogonalize) {
            for (const std::vector<double>& m : means) {
                double dot = 0.0;
                for (int i = 0; i < dim; ++i)
                    dot += v[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(i)];
                for (int i = 0; i < dim; ++i)
                    v[static_cast<std::size_t>(i)] -= dot * m[static_cast<std::size_t>(i)];
            }
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-8) continue;  // degenerate draw, resample
        for (double& x : v) x /= norm;
        means.push_back(std::move(v));
    }
    return means;
}

int parse_int(const std::string& tok, int line_no, const char* what) {
    int value = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad " + what + " '" +
                                 tok + "'");
    return value;
}

double parse_double(const std::string& tok, int line_no, const char* what) {
    double value = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad " + what + " '" +
                                 tok + "'");
    return value;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string tok;
    std::stringstream ss(line);
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

Dataset gen_gaussian_clusters(int num_classes, int dim, int n_per_class, double spread,
                              std::uint64_t seed) {
    if (num_classes <= 0 || dim <= 0 || n_per_class < 5)
        throw std::invalid_argument("gen_gaussian_clusters: need classes > 0, dim > 0, "
                                    "n_per_class >= 5");
    if (spread < 0.0) throw std::invalid_argument("gen_gaussian_clusters: negative spread");

    Rng rng(seed);
    const std::vector<std::vector<double>> means = class_means(num_classes, dim, rng);

    Dataset ds;
    ds.num_classes = num_classes;
    ds.feature_dim = dim;
    const int n_train = n_per_class * 4 / 5;
    for (int c = 0; c < num_classes; ++c) {
        for (int i = 0; i < n_per_class; ++i) {
            Sample s;
            s.label = c;
            s.x.resize(static_cast<std::size_t>(dim));
            for (int d = 0; d < dim; ++d)
                s.x[static_cast<std::size_t>(d)] =
                    means[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] +
                    spread * rng.normal();
            (i < n_train ? ds.train : ds.test).push_back(std::move(s));
        }
    }
    return ds;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: '" + path + "' is empty");
    std::vector<std::string> header = split_commas(line);
    if (header.size() < 2 || header[0] != "label")
        throw std::runtime_error("csv line 1: header must start with 'label,f0,...'");
    const int dim = static_cast<int>(header.size()) - 1;
    for (int d = 0; d < dim; ++d)
        if (header[static_cast<std::size_t>(d) + 1] != "f" + std::to_string(d))
            throw std::runtime_error("csv line 1: expected column 'f" + std::to_string(d) +
                                     "', got '" + header[static_cast<std::size_t>(d) + 1] + "'");

    Dataset ds;
    ds.feature_dim = dim;
    int line_no = 1;
    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> toks = split_commas(line);
        if (static_cast<int>(toks.size()) != dim + 1)
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(dim + 1) + " fields, got " +
                                     std::to_string(toks.size()));
        Sample s;
        s.label = parse_int(toks[0], line_no, "label");
        if (s.label < 0)
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": negative label");
        max_label = std::max(max_label, s.label);
        s.x.resize(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d)
            s.x[static_cast<std::size_t>(d)] =
                parse_double(toks[static_cast<std::size_t>(d) + 1], line_no, "feature");
        ds.train.push_back(std::move(s));
    }
    ds.num_classes = max_label + 1;
    if (ds.train.empty()) throw std::runtime_error("load_csv: '" + path + "' has no data rows");

    // Loaded files carry no split; carve the same 80/20 split per class the
    // generator uses, preserving row order within each class.
    std::vector<std::vector<Sample>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (Sample& s : ds.train) by_class[static_cast<std::size_t>(s.label)].push_back(std::move(s));
    ds.train.clear();
    for (std::vector<Sample>& group : by_class) {
        const int n_train = static_cast<int>(group.size()) * 4 / 5;
        for (int i = 0; i < static_cast<int>(group.size()); ++i)
            (i < n_train ? ds.train : ds.test).push_back(std::move(group[static_cast<std::size_t>(i)]));
    }
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
    out << "label";
    for (int d = 0; d < ds.feature_dim; ++d) out << ",f" << d;
    out << "\n";
    char buf[64];
    auto emit = [&](const std::vector<Sample>& ss) {
        for (const Sample& s : ss) {
            out << s.label;
            for (double v : s.x) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << ',' << buf;
            }
            out << "\n";
        }
    };
    emit(ds.train);
    emit(ds.test);
    if (!out) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

int Task::local_of(int global_label) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == global_label) return static_cast<int>(i);
    return -1;
}

TaskSequence split_tasks(const Dataset& ds, int num_tasks, const std::vector<int>& class_order) {
    if (num_tasks <= 0) throw std::invalid_argument("split_tasks: num_tasks must be positive");
    if (ds.num_classes % num_tasks != 0)
        throw std::invalid_argument("split_tasks: " + std::to_string(ds.num_classes) +
                                    " classes not divisible by " + std::to_string(num_tasks) +
                                    " tasks");
    if (static_cast<int>(class_order.size()) != ds.num_classes)
        throw std::invalid_argument("split_tasks: class_order has " +
                                    std::to_string(class_order.size()) + " entries for " +
                                    std::to_string(ds.num_classes) + " classes");
    std::vector<bool> seen(static_cast<std::size_t>(ds.num_classes), false);
    for (int c : class_order) {
        if (c < 0 || c >= ds.num_classes || seen[static_cast<std::size_t>(c)])
            throw std::invalid_argument("split_tasks: class_order is not a permutation");
        seen[static_cast<std::size_t>(c)] = true;
    }

    const int per_task = ds.num_classes / num_tasks;
    TaskSequence seq;
    seq.feature_dim = ds.feature_dim;
    seq.tasks.resize(static_cast<std::size_t>(num_tasks));
    std::vector<int> owner(static_cast<std::size_t>(ds.num_classes), -1);
    for (int t = 0; t < num_tasks; ++t) {
        Task& task = seq.tasks[static_cast<std::size_t>(t)];
        task.id = t;
        task.classes.assign(class_order.begin() + static_cast<std::ptrdiff_t>(t) * per_task,
                            class_order.begin() + static_cast<std::ptrdiff_t>(t + 1) * per_task);
        for (int c : task.classes) owner[static_cast<std::size_t>(c)] = t;
    }
    for (const Sample& s : ds.train) {
        Sample copy = s;
        copy.task = owner[static_cast<std::size_t>(s.label)];
        seq.tasks[static_cast<std::size_t>(copy.task)].train.push_back(std::move(copy));
    }
    for (const Sample& s : ds.test) {
        Sample copy = s;
        copy.task = owner[static_cast<std::size_t>(s.label)];
        seq.tasks[static_cast<std::size_t>(copy.task)].test.push_back(std::move(copy));
    }
    return seq;
}

TaskSequence split_tasks(const Dataset& ds, int num_tasks, std::uint64_t order_seed) {
    std::vector<int> order(static_cast<std::size_t>(ds.num_classes));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(order_seed);
    rng.shuffle(order);
    return split_tasks(ds, num_tasks, order);
}

Matrix to_matrix(const std::vector<Sample>& samples, int feature_dim) {
    Matrix m(static_cast<int>(samples.size()), feature_dim);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (static_cast<int>(samples[i].x.size()) != feature_dim)
            throw std::invalid_argument("to_matrix: sample " + std::to_string(i) + " has " +
                                        std::to_string(samples[i].x.size()) + " features");
        std::copy(samples[i].x.begin(), samples[i].x.end(), m.row_ptr(static_cast<int>(i)));
    }
    return m;
}

Matrix to_matrix(const std::vector<const Sample*>& samples, int feature_dim) {
    Matrix m(static_cast<int>(samples.size()), feature_dim);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (static_cast<int>(samples[i]->x.size()) != feature_dim)
            throw std::invalid_argument("to_matrix: sample " + std::to_string(i) + " has " +
                                        std::to_string(samples[i]->x.size()) + " features");
        std::copy(samples[i]->x.begin(), samples[i]->x.end(), m.row_ptr(static_cast<int>(i)));
    }
    return m;
}

} // namespace row
