#include "row/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace row {

namespace {

std::string trim(const std::string& s) {
    std::size_t lo = 0;
    std::size_t hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw std::invalid_argument("config: bad value '" + value + "' for key '" + key + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size()) bad_value(key, value);
    return out;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string tok;
    std::stringstream ss(value);
    while (std::getline(ss, tok, ',')) out.push_back(trim(tok));
    return out;
}

} // namespace

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::row: return "row";
        case RunMode::row_no_wp: return "row_no_wp";
        case RunMode::row_no_wp_no_md: return "row_no_wp_no_md";
        case RunMode::hat_only: return "hat_only";
    }
    throw std::logic_error("to_string: unknown mode");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::stringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key or value");

        if (key == "dataset") {
            if (value != "synthetic" && value != "csv") bad_value(key, value);
            config.dataset = value;
        } else if (key == "csv_path") {
            config.csv_path = value;
        } else if (key == "classes") {
            config.classes = parse_number<int>(key, value);
        } else if (key == "dim") {
            config.dim = parse_number<int>(key, value);
        } else if (key == "samples_per_class") {
            config.samples_per_class = parse_number<int>(key, value);
        } else if (key == "spread") {
            config.spread = parse_number<double>(key, value);
        } else if (key == "data_seed") {
            config.data_seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "tasks") {
            config.tasks = parse_number<int>(key, value);
        } else if (key == "budget") {
            const long long v = parse_number<long long>(key, value);
            if (v < 0) throw std::invalid_argument("config: key 'budget' must be non-negative");
            config.budget = static_cast<std::size_t>(v);
        } else if (key == "hidden") {
            config.hidden.clear();
            for (const std::string& tok : split_list(value))
                config.hidden.push_back(parse_number<int>(key, tok));
        } else if (key == "seeds") {
            config.seeds.clear();
            for (const std::string& tok : split_list(value))
                config.seeds.push_back(parse_number<std::uint64_t>(key, tok));
        } else if (key == "mode") {
            if (value == "row") config.mode = RunMode::row;
            else if (value == "row_no_wp") config.mode = RunMode::row_no_wp;
            else if (value == "row_no_wp_no_md") config.mode = RunMode::row_no_wp_no_md;
            else if (value == "hat_only") config.mode = RunMode::hat_only;
            else bad_value(key, value);
        } else if (key == "out") {
            config.out = value;
        } else if (key == "lr1") {
            config.hyper.lr1 = parse_number<double>(key, value);
        } else if (key == "lr2") {
            config.hyper.lr2 = parse_number<double>(key, value);
        } else if (key == "lr3") {
            config.hyper.lr3 = parse_number<double>(key, value);
        } else if (key == "epochs1") {
            config.hyper.epochs1 = parse_number<int>(key, value);
        } else if (key == "epochs2") {
            config.hyper.epochs2 = parse_number<int>(key, value);
        } else if (key == "epochs3") {
            config.hyper.epochs3 = parse_number<int>(key, value);
        } else if (key == "batch1") {
            config.hyper.batch1 = parse_number<int>(key, value);
        } else if (key == "batch2") {
            config.hyper.batch2 = parse_number<int>(key, value);
        } else if (key == "batch3") {
            config.hyper.batch3 = parse_number<int>(key, value);
        } else if (key == "momentum") {
            config.hyper.momentum = parse_number<double>(key, value);
        } else if (key == "s_max") {
            config.hyper.s_max = parse_number<double>(key, value);
        } else if (key == "stats_eps") {
            config.hyper.stats_eps = parse_number<double>(key, value);
        } else if (key == "md_delta") {
            config.hyper.md_delta = parse_number<double>(key, value);
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void validate_config(const ExperimentConfig& config) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };

    if (config.dataset == "csv" && config.csv_path.empty())
        fail("dataset 'csv' requires 'csv_path'");
    if (config.dataset == "synthetic") {
        if (config.classes < 2) fail("'classes' must be >= 2");
        if (config.dim < 1) fail("'dim' must be >= 1");
        if (config.samples_per_class < 5) fail("'samples_per_class' must be >= 5");
        if (config.spread < 0.0) fail("'spread' must be non-negative");
        if (config.classes % config.tasks != 0)
            fail("'classes' must be divisible by 'tasks'");
        if (config.budget < static_cast<std::size_t>(config.classes))
            fail("'budget' must be at least the class count");
    }
    if (config.tasks < 1) fail("'tasks' must be >= 1");
    if (config.budget == 0) fail("'budget' must be positive");
    if (config.hidden.empty()) fail("'hidden' must list at least one layer width");
    for (int w : config.hidden)
        if (w < 1) fail("'hidden' widths must be positive");
    if (config.seeds.empty()) fail("'seeds' must be non-empty");
    if (config.out.empty()) fail("'out' must name a file");

    const TrainHyper& h = config.hyper;
    if (!(h.lr1 > 0.0) || !(h.lr2 > 0.0) || !(h.lr3 > 0.0)) fail("learning rates must be positive");
    if (h.epochs1 < 1 || h.epochs2 < 1 || h.epochs3 < 1) fail("epochs must be >= 1");
    if (h.batch1 < 1 || h.batch2 < 1 || h.batch3 < 1) fail("batch sizes must be >= 1");
    if (!(h.momentum >= 0.0 && h.momentum < 1.0)) fail("'momentum' must lie in [0, 1)");
    if (!(h.s_max >= 1.0)) fail("'s_max' must be >= 1");
    if (!(h.stats_eps > 0.0)) fail("'stats_eps' must be positive");
    if (!(h.md_delta > 0.0)) fail("'md_delta' must be positive");
}

} // namespace row
