#include "row/config.hpp"
#include "row/dataset.hpp"
#include "row/experiment.hpp"
#include "row/metrics.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<double> parse_pi(const std::string& text) {
    std::vector<double> pi;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            pi.push_back(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("bounds: bad weight '" + tok + "'");
        }
    }
    return pi;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ROW class-incremental learning experiments"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "Train and evaluate an experiment config");
    run->add_option("--config", config_path, "Path to a key = value config file")->required();

    std::string gen_out;
    int gen_classes = 8;
    int gen_dim = 16;
    int gen_samples = 200;
    double gen_spread = 0.1;
    std::uint64_t gen_seed = 7;
    CLI::App* gen = app.add_subcommand("gen", "Emit a synthetic Gaussian-cluster dataset CSV");
    gen->add_option("--out", gen_out, "Output CSV path")->required();
    gen->add_option("--classes", gen_classes, "Number of classes");
    gen->add_option("--dim", gen_dim, "Feature dimension");
    gen->add_option("--samples", gen_samples, "Samples per class");
    gen->add_option("--spread", gen_spread, "Cluster noise standard deviation");
    gen->add_option("--seed", gen_seed, "Generator seed");

    std::string pi_text;
    CLI::App* bounds = app.add_subcommand("bounds", "Print the theory-bound multipliers");
    bounds->add_option("--pi", pi_text, "Comma-separated task weights summing to 1")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const row::ExperimentConfig config = row::load_config(config_path);
            const row::RunReport report = row::run_experiment(config);
            std::printf("mode %s: final ACA %.4f +/- %.4f over %zu seeds, TIL %.4f\n",
                        row::to_string(config.mode).c_str(), report.final_aca_mean,
                        report.final_aca_std, config.seeds.size(), report.til_mean);
            std::printf("results written to %s\n", config.out.c_str());
        } else if (gen->parsed()) {
            const row::Dataset ds = row::gen_gaussian_clusters(gen_classes, gen_dim, gen_samples,
                                                               gen_spread, gen_seed);
            row::write_csv(ds, gen_out);
            std::printf("wrote %zu samples (%d classes, dim %d) to %s\n",
                        ds.train.size() + ds.test.size(), ds.num_classes, ds.feature_dim,
                        gen_out.c_str());
        } else if (bounds->parsed()) {
            const std::vector<double> pi = parse_pi(pi_text);
            std::printf("seq_multiplier=%.17g\n", row::bound_multiplier_seq(pi));
            std::printf("replay_multiplier=%.17g\n", row::bound_multiplier_replay(pi));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
