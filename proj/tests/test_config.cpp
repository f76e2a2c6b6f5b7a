#include "row/config.hpp"

#include "doctest.h"

#include <stdexcept>

using namespace row;

TEST_CASE("parse_config: empty text yields the documented defaults") {
    ExperimentConfig c = parse_config("");
    CHECK(c.dataset == "synthetic");
    CHECK(c.classes == 8);
    CHECK(c.dim == 16);
    CHECK(c.samples_per_class == 200);
    CHECK(c.spread == 0.1);
    CHECK(c.data_seed == 7);
    CHECK(c.tasks == 4);
    CHECK(c.budget == 200);
    CHECK(c.hidden == std::vector<int>{64, 32});
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    CHECK(c.mode == RunMode::row);
    CHECK(c.out == "results.csv");
    CHECK(c.hyper.lr1 == 0.005);
    CHECK(c.hyper.lr2 == 0.005);
    CHECK(c.hyper.lr3 == 0.005);
    CHECK(c.hyper.epochs1 == 40);
    CHECK(c.hyper.epochs2 == 5);
    CHECK(c.hyper.epochs3 == 10);
    CHECK(c.hyper.batch1 == 64);
    CHECK(c.hyper.batch2 == 32);
    CHECK(c.hyper.batch3 == 32);
    CHECK(c.hyper.momentum == 0.9);
    CHECK(c.hyper.s_max == 400.0);
    CHECK(c.hyper.stats_eps == 1e-6);
    CHECK(c.hyper.md_delta == 1e-6);
    CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("parse_config: keys, comments, and lists") {
    const char* text =
        "# an experiment\n"
        "classes = 12\n"
        "tasks = 3  # inline comment\n"
        "hidden = 10, 20, 30\n"
        "seeds = 4,5\n"
        "mode = row_no_wp\n"
        "spread = 0.25\n"
        "budget = 24\n"
        "lr1 = 0.01\n"
        "momentum = 0.5\n"
        "out = /tmp/x.csv\n";
    ExperimentConfig c = parse_config(text);
    CHECK(c.classes == 12);
    CHECK(c.tasks == 3);
    CHECK(c.hidden == std::vector<int>{10, 20, 30});
    CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
    CHECK(c.mode == RunMode::row_no_wp);
    CHECK(c.spread == 0.25);
    CHECK(c.budget == 24);
    CHECK(c.hyper.lr1 == 0.01);
    CHECK(c.hyper.lr2 == 0.005);  // untouched default
    CHECK(c.hyper.momentum == 0.5);
    CHECK(c.out == "/tmp/x.csv");
    CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("parse_config rejects malformed input naming the key") {
    CHECK_THROWS_WITH_AS(parse_config("budget = -1"), doctest::Contains("budget"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("frobnicate = 3"), doctest::Contains("frobnicate"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("classes = many"), doctest::Contains("classes"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("mode = banana"), doctest::Contains("mode"),
                         std::invalid_argument);
    CHECK_THROWS_AS(parse_config("no equals sign"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("classes ="), std::invalid_argument);
}

TEST_CASE("to_string round-trips every mode") {
    for (const char* name : {"row", "row_no_wp", "row_no_wp_no_md", "hat_only"}) {
        ExperimentConfig c = parse_config(std::string("mode = ") + name);
        CHECK(to_string(c.mode) == name);
    }
}

TEST_CASE("validate_config rejects invariant breaches") {
    auto broken = [](const char* text) {
        ExperimentConfig c = parse_config(text);
        CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    };
    broken("classes = 1");
    broken("classes = 10\ntasks = 4");           // not divisible
    broken("budget = 4");                        // below the class count
    broken("hidden = 0");
    broken("seeds = 1\nepochs1 = 0");
    broken("momentum = 1.0");
    broken("s_max = 0.5");
    broken("lr2 = 0");
    broken("batch3 = 0");
    broken("stats_eps = 0");
    broken("dataset = csv");                     // csv without a path
    broken("samples_per_class = 4");
}
