#include <doctest.h>

#include <algorithm>
#include <random>

#include "odcsim/cost_model.hpp"

using namespace odcsim;

TEST_CASE("compute_cost evaluates alpha*s^2 + beta*s") {
    CHECK(compute_cost({1, 0, 1}, 4) == 16.0);
    CHECK(compute_cost({0, 1, 1}, 4) == 4.0);
    CHECK(compute_cost({1, 100, 1}, 1000) == 1'100'000.0);
}

TEST_CASE("compute_cost is monotone in length") {
    CostModel m{2, 3, 1};
    double prev = 0.0;
    for (Tokens s = 1; s <= 100; ++s) {
        double c = compute_cost(m, s);
        CHECK(c > prev);
        prev = c;
    }
}

TEST_CASE("compute_cost superadditive under a quadratic term") {
    // the formal seed of "packing cannot fully equalize compute"
    CostModel m{1, 7, 1};
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        Tokens a = 1 + static_cast<Tokens>(rng() % 5000);
        Tokens b = 1 + static_cast<Tokens>(rng() % 5000);
        CHECK(compute_cost(m, a + b) >= compute_cost(m, a) + compute_cost(m, b));
    }
}

TEST_CASE("microbatch_cost examples") {
    std::vector<Tokens> ab{3, 4};
    CHECK(microbatch_cost({1, 0, 1}, ab) == 25.0);
    std::vector<Tokens> single{7};
    CHECK(microbatch_cost({1, 0, 1}, single) == 49.0);
    std::vector<Tokens> three{2, 2, 2};
    CHECK(microbatch_cost({2, 1, 1}, three) == 30.0);
    CHECK_THROWS_AS(microbatch_cost({1, 0, 1}, std::vector<Tokens>{}), ParamError);
}

TEST_CASE("microbatch_cost ignores order") {
    CostModel m{3, 2, 1};
    std::vector<Tokens> lens{5, 9, 2, 14, 7};
    double base = microbatch_cost(m, lens);
    std::sort(lens.begin(), lens.end());
    do {
        CHECK(microbatch_cost(m, lens) == base);
    } while (std::next_permutation(lens.begin(), lens.end()));
}

TEST_CASE("token_budget") {
    CHECK(token_budget(16384, 2.0) == 32768);  // the 16K * 2 -> 32K worked case
    CHECK(token_budget(100, 1.0) == 100);
    CHECK(token_budget(65536, 1.5) == 98304);
    CHECK_THROWS_AS(token_budget(100, 0.5), ParamError);
    CHECK_THROWS_AS(token_budget(0, 2.0), ParamError);
}

TEST_CASE("check_oom boundary is inclusive") {
    MemoryBudget b{10};
    CHECK(check_oom(std::vector<Tokens>{9, 3}, b));
    CHECK_FALSE(check_oom(std::vector<Tokens>{9}, b));
    CHECK_FALSE(check_oom(std::vector<Tokens>{4, 3, 3}, b));
}

TEST_CASE("check_oom never flips back when a sample is added") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        MemoryBudget b{static_cast<Tokens>(1 + rng() % 200)};
        std::vector<Tokens> lens;
        bool seen_oom = false;
        for (int j = 0; j < 20; ++j) {
            lens.push_back(1 + static_cast<Tokens>(rng() % 50));
            bool oom = check_oom(lens, b);
            if (seen_oom) CHECK(oom);
            seen_oom = oom;
        }
    }
}

TEST_CASE("cost model validation") {
    CHECK_THROWS_AS((CostModel{0, 0, 1}.validate()), ParamError);
    CHECK_THROWS_AS((CostModel{-1, 2, 1}.validate()), ParamError);
    CHECK_THROWS_AS((CostModel{1, 0, 0}.validate()), ParamError);
    CHECK_NOTHROW((CostModel{0, 1, 3}.validate()));
    CHECK_THROWS_AS(compute_cost({1, 0, 1}, 0), ParamError);
}
