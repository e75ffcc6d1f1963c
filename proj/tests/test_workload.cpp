#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "odcsim/workload.hpp"

using namespace odcsim;

namespace {

// Independent nearest-rank quantile pass for cross-checking summarize().
Tokens ref_quantile(std::vector<Tokens> v, double p) {
    std::sort(v.begin(), v.end());
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
    return v[std::max<std::size_t>(rank, 1) - 1];
}

Workload from_lengths(const std::vector<Tokens>& lens) {
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < lens.size(); ++i)
        samples.push_back({static_cast<std::int64_t>(i), lens[i]});
    return Workload(std::move(samples));
}

}  // namespace

TEST_CASE("generate_synthetic degenerate uniform") {
    Workload w = generate_synthetic(UniformDist{5, 5}, 3, 10, 0);
    CHECK(w.lengths() == std::vector<Tokens>{5, 5, 5});
    CHECK(w.max_length() == 5);
}

TEST_CASE("generate_synthetic lognormal is long-tailed") {
    Workload w = generate_synthetic(LognormalDist{8.0, 1.5}, 10000, 65536, 1);
    auto st = summarize(w);
    CHECK(st.count == 10000);
    CHECK(st.max <= 65536);
    CHECK(st.min >= 1);
    CHECK(static_cast<double>(st.p99) / static_cast<double>(st.p50) > 5.0);
    // quantiles agree with an independent second pass
    CHECK(st.p50 == ref_quantile(w.lengths(), 0.50));
    CHECK(st.p90 == ref_quantile(w.lengths(), 0.90));
    CHECK(st.p99 == ref_quantile(w.lengths(), 0.99));
}

TEST_CASE("generate_synthetic pareto clamps at the cap") {
    Workload w = generate_synthetic(ParetoDist{100.0, 1.2}, 1000, 100, 7);
    for (Tokens t : w.lengths()) CHECK(t == 100);
}

TEST_CASE("generate_synthetic is deterministic per seed") {
    Workload a = generate_synthetic(LognormalDist{8.0, 1.5}, 500, 65536, 42);
    Workload b = generate_synthetic(LognormalDist{8.0, 1.5}, 500, 65536, 42);
    Workload c = generate_synthetic(LognormalDist{8.0, 1.5}, 500, 65536, 43);
    CHECK(a.lengths() == b.lengths());
    CHECK(a.lengths() != c.lengths());
}

TEST_CASE("generate_synthetic rejects bad parameters") {
    CHECK_THROWS_AS(generate_synthetic(LognormalDist{8.0, -1.0}, 10, 100, 0), ParamError);
    CHECK_THROWS_AS(generate_synthetic(ParetoDist{0.0, 1.0}, 10, 100, 0), ParamError);
    CHECK_THROWS_AS(generate_synthetic(UniformDist{5, 4}, 10, 100, 0), ParamError);
    CHECK_THROWS_AS(generate_synthetic(UniformDist{5, 9}, 0, 100, 0), ParamError);
    CHECK_THROWS_AS(generate_synthetic(UniformDist{5, 9}, 10, 0, 0), ParamError);
}

TEST_CASE("load_lengths basic file") {
    std::istringstream in("3\n7\n2\n");
    Workload w = load_lengths(in);
    CHECK(w.lengths() == std::vector<Tokens>{3, 7, 2});
    CHECK(w.max_length() == 7);
    CHECK(w.samples()[2].id == 2);
}

TEST_CASE("load_lengths rejects non-positive values") {
    std::istringstream in("0\n");
    CHECK_THROWS_WITH_AS(load_lengths(in), doctest::Contains("line 1"), FormatError);
}

TEST_CASE("load_lengths skips blank lines") {
    std::istringstream in("10\n\n20\n");
    CHECK(load_lengths(in).lengths() == std::vector<Tokens>{10, 20});
}

TEST_CASE("load_lengths hard-errors on garbage with a line number") {
    std::istringstream in("10\nbanana\n20\n");
    CHECK_THROWS_WITH_AS(load_lengths(in), doctest::Contains("line 2"), FormatError);
    std::istringstream empty("\n\n");
    CHECK_THROWS_AS(load_lengths(empty), FormatError);
}

TEST_CASE("scale_lengths examples") {
    CHECK(scale_lengths(from_lengths({8, 100}), 0.5).lengths() == std::vector<Tokens>{4, 50});
    CHECK(scale_lengths(from_lengths({1}), 0.1).lengths() == std::vector<Tokens>{1});
    Workload doubled = scale_lengths(from_lengths({3, 5, 7}), 2.0);
    CHECK(doubled.lengths() == std::vector<Tokens>{6, 10, 14});
    auto st = summarize(doubled);
    CHECK(st.p50 == 2 * ref_quantile({3, 5, 7}, 0.50));
    CHECK(st.p90 == 2 * ref_quantile({3, 5, 7}, 0.90));
}

TEST_CASE("scale_lengths preserves ids and rejects bad ratios") {
    Workload w = from_lengths({10, 20});
    Workload s = scale_lengths(w, 3.0);
    CHECK(s.samples()[0].id == 0);
    CHECK(s.samples()[1].id == 1);
    CHECK_THROWS_AS(scale_lengths(w, 0.0), ParamError);
}

TEST_CASE("scale round-trip stays within one token") {
    // holds for moderate ratios; below 1/2 the back-scale magnifies the
    // half-token rounding past one token
    Workload w = generate_synthetic(LognormalDist{6.0, 1.0}, 300, 4096, 3);
    for (double r : {0.5, 2.0, 1.5, 3.0}) {
        Workload rt = scale_lengths(scale_lengths(w, r), 1.0 / r);
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(std::llabs(rt.samples()[i].length - w.samples()[i].length) <= 1);
        }
    }
}

TEST_CASE("summarize examples") {
    auto st = summarize(from_lengths({10, 20, 30}));
    CHECK(st.mean == doctest::Approx(20.0));
    CHECK(st.p50 == 20);
    CHECK(st.total == 60);

    auto one = summarize(from_lengths({5}));
    CHECK(one.min == 5);
    CHECK(one.max == 5);
    CHECK(one.p99 == 5);
}

TEST_CASE("summarize total is the exact sum") {
    Workload w = generate_synthetic(LognormalDist{8.0, 1.5}, 2000, 65536, 9);
    std::int64_t total = 0;
    for (Tokens t : w.lengths()) total += t;
    CHECK(summarize(w).total == total);
}

TEST_CASE("workload invariants") {
    CHECK_THROWS_AS(Workload({}), ParamError);
    CHECK_THROWS_AS(Workload({{0, 0}}), ParamError);
    CHECK(from_lengths({4, 9, 2}).max_length() == 9);
}

TEST_CASE("dist spec strings parse and format") {
    DistSpec d = parse_dist_spec("lognormal:mu=8,sigma=1.5");
    CHECK(std::get<LognormalDist>(d).mu == doctest::Approx(8.0));
    CHECK(format_dist_spec(d) == "lognormal:mu=8,sigma=1.5");
    CHECK(std::get<ParetoDist>(parse_dist_spec("pareto:scale=100,shape=1.2")).shape ==
          doctest::Approx(1.2));
    CHECK(std::get<UniformDist>(parse_dist_spec("uniform:lo=5,hi=9")).hi == 9);
    CHECK_THROWS_AS(parse_dist_spec("zipf:s=1"), FormatError);
    CHECK_THROWS_AS(parse_dist_spec("lognormal:mu=8"), FormatError);
    CHECK_THROWS_AS(parse_dist_spec("uniform:lo=9,hi=5"), ParamError);
}
