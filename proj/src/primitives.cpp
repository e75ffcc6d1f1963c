#include "odcsim/primitives.hpp"

#include <cmath>

namespace odcsim {

namespace {

std::vector<ClientScript<std::int64_t>> random_int_scripts(int clients, std::int64_t elems,
                                                           std::mt19937_64& rng) {
    std::vector<ClientScript<std::int64_t>> scripts(static_cast<std::size_t>(clients));
    for (auto& sc : scripts) {
        const int pushes = 1 + static_cast<int>(rng() % 8);
        for (int p = 0; p < pushes; ++p) {
            std::vector<std::int64_t> grad(static_cast<std::size_t>(elems));
            for (auto& x : grad) x = static_cast<std::int64_t>(rng() % 2001) - 1000;
            auto weight = static_cast<std::int64_t>(rng() % 5);
            sc.pushes.emplace_back(std::move(grad), weight);
        }
    }
    return scripts;
}

}  // namespace

PrimitivesVerifyReport verify_primitives(int clients, int minibatches, std::uint64_t seed) {
    if (clients < 1 || minibatches < 1)
        throw ParamError("verify-primitives needs clients >= 1 and minibatches >= 1");
    PrimitivesVerifyReport report;
    std::mt19937_64 rng(seed);
    for (int mb = 0; mb < minibatches; ++mb) {
        const std::int64_t elems = 8 + static_cast<std::int64_t>(rng() % 57);
        auto scripts = random_int_scripts(clients, elems, rng);

        std::vector<std::pair<std::vector<std::int64_t>, std::int64_t>> flat;
        for (const auto& sc : scripts)
            flat.insert(flat.end(), sc.pushes.begin(), sc.pushes.end());
        const auto expected = collective_reduce_reference(flat);

        auto result = run_schedule(clients, elems, scripts, rng());
        report.max_staged_elems = std::max(report.max_staged_elems, result.max_staged_elems);
        const std::int64_t slot = (elems + clients - 1) / clients;
        const bool ok = result.concatenated() == expected &&
                        result.max_staged_elems <= slot * clients;
        if (ok) ++report.passed;
        else ++report.failed;
    }
    return report;
}

}  // namespace odcsim
