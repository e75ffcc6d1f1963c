#include "odcsim/cost_model.hpp"

#include <cmath>
#include <string>

namespace odcsim {

void CostModel::validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta > 0.0))
        throw ParamError("cost model requires alpha >= 0, beta >= 0, alpha + beta > 0");
    if (layers < 1) throw ParamError("cost model requires layers >= 1");
}

double compute_cost(const CostModel& model, Tokens s) {
    if (s < 1) throw ParamError("compute_cost requires length >= 1");
    double d = static_cast<double>(s);
    return model.alpha * d * d + model.beta * d;
}

double microbatch_cost(const CostModel& model, std::span<const Tokens> lengths) {
    if (lengths.empty()) throw ParamError("microbatch_cost requires a non-empty microbatch");
    double sum = 0.0;
    for (Tokens s : lengths) sum += compute_cost(model, s);
    return sum;
}

Tokens token_budget(Tokens max_len, double packing_ratio) {
    if (max_len < 1) throw ParamError("token_budget requires max_len >= 1");
    if (!(packing_ratio >= 1.0))
        throw ParamError("packing ratio must be >= 1 so a single max-length sample fits");
    return static_cast<Tokens>(std::floor(static_cast<double>(max_len) * packing_ratio));
}

bool check_oom(std::span<const Tokens> lengths, const MemoryBudget& budget) {
    Tokens sum = 0;
    for (Tokens s : lengths) sum += s;
    return sum > budget.max_tokens_per_microbatch;
}

}  // namespace odcsim
