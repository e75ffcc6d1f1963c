#ifndef ODCSIM_COST_MODEL_HPP
#define ODCSIM_COST_MODEL_HPP

#include <span>

#include "odcsim/types.hpp"

namespace odcsim {

// Per-layer compute cost of a sequence: alpha*s^2 + beta*s. Attention gives
// the quadratic term, MLP-ish work the linear one; the absolute scale is a
// free calibration knob since every reported metric is a ratio.
struct CostModel {
    double alpha = 1.0;
    double beta = 0.0;
    int layers = 1;

    void validate() const;
};

struct MemoryBudget {
    Tokens max_tokens_per_microbatch = 0;
};

// Per-layer cost of a single sequence of length s.
double compute_cost(const CostModel& model, Tokens s);

// Per-layer cost of a packed microbatch. Packing concatenates samples under
// attention masks, so per-sample costs add. Empty lists are rejected; an
// empty padding microbatch is costed as 0 by the callers that create one.
double microbatch_cost(const CostModel& model, std::span<const Tokens> lengths);

// floor(max_len * packing_ratio). Ratio below 1 would make the longest
// sample unschedulable, so it is rejected.
Tokens token_budget(Tokens max_len, double packing_ratio);

// True iff the packed token sum exceeds the budget. Activation memory is
// linear in tokens, so the token sum is the memory proxy.
bool check_oom(std::span<const Tokens> lengths, const MemoryBudget& budget);

}  // namespace odcsim

#endif  // ODCSIM_COST_MODEL_HPP
